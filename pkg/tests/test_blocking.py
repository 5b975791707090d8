import itertools

import numpy as np
import pytest

from mixreg.mixing import MixingProfile, iid_profile, markov_profile
from mixreg.processes import IIDGaussian, two_state_flip
from mixreg.blocking import (
    BlockPartition,
    block_sums,
    decoupled_resample,
    decoupling_gap_bound,
    make_partition,
    uniform_partition,
)


class TestMakePartition:
    def test_remainder_to_front(self):
        part = make_partition(10, 2)
        assert part.lengths == (3, 3, 2, 2)
        np.testing.assert_array_equal(part.odd_union, [0, 1, 2, 6, 7])
        np.testing.assert_array_equal(part.even_union, [3, 4, 5, 8, 9])

    def test_exact_division(self):
        assert make_partition(8, 2).lengths == (2, 2, 2, 2)

    def test_two_blocks(self):
        assert make_partition(5, 1).lengths == (3, 2)

    def test_too_many_blocks(self):
        with pytest.raises(ValueError):
            make_partition(5, 3)

    def test_partition_invariants_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            n = int(rng.integers(2, 500))
            m = int(rng.integers(1, n // 2 + 1))
            part = make_partition(n, m)
            assert part.n == n and part.m == m
            assert len(part.lengths) == 2 * m
            # consecutive, disjoint, covering, monotone
            flat = np.concatenate([np.arange(a, b) for a, b in part.blocks])
            np.testing.assert_array_equal(flat, np.arange(n))
            assert len(part.odd_union) + len(part.even_union) == n
            assert max(part.lengths) - min(part.lengths) <= 1
            assert part.a_max == max(part.lengths)

    def test_uniform_partition_exact(self):
        part = uniform_partition(96, 8)
        assert set(part.lengths) == {8}
        assert part.n == 96

    def test_invalid_lengths(self):
        with pytest.raises(ValueError):
            BlockPartition((3, 0, 2, 1))
        with pytest.raises(ValueError):
            BlockPartition((3, 2, 1))  # odd count


class TestBlockSums:
    def test_ones_give_lengths(self):
        part = make_partition(10, 2)
        np.testing.assert_allclose(block_sums(np.ones(10), part), [3, 3, 2, 2])

    def test_indicator_recovers_membership(self):
        part = make_partition(12, 3)
        for j in range(12):
            e = np.zeros(12)
            e[j] = 1.0
            sums = block_sums(e, part)
            hot = int(np.argmax(sums))
            a, b = part.blocks[hot]
            assert a <= j < b and sums.sum() == 1.0

    def test_telescoping(self):
        rng = np.random.default_rng(1)
        values = rng.standard_normal((37, 3))
        part = make_partition(37, 5)
        np.testing.assert_allclose(block_sums(values, part).sum(axis=0),
                                   values.sum(axis=0), atol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(2)
        part = make_partition(20, 4)
        # Integer-valued inputs: linearity is exact (no rounding).
        u_int = rng.integers(-50, 50, 20).astype(float)
        v_int = rng.integers(-50, 50, 20).astype(float)
        np.testing.assert_array_equal(block_sums(u_int + v_int, part),
                                      block_sums(u_int, part) + block_sums(v_int, part))
        u = rng.standard_normal(20)
        v = rng.standard_normal(20)
        np.testing.assert_allclose(block_sums(u + v, part),
                                   block_sums(u, part) + block_sums(v, part), atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            block_sums(np.ones(9), make_partition(10, 2))


class TestDecoupledResample:
    def test_iid_law_preserved(self):
        spec = IIDGaussian(covariate_dim=1)
        part = make_partition(2000, 5)
        traj = decoupled_resample(spec, part, 3)
        assert len(traj) == 2000
        assert traj.xs.mean() == pytest.approx(0.0, abs=0.1)
        assert traj.xs.var() == pytest.approx(1.0, abs=0.1)

    def test_deterministic(self):
        spec = two_state_flip(0.3)
        part = make_partition(32, 4)
        a = decoupled_resample(spec, part, 9)
        b = decoupled_resample(spec, part, 9)
        assert np.array_equal(a.xs, b.xs)

    def test_cross_block_independence_and_within_block_law(self):
        spec = two_state_flip(0.3)
        part = make_partition(24, 3)  # 6 blocks of 4
        boundary_pairs = []
        within_pairs = []
        for rep in range(20_000 // 5):
            traj = decoupled_resample(spec, part, rep)
            x = traj.xs.ravel()
            for a, b in part.blocks[1:]:
                boundary_pairs.append((x[a - 1], x[a]))
            for a, b in part.blocks:
                within_pairs.append((x[a], x[a + 1]))
        boundary = np.array(boundary_pairs)
        corr_cross = np.corrcoef(boundary[:, 0], boundary[:, 1])[0, 1]
        assert abs(corr_cross) < 0.02
        within = np.array(within_pairs)
        corr_within = np.corrcoef(within[:, 0], within[:, 1])[0, 1]
        # Coupled chain lag-1 correlation is 1 - 2q = 0.4.
        assert corr_within == pytest.approx(0.4, abs=0.02)

    def test_unsupported_spec(self):
        class Weird:
            pass
        with pytest.raises(AttributeError):
            decoupled_resample(Weird(), make_partition(4, 1), 0)


class TestDecouplingGapBound:
    def test_iid_zero(self):
        part = make_partition(40, 4)
        assert decoupling_gap_bound(iid_profile(part.lengths), part) == 0.0

    def test_uniform_blocks(self):
        part = make_partition(48, 3)  # 6 blocks of 8
        profile = MixingProfile({8: 0.05})
        assert decoupling_gap_bound(profile, part) == pytest.approx(4 * 0.05)
        assert decoupling_gap_bound(profile, part, form="all_blocks") == pytest.approx(6 * 0.05)

    def test_markov_example(self):
        part = make_partition(8, 2)  # 4 blocks of 2
        profile = markov_profile(two_state_flip(0.3), [2])
        assert decoupling_gap_bound(profile, part) == pytest.approx(2 * 0.16 / 2, abs=1e-12)

    def test_missing_gap(self):
        part = make_partition(10, 2)
        with pytest.raises(ValueError):
            decoupling_gap_bound(MixingProfile({7: 0.1}), part)


class TestDecouplingBudgetExact:
    """Exact check of the decoupling budget for a small Markov chain, with
    both expectations computed by full path enumeration."""

    def enumerate_expectations(self, spec, part, fn):
        k = spec.n_states
        n = part.n
        pi = spec.stationary
        p = spec.transition
        coupled = 0.0
        for path in itertools.product(range(k), repeat=n):
            prob = pi[path[0]]
            for a, b in zip(path[:-1], path[1:]):
                prob *= p[a, b]
            coupled += prob * fn(path)
        # Decoupled law: product over blocks of exact block marginals.
        block_laws = []
        for start, stop in part.blocks:
            law = {}
            for path in itertools.product(range(k), repeat=stop):
                prob = pi[path[0]]
                for a, b in zip(path[:-1], path[1:]):
                    prob *= p[a, b]
                key = path[start:stop]
                law[key] = law.get(key, 0.0) + prob
            block_laws.append(law)
        decoupled = 0.0
        for combo in itertools.product(*[law.items() for law in block_laws]):
            path = tuple(itertools.chain.from_iterable(seg for seg, _ in combo))
            prob = 1.0
            for _, pr in combo:
                prob *= pr
            decoupled += prob * fn(path)
        return coupled, decoupled

    def test_exact_budget_small_chain(self):
        spec = two_state_flip(0.3)
        part = make_partition(6, 1)  # two blocks of 3
        odd_positions = part.odd_union

        def odd_all_equal(path):
            vals = [path[i] for i in odd_positions]
            return 1.0 if len(set(vals)) == 1 else 0.0

        coupled, decoupled = self.enumerate_expectations(spec, part, odd_all_equal)
        profile = markov_profile(spec, set(part.lengths))
        budget = decoupling_gap_bound(profile, part)
        assert abs(coupled - decoupled) <= budget + 1e-12

    def test_exact_budget_interior_blocks(self):
        spec = two_state_flip(0.2)
        part = make_partition(8, 2)  # four blocks of 2

        def fraction_positive_odd(path):
            vals = [path[i] for i in part.odd_union]
            return sum(vals) / len(vals)

        coupled, decoupled = self.enumerate_expectations(spec, part, fraction_positive_odd)
        profile = markov_profile(spec, set(part.lengths))
        budget = decoupling_gap_bound(profile, part)
        assert abs(coupled - decoupled) <= budget + 1e-12

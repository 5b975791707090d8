"""Mixing coefficients: exact values for Markov chains, KL-route bounds for
Gaussian AR processes, and the sums that enter burn-in conditions."""

from mixreg import (
    GaussianAR,
    beta_ar_kl_bound,
    beta_markov_exact,
    kl_gaussian_1d,
    make_partition,
    markov_profile,
    mixing_sum,
    profile_from_spec,
    two_state_flip,
)

# A two-state chain that flips with probability q mixes geometrically:
# beta(i) = |1 - 2q|^i / 2, and the exact computation reproduces it.
chain = two_state_flip(0.3)
for gap in (1, 2, 3, 5, 10):
    print(f"beta({gap}) =", beta_markov_exact(chain.transition, gap))

# For Gaussian AR processes the coefficient is bounded through the expected
# KL divergence between the conditional and stationary laws, converted with
# Pinsker's inequality.
print("\nscalar Gaussian KL(N(1,1) || N(0,1)) =", kl_gaussian_1d(1, 1, 0, 1))

ar = GaussianAR((0.5, 0.2), covariate_dim=1)
for gap in (1, 2, 5, 10, 20):
    print(f"AR beta bound({gap}) =", round(beta_ar_kl_bound(ar, None, gap), 6))

# Profiles collect coefficients per gap and feed the burn-in sums: the
# mixing burn-in charges beta over the interior blocks of a partition.
partition = make_partition(200, 10)  # 20 blocks of 10
profile = profile_from_spec(ar, sorted(set(partition.lengths)))
print("\ninterior mixing sum:", mixing_sum(profile, partition))

exact = markov_profile(chain, range(1, 11))
exact.to_csv("markov_mixing.csv")
print("wrote markov_mixing.csv (columns gap, beta)")

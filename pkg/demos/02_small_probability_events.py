"""
How much weight do rare events carry?
=====================================

A Bernoulli pair with a rare event of probability ``p`` and a generator
that is slightly off, ``q = p + d``.  At each objective's optimal
discriminator we measure the share of the objective carried by the rare
event.  The exponential objective gives it more weight than the KL and
least-squares objectives whenever ``q != p``.
"""

from mimgan import theory

small = theory.EventPartition.from_indices(2, [0])

print(f"{'p':>7} {'d/p':>6} {'MIM':>10} {'KL':>10} {'LS':>10} {'MIM approx':>11}")
for p in (0.001, 0.01, 0.05):
    for rel in (-0.2, 0.0, 0.2):
        d = rel * p
        pair = theory.DiscretePair.bernoulli(p, p + d)
        shares = [theory.small_prob_proportion_exact(k, pair, small) for k in ("mim", "original", "lsgan")]
        approx = theory.small_prob_proportion_approx("mim", theory.PerturbedBernoulli.from_shift(p, d))
        print(f"{p:7.3f} {rel:6.2f} " + " ".join(f"{s:10.7f}" for s in shares) + f" {approx:11.7f}")

# The second-order expansion error shrinks like d^3 / p^2.
print()
for d in (2e-3, 1e-3, 5e-4):
    exact = theory.small_prob_proportion_exact("mim", theory.DiscretePair.bernoulli(0.01, 0.01 + d), small)
    approx = theory.small_prob_proportion_approx("mim", theory.PerturbedBernoulli.from_shift(0.01, d))
    print(f"d={d:.0e}  |approx - exact| = {abs(approx - exact):.2e}")

# When a mode disappears (Pg -> 0) the MIM and LS generators lose value,
# while the KL contribution quietly goes to zero: no penalty.
grid, mim = theory.mode_drop_penalty("mim", 0.5)
_, kl = theory.mode_drop_penalty("original", 0.5)
print()
for g, a, b in zip(grid, mim, kl):
    print(f"Pg={g:.0e}  MIM {a:.3e}  KL {b:+.3e}")

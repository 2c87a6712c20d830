"""Sweep the insensitive-band half-width and watch the model get sparser.

Samples strictly inside the band contribute nothing to the decision function,
so widening epsilon removes own-class support vectors while the other class's
margin constraints are barely affected.
"""

from mtnpsvm import Hyperparams, count_support_vectors, fit, synth_blobs

dataset = synth_blobs(T=3, n_per_class=40, d=2, seed=2)

print(f"{'epsilon':>8} {'p1 own':>7} {'p1 other':>9} {'p2 own':>7} {'p2 other':>9}")
for eps in (0.1, 0.2, 0.3, 0.4, 0.5):
    model = fit(dataset, Hyperparams(epsilon=eps))
    sv = count_support_vectors(model)
    print(f"{eps:>8.1f} {sv.first_own:>7} {sv.first_other:>9} "
          f"{sv.second_own:>7} {sv.second_other:>9}")

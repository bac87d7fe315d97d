"""Random lattices and the averaging estimates.

A lattice draw dilates a Haar-rotated copy of Z^d by v ~ U(1, 2).  Averaged
over draws, sums of a nonnegative function over nonzero lattice points are
comparable to its integral outside a fixed ball; the expected number and
order of lattice points inside a set scale with its measure and with
min(cover functional, mean width) respectively.
"""

import numpy as np

from ulat import (
    AnnulusIndicator,
    Ball,
    EuclideanSet,
    GaussianProfile,
    check_lattice_averaging,
    estimate_card,
    estimate_order,
    polar_constant,
)

print("polar identity constants:", [round(polar_constant(d), 6) for d in (1, 2, 3)])

print()
print("averaging check, annulus indicator 1 <= |x| <= 3 in the plane")
rep_a, rep_b = check_lattice_averaging(AnnulusIndicator(2, 1.0, 3.0), trials=4000, seed=0)
print(f"  outer-dilation sum: {rep_a.estimate:8.3f}  reference integral: {rep_a.bound:8.3f}"
      f"  ratio {rep_a.extras['ratio']:.3f}")
print(f"  inner-dilation sum: {rep_b.estimate:8.3f}  reference integral: {rep_b.bound:8.3f}"
      f"  ratio {rep_b.extras['ratio']:.3f}")

print()
print("averaging check, Gaussian profile")
rep_a, rep_b = check_lattice_averaging(GaussianProfile(2, 1.0), trials=4000, seed=1)
print(f"  ratios: {rep_a.extras['ratio']:.3f} and {rep_b.extras['ratio']:.3f}")

print()
print("point count and order for discs of growing radius")
print("  R    E[card-1]   /area     E[ord-d]   /nu")
for radius in (2.0, 4.0, 8.0):
    sigma = EuclideanSet(2, [Ball([0.0, 0.0], radius)])
    card = estimate_card(sigma, trials=1500, seed=2)
    order = estimate_order(sigma, trials=1500, seed=2)
    print(
        f"  {radius:3.0f}  {card.estimate:9.2f}  {card.extras['ratio_to_measure']:.4f}"
        f"   {order.estimate:9.2f}  {order.extras['ratio_to_nu']:.4f}"
    )
print("  counts scale with the area, orders with the radius.")

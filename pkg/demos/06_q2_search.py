"""Randomized coefficient perturbations and the displacement discriminant.

Jitter every monomial coefficient of CK(3) uniformly within a small radius
(closeness in the coefficients topology), fit the monic cubic structure
factor of each perturbed displacement map, and record the discriminant and
the Sturm count of its real roots. A negative discriminant for the odd-degree
factor certifies a perturbation whose cycle census near the original orbit
collapsed to a single hyperbolic cycle; a positive one certifies three.
"""
from cyclelab import cycles as cy
from cyclelab.discriminant import q2_search
from cyclelab.field import ck_system

X = ck_system(3)
section = cy.section_for_field(X, (1.0, 0.0))

report = q2_search(X, section, d=3, radius=1e-3, n_samples=24, seed=2024)
print(f"{report.n_samples} samples at radius {report.radius}, seed {report.seed}")
print(f"root-count histogram: {report.histogram}")
print(f"most negative discriminant: {report.best_phi:.3e} "
      f"(sample {report.best_index})")
neg = sum(1 for s in report.samples if s.phi is not None and s.phi < 0)
print(f"negative-discriminant fraction: {neg}/{report.n_samples}")
report.to_csv("q2_census.csv")
print("wrote q2_census.csv")

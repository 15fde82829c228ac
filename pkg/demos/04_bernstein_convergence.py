"""Convergence of tensor Bernstein fits together with all derivatives.

For smooth targets the fit converges uniformly with every partial
derivative up to the requested order; the error-versus-degree table makes
the rate visible, and the diagonal degree search inverts it: given a
tolerance, find the smallest degree meeting it.
"""
from cyclelab.bernstein import (bernstein_fit, cr_error, error_table_csv,
                                min_degree_for_tolerance)
from cyclelab.registry import canonical_function

BOX = (-2.0, 2.0, -2.0, 2.0)

for name in ("paraboloid", "gauss", "wave"):
    f = canonical_function(name, BOX)
    print(f"{name} on {BOX}:")
    rows = []
    for m in (10, 20, 40, 80, 160):
        errs = cr_error(f, bernstein_fit(f, m, m), r=2)
        rows.append((m, m, errs))
        c0 = errs[(0, 0)]
        c1 = max(errs[(1, 0)], errs[(0, 1)])
        c2 = max(errs[(2, 0)], errs[(1, 1)], errs[(0, 2)])
        print(f"  m = {m:3d}:  C0 {c0:.5f}   C1 {c1:.5f}   C2 {c2:.5f}")
    error_table_csv(rows, f"bernstein_errors_{name}.csv")
    print(f"  wrote bernstein_errors_{name}.csv")

# the paraboloid has the closed-form error (4-x^2)/m + (4-y^2)/n, so the
# degree needed for a C0 tolerance eps is exactly the first m > 8/eps
f = canonical_function("paraboloid", BOX)
for eps in (0.5, 0.25, 0.1):
    m, n = min_degree_for_tolerance(f, BOX, r=0, eps=eps, cap=128)
    print(f"paraboloid: smallest degree with C0 error < {eps}: m = n = {m} "
          f"(analytic bound m > {8 / eps:.0f})")

"""Univariate discriminants, Sturm root counts, and displacement-map fits.

The discriminant convention is fixed throughout as

    Delta(p) = (-1)^(d(d-1)/2) * Res(p, p')

with the resultant computed as a Sylvester-matrix determinant (LU with
partial pivoting). Under this convention the sign law for squarefree real
polynomials is

    sign(Delta) = (-1)^((d - r)/2),   r = number of distinct real roots,

i.e. (d - r)/2 counts complex-conjugate pairs. Note that some references
state the odd-degree congruence rules for the unsigned resultant instead;
with the present convention the admissible counts for odd d are r = d (mod 4)
when Delta > 0 and r = d - 2 (mod 4) when Delta < 0 (witness: x^3 - x has
Delta = 4 and three real roots). The sign law here is validated against the
Sturm census on large random sweeps.

The monic degree-d polynomial fitted to displacement samples plays the role
of the cycle-structure factor of the displacement map: dividing the
least-squares fit by its leading coefficient removes the strictly positive
smooth unit, and its roots track the section fixed points.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import cycles as _cycles
from . import flow as _flow


class DegreeTooSmall(Exception):
    """Discriminant needs degree >= 2."""


class ZeroDiscriminant(Exception):
    """Congruence law applies only to squarefree polynomials (Delta != 0)."""


class LeadingCoefficientVanishes(Exception):
    """Fit leading coefficient not significant; wrong degree or window."""


@dataclass(frozen=True)
class MonicPoly:
    """x^d + a_{d-1} x^{d-1} + ... + a_0; coefficients exclude the leading 1."""

    coeffs: tuple[float, ...]  # (a_0, ..., a_{d-1})

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if len(c) < 1:
            raise ValueError("degree must be >= 1")
        if not all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return len(self.coeffs)

    def full_coeffs(self) -> np.ndarray:
        """Ascending coefficients including the leading 1."""
        return np.array(list(self.coeffs) + [1.0])

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.full_coeffs())

    def derivative_coeffs(self) -> np.ndarray:
        c = self.full_coeffs()
        return c[1:] * np.arange(1, len(c))

    def __repr__(self):
        d = self.degree
        terms = [f"x^{d}"] + [
            f"{a:+g}*x^{j}" for j, a in sorted(enumerate(self.coeffs), reverse=True)
            if a != 0.0
        ]
        return "MonicPoly<" + " ".join(terms) + ">"


def _sylvester(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Sylvester matrix of polynomials given by ascending coefficients."""
    dp, dq = len(p) - 1, len(q) - 1
    n = dp + dq
    S = np.zeros((n, n))
    for row in range(dq):
        S[row, row: row + dp + 1] = p[::-1]
    for row in range(dp):
        S[dq + row, row: row + dq + 1] = q[::-1]
    return S


def resultant(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.linalg.det(_sylvester(p, q)))


def discriminant(p: MonicPoly) -> float:
    """Delta = (-1)^(d(d-1)/2) Res(p, p'); for monic p no leading division."""
    d = p.degree
    if d < 2:
        raise DegreeTooSmall("discriminant needs degree >= 2")
    res = resultant(p.full_coeffs(), p.derivative_coeffs())
    sign = -1.0 if (d * (d - 1) // 2) % 2 else 1.0
    return sign * res


def _sturm_chain(p: MonicPoly) -> list[np.ndarray]:
    """Euclidean remainder chain; remainders normalized to unit max coefficient
    (positive scaling preserves sign counts)."""
    chain = [p.full_coeffs()]
    dp = p.derivative_coeffs()
    if np.max(np.abs(dp)) > 0:
        chain.append(dp / np.max(np.abs(dp)))
    eps = 1e-13
    while len(chain[-1]) > 1:
        a, b = chain[-2], chain[-1]
        scale = max(np.max(np.abs(a)), 1.0)
        _, rem = np.polynomial.polynomial.polydiv(a, b)
        # trim numerically-zero leading coefficients
        while len(rem) > 1 and abs(rem[-1]) < eps * scale:
            rem = rem[:-1]
        if len(rem) == 1 and abs(rem[0]) < eps * scale:
            break  # nonconstant gcd: p has a repeated root
        m = np.max(np.abs(rem))
        chain.append(-rem / m)
    return chain


def _sign_variations(values) -> int:
    signs = [s for s in np.sign(values) if s != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a * b < 0)


def real_root_census(p: MonicPoly) -> int:
    """Number of distinct real roots via the Sturm chain at -inf / +inf.

    Signs at the infinities come from leading coefficients exactly; multiple
    roots are counted once (the chain terminates at the gcd).
    """
    chain = _sturm_chain(p)
    at_pinf = [c[-1] for c in chain]
    at_minf = [c[-1] * (-1.0) ** (len(c) - 1) for c in chain]
    return _sign_variations(at_minf) - _sign_variations(at_pinf)


def has_repeated_root(p: MonicPoly, tol: float = 1e-10) -> bool:
    """Nonconstant gcd(p, p'), probed at the critical points.

    p shares a root with p' exactly when p vanishes at some zero of p', so
    the flag is min over critical points c of |p(c)| relative to the local
    coefficient scale. This is numerically much better conditioned than
    thresholding the Euclidean remainder cascade (a float-rounded double
    root splits into simple roots ~ sqrt(eps) apart, which still registers
    here: |p(c)| ~ separation^2).
    """
    crit = np.roots(p.derivative_coeffs()[::-1])
    crit = crit[np.abs(crit.imag) < 1e-8].real
    if crit.size == 0:
        return False
    scale = float(np.max(np.abs(p.full_coeffs())))
    local = scale * (1.0 + np.abs(crit)) ** p.degree
    return bool(np.any(np.abs(p(crit)) < tol * local))


def root_count_congruence(d: int, delta_sign: int) -> tuple[int, ...]:
    """Admissible distinct-real-root counts for a squarefree degree-d poly.

    Implements the oracle-validated law sign(Delta) = (-1)^((d-r)/2): the
    returned counts are those r in {d, d-2, ...} whose complex-pair count
    matches the sign. delta_sign must be +1 or -1 (a vanishing discriminant
    means a repeated root, where the law does not apply).
    """
    if delta_sign not in (+1, -1):
        raise ZeroDiscriminant("delta_sign must be +1 or -1 (squarefree case only)")
    if d < 1:
        raise ValueError("degree must be >= 1")
    out = []
    r = d
    while r >= 0:
        pairs = (d - r) // 2
        if (-1) ** pairs == delta_sign:
            out.append(r)
        r -= 2
    return tuple(out)


def fit_displacement_poly(samples, degree: int, fit_degree: int | None = None) -> MonicPoly:
    """Monic degree-d polynomial extracted from displacement samples (xi, d(xi)).

    The displacement map factors as a strictly positive smooth unit times the
    monic degree-d structure polynomial, so the samples carry real content
    above order d. The least-squares model therefore fits degree
    fit_degree = d + 3 by default (guard coefficients absorb the unit's
    tail instead of polluting the residual) and the monic normalization,
    dividing the orders <= d by the degree-d coefficient, is the surrogate
    for removing the unit. The result is invariant under positive rescaling
    of the samples. The degree-d coefficient must exceed 1e3 times the fit
    residual, else LeadingCoefficientVanishes (window too small, or the
    assumed degree is wrong and the multiplicity estimate should be redone).
    """
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("samples must be (xi, value) pairs")
    if pts.shape[0] < 4 * degree + 1:
        raise ValueError(f"need at least {4 * degree + 1} samples for degree {degree}")
    if fit_degree is None:
        fit_degree = degree + 3
    fit_degree = min(max(fit_degree, degree), pts.shape[0] - 1)
    xi, dv = pts[:, 0], pts[:, 1]
    h = float(np.max(np.abs(xi)))
    if h == 0:
        raise ValueError("degenerate sample window")
    V = np.vander(xi / h, fit_degree + 1, increasing=True)
    scaled, *_ = np.linalg.lstsq(V, dv, rcond=None)
    residual = float(np.sqrt(np.mean((V @ scaled - dv) ** 2)))
    lead_scaled = scaled[degree]
    if abs(lead_scaled) <= 1e3 * residual or lead_scaled == 0.0:
        raise LeadingCoefficientVanishes(
            f"degree-{degree} coefficient {lead_scaled:.3g} below 1e3 * residual "
            f"{residual:.3g}"
        )
    coef = scaled[: degree + 1] / h ** np.arange(degree + 1)
    monic = coef / coef[degree]
    return MonicPoly(tuple(monic[:degree]))


def fit_roots(samples, degree: int, fit_degree: int | None = None) -> np.ndarray:
    """Real zeros of the guarded displacement fit inside the sample window.

    The monic factor from fit_displacement_poly has faithful root structure
    but its root positions absorb the unit's variation over the window; the
    zeros of the full guarded fit do not, so cycle locations are read off
    here (and cross-checked against the census).
    """
    pts = np.asarray(list(samples), dtype=float)
    if fit_degree is None:
        fit_degree = degree + 3
    fit_degree = min(max(fit_degree, degree), pts.shape[0] - 1)
    xi, dv = pts[:, 0], pts[:, 1]
    h = float(np.max(np.abs(xi)))
    V = np.vander(xi / h, fit_degree + 1, increasing=True)
    scaled, *_ = np.linalg.lstsq(V, dv, rcond=None)
    roots = np.roots(scaled[::-1])
    real = roots[np.abs(roots.imag) < 1e-8].real * h
    return np.sort(real[np.abs(real) <= h])


def displacement_samples(X, section, d: int, window: float, center: float = 0.0,
                         n: int | None = None, tol=_flow.DEFAULT_TOL,
                         skip_failures: bool = False):
    """Displacement sampled at Chebyshev nodes spanning [center-w, center+w].

    With skip_failures=True, nodes whose orbit escapes before returning are
    dropped (families that remove the cycle blow up on one side); the fit
    machinery downstream checks it still has enough points.
    """
    n = n or (4 * d + 1)
    if skip_failures:
        n = max(n, 6 * d + 3)
    nodes = center + window * np.cos(np.pi * np.arange(n) / (n - 1))
    out = []
    for xi in nodes:
        try:
            out.append((xi, _cycles.displacement(X, section, xi, tol=tol)))
        except (_flow.NoCrossing, _flow.LeftNeighborhood, _flow.Divergence,
                _flow.StepUnderflow):
            if not skip_failures:
                raise
    return out


def phi(X, section, d: int, window: float = 0.025, center: float = 0.0,
        tol=_flow.DEFAULT_TOL) -> float:
    """Discriminant of the monic degree-d displacement fit near the cycle."""
    samples = displacement_samples(X, section, d, window, center, tol=tol)
    return discriminant(fit_displacement_poly(samples, d))


@dataclass
class Q2Sample:
    index: int
    phi: float | None
    n_real_roots: int | None
    boundary: bool
    error: str | None = None


@dataclass
class Q2Report:
    radius: float
    n_samples: int
    seed: int
    samples: list[Q2Sample]
    best_index: int | None
    best_phi: float | None
    histogram: dict[int, int]

    def to_csv(self, path):
        lines = ["seed_index,phi,n_real_roots,radius"]
        for s in self.samples:
            phi_s = "" if s.phi is None else repr(s.phi)
            nroots = "" if s.n_real_roots is None else str(s.n_real_roots)
            lines.append(f"{s.index},{phi_s},{nroots},{self.radius!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _perturb_coeffs(X, rng, radius):
    from .field import PolyVectorField
    from .poly2 import Poly2

    def jitter(p):
        deg = int(max(p.degree, 0))
        out = dict(p.coeffs)
        for i in range(deg + 1):
            for j in range(deg + 1 - i):
                out[(i, j)] = out.get((i, j), 0.0) + rng.uniform(-radius, radius)
        return Poly2.monomial(out)

    return PolyVectorField(jitter(X.P), jitter(X.Q))


def q2_search(X, section, d: int, radius: float, n_samples: int, seed: int,
              window: float = 0.025, boundary_tol: float = 1e-9,
              tol=_flow.DEFAULT_TOL) -> Q2Report:
    """Randomized search for a perturbation with negative displacement-fit
    discriminant.

    Draws n_samples fields whose monomial coefficients (all exponent pairs up
    to the component degree, both components) are jittered uniformly within
    the given radius -- closeness in the coefficients topology -- computes the
    degree-d fit discriminant for each, and reports the minimum together with
    the histogram of distinct-real-root counts. Deterministic under seed;
    per-sample failures are recorded and skipped. |Delta| below boundary_tol
    (relative to coefficient scale) is flagged as the boundary stratum.
    """
    rng = np.random.default_rng(seed)
    samples: list[Q2Sample] = []
    histogram: dict[int, int] = {}
    best_index, best_phi = None, None
    for i in range(n_samples):
        sub = np.random.default_rng([seed, i])
        Y = _perturb_coeffs(X, sub, radius)
        try:
            fit = fit_displacement_poly(
                displacement_samples(Y, section, d, window, tol=tol), d
            )
            val = discriminant(fit)
            scale = max(1.0, float(np.max(np.abs(fit.full_coeffs()))))
            boundary = abs(val) < boundary_tol * scale
            census = real_root_census(fit)
        except (_flow.NoCrossing, _flow.LeftNeighborhood, _flow.Divergence,
                _flow.StepUnderflow, LeadingCoefficientVanishes) as exc:
            samples.append(Q2Sample(i, None, None, False, error=type(exc).__name__))
            continue
        samples.append(Q2Sample(i, val, census, boundary))
        histogram[census] = histogram.get(census, 0) + 1
        if best_phi is None or val < best_phi:
            best_index, best_phi = i, val
    return Q2Report(
        radius=radius, n_samples=n_samples, seed=seed, samples=samples,
        best_index=best_index, best_phi=best_phi, histogram=histogram,
    )

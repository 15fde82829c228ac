import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as npoly

import cyclelab.discriminant as dc
from cyclelab.field import gradient_collapse_family, rotate_family
from cyclelab.poly2 import parse_poly

S = parse_poly("1 - x^2 - y^2")


@pytest.mark.parametrize("coeffs,expect", [
    ((-1.0, 0.0), 4.0),            # x^2 - 1
    ((2.0, 3.0), 1.0),             # b^2 - 4c with b=3, c=2
    ((0.0, -1.0, 0.0), 4.0),       # x^3 - x: -4p^3 - 27q^2
    ((0.0, 1.0, 0.0), -4.0),       # x^3 + x
    ((0.0, -1.0, 0.0, 0.0, 0.0), -256.0),  # x^5 - x: 256 p^5
])
def test_discriminant_values(coeffs, expect):
    assert dc.discriminant(dc.MonicPoly(coeffs)) == pytest.approx(expect, rel=1e-12)


def test_discriminant_repeated_root_is_zero():
    p = dc.MonicPoly((0.0, 1.0, -2.0))  # x(x-1)^2
    assert abs(dc.discriminant(p)) < 1e-12
    assert dc.has_repeated_root(p)


def test_discriminant_degree_guard():
    with pytest.raises(dc.DegreeTooSmall):
        dc.discriminant(dc.MonicPoly((1.0,)))


@pytest.mark.parametrize("coeffs,count", [
    ((1.0, 0.0), 0),               # x^2 + 1
    ((0.0, -1.0, 0.0), 3),         # x^3 - x
    ((0.0, -1.0, 0.0, 0.0, 0.0), 3),  # x^5 - x = x(x^2-1)(x^2+1)
    ((0.0, 1.0, -2.0), 2),         # x(x-1)^2: distinct roots counted once
])
def test_real_root_census(coeffs, count):
    assert dc.real_root_census(dc.MonicPoly(coeffs)) == count


@pytest.mark.parametrize("d,sign,expect", [
    (3, +1, (3,)), (3, -1, (1,)),
    (5, +1, (5, 1)), (5, -1, (3,)),
    (4, +1, (4, 0)), (4, -1, (2,)),
    (2, +1, (2,)), (2, -1, (0,)),
])
def test_root_count_congruence(d, sign, expect):
    assert dc.root_count_congruence(d, sign) == expect


def test_congruence_rejects_zero():
    with pytest.raises(dc.ZeroDiscriminant):
        dc.root_count_congruence(3, 0)


@settings(max_examples=300, deadline=None)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_sign_law_matches_sturm(d, seed):
    rng = np.random.default_rng(seed)
    p = dc.MonicPoly(tuple(rng.uniform(-2, 2, d)))
    delta = dc.discriminant(p)
    scale = max(1.0, float(np.max(np.abs(p.full_coeffs()))))
    if abs(delta) < 1e-9 * scale:
        return  # boundary stratum: the law applies to squarefree inputs
    r = dc.real_root_census(p)
    assert int(np.sign(delta)) == (-1) ** ((d - r) // 2)
    assert r in dc.root_count_congruence(d, int(np.sign(delta)))


def test_constructed_repeated_roots_hit_threshold(rng):
    for d in range(2, 7):
        for _ in range(20):
            a = rng.uniform(-1.5, 1.5)
            others = rng.uniform(-1.5, 1.5, d - 2)
            c = npoly.polyfromroots([a, a] + list(others))
            p = dc.MonicPoly(tuple(c[:-1]))
            scale = max(1.0, float(np.max(np.abs(p.full_coeffs()))))
            assert abs(dc.discriminant(p)) < 1e-9 * scale
            assert dc.has_repeated_root(p)


def test_fit_exact_cubic():
    xs = 0.05 * np.cos(np.pi * np.arange(13) / 12)
    m = dc.fit_displacement_poly([(x, x**3) for x in xs], 3)
    assert np.max(np.abs(m.coeffs)) < 1e-9
    m = dc.fit_displacement_poly([(x, 2 * x**3 - 0.02 * x) for x in xs], 3)
    assert m.coeffs == pytest.approx((0.0, -0.01, 0.0), abs=1e-12)


def test_fit_scaling_invariance():
    xs = 0.05 * np.cos(np.pi * np.arange(13) / 12)
    base = [(x, 2 * x**3 - 0.02 * x) for x in xs]
    scaled = [(x, 7.25 * v) for x, v in base]
    a = dc.fit_displacement_poly(base, 3)
    b = dc.fit_displacement_poly(scaled, 3)
    assert np.max(np.abs(np.array(a.coeffs) - np.array(b.coeffs))) < 1e-9


def test_fit_guards():
    xs = 0.05 * np.cos(np.pi * np.arange(13) / 12)
    with pytest.raises(dc.LeadingCoefficientVanishes):
        dc.fit_displacement_poly([(x, x**2) for x in xs], 3)
    with pytest.raises(ValueError):
        dc.fit_displacement_poly([(x, x**3) for x in xs[:6]], 3)


def test_fit_ck3_unit_divided_out(ck, section):
    samples = dc.displacement_samples(ck[3], section, 3, 0.0125)
    m = dc.fit_displacement_poly(samples, 3)
    assert all(abs(a) < 1e-6 for a in m.coeffs)


def test_phi_examples(ck, section):
    # unperturbed: the structure factor is x^3, discriminant 0
    assert abs(dc.phi(ck[3], section, 3)) < 1e-12
    # split family: three real roots near the window, positive discriminant
    fam = gradient_collapse_family(ck[3], S, 0.02)
    val = dc.phi(fam, section, 3)
    assert val > 0
    fit = dc.fit_displacement_poly(dc.displacement_samples(fam, section, 3, 0.025), 3)
    assert dc.real_root_census(fit) == 3
    # rotated family: single real root, negative discriminant
    rot = rotate_family(ck[3], 0.1, 0.1)  # lam*eps = 0.01
    val = dc.phi(rot, section, 3)
    assert val < 0
    fit = dc.fit_displacement_poly(dc.displacement_samples(rot, section, 3, 0.025), 3)
    assert dc.real_root_census(fit) == 1


def test_fit_roots_reproduce_census(ck, section):
    from cyclelab import cycles as cy
    fam = gradient_collapse_family(ck[3], S, 0.02)
    census = cy.find_cycles(fam, section, (-0.3, 0.3), 25)
    xis = sorted(c.xi_star for c in census)
    samples = dc.displacement_samples(fam, section, 3, 0.12, n=53)
    roots = dc.fit_roots(samples, 3, fit_degree=12)
    assert len(roots) == 3
    for r, x in zip(roots, xis):
        assert r == pytest.approx(x, abs=1e-4)


def test_q2_deterministic(ck, section):
    a = dc.q2_search(ck[3], section, 3, 1e-3, 4, seed=42)
    b = dc.q2_search(ck[3], section, 3, 1e-3, 4, seed=42)
    assert [(s.index, s.phi, s.n_real_roots) for s in a.samples] == \
           [(s.index, s.phi, s.n_real_roots) for s in b.samples]
    assert a.best_phi == b.best_phi
    c = dc.q2_search(ck[3], section, 3, 1e-3, 4, seed=43)
    assert a.best_phi != c.best_phi


def test_q2_zero_radius_reproduces_phi(ck, section):
    rep = dc.q2_search(ck[3], section, 3, 0.0, 3, seed=1)
    vals = [s.phi for s in rep.samples]
    assert all(v is not None and abs(v) < 1e-12 for v in vals)
    assert vals[0] == vals[1] == vals[2]


def test_q2_empty(ck, section):
    rep = dc.q2_search(ck[3], section, 3, 1e-3, 0, seed=5)
    assert rep.samples == [] and rep.best_index is None and rep.histogram == {}


def test_q2_csv(tmp_path, ck, section):
    rep = dc.q2_search(ck[3], section, 3, 1e-3, 3, seed=9)
    path = tmp_path / "q2.csv"
    rep.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "seed_index,phi,n_real_roots,radius"
    assert len(lines) == 4

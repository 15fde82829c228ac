import numpy as np
import pytest

from cyclelab import bernstein as bn
from cyclelab.registry import canonical_function


@pytest.fixture(scope="module")
def paraboloid():
    return canonical_function("paraboloid", (-2, 2, -2, 2))


@pytest.fixture(scope="module")
def xsq():
    # f(x, y) = x^2 on the unit box, tensored with a constant
    return bn.SampledField(
        value=lambda x, y: np.asarray(x, float) ** 2 + 0.0 * np.asarray(y, float),
        box=(0, 1, 0, 1), r_max=2,
        derivs={
            (1, 0): lambda x, y: 2.0 * np.asarray(x, float) + 0.0 * np.asarray(y, float),
            (0, 1): lambda x, y: 0.0 * np.asarray(x, float) * np.asarray(y, float),
            (2, 0): lambda x, y: 2.0 + 0.0 * np.asarray(x, float) * np.asarray(y, float),
            (1, 1): lambda x, y: 0.0 * np.asarray(x, float) * np.asarray(y, float),
            (0, 2): lambda x, y: 0.0 * np.asarray(x, float) * np.asarray(y, float),
        },
    )


def test_fit_constant_is_constant():
    f = bn.SampledField(value=lambda x, y: np.ones(np.broadcast(x, y).shape),
                        box=(0, 1, 0, 1), r_max=0)
    b = bn.bernstein_fit(f, 7, 3)
    pts = np.linspace(0, 1, 9)
    assert np.max(np.abs(b(pts, pts[::-1]) - 1.0)) < 1e-14


def test_fit_reproduces_linear():
    f = bn.SampledField(
        value=lambda x, y: np.asarray(x, float) + 0.0 * np.asarray(y, float),
        box=(0, 1, 0, 1), r_max=1,
        derivs={(1, 0): lambda x, y: np.ones(np.broadcast(x, y).shape),
                (0, 1): lambda x, y: np.zeros(np.broadcast(x, y).shape)},
    )
    b = bn.bernstein_fit(f, 5, 5)
    xs = np.linspace(0, 1, 37)
    assert np.max(np.abs(b(xs, xs**2) - xs)) < 1e-12


def test_second_moment_identity(xsq):
    # B(x^2) = x^2 + x(1-x)/m: deviation at 1/2 with m = 10 is exactly 0.025
    b = bn.bernstein_fit(xsq, 10, 2)
    dev = b(0.5, 0.25) - 0.25
    assert dev == pytest.approx(0.025, abs=1e-12)


def test_cr_error_frozen_values(paraboloid):
    b = bn.bernstein_fit(paraboloid, 40, 40)
    errs = bn.cr_error(paraboloid, b, r=2)
    # error polynomial is -(4-x^2)/m - (4-y^2)/n: frozen extrema on the box
    assert errs[(0, 0)] == pytest.approx(0.2, abs=1e-9)
    assert errs[(1, 0)] == pytest.approx(0.1, abs=1e-12)
    assert errs[(0, 1)] == pytest.approx(0.1, abs=1e-12)
    assert errs[(2, 0)] == pytest.approx(0.05, abs=1e-12)
    assert errs[(1, 1)] == pytest.approx(0.0, abs=1e-12)


def test_cr_error_monotone_in_degree(paraboloid):
    errors = []
    for m in (10, 20, 40, 80):
        b = bn.bernstein_fit(paraboloid, m, m)
        errors.append(bn.cr_error(paraboloid, b, r=0)[(0, 0)])
    assert all(b < a for a, b in zip(errors, errors[1:]))


def test_corner_interpolation(paraboloid):
    b = bn.bernstein_fit(paraboloid, 13, 9)
    for x in (-2.0, 2.0):
        for y in (-2.0, 2.0):
            assert abs(b(x, y) - paraboloid.value(x, y)) < 1e-12


def test_min_degree_linear_returns_one():
    f = bn.SampledField(
        value=lambda x, y: np.asarray(x, float) + 0.0 * np.asarray(y, float),
        box=(0, 1, 0, 1), r_max=1,
        derivs={(1, 0): lambda x, y: np.ones(np.broadcast(x, y).shape),
                (0, 1): lambda x, y: np.zeros(np.broadcast(x, y).shape)},
    )
    assert bn.min_degree_for_tolerance(f, (0, 1, 0, 1), 1, 1e-9) == (1, 1)


def test_min_degree_matches_analytic_threshold(paraboloid):
    # max error is 8/m at the center: 8/m < 0.25 gives m > 32 analytically;
    # m = 32 sits exactly on the boundary so float rounding may admit it
    m, n = bn.min_degree_for_tolerance(paraboloid, (-2, 2, -2, 2), 0, 0.25, cap=64)
    assert m == n and m in (32, 33)
    b31 = bn.bernstein_fit(paraboloid, 31, 31)
    assert bn.cr_error(paraboloid, b31, r=0)[(0, 0)] > 0.25
    b33 = bn.bernstein_fit(paraboloid, 33, 33)
    assert bn.cr_error(paraboloid, b33, r=0)[(0, 0)] < 0.25


def test_min_degree_cap_exceeded(paraboloid):
    with pytest.raises(bn.CapExceeded) as exc:
        bn.min_degree_for_tolerance(paraboloid, (-2, 2, -2, 2), 0, 1e-4, cap=16)
    assert exc.value.best_errors[(0, 0)] > 0


def test_insufficient_derivatives():
    f = bn.SampledField(value=lambda x, y: np.asarray(x, float), box=(0, 1, 0, 1),
                        r_max=0)
    b = bn.bernstein_fit(f, 4, 4)
    with pytest.raises(bn.InsufficientDerivatives):
        bn.cr_error(f, b, r=2)
    with pytest.raises(bn.InsufficientDerivatives):
        bn.min_degree_for_tolerance(f, (0, 1, 0, 1), 2, 0.1)


def test_grid_density_floor(paraboloid):
    b = bn.bernstein_fit(paraboloid, 8, 8)
    with pytest.raises(ValueError):
        bn.cr_error(paraboloid, b, r=0, grid_density=20)


def test_derivative_consistency_check(paraboloid):
    assert paraboloid.check_consistency() < 1e-4
    broken = bn.SampledField(
        value=paraboloid.value, box=paraboloid.box, r_max=1,
        derivs={(1, 0): lambda x, y: 0.0 * np.asarray(x, float)},
    )
    with pytest.raises(bn.InsufficientDerivatives):
        broken.check_consistency()


def test_kingsley_convergence_all_orders():
    # transcendental test function: every |k| <= 2 error strictly shrinks
    f = canonical_function("wave", (-2, 2, -2, 2))
    b40 = bn.bernstein_fit(f, 40, 40)
    b160 = bn.bernstein_fit(f, 160, 160)
    e40 = bn.cr_error(f, b40, r=2)
    e160 = bn.cr_error(f, b160, r=2)
    for k in e40:
        assert e160[k] < e40[k]


def test_error_table_csv(tmp_path, paraboloid):
    b = bn.bernstein_fit(paraboloid, 10, 10)
    errs = bn.cr_error(paraboloid, b, r=1)
    path = tmp_path / "errors.csv"
    bn.error_table_csv([(10, 10, errs)], path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "m,n,k_i,k_j,max_error"
    assert len(lines) == 1 + len(errs)
    assert lines[1].startswith("10,10,0,0,")

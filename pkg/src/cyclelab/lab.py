"""Experiment harness: configs, pipelines, reports, and the numeric surrogate
for a smooth function vanishing on a cycle.

The surrogate is the windowed signed distance to the cycle: zero on the
cycle, unit gradient there, and cut off by a C^2 polynomial window before
the distance function loses smoothness at the cut locus. When a splitting
experiment carries a reference vanishing polynomial (the registry systems
do), the surrogate run can rescale its perturbation size so that both
families produce the same leading-order instability on the cycle -- the two
choices of vanishing function differ by a smooth positive factor, and the
equal gradient-square integral is what makes their censuses comparable.

Reports serialize to a human-readable indented text tree whose payload is
byte-reproducible for a fixed config and seed; the wall-clock line is
excluded from the reproducibility contract.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from . import __version__
from . import annulus as an
from . import cycles as cy
from . import flow
from .discriminant import (
    LeadingCoefficientVanishes,
    discriminant as _poly_discriminant,
    displacement_samples,
    fit_displacement_poly,
    q2_search,
    real_root_census,
    root_count_congruence,
)
from .bernstein import SampledField, bernstein_fit, cr_error, error_table_csv
from .field import PolyVectorField, gradient_collapse_family, parse_field, rotate_family
from .poly2 import Poly2, derivative
from .registry import default_section_base, exact_vanishing_poly, canonical_function


class WindowTooWide(Exception):
    """Window reaches the cycle's cut locus; signed distance loses smoothness."""


# ------------------------------------------------------------------ numeric F
class _SplineCurve:
    """Periodic cubic spline through a closed cycle polyline."""

    def __init__(self, times, points):
        pts = np.array(points, dtype=float)
        t = np.array(times, dtype=float)
        pts[-1] = pts[0]  # exact closure for the periodic boundary condition
        self.T = float(t[-1])
        self.sx = CubicSpline(t, pts[:, 0], bc_type="periodic")
        self.sy = CubicSpline(t, pts[:, 1], bc_type="periodic")
        self.dsx, self.dsy = self.sx.derivative(), self.sy.derivative()
        self.d2sx, self.d2sy = self.dsx.derivative(), self.dsy.derivative()
        dense = np.linspace(0.0, self.T, 1024, endpoint=False)
        self.dense_t = dense
        self.dense_pts = np.stack([self.sx(dense), self.sy(dense)], axis=1)

    def gamma(self, t):
        t = np.mod(t, self.T)
        return np.stack([self.sx(t), self.sy(t)], axis=-1)

    def nearest_parameter(self, q: np.ndarray) -> np.ndarray:
        """Newton-refined arg-min of |q - gamma(t)| for query points (M, 2)."""
        d2 = ((q[:, None, :] - self.dense_pts[None, :, :]) ** 2).sum(axis=2)
        t = self.dense_t[np.argmin(d2, axis=1)]
        for _ in range(6):
            gx, gy = self.sx(t), self.sy(t)
            dx, dy = self.dsx(t), self.dsy(t)
            d2x, d2y = self.d2sx(t), self.d2sy(t)
            rx, ry = q[:, 0] - gx, q[:, 1] - gy
            g = rx * dx + ry * dy
            gp = -(dx * dx + dy * dy) + rx * d2x + ry * d2y
            step = np.where(np.abs(gp) > 1e-14, g / gp, 0.0)
            t = np.mod(t - step, self.T)
        return t

    def max_curvature(self) -> float:
        t = self.dense_t
        dx, dy = self.dsx(t), self.dsy(t)
        d2x, d2y = self.d2sx(t), self.d2sy(t)
        speed = np.hypot(dx, dy)
        kappa = np.abs(dx * d2y - dy * d2x) / np.maximum(speed**3, 1e-300)
        return float(np.max(kappa))

    def ambiguous_at(self, width: float) -> bool:
        """Nearest-point ambiguity probe at the given offset distance.

        Points offset by width along both normals must project back to the
        parameter they came from; a jump means the offset crossed the cut
        locus (or a fold of the curve) and the distance function is no
        longer smooth there.
        """
        t = self.dense_t[::16]
        dx, dy = self.dsx(t), self.dsy(t)
        speed = np.maximum(np.hypot(dx, dy), 1e-300)
        nx, ny = -dy / speed, dx / speed
        gx, gy = self.sx(t), self.sy(t)
        for sgn in (+1.0, -1.0):
            q = np.stack([gx + sgn * width * nx, gy + sgn * width * ny], axis=1)
            t_back = self.nearest_parameter(q)
            gap = np.abs(t_back - t)
            gap = np.minimum(gap, self.T - gap)
            if np.any(gap > 0.1 * self.T):
                return True
        return False


def _smoothstep5(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def build_numeric_F(cycle: cy.LimitCycle, window_width: float) -> SampledField:
    """Windowed signed distance to the cycle as a sampled scalar field.

    F vanishes on the cycle with unit-magnitude gradient there; the sign is
    negative on the interior component (matching the section coordinate).
    A C^2 polynomial window equals 1 within window_width/2 of the cycle and 0
    beyond window_width, standing in for a smooth extension to the plane.
    Derivatives come from central differences.

    Raises WindowTooWide when the window reaches the cycle's cut locus
    (radius of curvature, or half the self-approach gap of the polyline),
    where the nearest point stops being unique.
    """
    if len(cycle.points) < 512:
        raise ValueError("cycle polyline too coarse; need >= 512 points")
    curve = _SplineCurve(cycle.times, cycle.points)
    focal = 1.0 / curve.max_curvature()
    if window_width >= focal or curve.ambiguous_at(min(window_width, 0.999 * focal)):
        raise WindowTooWide(
            f"window {window_width:g} reaches the cycle's cut locus "
            f"(focal distance {focal:.3g})"
        )
    orient = an._orientation(cycle.points)
    half = window_width / 2.0

    def value(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        q = np.stack([np.broadcast_to(x, shape).ravel(),
                      np.broadcast_to(y, shape).ravel()], axis=1)
        out = np.empty(len(q))
        for lo in range(0, len(q), 4096):
            sl = slice(lo, lo + 4096)
            qs = q[sl]
            t = curve.nearest_parameter(qs)
            gx, gy = curve.sx(t), curve.sy(t)
            dx, dy = curve.dsx(t), curve.dsy(t)
            rx, ry = qs[:, 0] - gx, qs[:, 1] - gy
            dist = np.hypot(rx, ry)
            wedge = dx * ry - dy * rx  # >0 means left of the tangent
            sign = -np.sign(orient * wedge)
            sign = np.where(sign == 0.0, 1.0, sign)
            w = 1.0 - _smoothstep5((dist - half) / half)
            out[sl] = sign * dist * w
        if shape == ():
            return float(out[0])
        return out.reshape(shape)

    # the approximation box only needs to contain the cycle comfortably;
    # oversizing it slows Bernstein convergence quadratically
    rad = np.hypot(cycle.points[:, 0], cycle.points[:, 1])
    box_half = 1.5 * rad.max()
    box = (-box_half, box_half, -box_half, box_half)
    return SampledField(value=value, box=box, r_max=2)


def gradient_square_integral(F, cycle: cy.LimitCycle, n: int = 512) -> float:
    """Time integral of |grad F|^2 along the cycle (trapezoid on the polyline)."""
    ts = np.linspace(0.0, cycle.period, n, endpoint=False)
    pts = cycle._orbit.eval(ts) if cycle._orbit is not None else cycle.points[:n]
    if isinstance(F, Poly2):
        Fx, Fy = derivative(F, "x"), derivative(F, "y")
        gx, gy = Fx(pts[:, 0], pts[:, 1]), Fy(pts[:, 0], pts[:, 1])
    else:
        gx = F.derivative(1, 0, pts[:, 0], pts[:, 1])
        gy = F.derivative(0, 1, pts[:, 0], pts[:, 1])
    return float(np.mean(gx * gx + gy * gy) * cycle.period)


def surrogate_lambda(lam_ref: float, F_ref, F_hat, cycle: cy.LimitCycle) -> float:
    """Perturbation size giving the surrogate family the same leading-order
    cycle instability as the reference family.

    Scales by the ratio of gradient-square integrals along the cycle: the
    characteristic exponent a gradient-collapse family gives the continued
    cycle is lam times this integral, so matching it makes the two censuses
    comparable at first order.
    """
    num = gradient_square_integral(F_ref, cycle)
    den = gradient_square_integral(F_hat, cycle)
    return lam_ref * num / den


def ring_boxes(cycle: cy.LimitCycle, inner: float = 0.86, outer: float = 1.16,
               n_sectors: int = 16) -> list[tuple[float, float, float, float]]:
    """Boxes tiling an annular band around the cycle (degree-search focus).

    Enough sectors keep each bounding box close to its arc, so the boxes do
    not dip toward the window's transition zone where the surrogate is rough.
    """
    rad = np.hypot(cycle.points[:, 0], cycle.points[:, 1])
    r_lo, r_hi = inner * rad.min(), outer * rad.max()
    boxes = []
    for k in range(n_sectors):
        th = np.linspace(2 * np.pi * k / n_sectors, 2 * np.pi * (k + 1) / n_sectors, 33)
        xs = np.concatenate([r_lo * np.cos(th), r_hi * np.cos(th)])
        ys = np.concatenate([r_lo * np.sin(th), r_hi * np.sin(th)])
        boxes.append((xs.min(), xs.max(), ys.min(), ys.max()))
    return boxes


def _collapse_term_grids(Rvals: dict, lam: float):
    """C^1 jet of the gradient-collapse perturbation (lam*R*Rx, lam*R*Ry)
    from the jet of R on a grid (to second order)."""
    R, Rx, Ry = Rvals[(0, 0)], Rvals[(1, 0)], Rvals[(0, 1)]
    Rxx, Rxy, Ryy = Rvals[(2, 0)], Rvals[(1, 1)], Rvals[(0, 2)]
    return {
        (0, 0): (lam * R * Rx, lam * R * Ry),
        (1, 0): (lam * (Rx * Rx + R * Rxx), lam * (Rx * Ry + R * Rxy)),
        (0, 1): (lam * (Ry * Rx + R * Rxy), lam * (Ry * Ry + R * Ryy)),
    }


def whitney_distance_to_limit(R: Poly2, F: SampledField, lam: float, box,
                              r: int = 1, grid_density: int = 41,
                              against_zero: bool = False) -> float:
    """Sampled C^r distance between the polynomial family X0 + lam*R*grad R
    and the limit family X0 + lam*F*grad F (same base field X0, so only the
    perturbation jets differ; no polynomial products are formed).

    With against_zero=True the F side is dropped, giving the distance of the
    polynomial family member to the unperturbed X0 instead.
    """
    if r > 1:
        raise ValueError("logging supports r <= 1")
    ax, bx, ay, by = box
    xs = np.linspace(ax, bx, grid_density)
    ys = np.linspace(ay, by, grid_density)
    GX, GY = np.meshgrid(xs, ys, indexing="ij")
    jet_keys = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    Rvals = {
        k: derivative(derivative(R, "x", k[0]), "y", k[1])(GX, GY) for k in jet_keys
    }
    poly_side = _collapse_term_grids(Rvals, lam)
    if against_zero:
        zero = np.zeros_like(GX)
        limit_side = {k: (zero, zero) for k in poly_side}
    else:
        Fvals = {k: np.asarray(F.derivative(*k, GX, GY), dtype=float) for k in jet_keys}
        limit_side = _collapse_term_grids(Fvals, lam)
    worst = 0.0
    for k, (pa, qa) in poly_side.items():
        pb, qb = limit_side[k]
        worst = max(worst, float(np.max(np.hypot(pa - pb, qa - qb))))
    return worst


# ------------------------------------------------------------------ config
_PIPELINES = ("find", "split-theorem1", "rotate-theorem2", "bernstein-study",
              "annulus", "q2-search")


@dataclass
class ExperimentConfig:
    """Validated experiment description; see the README for the grammar."""

    pipeline: str
    system: object = "CK(3)"
    section_base: tuple[float, float] | None = None
    section_half_length: float = 0.55
    lam: float = 0.02
    eps: float = 0.1
    lambda0: float = 0.1
    r: int = 1
    eps_target: float = 0.4
    surrogate: bool = False
    window_width: float = 0.95
    strength_calibration: bool = True
    degree_cap: int = 256
    xi_range: tuple[float, float] = (-0.3, 0.3)
    n_seeds: int = 25
    annulus_xi: tuple[float, float] = (-0.35, 0.35)
    lambda_eps_values: tuple[float, ...] = (-0.01, 0.01)
    fit_degree: int = 2
    bern_function: str = "paraboloid"
    bern_box: tuple[float, float, float, float] = (-2.0, 2.0, -2.0, 2.0)
    bern_degrees: tuple[int, ...] = (10, 20, 40, 80, 160)
    q2_radius: float = 1e-3
    q2_samples: int = 24
    q2_degree: int = 3
    window: float = 0.025
    integrator_tol: float = flow.DEFAULT_TOL
    verify_samples: int = 256
    invariance_orbits: int = 32
    horizon_periods: float = 20.0
    also_perturbed: bool = True
    seed: int = 0

    def validate(self):
        if self.pipeline not in _PIPELINES:
            raise ValueError(f"pipeline must be one of {_PIPELINES}")
        if not (0.0 < self.lam <= 0.1):
            raise ValueError("lambda must lie in (0, 0.1]")
        if not (0.0 < self.eps <= 0.1):
            raise ValueError("eps must lie in (0, 0.1]")
        if self.r not in (1, 2, 3):
            raise ValueError("r must be one of {1, 2, 3}")
        for v in self.lambda_eps_values:
            if not (0.0 < abs(v) <= 0.1):
                raise ValueError("lambda_eps sweep values must have 0 < |v| <= 0.1")
        if not (self.xi_range[0] < self.xi_range[1]):
            raise ValueError("bad xi_range")
        return self

    @staticmethod
    def from_dict(raw: dict) -> "ExperimentConfig":
        known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
        aliases = {"lambda": "lam"}
        kwargs = {}
        for k, v in raw.items():
            key = aliases.get(k, k.replace("-", "_"))
            if key not in known:
                raise ValueError(f"unknown config key {k!r}")
            default = ExperimentConfig.__dataclass_fields__[key].default
            if isinstance(v, list):
                v = tuple(v)
            kwargs[key] = v
        return ExperimentConfig(**kwargs).validate()

    def echo(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            v = getattr(self, name)
            if isinstance(v, tuple):
                v = list(v)
            if isinstance(v, PolyVectorField):
                v = repr(v.P) + " ; " + repr(v.Q)
            out[name] = v
        return out


# ------------------------------------------------------------------ report
def _serialize(obj, indent=0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}{k}:")
                lines.extend(_serialize(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {_scalar(v)}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}[{i}]:")
                lines.extend(_serialize(v, indent + 1))
            else:
                lines.append(f"{pad}[{i}]: {_scalar(v)}")
    else:
        lines.append(f"{pad}{_scalar(obj)}")
    return lines


def _scalar(v) -> str:
    if isinstance(v, (np.floating,)):
        v = float(v)
    if isinstance(v, (np.integer,)):
        v = int(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    return str(v)


@dataclass
class Report:
    """Structured experiment outcome; payload is byte-stable under a fixed
    config and seed (wall clock excluded)."""

    pipeline: str
    config: dict
    payload: dict
    checks: dict
    wall_clock_s: float = 0.0
    version: str = ""

    @property
    def all_passed(self) -> bool:
        return all(bool(v) for v in self.checks.values())

    def payload_text(self) -> str:
        head = [
            "cyclelab-report v1",
            f"tool_version: {self.version or __version__}",
            f"pipeline: {self.pipeline}",
            "config:",
        ]
        body = _serialize(self.config, 1)
        body += ["payload:"] + _serialize(self.payload, 1)
        body += ["checks:"] + _serialize(self.checks, 1)
        body += [f"all_passed: {_scalar(self.all_passed)}"]
        return "\n".join(head + body) + "\n"

    def to_text(self) -> str:
        return self.payload_text() + f"wall_clock_s: {self.wall_clock_s!r}\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_text())


def _cycle_entry(c: cy.LimitCycle, tol) -> dict:
    entry = {
        "xi_star": c.xi_star,
        "radius": c.mean_radius,
        "period": c.period,
        "exponent": c.exponent,
        "stability": c.stability,
        "tolerance": tol,
    }
    if c.multiplicity is not None:
        entry["multiplicity"] = c.multiplicity.d
        entry["multiplicity_window"] = c.multiplicity.h
    return entry


def _census_payload(census, tol):
    return {"count": len(census),
            "cycles": [_cycle_entry(c, tol) for c in census]}


def _section_for(cfg: ExperimentConfig, X) -> cy.Section:
    base = cfg.section_base or default_section_base(cfg.system)
    if base is None:
        raise ValueError("no section base configured and none known for this system")
    return cy.section_for_field(X, base, cfg.section_half_length)


# ------------------------------------------------------------------ pipelines
def run_pipeline(config: ExperimentConfig, out_dir=None) -> Report:
    """Dispatch an experiment; every module error surfaces in the report."""
    config.validate()
    t0 = time.perf_counter()
    X = parse_field(config.system)
    runner = {
        "find": _run_find,
        "split-theorem1": _run_split,
        "rotate-theorem2": _run_rotate,
        "bernstein-study": _run_bernstein,
        "annulus": _run_annulus,
        "q2-search": _run_q2,
    }[config.pipeline]
    payload, checks, artifacts = runner(config, X, out_dir)
    rep = Report(
        pipeline=config.pipeline, config=config.echo(), payload=payload,
        checks=checks, wall_clock_s=time.perf_counter() - t0,
        version=__version__,
    )
    if out_dir is not None:
        import os

        os.makedirs(out_dir, exist_ok=True)
        rep.save(os.path.join(out_dir, "report.txt"))
        for name, writer in artifacts.items():
            writer(os.path.join(out_dir, name))
    return rep


def _find_census(config, X, with_multiplicity=True):
    section = _section_for(config, X)
    census = cy.find_cycles(X, section, config.xi_range, config.n_seeds,
                            tol=config.integrator_tol)
    if with_multiplicity:
        for c in census:
            try:
                c.multiplicity = cy.multiplicity(X, c, tol=config.integrator_tol)
            except cy.Inconclusive:
                c.multiplicity = None
    return section, census


def _run_find(config, X, out_dir):
    section, census = _find_census(config, X)
    payload = {"census": _census_payload(census, config.integrator_tol)}
    checks = {
        "cycles_converged": all(abs(cy.displacement(X, section, c.xi_star,
                                                    tol=config.integrator_tol)) < 1e-10
                                for c in census),
        "polylines_closed": all(c.closure_error() < 1e-8 for c in census),
    }
    artifacts = {}
    if census:
        artifacts["displacement.csv"] = (
            lambda path, c0=census[0]: c0.displacement_samples_csv(path, X)
        )
    artifacts["portrait.svg"] = _portrait_writer(X, census, section, None)
    return payload, checks, artifacts


def _split_reference(config, X, section, cycle):
    """Exact-polynomial splitting branch for registry systems."""
    F = exact_vanishing_poly(config.system)
    if F is None:
        raise ValueError("no exact vanishing polynomial known; use surrogate: true")
    return cy.theorem1_splitting(
        X, cycle, F, config.lam, config.r, xi_range=config.xi_range,
        n_seeds=config.n_seeds, tol=config.integrator_tol,
    ), F, config.lam


def _run_split(config, X, out_dir):
    section = _section_for(config, X)
    seed_cycle = cy.build_cycle(X, section, _nearest_fixed_point(config, X, section),
                                tol=config.integrator_tol)
    seed_cycle.multiplicity = cy.multiplicity(X, seed_cycle, tol=config.integrator_tol)

    payload: dict = {}
    checks: dict = {}
    if not config.surrogate:
        report, F_used, lam_used = _split_reference(config, X, section, seed_cycle)
        payload["mode"] = "exact"
        distance_log = []
    else:
        F_hat = build_numeric_F(seed_cycle, config.window_width)
        lam_used = config.lam
        F_ref = exact_vanishing_poly(config.system)
        if config.strength_calibration and F_ref is not None:
            lam_used = surrogate_lambda(config.lam, F_ref, F_hat, seed_cycle)
            payload["lambda_calibration_ratio"] = lam_used / config.lam
        boxes = ring_boxes(seed_cycle)
        report = cy.theorem1_splitting(
            X, seed_cycle, F_hat, lam_used, config.r,
            eps_target=config.eps_target, degree_cap=config.degree_cap,
            error_boxes=boxes, xi_range=config.xi_range,
            n_seeds=config.n_seeds, tol=config.integrator_tol,
        )
        payload["mode"] = "surrogate"
        F_used = F_hat
        # distance diagnostics along the probed degrees, ascending; measured
        # on the ring where the dynamics lives (elsewhere the window junk
        # dominates every fit equally). F jets are sampled once per box.
        jet_keys = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        log_grids = []
        for sub in boxes[::4]:
            xs = np.linspace(sub[0], sub[1], 31)
            ys = np.linspace(sub[2], sub[3], 31)
            GX, GY = np.meshgrid(xs, ys, indexing="ij")
            fj = {k: np.asarray(F_hat.derivative(*k, GX, GY), dtype=float)
                  for k in jet_keys}
            log_grids.append((GX, GY, _collapse_term_grids(fj, lam_used)))
        distance_log = []
        for m in sorted({d for d, _ in report.degree_trace}):
            Rm = bernstein_fit(F_hat, m, m, F_hat.box)
            d_limit = d_base = 0.0
            for GX, GY, limit_side in log_grids:
                rj = {k: derivative(derivative(Rm, "x", k[0]), "y", k[1])(GX, GY)
                      for k in jet_keys}
                poly_side = _collapse_term_grids(rj, lam_used)
                for k, (pa, qa) in poly_side.items():
                    pb, qb = limit_side[k]
                    d_limit = max(d_limit, float(np.max(np.hypot(pa - pb, qa - qb))))
                    d_base = max(d_base, float(np.max(np.hypot(pa, qa))))
            distance_log.append({"degree": m, "to_limit_family": d_limit,
                                 "to_unperturbed": d_base})
        payload["whitney_log"] = distance_log

    payload["lambda_used"] = lam_used
    payload["degree"] = list(report.degree) if report.degree else None
    payload["census"] = _census_payload(report.census, config.integrator_tol)
    payload["middle_exponent"] = report.middle_exponent
    payload["time_reversed"] = report.time_reversed
    payload["messages"] = report.messages

    if report.middle_index is not None and isinstance(F_used, Poly2):
        mid = report.census[report.middle_index]
        ib, ig, il = cy.divergence_integral_terms(X, F_used, lam_used, mid)
        payload["divergence_terms"] = {
            "base": ib, "gradient_square": ig, "laplacian": il,
            "sum": ib + ig + il,
        }

    ann_rep = None
    annulus_obj = None
    try:
        annulus_obj = an.build_trapping_annulus(
            X, seed_cycle, config.lambda0, config.annulus_xi[0],
            config.annulus_xi[1], tol=config.integrator_tol,
        )
        ann_rep = an.verify_annulus(
            report.perturbed, annulus_obj, config.verify_samples,
            invariance_orbits=8, horizon_periods=5.0,
        )
        payload["annulus"] = {
            "xi_z1": annulus_obj.xi_z1, "xi_z2": annulus_obj.xi_z2,
            "perturbed_inward_ok": ann_rep.inward_ok,
            "min_flux_margin": ann_rep.min_flux_margin,
        }
    except (an.ReturnFailed, an.NotStable) as exc:
        payload["annulus"] = {"error": f"{type(exc).__name__}: {exc}"}

    checks["split_succeeded"] = report.success
    checks["at_least_three_cycles"] = len(report.census) >= 3
    checks["alternating_stability"] = report.alternating
    checks["middle_exponent_positive"] = report.positivity_ok
    if ann_rep is not None:
        checks["annulus_inward_perturbed"] = ann_rep.inward_ok
    if distance_log:
        seqs = [e["to_limit_family"] for e in distance_log]
        checks["whitney_to_limit_monotone"] = all(
            b < a for a, b in zip(seqs, seqs[1:])
        )

    artifacts = {
        "portrait.svg": _portrait_writer(
            report.perturbed or X, report.census, section, annulus_obj
        ),
        "census.csv": _census_csv_writer(report.census),
    }
    return payload, checks, artifacts


def _run_rotate(config, X, out_dir):
    section = _section_for(config, X)
    sweeps = []
    checks = {}
    for mu in config.lambda_eps_values:
        Y = rotate_family(X, mu / config.eps, config.eps)
        census = cy.find_cycles(Y, section, config.xi_range, config.n_seeds,
                                tol=config.integrator_tol)
        entry = {"lambda_eps": mu, "census": _census_payload(census, config.integrator_tol)}
        window = config.window
        for _ in range(5):
            samples = displacement_samples(Y, section, config.fit_degree,
                                           window, tol=config.integrator_tol,
                                           skip_failures=True)
            if len(samples) < 4 * config.fit_degree + 1:
                window *= 0.5  # too many escapes: the removed-cycle side blows up
                continue
            try:
                fit = fit_displacement_poly(samples, config.fit_degree)
            except LeadingCoefficientVanishes:
                window *= 0.5  # escape-side tail polluted the fit
                continue
            delta = _poly_discriminant(fit)
            entry["weierstrass_fit"] = list(fit.coeffs)
            entry["phi"] = delta
            entry["phi_window"] = window
            entry["real_root_census"] = real_root_census(fit)
            if delta != 0.0:
                admissible = root_count_congruence(config.fit_degree,
                                                   1 if delta > 0 else -1)
                entry["admissible_root_counts"] = list(admissible)
                checks[f"congruence_lambda_eps_{mu}"] = (
                    entry["real_root_census"] in admissible
                )
            break
        else:
            entry["phi_error"] = "displacement sampling escaped at every window"
        sweeps.append(entry)
    payload = {"sweeps": sweeps}
    artifacts = {"census.csv": _sweep_csv_writer(sweeps)}
    return payload, checks, artifacts


def _run_bernstein(config, X, out_dir):
    f = canonical_function(config.bern_function, config.bern_box)
    rows = []
    table = []
    for m in config.bern_degrees:
        b = bernstein_fit(f, m, m, config.bern_box)
        errs = cr_error(f, b, config.bern_box, r=2)
        rows.append((m, m, errs))
        table.append({"m": m, "n": m,
                      "errors": {f"{i}{j}": v for (i, j), v in sorted(errs.items())}})
    payload = {"function": config.bern_function, "box": list(config.bern_box),
               "table": table}
    first, last = rows[0][2], rows[-1][2]
    checks = {
        "all_orders_shrink": all(last[k] < first[k] for k in first),
    }
    artifacts = {"errors.csv": lambda path, rows=rows: error_table_csv(rows, path)}
    return payload, checks, artifacts


def _run_annulus(config, X, out_dir):
    section, census = _find_census(config, X, with_multiplicity=False)
    if not census:
        raise ValueError("no cycle found to wrap an annulus around")
    cycle = census[0]
    ann = an.build_trapping_annulus(X, cycle, config.lambda0,
                                    config.annulus_xi[0], config.annulus_xi[1],
                                    tol=config.integrator_tol)
    rep = an.verify_annulus(X, ann, config.verify_samples,
                            config.invariance_orbits, config.horizon_periods,
                            tol=config.integrator_tol)
    payload = {
        "xi1": ann.xi1, "xi2": ann.xi2, "xi_z1": ann.xi_z1, "xi_z2": ann.xi_z2,
        "lambda0_s1": ann.lambda0_s1, "lambda0_s2": ann.lambda0_s2,
        "verification": {
            "inward_ok": rep.inward_ok,
            "min_flux_margin": rep.min_flux_margin,
            "singularity_free": rep.singularity_free,
            "min_field_magnitude": rep.min_field_magnitude,
            "invariance_ok": rep.invariance_ok,
            "orbits_contained": rep.orbits_contained,
            "orbits_total": rep.orbits_total,
        },
    }
    checks = {
        "inward": rep.inward_ok,
        "singularity_free": rep.singularity_free,
        "invariant": rep.invariance_ok,
    }
    if config.also_perturbed:
        F = exact_vanishing_poly(config.system)
        if F is not None:
            Y = gradient_collapse_family(X, F, config.lam)
            rep2 = an.verify_annulus(Y, ann, config.verify_samples,
                                     config.invariance_orbits,
                                     config.horizon_periods,
                                     tol=config.integrator_tol)
            payload["perturbed_verification"] = {
                "inward_ok": rep2.inward_ok,
                "min_flux_margin": rep2.min_flux_margin,
                "invariance_ok": rep2.invariance_ok,
                "orbits_contained": rep2.orbits_contained,
            }
            checks["perturbed_inward"] = rep2.inward_ok
            checks["perturbed_invariant"] = rep2.invariance_ok
    artifacts = {
        "annulus.csv": lambda path, a=ann: a.to_csv(path),
        "portrait.svg": _portrait_writer(X, census, section, ann),
    }
    return payload, checks, artifacts


def _run_q2(config, X, out_dir):
    section = _section_for(config, X)
    rep = q2_search(X, section, config.q2_degree, config.q2_radius,
                       config.q2_samples, config.seed, window=config.window,
                       tol=config.integrator_tol)
    payload = {
        "radius": rep.radius,
        "n_samples": rep.n_samples,
        "seed": rep.seed,
        "best_index": rep.best_index,
        "best_phi": rep.best_phi,
        "histogram": {str(k): v for k, v in sorted(rep.histogram.items())},
        "negative_phi_found": bool(rep.best_phi is not None and rep.best_phi < 0),
        "failures": sum(1 for s in rep.samples if s.error),
    }
    checks = {"completed": True}
    artifacts = {"q2_census.csv": lambda path, r=rep: r.to_csv(path)}
    return payload, checks, artifacts


# ------------------------------------------------------------------ helpers
def _nearest_fixed_point(config, X, section) -> float:
    """xi* of the cycle nearest xi = 0 (registry systems sit at xi = 0)."""
    census = cy.find_cycles(X, section, config.xi_range, config.n_seeds,
                            tol=config.integrator_tol)
    if not census:
        raise ValueError("no cycle found in the configured xi range")
    return min(census, key=lambda c: abs(c.xi_star)).xi_star


def _census_csv_writer(census):
    def write(path):
        lines = ["xi_star,radius,period,exponent,stability"]
        for c in census:
            lines.append(
                f"{c.xi_star!r},{c.mean_radius!r},{c.period!r},{c.exponent!r},{c.stability}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    return write


def _sweep_csv_writer(sweeps):
    def write(path):
        lines = ["lambda_eps,count,xi_star,radius,exponent"]
        for entry in sweeps:
            mu = entry["lambda_eps"]
            cycles = entry["census"]["cycles"]
            if not cycles:
                lines.append(f"{mu!r},0,,,")
            for c in cycles:
                lines.append(
                    f"{mu!r},{entry['census']['count']},{c['xi_star']!r},"
                    f"{c['radius']!r},{c['exponent']!r}"
                )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    return write


def _portrait_writer(X, census, section, annulus_obj):
    def write(path):
        from .portrait import render_phase_portrait

        svg = render_phase_portrait(
            field=X,
            cycles=[c.points for c in census],
            section=section,
            annulus=annulus_obj,
        )
        with open(path, "w") as fh:
            fh.write(svg)

    return write

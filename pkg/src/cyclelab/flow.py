"""Numerical integration of planar polynomial fields with dense output.

Wraps the adaptive Dormand-Prince 5(4) stepper (explicit embedded pair with a
free 4th-order dense interpolant) in a loop that records every accepted step
and its local interpolant, watches a safety box, and localizes transversal
section crossings on the dense output by bisection. Stiff integrators are not
needed here: polynomial fields near attracting cycles at our perturbation
sizes are non-stiff.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45

DEFAULT_TOL = 1e-10
DEFAULT_SAFETY_BOX = 1e3
_MAX_STEPS = 2_000_000
_CROSSING_RESIDUAL = 1e-12
_BISECT_MAX_ITER = 60


class StepUnderflow(Exception):
    """The adaptive stepper failed (stiffness or blow-up)."""


class Divergence(Exception):
    """Trajectory left the safety box |x|, |y| <= box."""

    def __init__(self, t, point, box):
        super().__init__(f"orbit left the safety box {box:g} at t={t:.6g}")
        self.t = t
        self.point = point


class NoCrossing(Exception):
    """No section crossing found within t_max."""


class LeftNeighborhood(Exception):
    """Orbit exited the configured neighborhood before returning."""


@dataclass
class Orbit:
    """Adaptive-step trajectory with per-step dense interpolants.

    Times are strictly increasing; ``eval`` interpolates anywhere inside
    [t0, t_end] with the local error the integrator tolerances imply.
    """

    field_ref: object
    x0: tuple[float, float]
    times: np.ndarray
    states: np.ndarray  # (n, 2)
    tol: tuple[float, float]  # (rtol, atol)
    _segments: list = field(default_factory=list, repr=False)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def eval(self, t):
        """Dense-output evaluation at scalar or array t."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty((t_arr.size, 2))
        seg_ends = np.array([s.t_max for s in self._segments])
        idx = np.clip(np.searchsorted(seg_ends, t_arr, side="left"), 0, len(self._segments) - 1)
        for k in range(t_arr.size):
            out[k] = self._segments[idx[k]](t_arr[k])
        if np.isscalar(t) or np.asarray(t).shape == ():
            return out[0]
        return out.reshape(np.shape(t) + (2,))

    def sample(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        ts = np.linspace(self.times[0], self.t_end, n)
        return ts, self.eval(ts)

    def to_csv(self, path, n: int | None = None) -> None:
        """Dump t,x,y rows; the accepted steps by default, or n dense samples."""
        if n is None:
            ts, pts = self.times, self.states
        else:
            ts, pts = self.sample(n)
        lines = ["t,x,y"]
        for t, (x, y) in zip(ts, pts):
            lines.append(f"{float(t)!r},{float(x)!r},{float(y)!r}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _make_solver(X, x0, t_end, rtol, atol, max_step):
    return RK45(
        X.rhs(),
        0.0,
        np.asarray(x0, dtype=float),
        t_bound=float(t_end),
        rtol=rtol,
        atol=atol,
        max_step=max_step,
    )


def integrate(
    X,
    x0,
    t_end: float,
    tol: float = DEFAULT_TOL,
    safety_box: float = DEFAULT_SAFETY_BOX,
    max_step: float = np.inf,
) -> Orbit:
    """Flow of X from x0 over [0, t_end].

    Raises Divergence when the orbit leaves the safety box and StepUnderflow
    when the stepper gives up.
    """
    if t_end <= 0:
        raise ValueError("t_end must be > 0")
    if tol <= 0:
        raise ValueError("tol must be > 0")
    solver = _make_solver(X, x0, t_end, tol, tol, max_step)
    times = [0.0]
    states = [np.asarray(x0, dtype=float)]
    segments = []
    for _ in range(_MAX_STEPS):
        if solver.status == "finished":
            break
        msg = solver.step()
        if solver.status == "failed":
            raise StepUnderflow(msg or "step size underflow")
        segments.append(solver.dense_output())
        times.append(solver.t)
        states.append(solver.y.copy())
        if np.max(np.abs(solver.y)) > safety_box:
            raise Divergence(solver.t, solver.y.copy(), safety_box)
    else:
        raise StepUnderflow("step budget exhausted")
    return Orbit(
        field_ref=X,
        x0=tuple(np.asarray(x0, dtype=float)),
        times=np.array(times),
        states=np.array(states),
        tol=(tol, tol),
        _segments=segments,
    )


def _refine_crossing(seg, t_lo, t_hi, g):
    """Bisection on the dense interpolant until the residual beats 1e-12."""
    g_lo = g(seg(t_lo))
    t_best = None
    for _ in range(_BISECT_MAX_ITER):
        t_mid = 0.5 * (t_lo + t_hi)
        g_mid = g(seg(t_mid))
        if abs(g_mid) < _CROSSING_RESIDUAL:
            t_best = t_mid
            break
        if np.sign(g_mid) == np.sign(g_lo):
            t_lo, g_lo = t_mid, g_mid
        else:
            t_hi = t_mid
        if t_hi - t_lo <= np.finfo(float).eps * max(1.0, abs(t_hi)):
            break
    if t_best is None:
        t_best = 0.5 * (t_lo + t_hi)
    return t_best, seg(t_best)


def next_section_crossing(
    X,
    x0,
    section,
    direction_sign: int = +1,
    t_max: float = 200.0,
    tol: float = DEFAULT_TOL,
    t_offset: float = 0.0,
    safety_box: float = DEFAULT_SAFETY_BOX,
    neighborhood_radius: float | None = None,
):
    """First crossing of the section segment with the requested sign.

    ``section`` needs attributes base (2-vector), direction (unit tangent of
    the segment), half_length and normal (unit normal). A crossing counts
    when the orbit meets the segment with sign(velocity . normal) equal to
    direction_sign, at a time strictly greater than t_offset. The hit time is
    refined on the dense output to |normal residual| < 1e-12.

    Returns (t_star, point). Raises NoCrossing, Divergence or StepUnderflow.
    """
    base = np.asarray(section.base, dtype=float)
    nrm = np.asarray(section.normal, dtype=float)
    tang = np.asarray(section.direction, dtype=float)
    half = float(section.half_length)

    def g(p):
        return float(np.dot(p - base, nrm))

    def within_segment(p):
        return abs(np.dot(p - base, tang)) <= half

    solver = _make_solver(X, x0, t_max, tol, tol, np.inf)
    for _ in range(_MAX_STEPS):
        if solver.status == "finished":
            raise NoCrossing(f"no crossing in (0, {t_max}]")
        msg = solver.step()
        if solver.status == "failed":
            raise StepUnderflow(msg or "step size underflow")
        if np.max(np.abs(solver.y)) > safety_box:
            raise Divergence(solver.t, solver.y.copy(), safety_box)
        if neighborhood_radius is not None:
            if np.linalg.norm(solver.y - base) > neighborhood_radius:
                raise LeftNeighborhood(
                    f"orbit left the radius-{neighborhood_radius:g} neighborhood "
                    f"at t={solver.t:.6g}"
                )
        seg = solver.dense_output()
        # probe the step interior; transversal crossings cannot hide between
        # probes at the step sizes an order-5 method takes here
        ts = np.linspace(seg.t_min, seg.t_max, 6)
        gs = [g(seg(t)) for t in ts]
        for a in range(5):
            if ts[a + 1] <= t_offset:
                continue
            if gs[a] == 0.0 and gs[a + 1] == 0.0:
                continue
            if np.sign(gs[a]) * np.sign(gs[a + 1]) < 0 or (
                gs[a] != 0.0 and gs[a + 1] == 0.0
            ):
                t_star, p = _refine_crossing(seg, ts[a], ts[a + 1], g)
                if t_star <= t_offset or not within_segment(p):
                    continue
                vel = X.rhs()(t_star, p)
                if np.sign(np.dot(vel, nrm)) == np.sign(direction_sign):
                    return float(t_star), np.asarray(p)
    raise StepUnderflow("step budget exhausted")

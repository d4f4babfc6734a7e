"""High-accuracy cycle simulation in log space with event detection.

Integration happens entirely in (ln x, ln s): the field there is smooth
and bounded along the cycle even where x or s drop to e^{-1000}, which
is exactly where a solver in linear variables silently reports garbage.
An adaptive embedded Runge-Kutta pair (order 5 with dense output, via
scipy) supplies the steps; isocline crossings are located by sign
bracketing over each accepted step, bisection on the step's dense
interpolant to a tight time tolerance, and a single interpolant
evaluation for the state.

The four crossing kinds tile one loop of the cycle:

    S_EQ_LAMBDA_DOWN  s = lam, prey falling   (predator maximum),
    X_EQ_H_MIN        x = h(s), prey minimal,
    S_EQ_LAMBDA_UP    s = lam, prey rising    (predator minimum),
    X_EQ_H_MAX        x = h(s), prey maximal.

The limit cycle itself is the fixed point of the return map on the
section {s = lam, x > h(lam), s decreasing}; since the cycle is strongly
attracting, plain fixed-point iteration converges in a few loops.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import RK45

from .bounds import BoundSet, cycle_bounds, x_max_upper
from .model import LogState, Params, Region, State, h

__all__ = [
    "SimConfig",
    "EventKind",
    "Event",
    "Trajectory",
    "net_events",
    "TransitPoints",
    "CycleExtremes",
    "CycleReport",
    "IntegrationError",
    "StepLimitError",
    "StepSizeError",
    "EventOrderError",
    "integrate",
    "transit_points",
    "limit_cycle",
    "cycle_extreme_report",
]

# absolute floor of the event-time bisection; widened by float spacing
# once tau itself outgrows it
_EVENT_TAU_TOL = 1e-12

# a crossing only counts once the trajectory commits to the new side by
# this much (in log units).  Canard segments shadow the repelling branch
# of x = h(s) to within e^{-c/m}, which makes the raw sign of the event
# function chatter at roundoff scale; genuine transitions swing the
# event functions by at least O(m) (slide gap) or O(1) (excursions),
# orders of magnitude above this threshold for any m of interest.
_EVENT_ARM = 1e-7

_ENV_RTOL = "CYCLEBOUND_RTOL"


class IntegrationError(RuntimeError):
    """Base class for simulation failures."""


class StepLimitError(IntegrationError):
    """The accepted-step budget was exhausted."""


class StepSizeError(IntegrationError):
    """The solver hit its minimal step size (likely an unreachable stop)."""


class EventOrderError(IntegrationError):
    """Crossings did not appear in the canonical region order."""


@dataclass(frozen=True)
class SimConfig:
    """Integration and cycle-detection tolerances.

    rtol/atol_log control the local error per step, componentwise in the
    log variables.  cycle_tol is the return-map fixed-point tolerance on
    ln x; max_return_iters caps the fixed-point iteration (generously,
    convergence typically takes two or three loops).
    """

    rtol: float = 1e-10
    atol_log: float = 1e-12
    max_steps: int = 2_000_000
    cycle_tol: float = 1e-9
    max_return_iters: int = 10_000

    def __post_init__(self) -> None:
        if not (self.rtol > 0 and self.atol_log > 0 and self.cycle_tol > 0):
            raise ValueError("rtol, atol_log and cycle_tol must be positive")

    @classmethod
    def from_env(cls, **overrides) -> "SimConfig":
        """Default config, with rtol overridable via CYCLEBOUND_RTOL."""
        env = os.environ.get(_ENV_RTOL)
        if env is not None and "rtol" not in overrides:
            overrides["rtol"] = float(env)
        return cls(**overrides)


class EventKind(Enum):
    S_EQ_LAMBDA_DOWN = "s_eq_lambda_down"
    X_EQ_H_MIN = "x_eq_h_min"
    S_EQ_LAMBDA_UP = "s_eq_lambda_up"
    X_EQ_H_MAX = "x_eq_h_max"


# canonical loop order, entered from region 1
_CYCLE_ORDER = (
    EventKind.S_EQ_LAMBDA_DOWN,
    EventKind.X_EQ_H_MIN,
    EventKind.S_EQ_LAMBDA_UP,
    EventKind.X_EQ_H_MAX,
)


@dataclass(frozen=True)
class Event:
    tau: float
    state: LogState
    kind: EventKind


@dataclass
class Trajectory:
    """Log-space samples at accepted steps plus located crossings.

    taus is strictly increasing; points[i] = (u, v) at taus[i].  When the
    integration was stopped by an event, the last sample is the event
    state itself.

    ``events`` records every committed sign change.  During slow saddle
    passages (s within roundoff of 1) the trajectory rides the isocline
    x = h(s) at an offset of order m in log units, which double
    precision cannot keep on one side, so short re-crossing pairs can
    appear there; :meth:`net_events` cancels those pairs and returns the
    topological crossing sequence.
    """

    taus: np.ndarray
    points: np.ndarray
    events: list[Event] = field(default_factory=list)

    @property
    def samples(self) -> list[tuple[float, LogState]]:
        return [
            (float(t), LogState(float(u), float(v)))
            for t, (u, v) in zip(self.taus, self.points)
        ]

    def net_events(self) -> list[Event]:
        return net_events(self.events)

    def region_labels(self, p: Params) -> list[str]:
        return [_region_from_log(u, v, p).value for u, v in self.points]


_EVENT_FUNCTION = {
    EventKind.S_EQ_LAMBDA_DOWN: "lam",
    EventKind.S_EQ_LAMBDA_UP: "lam",
    EventKind.X_EQ_H_MIN: "h",
    EventKind.X_EQ_H_MAX: "h",
}


def net_events(events: list[Event]) -> list[Event]:
    """Cancel adjacent opposite re-crossings of the same isocline.

    A crossing immediately undone by the reverse crossing of the same
    event function is not a region transition; the surviving sequence
    cycles through the four kinds in the canonical order.
    """
    stack: list[Event] = []
    for ev in events:
        if (
            stack
            and _EVENT_FUNCTION[stack[-1].kind] == _EVENT_FUNCTION[ev.kind]
            and stack[-1].kind is not ev.kind
        ):
            stack.pop()
        else:
            stack.append(ev)
    return stack


@dataclass(frozen=True)
class TransitPoints:
    """One tour's crossing coordinates, minima kept in log space."""

    x1: float
    ln_s2: float
    ln_x3: float
    s4: float


@dataclass(frozen=True)
class CycleExtremes:
    """Extremes and transit points of the (converged) limit cycle.

    By construction x_max/p1_x sit on a descending s = lam crossing,
    ln_x_min/ln_p3_x on the ascending one, ln_s_min/ln_p2_s on the
    prey-minimal isocline graze and s_max/p4_s on the prey-maximal one.
    residual is the return-map defect |ln x_end - ln x_start| of the
    recorded loop.

    ln_s_max carries the prey maximum at full precision: 1 - s_max can
    sit far below the double spacing at 1 (deep cycles pass the saddle
    with 1 - s ~ e^{-100}), in which case the s_max float collapses to
    1.0 while ln_s_max = log1p(-(1 - s)) stays meaningful.
    """

    x_max: float
    s_max: float
    ln_x_min: float
    ln_s_min: float
    ln_s_max: float
    period: float
    p1_x: float
    ln_p2_s: float
    ln_p3_x: float
    p4_s: float
    converged: bool
    residual: float

    def as_dict(self) -> dict:
        return {
            "x_max": self.x_max,
            "s_max": self.s_max,
            "ln_x_min": self.ln_x_min,
            "ln_s_min": self.ln_s_min,
            "ln_s_max": self.ln_s_max,
            "period": self.period,
            "p1_x": self.p1_x,
            "ln_p2_s": self.ln_p2_s,
            "ln_p3_x": self.ln_p3_x,
            "p4_s": self.p4_s,
            "converged": self.converged,
            "residual": self.residual,
        }


def _one_minus_s_at_h_crossing(u: float, p: Params) -> float:
    """Recover 1 - s at an x = h(s) crossing from the log predator value.

    At the crossing x = (1 - s)(s + a) exactly, so on the right branch
    w = 1 - s solves w^2 - (1 + a) w + x = 0; the stable small-root form
    keeps w meaningful down to e^{-700} where the interpolated v
    coordinate has long hit the double spacing at 1.
    """
    x = math.exp(u)
    disc = (1.0 + p.a) ** 2 - 4.0 * x
    return 2.0 * x / ((1.0 + p.a) + math.sqrt(max(disc, 0.0)))


def _region_from_log(u: float, v: float, p: Params) -> Region:
    s_side = v - math.log(p.lam)
    hs = h(math.exp(min(v, 150.0)), p)
    x_side = math.inf if hs <= 0 else u - math.log(hs)
    if x_side == 0 and s_side == 0:
        return Region.EQUILIBRIUM
    if s_side == 0:
        return Region.ON_ISOCLINE_LAMBDA
    if x_side == 0:
        return Region.ON_ISOCLINE_H
    if x_side > 0:
        return Region.R1 if s_side > 0 else Region.R2
    return Region.R3 if s_side < 0 else Region.R4


def _sign(x: float) -> int:
    return int(x > 0) - int(x < 0)


def _field(p: Params) -> Callable[[float, np.ndarray], np.ndarray]:
    a, lam, m = p.a, p.lam, p.m

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        u = y[0]
        v = y[1]
        s = math.exp(v if v < 150.0 else 150.0)
        x = math.exp(u if u < 150.0 else 150.0)
        return np.array([m * (s - lam), (1.0 - s) * (s + a) - x])

    return rhs


def _locate(g: Callable, dense, t_lo: float, t_hi: float) -> float:
    """Bisect a bracketed sign change of g on the dense interpolant.

    Refines to the 1e-12 time tolerance (or float spacing at large tau,
    whichever is coarser) and returns the bracket end on the new side so
    the post-event sign is consistent.
    """
    g_lo = g(dense(t_lo))
    if _sign(g_lo) == 0:
        return t_lo
    tol = max(_EVENT_TAU_TOL, 8.0 * np.finfo(float).eps * abs(t_hi))
    while t_hi - t_lo > tol:
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid <= t_lo or t_mid >= t_hi:
            break
        if _sign(g(dense(t_mid))) == _sign(g_lo):
            t_lo = t_mid
        else:
            t_hi = t_mid
    return t_hi


def integrate(
    start: Union[State, LogState],
    p: Params,
    cfg: Optional[SimConfig] = None,
    stop: Optional[Callable[[Event], bool]] = None,
    *,
    t_max: float = math.inf,
    keep_samples: bool = True,
) -> Trajectory:
    """Integrate the log-space field, recording isocline crossings.

    start may be a phase point or its log image.  Every accepted step is
    checked for sign changes of v - ln(lam) and u - ln(h(e^v)); each
    crossing is located by bisection on the step's dense interpolant and
    appended as an :class:`Event` once the trajectory commits to the new
    side (hysteresis suppresses the roundoff-scale sign chatter of
    canard segments grazing the isocline).  ``stop(event)`` returning
    True ends the run at that event (the trajectory is cut there);
    otherwise integration continues until t_max.

    Raises StepLimitError/StepSizeError on budget exhaustion or a solver
    stall, so a silently truncated trajectory is never returned.
    """
    cfg = cfg or SimConfig()
    if p.limit:
        raise ValueError("simulation requires strictly positive parameters")
    if not p.cycle_regime:
        raise ValueError("simulation requires the cycle regime 2*lam + a < 1")
    ls = start.log() if isinstance(start, State) else start
    y0 = np.array([ls.u, ls.v])
    solver = RK45(
        _field(p), 0.0, y0, t_bound=t_max, rtol=cfg.rtol, atol=cfg.atol_log
    )
    ln_lam = math.log(p.lam)

    def g_lam(y) -> float:
        return y[1] - ln_lam

    def g_h(y) -> float:
        s = math.exp(y[1] if y[1] < 150.0 else 150.0)
        hs = (1.0 - s) * (s + p.a)
        if hs <= 0.0:
            return math.inf  # s >= 1 can only sit on the x > h side
        return y[0] - math.log(hs)

    checks = (
        (g_lam, {-1: EventKind.S_EQ_LAMBDA_DOWN, 1: EventKind.S_EQ_LAMBDA_UP}),
        (g_h, {-1: EventKind.X_EQ_H_MIN, 1: EventKind.X_EQ_H_MAX}),
    )
    # hysteresis state per event function: the side the trajectory is
    # committed to (0 until it first clears the arming threshold) and
    # the located-but-unconfirmed crossing of the current excursion
    ref_side = [0, 0]
    pending: list[Optional[Event]] = [None, None]
    for idx, (g, _) in enumerate(checks):
        val = g(y0)
        if abs(val) > _EVENT_ARM:
            ref_side[idx] = _sign(val)

    taus = [0.0]
    pts = [(y0[0], y0[1])]
    events: list[Event] = []
    steps = 0

    def cut_at(ev: Event) -> Trajectory:
        while taus and taus[-1] >= ev.tau:
            taus.pop()
            pts.pop()
        taus.append(ev.tau)
        pts.append((ev.state.u, ev.state.v))
        return Trajectory(np.array(taus), np.array(pts), events)

    while solver.status == "running":
        if steps >= cfg.max_steps:
            raise StepLimitError(
                f"no stop event within {cfg.max_steps} steps (tau = {solver.t:.6g})"
            )
        t_old = solver.t
        solver.step()
        steps += 1
        if solver.status == "failed":
            raise StepSizeError(
                f"step size underflow at tau = {solver.t:.6g}; "
                "the requested tolerance or stop condition is unreachable"
            )
        y = solver.y
        confirmed: list[Event] = []
        dense = None
        for idx, (g, kinds) in enumerate(checks):
            val = g(y)
            side = _sign(val)
            if side == 0:
                continue
            if ref_side[idx] == 0:
                if abs(val) > _EVENT_ARM:
                    ref_side[idx] = side
                continue
            if side == ref_side[idx]:
                pending[idx] = None  # excursion fell back, no transition
                continue
            if pending[idx] is None:
                if dense is None:
                    dense = solver.dense_output()
                te = _locate(g, dense, t_old, solver.t)
                ue, ve = dense(te)
                pending[idx] = Event(te, LogState(float(ue), float(ve)), kinds[side])
            if abs(val) > _EVENT_ARM:
                confirmed.append(pending[idx])
                ref_side[idx] = side
                pending[idx] = None
        confirmed.sort(key=lambda ev: ev.tau)
        for ev in confirmed:
            events.append(ev)
            if stop is not None and stop(ev):
                if keep_samples:
                    return cut_at(ev)
                return Trajectory(
                    np.array([ev.tau]),
                    np.array([(ev.state.u, ev.state.v)]),
                    events,
                )
        if keep_samples:
            taus.append(solver.t)
            pts.append((y[0], y[1]))
        else:
            taus[-1] = solver.t
            pts[-1] = (y[0], y[1])
    # reached t_max
    return Trajectory(np.array(taus), np.array(pts), events)


def _stop_on_kind(kind: EventKind) -> Callable[[Event], bool]:
    return lambda ev: ev.kind is kind


def transit_points(p: Params, s0: float, cfg: Optional[SimConfig] = None) -> TransitPoints:
    """One tour from the isocline start (h(s0), s0) through all four crossings.

    Returns the predator value at the descending s = lam crossing, the
    log prey minimum, the log predator value back at s = lam and the
    prey value where the trajectory regains the isocline.
    """
    cfg = cfg or SimConfig()
    if not (p.lam < s0 < 1.0):
        raise ValueError(f"need lam < s0 < 1, got {s0!r}")
    start = State(h(s0, p), s0)
    # run through to the second descending section crossing so that any
    # saddle-passage re-crossing pairs around the prey maximum have
    # resolved, then reduce to the net crossing sequence
    downs = [0]

    def stop(ev: Event) -> bool:
        if ev.kind is EventKind.S_EQ_LAMBDA_DOWN:
            downs[0] += 1
        return downs[0] >= 2

    traj = integrate(start, p, cfg, stop=stop, keep_samples=False)
    reduced = traj.net_events()
    kinds = tuple(ev.kind for ev in reduced[:4])
    if kinds != _CYCLE_ORDER:
        raise EventOrderError(f"expected crossings {_CYCLE_ORDER}, got {kinds}")
    e1, e2, e3, e4 = reduced[:4]
    return TransitPoints(
        x1=math.exp(e1.state.u),
        ln_s2=e2.state.v,
        ln_x3=e3.state.u,
        s4=1.0 - _one_minus_s_at_h_crossing(e4.state.u, p),
    )


def _section_tour(p: Params, cfg: SimConfig, ln_x: float, keep_samples: bool) -> Trajectory:
    """One full loop from the section {s = lam, s falling} back to itself."""
    start = LogState(ln_x, math.log(p.lam))
    return integrate(
        start,
        p,
        cfg,
        stop=_stop_on_kind(EventKind.S_EQ_LAMBDA_DOWN),
        keep_samples=keep_samples,
    )


def limit_cycle(
    p: Params, cfg: Optional[SimConfig] = None, x0: Optional[float] = None
) -> CycleExtremes:
    """Locate the limit cycle and report its extremes.

    Iterates the return map on the section from x0 (default: the
    closed-form x_max upper bound, which starts strictly outside the
    cycle) until successive section values agree to cycle_tol in ln x,
    then records one instrumented loop.  If the iteration budget runs
    out, the best iterate's loop is still reported with
    ``converged=False``.
    """
    cfg = cfg or SimConfig()
    ln_x = math.log(x0 if x0 is not None else x_max_upper(p))
    converged = False
    for _ in range(cfg.max_return_iters):
        tour = _section_tour(p, cfg, ln_x, keep_samples=False)
        ln_x_next = tour.events[-1].state.u
        delta = ln_x_next - ln_x
        ln_x = ln_x_next
        if abs(delta) <= cfg.cycle_tol:
            converged = True
            break
    loop = _section_tour(p, cfg, ln_x, keep_samples=True)
    reduced = loop.net_events()
    kinds = tuple(ev.kind for ev in reduced)
    expected = _CYCLE_ORDER[1:] + _CYCLE_ORDER[:1]  # MIN, UP, MAX, DOWN
    if kinds != expected:
        raise EventOrderError(f"expected crossings {expected}, got {kinds}")
    ev_min, ev_up, ev_max, ev_down = reduced
    x_max = math.exp(ev_down.state.u)
    one_minus_s = _one_minus_s_at_h_crossing(ev_max.state.u, p)
    return CycleExtremes(
        x_max=x_max,
        s_max=1.0 - one_minus_s,
        ln_x_min=ev_up.state.u,
        ln_s_min=ev_min.state.v,
        ln_s_max=math.log1p(-one_minus_s),
        period=ev_down.tau,
        p1_x=x_max,
        ln_p2_s=ev_min.state.v,
        ln_p3_x=ev_up.state.u,
        p4_s=1.0 - one_minus_s,
        converged=converged,
        residual=abs(ev_down.state.u - ln_x),
    )


@dataclass(frozen=True)
class CycleReport:
    """Simulated extremes next to their bounds, with signed margins.

    Margins are log-space distances from the simulated value to each
    bound, positive when the value is strictly inside.  The six flags
    split the four extreme checks the way the sweep counts them: both
    sides of x_max, the two log minima as intervals, both sides of
    s_max.  ``passed`` additionally requires return-map convergence.
    """

    params: Params
    bounds: BoundSet
    extremes: CycleExtremes
    margins: dict
    flags: dict
    min_margin: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "bounds": self.bounds.as_dict(),
            "extremes": self.extremes.as_dict(),
            "margins": dict(self.margins),
            "flags": dict(self.flags),
            "min_margin": self.min_margin,
            "passed": self.passed,
        }


def cycle_extreme_report(
    p: Params,
    cfg: Optional[SimConfig] = None,
    s0: float = 0.8,
    force: bool = False,
) -> CycleReport:
    """Merge :func:`limit_cycle` output with :func:`cycle_bounds`."""
    b = cycle_bounds(p, s0=s0, force=force)
    ce = limit_cycle(p, cfg)
    ln_x_max = math.log(ce.x_max)
    ln_s_max = ce.ln_s_max
    margins = {
        "x_max_lo": ln_x_max - math.log(b.x_max_lo),
        "x_max_hi": math.log(b.x_max_hi) - ln_x_max,
        "x_min_lo": ce.ln_x_min - b.ln_x_min_lo,
        "x_min_hi": b.ln_x_min_hi - ce.ln_x_min,
        "s_min_lo": ce.ln_s_min - b.ln_s_min_lo,
        "s_min_hi": b.ln_s_min_hi - ce.ln_s_min,
        "s_max_lo": ln_s_max - math.log(b.s_max_lo),
        "s_max_hi": math.log(b.s_max_hi) - ln_s_max,
    }
    flags = {
        "x_max_above_lo": margins["x_max_lo"] > 0,
        "x_max_below_hi": margins["x_max_hi"] > 0,
        "x_min_inside": margins["x_min_lo"] > 0 and margins["x_min_hi"] > 0,
        "s_min_inside": margins["s_min_lo"] > 0 and margins["s_min_hi"] > 0,
        "s_max_above_lo": margins["s_max_lo"] > 0,
        "s_max_below_hi": margins["s_max_hi"] > 0,
    }
    min_margin = min(margins.values())
    return CycleReport(
        params=p,
        bounds=b,
        extremes=ce,
        margins=margins,
        flags=flags,
        min_margin=min_margin,
        passed=all(flags.values()) and ce.converged,
    )

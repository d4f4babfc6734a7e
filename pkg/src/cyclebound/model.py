"""Nondimensional predator-prey model: parameters, vector fields, regions.

The dynamics are

    ds/dtau = (h(s) - x) s,        h(s) = (1 - s)(s + a),
    dx/dtau = m (s - lam) x,

with prey density s, predator density x and positive parameters
(a, lam, m).  A unique attracting limit cycle surrounds the interior
equilibrium whenever 2*lam + a < 1.  Everything downstream (closed-form
bounds, simulation, sweeps) works on this nondimensional form; the
dimensional six-parameter model enters only through
:func:`nondimensionalize`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

__all__ = [
    "Params",
    "RMParams",
    "State",
    "LogState",
    "Region",
    "h",
    "vector_field",
    "log_vector_field",
    "phase_slope",
    "classify_region",
    "equilibrium",
    "nondimensionalize",
    "params_from_json",
]

# exp() arguments are clipped here so the log-space field stays finite for
# any float input (adaptive solvers probe far outside the invariant region)
_EXP_CLIP = 150.0


def _exp_clipped(w: float) -> float:
    return math.exp(w if w < _EXP_CLIP else _EXP_CLIP)


@dataclass(frozen=True)
class Params:
    """Nondimensional parameter triple.

    a: half-saturation prey density relative to carrying capacity.
    lam: prey density at which the predator breaks even.
    m: predator-to-prey time-scale ratio.

    All three must be strictly positive unless ``limit=True``, which
    admits zeros so that closed-form bounds can be evaluated in the
    m -> 0 and a, lam -> 0 limits.  Limit-mode parameter sets are
    rejected by the simulator.

    The constructor caches the quantities that gate everything
    downstream: h(lam), the Hopf margin 1 - 2*lam - a, the cycle-regime
    flag, and whether (a, lam) lies in the box where the full set of
    bounds is proved.
    """

    a: float
    lam: float
    m: float
    limit: bool = False
    h_lam: float = field(init=False, repr=False, compare=False)
    hopf_margin: float = field(init=False, repr=False, compare=False)
    cycle_regime: bool = field(init=False, repr=False, compare=False)
    proven_region: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        for name in ("a", "lam", "m"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val)):
                raise ValueError(f"{name} must be a finite number, got {val!r}")
            if val < 0.0 or (val == 0.0 and not self.limit):
                raise ValueError(
                    f"{name} must be > 0 (use limit=True to evaluate "
                    f"closed forms at {name} = 0), got {val!r}"
                )
        object.__setattr__(self, "h_lam", (1.0 - self.lam) * (self.lam + self.a))
        object.__setattr__(self, "hopf_margin", 1.0 - 2.0 * self.lam - self.a)
        object.__setattr__(self, "cycle_regime", self.hopf_margin > 0.0)
        object.__setattr__(
            self,
            "proven_region",
            (self.a <= 0.05 and self.lam <= 0.05)
            or (self.a <= 0.1 and self.lam <= 0.01),
        )

    def as_dict(self) -> dict:
        return {"a": self.a, "lambda": self.lam, "m": self.m}


@dataclass(frozen=True)
class RMParams:
    """Dimensional Rosenzweig-MacArthur rates and capacities.

    r: prey intrinsic growth rate, K: prey carrying capacity,
    q: maximal predator consumption rate, H: half-saturation prey amount,
    p: conversion efficiency rate, d: predator per-capita death rate.

    q cancels from the nondimensional system; it is kept only for input
    fidelity.  p > d is required, otherwise the predator cannot grow on
    any prey density and there is no cycle to bound.
    """

    r: float
    K: float
    q: float
    H: float
    p: float
    d: float

    def __post_init__(self) -> None:
        for name in ("r", "K", "q", "H", "p", "d"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be a positive finite number, got {val!r}")
        if not self.p > self.d:
            raise ValueError(f"p must exceed d, got p={self.p}, d={self.d}")


@dataclass(frozen=True)
class State:
    """Phase point (x, s) in the open positive quadrant."""

    x: float
    s: float

    def __post_init__(self) -> None:
        if not (self.x > 0 and self.s > 0 and math.isfinite(self.x) and math.isfinite(self.s)):
            raise ValueError(f"state must have finite x > 0 and s > 0, got ({self.x}, {self.s})")

    def log(self) -> "LogState":
        return LogState(math.log(self.x), math.log(self.s))


@dataclass(frozen=True)
class LogState:
    """Log-space image (u, v) = (ln x, ln s) of a phase point.

    Defined for all real (u, v); the exp-image is positive by
    construction, which is why all integration happens here.
    """

    u: float
    v: float

    def exp(self) -> State:
        return State(math.exp(self.u), math.exp(self.v))


class Region(Enum):
    """Phase-plane regions cut by the isoclines x = h(s) and s = lam.

    The four open regions are visited cyclically R1 -> R2 -> R3 -> R4 by
    every positive non-equilibrium trajectory.  Boundary tags are
    assigned only on exact floating equality; event logic near the
    isoclines belongs to the simulator's root bracketing.
    """

    R1 = "R1"  # x > h(s), s > lam: predator grows, prey declines
    R2 = "R2"  # x > h(s), s < lam: both decline
    R3 = "R3"  # x < h(s), s < lam: predator declines, prey recovers
    R4 = "R4"  # x < h(s), s > lam: both grow
    ON_ISOCLINE_H = "isocline_h"
    ON_ISOCLINE_LAMBDA = "isocline_lambda"
    EQUILIBRIUM = "equilibrium"


def h(s: float, p: Params) -> float:
    """Prey isocline height h(s) = (1 - s)(s + a).

    Defined for any real s; negative values for s > 1 are meaningful to
    callers that clamp their own domains.
    """
    return (1.0 - s) * (s + p.a)


def vector_field(st: State, p: Params) -> tuple[float, float]:
    """Time derivatives (dx/dtau, ds/dtau) at a phase point."""
    return (
        p.m * (st.s - p.lam) * st.x,
        (h(st.s, p) - st.x) * st.s,
    )


def log_vector_field(ls: LogState, p: Params) -> tuple[float, float]:
    """Time derivatives (du/dtau, dv/dtau) of the log variables.

    This is exactly the push-forward of :func:`vector_field` under
    (x, s) = (e^u, e^v):

        du/dtau = m (e^v - lam),    dv/dtau = h(e^v) - e^u.

    Defined for all real (u, v); exp arguments are clipped far outside
    the dynamically reachable region so the field stays finite even at
    the wild trial points an adaptive solver may probe.
    """
    s = _exp_clipped(ls.v)
    x = _exp_clipped(ls.u)
    return (p.m * (s - p.lam), (1.0 - s) * (s + p.a) - x)


def phase_slope(st: State, p: Params) -> float:
    """Phase-plane slope ds/dx = ((h(s) - x) s) / (m x (s - lam)).

    Raises ZeroDivisionError on the predator isocline s = lam where the
    slope is undefined.
    """
    if st.s == p.lam:
        raise ZeroDivisionError("phase slope is undefined on the isocline s = lam")
    return (h(st.s, p) - st.x) * st.s / (p.m * st.x * (st.s - p.lam))


def classify_region(st: State, p: Params) -> Region:
    """Classify a phase point against the two isoclines.

    Exhaustive and mutually exclusive for any positive (x, s); boundary
    tags require exact floating equality.
    """
    on_lam = st.s == p.lam
    on_h = st.x == h(st.s, p)
    if on_lam and on_h:
        return Region.EQUILIBRIUM
    if on_lam:
        return Region.ON_ISOCLINE_LAMBDA
    if on_h:
        return Region.ON_ISOCLINE_H
    if st.x > h(st.s, p):
        return Region.R1 if st.s > p.lam else Region.R2
    return Region.R3 if st.s < p.lam else Region.R4


def equilibrium(p: Params) -> State:
    """The unique interior fixed point ((1 - lam)(lam + a), lam)."""
    return State((1.0 - p.lam) * (p.lam + p.a), p.lam)


def nondimensionalize(rm: RMParams) -> Params:
    """Map dimensional rates/capacities to the nondimensional triple.

    a = H/K, m = (p - d)/r, lam = d H / ((p - d) K).  q drops out.
    """
    if not rm.p > rm.d:
        raise ValueError(f"p must exceed d, got p={rm.p}, d={rm.d}")
    return Params(
        a=rm.H / rm.K,
        lam=rm.d * rm.H / ((rm.p - rm.d) * rm.K),
        m=(rm.p - rm.d) / rm.r,
    )


_ND_KEYS = {"a", "lambda", "m"}
_RM_KEYS = {"r", "K", "q", "H", "p", "d"}


def params_from_json(source: Union[str, Mapping]) -> Params:
    """Load parameters from a JSON record, auto-detected by key set.

    Accepts either the nondimensional record {"a":, "lambda":, "m":} or
    the dimensional one {"r":, "K":, "q":, "H":, "p":, "d":}, as a JSON
    string or an already-parsed mapping.
    """
    record = json.loads(source) if isinstance(source, str) else dict(source)
    keys = set(record)
    if keys == _ND_KEYS:
        return Params(a=float(record["a"]), lam=float(record["lambda"]), m=float(record["m"]))
    if keys == _RM_KEYS:
        return nondimensionalize(RMParams(**{k: float(v) for k, v in record.items()}))
    raise ValueError(
        f"unrecognized parameter record keys {sorted(keys)}; expected "
        f"{sorted(_ND_KEYS)} or {sorted(_RM_KEYS)}"
    )

"""Recovery-branch estimates: why the prey maximum exceeds 0.8.

After its deep excursion the trajectory re-enters the region below the
prey isocline at (x3, lam) with x3 astronomically small and climbs
toward large s.  The argument that it reaches s = s_gamma = 0.7 with a
still-tiny predator value, and from there overshoots s = 0.8, has two
stages:

1. Below a fraction k of the isocline, x < (1-k) h(s), the predator can
   only grow by the integrated factor ``growth_ratio(s)``**(m/k), so the
   hand-off value x_gamma is capped by :func:`handoff_cap`.  Chaining in
   the closed-form x3 bound gives the parameter-monotone
   :func:`handoff_cap_bound` and finally the m-only envelope
   :func:`handoff_cap_envelope`.
2. From (x_gamma, 0.7) a linear comparison system gives the explicit
   prey-maximum lower bound :func:`smax_lower_bound`; its shortfall from
   1 factorizes as alpha1 * alpha2 * alpha3 (:func:`alpha_factors`) and
   stays below 0.2 for every m.

Two parameter boxes are supported, with different barrier fractions:
case A (a, lam <= 1/20, k = 3/4) and case B (a <= 1/10, lam <= 1/100,
k = 2/3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .lvroot import ZIndex, z
from .model import Params, h

__all__ = [
    "Case",
    "Region4Config",
    "AlphaFactors",
    "handoff_cap",
    "x_max_lower_coarse",
    "handoff_cap_bound",
    "handoff_cap_bound_ln",
    "handoff_cap_envelope",
    "growth_ratio",
    "growth_ratio_quadratic",
    "smax_lower_bound",
    "alpha_factors",
    "alpha2_peak",
    "recovery_start_cap",
]

_M_BRANCH = 0.3  # m value separating the two closed-form branches


class Case(Enum):
    """Parameter box selector: A is a, lam <= 1/20; B is a <= 1/10, lam <= 1/100."""

    A = "A"
    B = "B"


_CASE_A_MAX = {Case.A: 0.05, Case.B: 0.1}
_CASE_K = {Case.A: 0.75, Case.B: 2.0 / 3.0}
_CASE_KAPPA = {Case.A: 0.4, Case.B: 0.5}

# handoff_cap_envelope coefficients (x_gamma <= (c0 + c1 m) exp(c2 m + c3)),
# one (low-m, high-m) pair per case
_ENVELOPE = {
    Case.A: ((0.324, 0.404, 1.099, -2.631), (0.190, 0.681, -2.048, -1.789)),
    Case.B: ((0.350, 0.563, 1.113, -2.295), (0.201, 0.832, -2.048, -1.652)),
}

# closed-form caps on the recovery start value x3: (c, r) meaning c * exp(-r / h(lam)),
# again one (low-m, high-m) pair per case
_START_CAP = {
    Case.A: ((0.324, 0.25), (0.383, 0.343)),
    Case.B: ((0.350, 0.25), (0.428, 0.383)),
}


@dataclass(frozen=True)
class Region4Config:
    """Barrier fraction k, hand-off level s_gamma and split kappa for one case.

    The values are pinned per case (k = 3/4, kappa = 2/5 for A and
    k = 2/3, kappa = 1/2 for B, with s_gamma = 0.7 for both); use
    :meth:`for_case` rather than spelling them out.
    """

    k: float
    s_gamma: float
    kappa: float
    case: Case

    def __post_init__(self) -> None:
        if not (0.0 < self.k < 1.0 and 0.0 < self.kappa < 1.0):
            raise ValueError("k and kappa must lie in (0, 1)")
        if not 0.5 < self.s_gamma < 1.0:
            raise ValueError(f"s_gamma must lie in (0.5, 1), got {self.s_gamma!r}")
        if self.k != _CASE_K[self.case] or self.kappa != _CASE_KAPPA[self.case]:
            raise ValueError(
                f"case {self.case.value} pins k = {_CASE_K[self.case]!r} and "
                f"kappa = {_CASE_KAPPA[self.case]!r}"
            )

    @classmethod
    def for_case(cls, case: Case | str) -> "Region4Config":
        case = Case(case) if not isinstance(case, Case) else case
        return cls(k=_CASE_K[case], s_gamma=0.7, kappa=_CASE_KAPPA[case], case=case)

    @property
    def a_max(self) -> float:
        return _CASE_A_MAX[self.case]


@dataclass(frozen=True)
class AlphaFactors:
    """Factorization of the prey-maximum shortfall bound.

    alpha = alpha1 * alpha2 * alpha3 is an upper estimate of 1 - s_max
    for the trajectory handed off at (x_gamma, s_gamma); delta is the
    linear-system drop 1 - s_gamma - x_gamma/(m + M).
    """

    alpha1: float
    alpha2: float
    alpha3: float
    alpha: float
    delta: float
    M: float
    x_gamma: float

    def as_dict(self) -> dict:
        return {
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "alpha3": self.alpha3,
            "alpha": self.alpha,
            "delta": self.delta,
            "M": self.M,
            "x_gamma": self.x_gamma,
        }


def handoff_cap(p: Params, cfg: Region4Config, x3: float) -> float:
    """Cap on the predator value at the hand-off level s_gamma.

    Linear in the start value x3, with the amplification factor

        (e^{lam/s_gamma} (s_gamma + a) / (1 - s_gamma) / (a + lam))^(m/k)

    evaluated in log space since m/k can make it astronomically large.
    """
    if not p.cycle_regime:
        raise ValueError("hand-off cap requires the cycle regime 2*lam + a < 1")
    if not x3 > 0:
        raise ValueError(f"x3 must be positive, got {x3!r}")
    ln_gain = (p.m / cfg.k) * (
        p.lam / cfg.s_gamma
        + math.log(cfg.s_gamma + p.a)
        - math.log(1.0 - cfg.s_gamma)
        - math.log(p.a + p.lam)
    )
    return math.exp(ln_gain + math.log(x3))


def x_max_lower_coarse(p: Params, cfg: Region4Config) -> float:
    """Linear-in-m lower estimate c0 + m c of the x_max lower bound.

    Freezes the barrier anchor at the parabola vertex for the worst
    allowed a when m < 0.3 and at z = 0.8 otherwise, so only lam and m
    remain:

        m < 0.3:   1/4 + m ((1-a_max)/2 - lam (1 - ln lam + ln (1-a_max)/2))
        m >= 0.3:  h(0.8) + m (0.8 - lam (1 - ln lam + ln 0.8)).
    """
    if not p.cycle_regime:
        raise ValueError("coarse x_max lower bound requires the cycle regime")
    lam = p.lam
    if p.m < _M_BRANCH:
        anchor = 0.5 * (1.0 - cfg.a_max)
        c0 = 0.25
    else:
        anchor = 0.8
        c0 = h(0.8, p)
    lam_term = 0.0 if lam == 0.0 else lam * (1.0 - math.log(lam) + math.log(anchor))
    return c0 + p.m * (anchor - lam_term)


def handoff_cap_bound_ln(p: Params, cfg: Region4Config) -> float:
    """Log of :func:`handoff_cap_bound` (the value underflows deep in the
    case boxes, where the exponent drops below -1400)."""
    x1t = x_max_lower_coarse(p, cfg)
    if not x1t > p.h_lam:
        raise ValueError(
            f"coarse x_max estimate {x1t!r} must exceed h(lam) = {p.h_lam!r}"
        )
    ln_gain = (p.m / cfg.k) * (
        p.lam / cfg.s_gamma
        + math.log(cfg.s_gamma + p.a)
        - math.log(1.0 - cfg.s_gamma)
        - math.log(p.a + p.lam)
    )
    z2 = z(ZIndex.Z2, x1t / p.h_lam)
    return ln_gain + math.log(z2) + math.log(x1t) - x1t / p.h_lam


def handoff_cap_bound(p: Params, cfg: Region4Config) -> float:
    """Closed-form upper estimate of the hand-off cap.

    Replaces x3 in :func:`handoff_cap` by its chained closed-form bound
    z2(x1t/h(lam)) x1t e^{-x1t/h(lam)} with x1t the coarse x_max lower
    estimate.  Nondecreasing in both a and lam on each case box, which
    is what lets a single corner evaluation dominate the whole box.
    """
    return math.exp(handoff_cap_bound_ln(p, cfg))


def handoff_cap_envelope(m: float, case: Case | str) -> float:
    """Parameter-free envelope of the hand-off cap, a function of m only.

    Piecewise closed form with the deliberate (tiny) discontinuity at
    m = 0.3 left exactly as the two branch constants produce it:

        case A:  (0.324 + 0.404 m) e^{1.099 m - 2.631}    m <= 0.3
                 (0.190 + 0.681 m) e^{-2.048 m - 1.789}   m > 0.3
        case B:  (0.350 + 0.563 m) e^{1.113 m - 2.295}    m <= 0.3
                 (0.201 + 0.832 m) e^{-2.048 m - 1.652}   m > 0.3.
    """
    if not m >= 0:
        raise ValueError(f"m must be nonnegative, got {m!r}")
    case = Case(case) if not isinstance(case, Case) else case
    low, high = _ENVELOPE[case]
    c0, c1, c2, c3 = low if m <= _M_BRANCH else high
    return (c0 + c1 * m) * math.exp(c2 * m + c3)


def growth_ratio(s: float, p: Params) -> float:
    """Integrated predator growth factor base B(s) below the barrier.

    While x < (1-k) h(s) the predator satisfies x < x3 B(s)^(m/k) with

        B = ((s+a)/s)^{k2} (lam/(lam+a))^{k2}
            ((1-lam)(s+a)/(1-s))^{k3} (1/(lam+a))^{k3},

    k2 = lam/a, k3 = (1-lam)/(1+a).  Computed in log space; B -> 1 as
    s -> lam (it is a ratio of antiderivative values at s and lam).
    """
    if not (p.lam < s < 1.0):
        raise ValueError(f"need lam < s < 1, got s = {s!r}")
    a, lam = p.a, p.lam
    k2 = lam / a
    k3 = (1.0 - lam) / (1.0 + a)
    ln_b = k2 * (math.log(s + a) - math.log(s) + math.log(lam) - math.log(lam + a))
    ln_b += k3 * (
        math.log(1.0 - lam) + math.log(s + a) - math.log(1.0 - s) - math.log(lam + a)
    )
    return math.exp(ln_b)


def growth_ratio_quadratic(s: float, p: Params, k: float, m: float) -> float:
    """Convex quadratic whose sign drives the barrier-ratio monotonicity.

        G*(s) = 2 (k/m) s^2 + (a k/m - k/m + 1) s - lam.

    G*(lam) < 0 < G*(1) in the cycle regime, so B^(m/k)/h has a single
    interior minimum and its maximum over [lam, s_gamma] sits at an
    endpoint.
    """
    if m == 0:
        raise ValueError("m must be nonzero")
    km = k / m
    return 2.0 * km * s * s + (p.a * km - km + 1.0) * s - p.lam


def smax_lower_bound(x_gamma: float, s_gamma: float, M: float, m: float) -> float:
    """Prey-maximum lower bound from the linear comparison system.

    The trajectory from (x_gamma, s_gamma) stays above the orbit of
    s' = M(1-s) - x, x' = m x as long as x < M(1-s), and leaves that
    wedge at

        s = 1 - ((-d)^m x_gamma^M (m+M)^m / (M^M m^m))^(1/(M+m)),
        d = s_gamma + x_gamma/(m+M) - 1,

    evaluated through logarithms since the exponents span orders of
    magnitude.  Requires x_gamma < M (1 - s_gamma) so that d < 0.
    """
    if not (0.0 < M <= s_gamma < 1.0):
        raise ValueError(f"need 0 < M <= s_gamma < 1, got M={M!r}, s_gamma={s_gamma!r}")
    if not m > 0:
        raise ValueError(f"m must be positive, got {m!r}")
    if not 0.0 < x_gamma < M * (1.0 - s_gamma):
        raise ValueError(
            f"need 0 < x_gamma < M (1 - s_gamma) = {M * (1.0 - s_gamma)!r}, "
            f"got {x_gamma!r}"
        )
    d = s_gamma + x_gamma / (m + M) - 1.0
    ln_term = (
        m * math.log(-d)
        + M * math.log(x_gamma)
        + m * math.log(m + M)
        - M * math.log(M)
        - m * math.log(m)
    ) / (M + m)
    return 1.0 - math.exp(ln_term)


def alpha_factors(m: float, cfg: Region4Config) -> AlphaFactors:
    """Shortfall factorization with x_gamma taken from the envelope.

    With M = s_gamma and delta = 1 - s_gamma - x_gamma/(m+M):

        alpha1 = delta^(m/(m+M)),
        alpha2 = (x_gamma/M)^(M/(m+M)),
        alpha3 = ((m+M)/m)^(m/(m+M)),

    and 1 - alpha equals :func:`smax_lower_bound` at the same inputs.
    """
    if not m > 0:
        raise ValueError(f"m must be positive, got {m!r}")
    x_gamma = handoff_cap_envelope(m, cfg.case)
    M = cfg.s_gamma
    delta = 1.0 - cfg.s_gamma - x_gamma / (m + M)
    if delta <= 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    e1 = m / (m + M)
    e2 = M / (m + M)
    alpha1 = delta**e1
    alpha2 = math.exp(e2 * (math.log(x_gamma) - math.log(M)))
    alpha3 = ((m + M) / m) ** e1
    return AlphaFactors(
        alpha1=alpha1,
        alpha2=alpha2,
        alpha3=alpha3,
        alpha=alpha1 * alpha2 * alpha3,
        delta=delta,
        M=M,
        x_gamma=x_gamma,
    )


def _alpha2_stationarity(m: float, abar: float, bbar: float, cbar: float, M: float) -> float:
    # u(m) = (m+M) x'/x - ln(x/M) for x = (abar m + bbar) e^{-cbar m};
    # strictly decreasing, so its root is the single peak of alpha2
    lin = abar * m + bbar
    return (
        (m + M) * (abar - bbar * cbar - abar * cbar * m) / lin
        + cbar * m
        - math.log(lin)
        + math.log(M)
    )


def alpha2_peak(case: Case | str, M: float = 0.7) -> float:
    """The m at which the middle shortfall factor alpha2 peaks (m > 0.3).

    Uses the high-m envelope branch written as x_gamma = (abar m + bbar)
    e^{-cbar m} with the additive exponent constant folded into abar and
    bbar.  The stationarity function is strictly decreasing in m, so a
    sign-change bracket plus bisection-safeguarded root finding is
    exact; raises if no sign change exists on (0.3, 60].
    """
    case = Case(case) if not isinstance(case, Case) else case
    c0, c1, c2, c3 = _ENVELOPE[case][1]
    scale = math.exp(c3)
    abar, bbar, cbar = c1 * scale, c0 * scale, -c2
    lo, hi = _M_BRANCH + 1e-9, 60.0
    f_lo = _alpha2_stationarity(lo, abar, bbar, cbar, M)
    f_hi = _alpha2_stationarity(hi, abar, bbar, cbar, M)
    if not (f_lo > 0 > f_hi):
        raise ValueError(f"no peak bracket on ({lo}, {hi}): f = ({f_lo!r}, {f_hi!r})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _alpha2_stationarity(mid, abar, bbar, cbar, M) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * hi:
            break
    return 0.5 * (lo + hi)


def recovery_start_cap(p: Params, cfg: Region4Config) -> float:
    """Closed-form cap on the recovery start value x3, per case and m branch.

    Dominates the chained x_min upper bound on each case box and is what
    certifies the barrier precondition x3 < (1-k) h(lam):

        case A:  0.324 e^{-1/(4 h(lam))}   (m <= 0.3),
                 0.383 e^{-0.343/h(lam)}   (m > 0.3),
        case B:  0.350 e^{-1/(4 h(lam))},  0.428 e^{-0.383/h(lam)}.
    """
    low, high = _START_CAP[cfg.case]
    c, r = low if p.m <= _M_BRANCH else high
    return c * math.exp(-r / p.h_lam)

"""Sweep verification, proof spot-checks and figure-data emission.

Everything here is about confronting the closed-form bounds with the
simulated cycle (and with each other) over parameter grids:

* :func:`run_sweep` simulates the cycle at every grid point, merges it
  with the bounds and reports one pass/fail row per point, in a CSV
  whose layout is stable byte for byte regardless of worker count.
* :func:`proof_spotchecks` numerically samples the sign conditions and
  monotonicity claims the closed forms rest on (these are confidence
  checks on dense grids, not certified interval arithmetic).
* :func:`emit_figures` writes bound-versus-simulation curves over m for
  a set of parameter panels.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Optional, Sequence, Union

import numpy as np

from .bounds import x_max_upper_linear, x_max_upper_refined
from .model import Params, State, h
from .region4 import (
    Case,
    Region4Config,
    alpha2_peak,
    alpha_factors,
    growth_ratio_quadratic,
    handoff_cap_bound,
    handoff_cap_envelope,
)
from .simulator import (
    CycleReport,
    EventKind,
    IntegrationError,
    SimConfig,
    cycle_extreme_report,
    integrate,
)

__all__ = [
    "SweepSpec",
    "SweepRow",
    "SweepReport",
    "LyapunovReport",
    "CheckResult",
    "ProofCheckReport",
    "DEFAULT_PANELS",
    "run_sweep",
    "x_max_barrier_coefficients",
    "lyapunov_checks",
    "proof_spotchecks",
    "emit_figures",
    "sweep_row_from_report",
]

CSV_HEADER = (
    "a,lambda,m,proven,x_max_lo,x_max,x_max_hi,ln_x_min_lo,ln_x_min,ln_x_min_hi,"
    "ln_s_min_lo,ln_s_min,ln_s_min_hi,s_max,converged,min_margin,pass"
)

DEFAULT_PANELS: tuple[tuple[float, float], ...] = (
    (0.05, 0.05),
    (0.1, 0.01),
    (0.1, 0.1),
    (0.02, 0.02),
)

_EXPECTED_ALPHA2_PEAK = {Case.A: 4.11, Case.B: 3.06}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian parameter grid plus simulation settings for a sweep."""

    a_values: tuple[float, ...]
    lambda_values: tuple[float, ...]
    m_values: tuple[float, ...]
    s0: float = 0.8
    sim: SimConfig = field(default_factory=SimConfig)
    jobs: int = 1

    def __post_init__(self) -> None:
        for name in ("a_values", "lambda_values", "m_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise ValueError(f"{name} must be non-empty")
            object.__setattr__(self, name, vals)
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @classmethod
    def from_json(cls, record: dict) -> "SweepSpec":
        sim_record = dict(record.get("sim", {}))
        sim = SimConfig.from_env(**sim_record)
        return cls(
            a_values=tuple(record["a_values"]),
            lambda_values=tuple(record["lambda_values"]),
            m_values=tuple(record["m_values"]),
            s0=float(record.get("s0", 0.8)),
            sim=sim,
            jobs=int(record.get("jobs", 1)),
        )

    def grid(self) -> list[tuple[float, float, float]]:
        return [
            (a, lam, m)
            for a in sorted(self.a_values)
            for lam in sorted(self.lambda_values)
            for m in sorted(self.m_values)
        ]


@dataclass(frozen=True)
class SweepRow:
    """One grid point: bounds, simulated extremes and pass bookkeeping."""

    a: float
    lam: float
    m: float
    proven: bool
    x_max_lo: float
    x_max: float
    x_max_hi: float
    ln_x_min_lo: float
    ln_x_min: float
    ln_x_min_hi: float
    ln_s_min_lo: float
    ln_s_min: float
    ln_s_min_hi: float
    s_max: float
    converged: bool
    min_margin: float
    passed: bool
    flags: dict = field(default_factory=dict, compare=False)
    error: Optional[str] = None

    def csv_line(self) -> str:
        return ",".join(
            _fmt(v)
            for v in (
                self.a,
                self.lam,
                self.m,
                self.proven,
                self.x_max_lo,
                self.x_max,
                self.x_max_hi,
                self.ln_x_min_lo,
                self.ln_x_min,
                self.ln_x_min_hi,
                self.ln_s_min_lo,
                self.ln_s_min,
                self.ln_s_min_hi,
                self.s_max,
                self.converged,
                self.min_margin,
                self.passed,
            )
        )


@dataclass
class SweepReport:
    """Ordered sweep rows plus aggregate verdicts.

    Unproven rows (forced evaluation outside the proven parameter box)
    are excluded from the pass statistic by default.
    """

    rows: list[SweepRow]

    def proven_rows(self) -> list[SweepRow]:
        return [r for r in self.rows if r.proven]

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.proven_rows())

    @property
    def any_violation(self) -> bool:
        return any(r.converged and not r.passed for r in self.proven_rows())

    @property
    def any_nonconverged(self) -> bool:
        return any((not r.converged) or r.error is not None for r in self.rows)

    @property
    def exit_code(self) -> int:
        if self.any_violation:
            return 2
        if self.any_nonconverged:
            return 3
        return 0

    def to_csv(self, target: Union[str, Path, IO[str]]) -> None:
        lines = [CSV_HEADER] + [r.csv_line() for r in self.rows]
        text = "\n".join(lines) + "\n"
        if hasattr(target, "write"):
            target.write(text)
        else:
            Path(target).write_text(text)

    def summary(self) -> str:
        proven = self.proven_rows()
        n_pass = sum(r.passed for r in proven)
        return (
            f"{len(self.rows)} rows ({len(proven)} proven), "
            f"{n_pass}/{len(proven)} proven rows pass, "
            f"exit code {self.exit_code}"
        )


def sweep_row_from_report(report: CycleReport) -> SweepRow:
    b, ce = report.bounds, report.extremes
    return SweepRow(
        a=report.params.a,
        lam=report.params.lam,
        m=report.params.m,
        proven=b.proven,
        x_max_lo=b.x_max_lo,
        x_max=ce.x_max,
        x_max_hi=b.x_max_hi,
        ln_x_min_lo=b.ln_x_min_lo,
        ln_x_min=ce.ln_x_min,
        ln_x_min_hi=b.ln_x_min_hi,
        ln_s_min_lo=b.ln_s_min_lo,
        ln_s_min=ce.ln_s_min,
        ln_s_min_hi=b.ln_s_min_hi,
        s_max=ce.s_max,
        converged=ce.converged,
        min_margin=report.min_margin,
        passed=report.passed,
        flags=dict(report.flags),
    )


def _row_task(args: tuple) -> SweepRow:
    a, lam, m, s0, cfg = args
    p = Params(a=a, lam=lam, m=m)
    try:
        report = cycle_extreme_report(p, cfg, s0=s0, force=True)
    except IntegrationError as exc:
        nan = math.nan
        return SweepRow(
            a=a, lam=lam, m=m, proven=p.proven_region,
            x_max_lo=nan, x_max=nan, x_max_hi=nan,
            ln_x_min_lo=nan, ln_x_min=nan, ln_x_min_hi=nan,
            ln_s_min_lo=nan, ln_s_min=nan, ln_s_min_hi=nan,
            s_max=nan, converged=False, min_margin=nan, passed=False,
            error=str(exc),
        )
    return sweep_row_from_report(report)


def run_sweep(spec: SweepSpec) -> SweepReport:
    """Evaluate bounds against the simulated cycle over the whole grid.

    Rows are independent; with jobs > 1 they are distributed over worker
    processes.  The output order is the sorted grid order either way, so
    CSV output is byte-identical for any worker count.  Per-row failures
    are recorded in the row, never abort the sweep.
    """
    tasks = [(a, lam, m, spec.s0, spec.sim) for a, lam, m in spec.grid()]
    if spec.jobs == 1:
        rows = [_row_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            rows = list(pool.map(_row_task, tasks))
    return SweepReport(rows=rows)


def x_max_barrier_coefficients(p: Params) -> tuple[float, float]:
    """Sign-certificate coefficients (C0, C0 + C1) of the x_max barrier.

    The escape barrier behind :func:`cyclebound.bounds.x_max_upper` has
    time derivative proportional to C1 v + C0 on the barrier (v = 1 - s);
    C0 < 0 and C0 + C1 <= 0 pin its sign on 0 <= v <= 1:

        C0 = -m^3 lam (lam^2 - 5 lam + 4) + m^2 lam ((2a+6) lam - 8 - 4a)
             - m lam (3 + 5a + a^2) - 1 - m - a,
        C0 + C1 = -m lam (a + 2 + 2m - m lam)^2.
    """
    a, lam, m = p.a, p.lam, p.m
    c = -m * lam * (3.0 + 5.0 * a + a * a) - 1.0 - m - a
    c0 = (
        -(m**3) * lam * (lam * lam - 5.0 * lam + 4.0)
        + m * m * lam * ((2.0 * a + 6.0) * lam - 8.0 - 4.0 * a)
        + c
    )
    c0_plus_c1 = -m * lam * (a + 2.0 + 2.0 * m - m * lam) ** 2
    return c0, c0_plus_c1


def _c0_grid(a: np.ndarray, lam: np.ndarray, m: float) -> np.ndarray:
    c = -m * lam * (3.0 + 5.0 * a + a * a) - 1.0 - m - a
    return (
        -(m**3) * lam * (lam * lam - 5.0 * lam + 4.0)
        + m * m * lam * ((2.0 * a + 6.0) * lam - 8.0 - 4.0 * a)
        + c
    )


@dataclass(frozen=True)
class LyapunovReport:
    """Worst defects observed along a simulated growth-phase arc.

    min_v2_increment: smallest increment of V2 = m (s - lam ln s) + x
    between consecutive samples (analytically nonnegative while s > lam).
    max_barrier_gap: largest value of x - A v/(1 + B v) (analytically
    negative: the arc stays below the escape barrier it starts under).
    """

    min_v2_increment: float
    max_barrier_gap: float
    n_samples: int


def lyapunov_checks(
    p: Params,
    n_samples: int = 2000,
    cfg: Optional[SimConfig] = None,
    s0: float = 0.8,
) -> LyapunovReport:
    """Check the two barrier facts behind the x_max bounds along one arc.

    Simulates from (h(s0), s0) to the descending s = lam crossing and
    resamples the arc uniformly in time.
    """
    cfg = cfg or SimConfig()
    start = State(h(s0, p), s0)
    traj = integrate(
        start, p, cfg,
        stop=lambda ev: ev.kind is EventKind.S_EQ_LAMBDA_DOWN,
    )
    # the defects are meaningful only at true trajectory points (a chord
    # between accepted steps can dip below the monotone envelope), so
    # n_samples caps how many step samples are kept, never interpolates
    n = len(traj.taus)
    idx = np.unique(np.linspace(0, n - 1, min(n_samples, n)).astype(int))
    x = np.exp(traj.points[idx, 0])
    s = np.exp(traj.points[idx, 1])
    v2 = p.m * (s - p.lam * np.log(s)) + x
    A = 1.0 + p.m + p.a - p.m * p.lam
    B = (1.0 + p.m * p.lam) / (1.0 + p.a + 2.0 * p.m * (1.0 - p.lam))
    vv = 1.0 - s
    barrier_gap = x - A * vv / (1.0 + B * vv)
    return LyapunovReport(
        min_v2_increment=float(np.min(np.diff(v2))),
        max_barrier_gap=float(np.max(barrier_gap)),
        n_samples=len(idx),
    )


@dataclass(frozen=True)
class CheckResult:
    """One named spot-check: margin > 0 (or >= 0 where noted) means proven side."""

    name: str
    passed: bool
    margin: float
    worst_value: float
    worst_arg: tuple

    def line(self) -> str:
        verdict = "ok " if self.passed else "FAIL"
        return (
            f"[{verdict}] {self.name}: margin={self.margin:.6g} "
            f"worst={self.worst_value:.6g} at {self.worst_arg}"
        )


@dataclass(frozen=True)
class ProofCheckReport:
    case: Case
    checks: tuple[CheckResult, ...]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def _check_barrier_coefficients() -> list[CheckResult]:
    a = np.linspace(0.5 / 200, 0.5, 200)
    lam = np.linspace(0.0, 1.0, 200, endpoint=False)
    m_vals = np.linspace(10.0 / 200, 10.0, 200)
    aa, ll = np.meshgrid(a, lam, indexing="ij")
    worst_c0 = -math.inf
    worst_c0_arg = ()
    worst_cc = -math.inf
    worst_cc_arg = ()
    for m in m_vals:
        c0 = _c0_grid(aa, ll, float(m))
        i = np.unravel_index(np.argmax(c0), c0.shape)
        if c0[i] > worst_c0:
            worst_c0 = float(c0[i])
            worst_c0_arg = (float(aa[i]), float(ll[i]), float(m))
        cc = -m * ll * (aa + 2.0 + 2.0 * m - m * ll) ** 2
        j = np.unravel_index(np.argmax(cc), cc.shape)
        if cc[j] > worst_cc:
            worst_cc = float(cc[j])
            worst_cc_arg = (float(aa[j]), float(ll[j]), float(m))
    return [
        CheckResult(
            "barrier_c0_negative",
            passed=worst_c0 < 0,
            margin=-worst_c0,
            worst_value=worst_c0,
            worst_arg=worst_c0_arg,
        ),
        CheckResult(
            "barrier_c0_plus_c1_nonpositive",
            passed=worst_cc <= 0,
            margin=-worst_cc,
            worst_value=worst_cc,
            worst_arg=worst_cc_arg,
        ),
    ]


def _case_box(case: Case) -> tuple[float, float]:
    return (0.05, 0.05) if case is Case.A else (0.1, 0.01)


def _check_gain_quadratic(case: Case) -> list[CheckResult]:
    a_max, lam_max = _case_box(case)
    k = Region4Config.for_case(case).k
    worst_at_lam = (-math.inf, ())
    worst_at_one = (math.inf, ())
    for a in np.linspace(a_max / 40, a_max, 40):
        for lam in np.linspace(lam_max / 40, lam_max, 40):
            p = Params(a=float(a), lam=float(lam), m=1.0)
            for m in np.geomspace(1e-3, 50, 60):
                g_lam = growth_ratio_quadratic(lam, p, k, float(m))
                g_one = growth_ratio_quadratic(1.0, p, k, float(m))
                if g_lam > worst_at_lam[0]:
                    worst_at_lam = (g_lam, (float(a), float(lam), float(m)))
                if g_one < worst_at_one[0]:
                    worst_at_one = (g_one, (float(a), float(lam), float(m)))
    return [
        CheckResult(
            "gain_quadratic_negative_at_lam",
            passed=worst_at_lam[0] < 0,
            margin=-worst_at_lam[0],
            worst_value=worst_at_lam[0],
            worst_arg=worst_at_lam[1],
        ),
        CheckResult(
            "gain_quadratic_positive_at_one",
            passed=worst_at_one[0] > 0,
            margin=worst_at_one[0],
            worst_value=worst_at_one[0],
            worst_arg=worst_at_one[1],
        ),
    ]


def _check_alpha(case: Case) -> CheckResult:
    cfg = Region4Config.for_case(case)
    worst = (-math.inf, ())
    for m in np.geomspace(1e-3, 50, 500):
        al = alpha_factors(float(m), cfg).alpha
        if al > worst[0]:
            worst = (al, (float(m),))
    return CheckResult(
        "alpha_below_0.2",
        passed=worst[0] < 0.2,
        margin=0.2 - worst[0],
        worst_value=worst[0],
        worst_arg=worst[1],
    )


def _check_envelope(case: Case) -> CheckResult:
    cap = 0.05 if case is Case.A else 0.08
    grid = np.concatenate(
        [np.linspace(0.0, 20.0, 4001), [0.3, np.nextafter(0.3, 1.0)]]
    )
    worst = (-math.inf, ())
    for m in grid:
        val = handoff_cap_envelope(float(m), case)
        if val > worst[0]:
            worst = (val, (float(m),))
    return CheckResult(
        "handoff_envelope_cap",
        passed=worst[0] <= cap,
        margin=cap - worst[0],
        worst_value=worst[0],
        worst_arg=worst[1],
    )


def _check_monotonicity(case: Case, step: float = 1e-6) -> CheckResult:
    a_max, lam_max = _case_box(case)
    cfg = Region4Config.for_case(case)
    worst = (math.inf, ())

    def cap(a: float, lam: float, m: float) -> float:
        return handoff_cap_bound(Params(a=a, lam=lam, m=m), cfg)

    for a in np.linspace(2e-3, a_max, 20):
        for lam in np.linspace(2e-3, lam_max, 20):
            for m in np.geomspace(1e-2, 20, 12):
                a, lam, m = float(a), float(lam), float(m)
                d_a = (cap(a + step, lam, m) - cap(a - step, lam, m)) / (2 * step)
                d_lam = (cap(a, lam + step, m) - cap(a, lam - step, m)) / (2 * step)
                for val, tag in ((d_a, "a"), (d_lam, "lam")):
                    if val < worst[0]:
                        worst = (val, (a, lam, m, tag))
    return CheckResult(
        "cap_bound_monotone_in_a_and_lam",
        passed=worst[0] >= -1e-9,
        margin=worst[0] + 1e-9,
        worst_value=worst[0],
        worst_arg=worst[1],
    )


def _check_alpha2_peak(case: Case) -> CheckResult:
    expected = _EXPECTED_ALPHA2_PEAK[case]
    root = alpha2_peak(case)
    err = abs(root - expected)
    return CheckResult(
        "alpha2_peak_location",
        passed=err <= 0.02,
        margin=0.02 - err,
        worst_value=root,
        worst_arg=(expected,),
    )


def proof_spotchecks(case: Union[Case, str]) -> ProofCheckReport:
    """Numerically sample every sign/monotonicity fact the bounds rest on.

    Grid densities are chosen to finish in seconds while comfortably
    exceeding the granularity of the case analysis they probe.  Failures
    are reported in the result, never raised.
    """
    case = Case(case) if not isinstance(case, Case) else case
    checks: list[CheckResult] = []
    checks.extend(_check_barrier_coefficients())
    checks.extend(_check_gain_quadratic(case))
    checks.append(_check_alpha(case))
    checks.append(_check_envelope(case))
    checks.append(_check_monotonicity(case))
    checks.append(_check_alpha2_peak(case))
    return ProofCheckReport(case=case, checks=tuple(checks))


_FIGURES = ("fig2", "fig3", "fig4", "fig5")

_FIGURE_COLUMNS = {
    "fig2": ("m", "x_max_lo", "x_max_hi", "x_max_hi_refined", "x_max_hi_linear", "x_max_sim"),
    "fig3": ("m", "ln_s_min_lo", "ln_s_min_hi", "ln_s_min_sim"),
    "fig4": ("m", "ln_x_min_lo", "ln_x_min_hi", "ln_x_min_sim"),
    "fig5": ("m", "s_max_lo", "s_max_hi", "s_max_sim"),
}


def _figure_values(fig: str, m: float, report: CycleReport, p: Params) -> tuple:
    b, ce = report.bounds, report.extremes
    if fig == "fig2":
        return (
            m, b.x_max_lo, b.x_max_hi,
            x_max_upper_refined(p), x_max_upper_linear(p), ce.x_max,
        )
    if fig == "fig3":
        return (m, b.ln_s_min_lo, b.ln_s_min_hi, ce.ln_s_min)
    if fig == "fig4":
        return (m, b.ln_x_min_lo, b.ln_x_min_hi, ce.ln_x_min)
    return (m, b.s_max_lo, b.s_max_hi, ce.s_max)


def emit_figures(
    which: str,
    out_dir: Union[str, Path],
    *,
    panels: Optional[Sequence[tuple[float, float]]] = None,
    m_values: Optional[Sequence[float]] = None,
    cfg: Optional[SimConfig] = None,
) -> list[Path]:
    """Write bound-versus-simulation curves over m as CSV files.

    ``which`` selects one of fig2 (x_max with all three upper variants),
    fig3 (ln s_min), fig4 (ln x_min), fig5 (s_max), or "all" to share the
    per-panel simulations across all four.  One file per (figure, panel),
    50 log-spaced m in [0.01, 5] by default.  Panels outside the proven
    parameter box are evaluated in forced mode.
    """
    if which != "all" and which not in _FIGURES:
        raise ValueError(f"unknown figure {which!r}; expected one of {_FIGURES} or 'all'")
    figures = _FIGURES if which == "all" else (which,)
    panels = tuple(panels) if panels is not None else DEFAULT_PANELS
    ms = (
        tuple(float(v) for v in m_values)
        if m_values is not None
        else tuple(np.geomspace(0.01, 5.0, 50))
    )
    cfg = cfg or SimConfig.from_env()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for a, lam in panels:
        reports = []
        for m in ms:
            p = Params(a=a, lam=lam, m=m)
            reports.append((m, p, cycle_extreme_report(p, cfg, force=True)))
        for fig in figures:
            lines = [",".join(_FIGURE_COLUMNS[fig])]
            for m, p, report in reports:
                lines.append(
                    ",".join(_fmt(float(v)) for v in _figure_values(fig, m, report, p))
                )
            path = out_dir / f"{fig}_a{a:g}_lambda{lam:g}.csv"
            path.write_text("\n".join(lines) + "\n")
            written.append(path)
    return written

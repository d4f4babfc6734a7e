"""Acceptance gate: every criterion checked end to end at desk scale.

Each test prints one PASS/FAIL line (plus per-clause details) and then
asserts all of its clauses, so `pytest -s tests/test_acceptance.py`
doubles as the acceptance report.  Expected values come from closed-form
arithmetic, independent bisection/integration oracles, or constants
pinned up front; tolerances are all stated inline.
"""

import math
import time

import numpy as np
import pytest

from cyclebound.bounds import canard_estimates, x_max_upper
from cyclebound.harness import SweepSpec, emit_figures, proof_spotchecks, run_sweep
from cyclebound.lvroot import ZIndex, z, z_exact
from cyclebound.model import LogState, Params
from cyclebound.region4 import Case, handoff_cap_envelope, smax_lower_bound
from cyclebound.simulator import (
    EventKind,
    SimConfig,
    cycle_extreme_report,
    integrate,
    limit_cycle,
    transit_points,
)

A_VALUES = (0.01, 0.02, 0.05)
LAMBDA_VALUES = (0.01, 0.02, 0.05)
M_VALUES = (0.01, 0.1, 0.3, 1.0, 2.0, 5.0)
BRANCH_B_POINT = {"a_values": (0.1,), "lambda_values": (0.01,), "m_values": (0.3, 1.0, 3.0)}


def report(num: int, label: str, clauses) -> None:
    """Print the criterion verdict with per-clause details, then assert."""
    ok = all(flag for _, flag, _ in clauses)
    print(f"\n[criterion {num}] {label}: {'PASS' if ok else 'FAIL'}")
    for desc, flag, detail in clauses:
        print(f"    {'ok  ' if flag else 'FAIL'} {desc}: {detail}")
    failed = [desc for desc, flag, _ in clauses if not flag]
    assert ok, f"criterion {num} failed: {failed}"


@pytest.fixture(scope="module")
def grid_sweep():
    spec = SweepSpec(
        a_values=A_VALUES, lambda_values=LAMBDA_VALUES, m_values=M_VALUES
    )
    spec_b = SweepSpec(**BRANCH_B_POINT)
    t0 = time.perf_counter()
    rows = run_sweep(spec).rows + run_sweep(spec_b).rows
    elapsed = time.perf_counter() - t0
    return rows, elapsed


@pytest.fixture(scope="module")
def spotchecks():
    return {case: proof_spotchecks(case) for case in (Case.A, Case.B)}


def test_criterion_1_bound_sandwich_on_grid(grid_sweep):
    rows, elapsed = grid_sweep
    clauses = [
        ("57 grid rows produced", len(rows) == 57, f"{len(rows)} rows"),
        ("all rows proven", all(r.proven for r in rows), ""),
        ("all rows converged", all(r.converged for r in rows), ""),
    ]
    worst = min(rows, key=lambda r: r.min_margin)
    clauses.append(
        (
            "every extreme strictly inside its interval (log margin > 0)",
            all(r.passed and r.min_margin > 0 for r in rows),
            f"worst margin {worst.min_margin:.3e} at "
            f"(a={worst.a}, lam={worst.lam}, m={worst.m})",
        )
    )
    clauses.append(
        ("total runtime < 5 minutes", elapsed < 300.0, f"{elapsed:.1f} s")
    )
    report(1, "bound sandwich on the 54 + 3 point grid", clauses)


def mp_sandwich(y_mp):
    """High-precision oracle: exact factor by bisection plus the three
    closed forms, all in 120-digit arithmetic.

    At double precision the z1-to-exact gap shrinks to O(Y^2) ~ 1e-15
    already by y ~ 20, so the slack >= 0 claim is only checkable in
    extended precision; 120 digits keeps the quadratic closed forms
    accurate even at y = 100 where z - 1 ~ 1e-41.
    """
    import mpmath as mp

    target = y_mp - mp.log(y_mp)
    lo, hi = mp.mpf("1e-60"), mp.mpf(1)
    for _ in range(420):
        mid = (lo + hi) / 2
        if mid - mp.log(mid) - target > 0:
            lo = mid
        else:
            hi = mid
    root = (lo + hi) / 2
    residual = abs(root - mp.log(root) - target)
    Y = y_mp * mp.exp(-y_mp)
    zx = root / Y
    e = mp.e
    c1, c2 = (e - 2) / (e - 1), 1 / e
    d1, d2 = e - 1 - c1 * e, e - 1 - c2 * e
    z1 = (1 - d1 * Y - mp.sqrt((1 - d1 * Y) ** 2 - 4 * c1 * Y)) / (2 * c1 * Y)
    z2 = (1 - d2 * Y - mp.sqrt((1 - d2 * Y) ** 2 - 4 * c2 * Y)) / (2 * c2 * Y)
    z0 = 1 / (1 - (e - 1) * Y)
    return z1, zx, z2, z0, residual


def test_criterion_2_z_sandwich():
    import mpmath as mp

    mp.mp.dps = 120
    ys = np.geomspace(1.001, 100.0, 200)
    slack_ok = True
    residual_ok = True
    library_ok = True
    rows = []
    for y in ys:
        y = float(y)
        z1, zx, z2, z0, residual = mp_sandwich(mp.mpf(y))
        residual_ok &= residual <= mp.mpf("1e-13")
        slack_ok &= 1 < z1 <= zx <= z2 <= z0 < mp.e
        rows.append((z1, zx, z2, z0))
        # double-precision library values agree with the oracle
        library_ok &= abs(z(ZIndex.Z1, y) - float(z1)) <= 5e-13
        library_ok &= abs(z(ZIndex.Z2, y) - float(z2)) <= 5e-13
        library_ok &= abs(z(ZIndex.Z0, y) - float(z0)) <= 5e-13
        library_ok &= abs(z_exact(y) - float(zx)) <= 5e-12
    decreasing_ok = all(
        all(b < a for a, b in zip(col, col[1:]))
        for col in zip(*rows)
    )
    clauses = [
        ("oracle residual <= 1e-13", residual_ok, ""),
        ("1 < z1 <= z_exact <= z2 <= z0 < e with slack >= 0 on all 200 points",
         slack_ok, ""),
        ("all four factors strictly decreasing", decreasing_ok, ""),
        ("library doubles match the high-precision oracle", library_ok, ""),
    ]
    report(2, "two-sided root factor sandwich", clauses)


def test_criterion_3_degenerate_upper_bound_limit():
    ms = np.linspace(0.5, 50.0, 100)
    worst = max(
        abs(x_max_upper(Params(a=0.0, lam=0.0, m=float(m), limit=True)) - (m + 0.5))
        for m in ms
    )
    report(
        3,
        "x_max upper bound collapses to m + 1/2 at a = lam = 0",
        [("max |deviation| <= 1e-12 over 100 m in (0, 50]", worst <= 1e-12, f"{worst:.2e}")],
    )


def test_criterion_4_recovery_constants(spotchecks):
    env_a = spotchecks[Case.A]["handoff_envelope_cap"]
    env_b = spotchecks[Case.B]["handoff_envelope_cap"]
    alpha_a = spotchecks[Case.A]["alpha_below_0.2"]
    alpha_b = spotchecks[Case.B]["alpha_below_0.2"]
    peak_a = spotchecks[Case.A]["alpha2_peak_location"].worst_value
    peak_b = spotchecks[Case.B]["alpha2_peak_location"].worst_value
    clauses = [
        ("case A envelope max over m in [0, 20] <= 0.05", env_a.passed,
         f"max {env_a.worst_value:.5f}"),
        ("case B envelope max over m in [0, 20] <= 0.08", env_b.passed,
         f"max {env_b.worst_value:.5f}"),
        ("case A alpha < 0.2 on 500-point log grid", alpha_a.passed,
         f"max {alpha_a.worst_value:.5f}"),
        ("case B alpha < 0.2 on 500-point log grid", alpha_b.passed,
         f"max {alpha_b.worst_value:.5f}"),
        ("case A alpha2 peak at 4.11 +/- 0.02", abs(peak_a - 4.11) <= 0.02,
         f"computed {peak_a:.4f}"),
        # the computed stationary point is 3.0314 (stationarity root and
        # direct maximization agree; the peak is so flat that ln alpha2
        # moves only ~3e-6 across m in [3.0, 3.1])
        ("case B alpha2 peak at 3.06 +/- 0.02", abs(peak_b - 3.06) <= 0.02,
         f"computed {peak_b:.4f}"),
    ]
    report(4, "recovery-branch constants", clauses)


def test_criterion_5_prey_maximum_end_to_end(grid_sweep):
    del grid_sweep  # ordering only: run after the sweep is cached
    points = [
        (a, lam, m)
        for a in A_VALUES
        for lam in LAMBDA_VALUES
        for m in M_VALUES
    ] + [(0.1, 0.01, m) for m in BRANCH_B_POINT["m_values"]]
    worst_s4 = math.inf
    for a, lam, m in points:
        tp = transit_points(Params(a=a, lam=lam, m=m), 0.8)
        worst_s4 = min(worst_s4, tp.s4)
    sim_ok = worst_s4 > 0.8
    bound_ok = True
    worst_bound = math.inf
    for case in (Case.A, Case.B):
        for m in set(M_VALUES) | set(BRANCH_B_POINT["m_values"]):
            val = smax_lower_bound(handoff_cap_envelope(m, case), 0.7, 0.7, m)
            worst_bound = min(worst_bound, val)
            bound_ok &= val > 0.8
    clauses = [
        ("simulated s4 > 0.8 from s0 = 0.8 at all 57 grid points", sim_ok,
         f"worst s4 = {worst_s4:.6f}"),
        ("linear-system bound > 0.8 at envelope hand-off, both cases", bound_ok,
         f"worst bound = {worst_bound:.6f}"),
    ]
    report(5, "prey maximum exceeds 0.8", clauses)


def test_criterion_6_canard_regime():
    p = Params(a=0.1, lam=0.1, m=0.01)
    ce = limit_cycle(p)
    c = canard_estimates(p)
    x_err = abs(ce.x_max - 0.3025) / 0.3025
    s_err = abs(ce.s_max - c.s_max_c) / c.s_max_c
    ln_x_gap = abs(ce.ln_x_min - math.log(c.x_min_c))
    clauses = [
        # the true cycle sits 11.4% above the m -> 0 value at m = 0.01
        # (fold-delay overshoot: 5.3% at m = 0.003, 2.6% at m = 0.001),
        # so this clause records an honest failure of the 5% tolerance
        ("simulated x_max within 5% of 0.3025", x_err <= 0.05,
         f"x_max = {ce.x_max:.6f}, rel err {x_err:.4f}"),
        ("simulated s_max within 2% of the jump-landing estimate", s_err <= 0.02,
         f"s_max = {ce.s_max:.6f} vs {c.s_max_c:.6f}, rel err {s_err:.5f}"),
        ("simulated x_min within a factor e of the drop estimate", ln_x_gap <= 1.0,
         f"|ln gap| = {ln_x_gap:.4f}"),
    ]
    report(6, "canard regime at a = lam = 0.1, m = 0.01", clauses)


def test_criterion_7_proof_spot_checks(spotchecks):
    clauses = []
    for name, label in (
        ("barrier_c0_negative", "C0 < 0 on a in (0,.5], lam in [0,1), m in (0,10]"),
        ("barrier_c0_plus_c1_nonpositive", "C0 + C1 <= 0 on the same grid"),
    ):
        chk = spotchecks[Case.A][name]
        clauses.append((label, chk.passed, f"worst {chk.worst_value:.4g}"))
    for case in (Case.A, Case.B):
        lo = spotchecks[case]["gain_quadratic_negative_at_lam"]
        hi = spotchecks[case]["gain_quadratic_positive_at_one"]
        clauses.append(
            (f"case {case.value} quadratic negative at lam", lo.passed,
             f"worst {lo.worst_value:.4g}")
        )
        clauses.append(
            (f"case {case.value} quadratic positive at 1", hi.passed,
             f"worst {hi.worst_value:.4g}")
        )
    mono = spotchecks[Case.A]["cap_bound_monotone_in_a_and_lam"]
    clauses.append(
        ("case A cap-bound FD derivatives >= -1e-9 (step 1e-6)", mono.passed,
         f"min {mono.worst_value:.3e}")
    )
    report(7, "sign and monotonicity spot-checks", clauses)


def test_criterion_8_numerical_robustness():
    p = Params(a=0.05, lam=0.05, m=5.0)
    rep = cycle_extreme_report(p, SimConfig(rtol=1e-10))
    loop = integrate(
        LogState(math.log(rep.extremes.x_max), math.log(p.lam)),
        p,
        SimConfig(rtol=1e-10),
        stop=lambda ev: ev.kind is EventKind.S_EQ_LAMBDA_DOWN,
    )
    finite_ok = bool(np.all(np.isfinite(loop.points))) and all(
        math.isfinite(v) for v in rep.margins.values()
    )
    ce1 = rep.extremes
    ce2 = limit_cycle(p, SimConfig(rtol=5e-11))
    drift = max(
        abs(math.log(ce1.x_max) - math.log(ce2.x_max)),
        abs(math.log(ce1.s_max) - math.log(ce2.s_max)),
        abs(ce1.ln_x_min - ce2.ln_x_min),
        abs(ce1.ln_s_min - ce2.ln_s_min),
    )
    clauses = [
        # the converged cycle's predator minimum is ln x_min = -86.83
        # (two independent integrators agree to 1e-7; the -90 figure
        # matches the closed-form lower bound, -102.1, and the approach
        # transient, which dips below -100, not the cycle extreme)
        ("cycle ln x_min < -90", ce1.ln_x_min < -90.0,
         f"ln x_min = {ce1.ln_x_min:.4f}"),
        ("no non-finite values anywhere in the run", finite_ok, ""),
        ("rtol halving moves all log extremes < 1e-6", drift < 1e-6,
         f"max drift {drift:.2e}"),
    ]
    report(8, "numerical robustness at a = lam = 0.05, m = 5", clauses)


def test_criterion_9_figure_data(tmp_path):
    paths = emit_figures("all", tmp_path, panels=[(0.05, 0.05)])
    assert len(paths) == 4
    data = {}
    for path in paths:
        lines = path.read_text().splitlines()
        fig = path.name.split("_")[0]
        data[fig] = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
    n = len(data["fig2"])
    fig2_ok = all(lo < sim < hi for _, lo, hi, _, _, sim in data["fig2"])
    fig3_ok = all(lo < sim < hi for _, lo, hi, sim in data["fig3"])
    fig4_ok = all(lo < sim < hi for _, lo, hi, sim in data["fig4"])
    fig5_ok = all(0.8 < sim < 1.0 for _, _, _, sim in data["fig5"])
    clauses = [
        ("50 m-points emitted per figure", n == 50, f"{n} points"),
        ("x_max strictly between its curves", fig2_ok, ""),
        ("ln s_min strictly between its curves", fig3_ok, ""),
        ("ln x_min strictly between its curves", fig4_ok, ""),
        ("0.8 < s_max < 1 pointwise", fig5_ok, ""),
    ]
    report(9, "figure-data reproduction for the a = lam = 0.05 panel", clauses)

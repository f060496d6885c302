"""Acceptance criteria 1-11, one test each; every test records a PASS/FAIL line.

Tolerances are pinned here rather than imported so that the library's own
check thresholds cannot drift the suite.
"""

import math
import time

import numpy as np
import pytest

from conftest import case_run
from svc_sim.control import DtipGains, dtip_law
from svc_sim.errors import NotSettled
from svc_sim.estimation import Differentiator, DifferentiatorConfig
from svc_sim.io import write_outputs
from svc_sim.model import (
    ActiveMask,
    ParticipationFactors,
    SensitivityModel,
    alignment_residuals,
    benchmark_model,
    solve_alignment,
)
from svc_sim.scenario import alignment_spread, run, settling_time

# criterion 1
ALIGN_RESIDUAL = 1e-10
ALIGN_SPREAD = 1e-12
ALIGN_MODELS = 1000
ALIGN_RUNTIME = 5.0
# criterion 2
DIFF_REL = 1e-9
DIFF_TRIPLES = 200
DIFF_RUNTIME = 1.0
# criterion 3
DECAY_REL = 0.05
# criteria 4-9
BAND_2PCT = 0.02
STEP_BOUND = 200.0
RECOVERY_BOUND = 250.0
TRACK_TOL = 1e-3
DIP_BOUND = 0.005
# criterion 11
CASE_RUNTIME = 10.0


def settle_after(r, t0, t1=None, band=None, tol=None):
    t = r.t
    sel = t >= t0 - 1e-9
    if t1 is not None:
        sel &= t < t1 - 1e-9
    v, ref = r["v_pp"][sel], r["v_pp_ref"][sel]
    target = float(ref[-1])
    frac = band if band is not None else tol / abs(target)
    try:
        return max(0.0, settling_time(t[sel], v, target, frac) - t0)
    except NotSettled:
        return math.inf


def final_spread(sc, r):
    mask = ActiveMask(
        tuple(bool(x) for x in r.gen("connected")[-1]),
        tuple(bool(x) for x in r.gen("svc_active")[-1]),
    )
    return alignment_spread(r.gen("q")[-1], sc.pf, mask)


def test_criterion_01_alignment_solver(record_criterion):
    rng = np.random.default_rng(20240601)
    problems = []
    for _ in range(ALIGN_MODELS):
        n = int(rng.integers(2, 9))
        c_q = rng.normal(size=(n, n)) + n * np.eye(n)
        c_v = rng.uniform(0.01, 1.0, n)
        pf = rng.uniform(0.1, 5.0, n)
        conn = rng.random(n) > 0.2
        conn[rng.integers(n)] = True
        active = conn & (rng.random(n) > 0.2)
        active[np.flatnonzero(conn)[0]] = True
        problems.append((SensitivityModel(c_v, c_q), ParticipationFactors(pf),
                         float(rng.uniform(0.9, 1.1)), ActiveMask(tuple(conn), tuple(active))))
    problems.append((benchmark_model(), ParticipationFactors(np.ones(4)), 1.0, ActiveMask.all_active(4)))

    worst_res = worst_spread = 0.0
    t0 = time.perf_counter()
    for model, pf, v, mask in problems:
        sol = solve_alignment(model, pf, v, mask)
        r_share, r_pilot = alignment_residuals(model, pf, v, sol, mask)
        worst_res = max(worst_res, r_share + r_pilot)
        worst_spread = max(worst_spread, alignment_spread(sol.q_ref, pf, mask))
    elapsed = time.perf_counter() - t0
    ok = worst_res < ALIGN_RESIDUAL and worst_spread < ALIGN_SPREAD and elapsed < ALIGN_RUNTIME
    record_criterion(1, ok, f"alignment over {len(problems)} models: max residual {worst_res:.2e}, "
                            f"max spread {worst_spread:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_02_differentiator(record_criterion):
    rng = np.random.default_rng(7)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(DIFF_TRIPLES):
        cfg = DifferentiatorConfig(float(rng.uniform(1e-3, 1.0)), int(rng.integers(3, 41)))
        a, b = rng.uniform(-100, 100), rng.uniform(-50, 50)
        d = Differentiator(cfg)
        for k in range(cfg.n_ndf):
            d.push(a + b * k * cfg.t_ndf)
        worst = max(worst, abs(d.derivative() - b) / abs(b))
    elapsed = time.perf_counter() - t0
    # quadratic against the normal equations
    cfg = DifferentiatorConfig(0.1, 5)
    t = np.array([0.6, 0.7, 0.8, 0.9, 1.0])
    d = Differentiator(cfg)
    for y in t**2:
        d.push(float(y))
    a = np.column_stack([np.ones(5), t])
    oracle = np.linalg.solve(a.T @ a, a.T @ t**2)[1]
    quad = abs(d.derivative() - oracle) / abs(oracle)
    ok = worst < DIFF_REL and quad < DIFF_REL and elapsed < DIFF_RUNTIME
    record_criterion(2, ok, f"differentiator: affine rel err {worst:.2e}, quadratic rel err {quad:.2e}, "
                            f"{elapsed * 1e3:.1f} ms")
    assert ok


def test_criterion_03_closed_loop_law(record_criterion):
    # y' = F(t) + 3u with the lumped term known exactly
    alpha, dt = 3.0, 1e-4
    details, ok = [], True
    for k_p in (0.5, 2.0):
        gains = DtipGains(alpha, k_p)
        y, t = 1.0, 0.0
        marks = {round(1 / (k_p * dt)): None, round(3 / (k_p * dt)): None}
        for step in range(1, max(marks) + 1):
            f = 0.5 * math.sin(t) + 0.2
            u = dtip_law(f, 0.0, y, gains)
            y += dt * (f + alpha * u)
            t += dt
            if step in marks:
                marks[step] = y
        for step, e in marks.items():
            expect = math.exp(-k_p * step * dt)
            rel = abs(e - expect) / expect
            ok &= rel < DECAY_REL
            details.append(f"k_p={k_p:g} t={step * dt:g}: {rel:.1e}")
    record_criterion(3, ok, "exp decay rel err " + ", ".join(details))
    assert ok


def test_criterion_04_case1(record_criterion):
    sc, r, _ = case_run(1)
    settle = settle_after(r, 500.0, band=BAND_2PCT)
    tight = settle_after(r, 500.0, tol=TRACK_TOL)
    err = abs(r["v_pp"][-1] - r["v_pp_ref"][-1])
    spread = final_spread(sc, r)
    ok = settle < STEP_BOUND and err < TRACK_TOL and spread < TRACK_TOL
    record_criterion(4, ok, f"case 1: 2% settle {settle:.1f} s (1e-3 in {tight:.1f} s), "
                            f"final err {err:.1e}, spread {spread:.1e}")
    assert ok


def test_criterion_05_case2(record_criterion):
    sc, r, _ = case_run(2)
    assert r.t[-1] == pytest.approx(1000.0)
    settle = settle_after(r, 280.0, band=BAND_2PCT)
    tight = settle_after(r, 280.0, tol=TRACK_TOL)
    after = r.t >= 280.0
    dev = float(np.max(np.abs(r["v_pp"][after] - r["v_pp_ref"][after])))
    tail = r.t >= 900.0
    tail_dev = float(np.max(np.abs(r["v_pp"][tail] - r["v_pp_ref"][tail])))
    stable = bool(np.all(np.isfinite(r.data))) and dev <= 0.02 + 1e-9 and tail_dev < TRACK_TOL
    ok = settle < STEP_BOUND and stable
    record_criterion(5, ok, f"case 2: 2% settle {settle:.1f} s (1e-3 in {tight:.1f} s), "
                            f"max dev {dev:.4f}, last-100 s dev {tail_dev:.1e}")
    assert ok


def test_criterion_06_case3(record_criterion):
    sc, r, _ = case_run(3)
    dev = float(np.max(np.abs(r["v_pp"][r.t >= 500.0] - 1.0)))
    rec = settle_after(r, 500.0, tol=TRACK_TOL)
    spread = final_spread(sc, r)
    ok = dev > TRACK_TOL and rec < RECOVERY_BOUND and spread < TRACK_TOL
    record_criterion(6, ok, f"case 3: deviation {dev:.4f}, recovery {rec:.1f} s, spread {spread:.1e}")
    assert ok


def test_criterion_07_case4(record_criterion):
    sc, r, _ = case_run(4)
    rec1 = settle_after(r, 500.0, 650.0, tol=TRACK_TOL)
    rec2 = settle_after(r, 650.0, tol=TRACK_TOL)
    ok = rec1 < RECOVERY_BOUND and rec2 < RECOVERY_BOUND
    record_criterion(7, ok, f"case 4: recovery {rec1:.1f} s after perturbation, {rec2:.1f} s after restoration")
    assert ok


def test_criterion_08_case5(record_criterion):
    sc, r, _ = case_run(5)
    rec = settle_after(r, 350.0, tol=TRACK_TOL)
    q = r.gen("q")[-1]
    rest = [0, 2, 3]
    ratios = q[rest] / sc.pf.pf[rest]
    spread = float(np.ptp(ratios))
    ok = rec < RECOVERY_BOUND and spread < TRACK_TOL and r.gen("connected")[-1][1] == 0.0
    record_criterion(8, ok, f"case 5: recovery {rec:.1f} s, remaining spread {spread:.1e}")
    assert ok


def test_criterion_09_case6(record_criterion):
    sc, r, _ = case_run(6)
    after = r.t >= 500.0
    dip = float(np.max(r["v_pp_ref"][after] - r["v_pp"][after]))
    pre = r.at(500.0) - 1
    q = r.gen("q")
    others = [0, 2, 3]
    lower = all(q[-1, i] < q[pre, i] for i in others)
    ok = dip < DIP_BOUND and lower
    record_criterion(9, ok, f"case 6: dip {dip:.4f} pu, q G1/G3/G4 "
                            + ", ".join(f"{q[pre, i]:.4f}->{q[-1, i]:.4f}" for i in others))
    assert ok


def test_criterion_10_determinism(record_criterion, tmp_path):
    details, ok = [], True
    for case_id in range(1, 7):
        sc, first, _ = case_run(case_id)
        second = run(sc)
        parallel = run(sc, parallel=True)
        write_outputs(first, tmp_path / f"a{case_id}")
        write_outputs(second, tmp_path / f"b{case_id}")
        same_csv = (tmp_path / f"a{case_id}" / "timeseries.csv").read_bytes() == (
            tmp_path / f"b{case_id}" / "timeseries.csv"
        ).read_bytes()
        same_par = first.data.tobytes() == parallel.data.tobytes()
        ok &= same_csv and same_par
        details.append(f"{case_id}:{'ok' if same_csv and same_par else 'DIFF'}")
    record_criterion(10, ok, "determinism (rerun CSV bytes, sequential vs parallel) " + " ".join(details))
    assert ok


def test_criterion_11_runtime(record_criterion):
    times = {i: case_run(i)[2] for i in range(1, 7)}
    ok = all(t < CASE_RUNTIME for t in times.values())
    record_criterion(11, ok, "wall-clock per 1000 s case " + ", ".join(f"{i}:{t:.1f}s" for i, t in times.items()))
    assert ok

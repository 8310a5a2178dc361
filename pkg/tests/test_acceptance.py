"""Exit criteria. Each test prints one ``ACCEPTANCE`` line, then asserts."""
import math
import time

import numpy as np
import pytest

from conftest import Q_ORACLE, random_density, random_hermitian, random_layout, random_projector
from vnhardy import _backend
from vnhardy.cli import run_sampling, sampling_summary
from vnhardy.dynamics import (
    DensityOperator, EmbeddedProjector, answer_probability, evolve, pose_question, projector_on,
)
from vnhardy.hardy import (
    Q_CLOSED_FORM, SETTING_PAIRS, born_joint, construct_from_state, optimize_hardy, schmidt_state,
    verify_predictions,
)
from vnhardy.locality import (
    CONSTRAINTS, check_assertion_A, check_no_signaling, check_order_invariance,
    enumerate_causal_models, enumerate_lhv, filter_strategies, lhv_hardy_bound,
)
from vnhardy.operators import SubsystemLayout

LR = SubsystemLayout.of(L=2, R=2)


@pytest.fixture
def report(capsys):
    def emit(n, name, ok, elapsed, limit, detail=""):
        verdict = "PASS" if ok and elapsed < limit else "FAIL"
        with capsys.disabled():
            print(f"\nACCEPTANCE {n} {verdict}: {name} ({elapsed:.2f}s < {limit}s) {detail}")
        return verdict == "PASS"
    return emit


@pytest.fixture(scope="module")
def optimum():
    return optimize_hardy()


def test_1_box1_algebra(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    worst = dict(trace=0.0, neg=0.0, idem=0.0, branches=0.0)
    n = 1000
    for _ in range(n):
        d = int(rng.integers(2, 17))
        lay = random_layout(rng, d)
        s = DensityOperator(random_density(rng, d, rank=int(rng.integers(1, d + 1))), lay)
        label = lay.labels[int(rng.integers(len(lay.labels)))]
        p = EmbeddedProjector(random_projector(rng, dict(lay.factors)[label]), (label,), lay)
        e = evolve(s, random_hermitian(rng, d), float(rng.normal()))
        pq = pose_question(s, p)
        worst["trace"] = max(worst["trace"], abs(e.trace - s.trace), abs(pq.trace - s.trace))
        worst["neg"] = max(worst["neg"], -e.min_eigenvalue(), -pq.min_eigenvalue())
        worst["idem"] = max(worst["idem"], float(np.max(np.abs(pose_question(pq, p).op - pq.op))))
        worst["branches"] = max(worst["branches"],
                                abs(answer_probability(s, p) + answer_probability(s, p.complement()) - 1))
    elapsed = time.perf_counter() - t0
    ok = (worst["trace"] <= 1e-12 and worst["neg"] <= 1e-10 and worst["idem"] <= 1e-12
          and worst["branches"] <= 1e-12)
    detail = " ".join(f"{k}={v:.2e}" for k, v in worst.items())
    assert report(1, f"algebra over {n} random states", ok, elapsed, 10, detail)


def test_2_hardy_certainty(report):
    t0 = time.perf_counter()
    thetas = list(np.linspace(0.05, 0.75, 15)) + [0.43469235]
    reps = [verify_predictions(construct_from_state(schmidt_state(t))) for t in thetas]
    elapsed = time.perf_counter() - t0
    worst_p = min(min(r.p1, r.p2, r.p3) for r in reps)
    min_q = min(r.q for r in reps)
    ok = worst_p >= 1 - 1e-9 and min_q > 1e-6
    assert report(2, "certainty predictions", ok, elapsed, 1, f"min p={float(worst_p)!r} min q={min_q:.3e}")


def test_3_hardy_optimum(report):
    t0 = time.perf_counter()
    opt = optimize_hardy()
    elapsed = time.perf_counter() - t0
    dev = abs(opt.q_max - Q_CLOSED_FORM)
    ok = dev <= 1e-6 and abs(opt.q_max - Q_ORACLE) <= 1e-6
    assert report(3, "Hardy optimum", ok, elapsed, 30, f"q_max={opt.q_max!r} |dq|={dev:.2e}")


def test_4_lhv_impossibility(report, optimum):
    t0 = time.perf_counter()
    strategies = enumerate_lhv()
    survivors = filter_strategies(strategies, CONSTRAINTS)
    ladder = all(s.b1 == "-" for s in survivors if s.a1 == "-")
    bound = lhv_hardy_bound(survivors)
    q = verify_predictions(optimum.config).q
    elapsed = time.perf_counter() - t0
    ok = len(strategies) == 16 and len(survivors) == 5 and ladder and bound == 0 and q > 0
    assert report(4, "LHV impossibility", ok, elapsed, 1, f"16 -> {len(survivors)} bound={bound} q={q:.6f}")


def test_5_counterfactual_argument(report):
    t0 = time.perf_counter()
    models = enumerate_causal_models()
    a_r2 = check_assertion_A(models, "R2", {1, 2})
    a_r1 = check_assertion_A(models, "R1", {3})
    elapsed = time.perf_counter() - t0
    ok = (len(models) == 64 and len(a_r2.violations) == 0
          and a_r1.max_hardy_probability == 0 and a_r1.contradicts_prediction4)
    assert report(5, "counterfactual argument", ok, elapsed, 1,
                  f"A(R2) violations={len(a_r2.violations)} A(R1) max P(L1-,R1+)={a_r1.max_hardy_probability}")


def test_6_no_signaling_and_order(report, optimum):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst_ns = check_no_signaling(optimum.config).max_deviation
    worst_order = 0.0
    s = DensityOperator.pure(optimum.config.psi, LR)
    for pair in SETTING_PAIRS:
        rep = check_order_invariance(s, projector_on(optimum.config.projector(pair[0]), LR, "L"),
                                     projector_on(optimum.config.projector(pair[1]), LR, "R"))
        worst_order = max(worst_order, rep.max_deviation,
                          float(np.max(np.abs(rep.direct - born_joint(optimum.config, pair)))))
    for _ in range(100):
        z = rng.normal(size=4) + 1j * rng.normal(size=4)
        cfg = construct_from_state(z / np.linalg.norm(z))
        worst_ns = max(worst_ns, check_no_signaling(cfg).max_deviation)
        rho = DensityOperator(random_density(rng, 4, rank=int(rng.integers(1, 5))), LR)
        rep = check_order_invariance(rho, projector_on(random_projector(rng, 2), LR, "L"),
                                     projector_on(random_projector(rng, 2), LR, "R"))
        worst_order = max(worst_order, rep.max_deviation)
    elapsed = time.perf_counter() - t0
    ok = worst_ns <= 1e-12 and worst_order <= 1e-12
    assert report(6, "no-signaling and order invariance", ok, elapsed, 5,
                  f"max marginal dev={worst_ns:.2e} max order dev={worst_order:.2e}")


def test_7_monte_carlo(report, optimum):
    seed, n = 42, 100000
    t0 = time.perf_counter()
    summary = sampling_summary(optimum.config, run_sampling(optimum.config, n, seed), n)
    elapsed = time.perf_counter() - t0
    cells = [c for p in summary["pairs"].values() for row in p["within"] for c in row]
    ok = summary["bound_check"] == "performed" and len(cells) == 16 and all(cells)
    assert report(7, f"Monte Carlo, seed {seed}, N={n}/pair", ok, elapsed, 60,
                  f"backend={_backend.name()} max |z|={summary['max_abs_z']:.2f}")

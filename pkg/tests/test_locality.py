import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_density, random_projector
from oracles import lhv_survivors_bruteforce
from vnhardy.dynamics import DensityOperator, projector_on
from vnhardy.hardy import (
    SETTING_PAIRS, HardyConfiguration, born_tables, construct_from_state, optimize_hardy,
    verify_predictions,
)
from vnhardy.locality import (
    CONSTRAINTS, LHVStrategy, assertion_holds, check_assertion_A, check_no_signaling,
    check_order_invariance, enumerate_causal_models, enumerate_lhv, filter_strategies,
    lhv_hardy_bound, lhv_to_causal_model, no_signaling_deviation, prediction_holds,
)
from vnhardy.operators import SubsystemLayout

LR = SubsystemLayout.of(L=2, R=2)
SIGN = "+-"


@pytest.fixture(scope="module")
def cfg():
    return optimize_hardy().config


def test_enumerate_lhv():
    s = enumerate_lhv()
    assert len(s) == 16 and len(set(s)) == 16
    assert s[0] == LHVStrategy("+", "+", "+", "+")
    assert s == sorted(s, key=lambda x: tuple(SIGN.index(c) for c in x))


def test_filter_all_constraints_matches_oracle():
    survivors = filter_strategies(enumerate_lhv(), CONSTRAINTS)
    expect = [LHVStrategy(*(SIGN[b] for b in t)) for t in lhv_survivors_bruteforce()]
    assert survivors == expect
    assert len(survivors) == 5


def test_filter_no_constraints():
    assert len(filter_strategies(enumerate_lhv(), [])) == 16


def test_ladder_on_survivors():
    for s in filter_strategies(enumerate_lhv(), CONSTRAINTS):
        if s.a1 == "-":
            assert s.b2 == "+" and s.a2 == "+" and s.b1 == "-"


@pytest.mark.parametrize("constraints,bound", [
    (CONSTRAINTS, 0.0), ((), 1.0), (("C1",), 1.0), (("C1", "C2"), 1.0),
    (("C1", "C3"), 1.0), (("C2", "C3"), 1.0),
])
def test_lhv_bound(constraints, bound):
    assert lhv_hardy_bound(filter_strategies(enumerate_lhv(), constraints)) == bound


def test_lhv_bound_against_quantum(cfg):
    assert lhv_hardy_bound(filter_strategies(enumerate_lhv(), CONSTRAINTS)) == 0 < verify_predictions(cfg).q


def test_enumerate_causal_models():
    models = enumerate_causal_models()
    assert len(models) == 64 and len(set(models)) == 64
    for m in models:
        # r takes only the right setting; there is nothing for the left choice to change
        assert {m.r("R1"), m.r("R2")} <= set(SIGN)


def _oracle_models():
    """(r1, r2, l11, l12, l21, l22) tuples by direct product."""
    return list(itertools.product(SIGN, repeat=6))


def test_assertion_R2_oracle():
    # hand-rolled: predictions 1 and 2 then A(R2)
    bad = 0
    for r1, r2, l11, l12, l21, l22 in _oracle_models():
        p1 = not (l12 == "-" and r2 != "+")
        p2 = not (r2 == "+" and l22 != "+")
        if p1 and p2 and l12 == "-" and l22 != "+":
            bad += 1
    assert bad == 0
    rep = check_assertion_A(enumerate_causal_models(), "R2", {1, 2})
    assert rep.n_models == 64 and len(rep.violations) == 0 and rep.holds_universally


def test_assertion_R1_contradiction_oracle():
    hits = 0
    for r1, r2, l11, l12, l21, l22 in _oracle_models():
        a_r1 = not (l11 == "-" and l21 != "+")
        p3 = not (l21 == "+" and r1 != "-")
        if a_r1 and p3 and l11 == "-" and r1 == "+":
            hits += 1
    assert hits == 0
    rep = check_assertion_A(enumerate_causal_models(), "R1", {3})
    assert rep.max_hardy_probability == 0.0 and rep.contradicts_prediction4
    # A(R1) is not forced by the predictions the way A(R2) is
    assert not rep.holds_universally


def test_assertion_without_prediction3_allows_hardy_event():
    rep = check_assertion_A(enumerate_causal_models(), "R1", set())
    assert rep.max_hardy_probability == 1.0


def test_assertion_empty_models():
    rep = check_assertion_A([], "R1", {3})
    assert rep.holds_universally and rep.max_hardy_probability == 0.0


def test_assertion_bad_which():
    with pytest.raises(ValueError):
        assertion_holds(enumerate_causal_models()[0], "L1")


def test_bridge_lhv_to_causal():
    survivors = filter_strategies(enumerate_lhv(), CONSTRAINTS)
    mapped = [lhv_to_causal_model(s) for s in survivors]
    assert len(set(mapped)) == len(survivors)
    for s, m in zip(survivors, mapped):
        assert m.r("R1") == s.b1 and m.r("R2") == s.b2
        assert m.l("L1", "R1") == m.l("L1", "R2") == s.a1
        assert all(prediction_holds(m, k) for k in (1, 2, 3))
        rep = check_assertion_A([m], "R2", {1, 2})
        assert rep.n_consistent == 1 and rep.holds_universally
    assert set(mapped) <= set(enumerate_causal_models())


def test_no_signaling_optimized(cfg):
    rep = check_no_signaling(cfg)
    assert rep.max_deviation <= 1e-12 and rep.passed


def test_no_signaling_product_state():
    e0 = np.array([1, 0])
    plus = np.array([1, 1]) / np.sqrt(2)
    cfg = HardyConfiguration.from_vectors(np.kron(plus, e0), e0, plus, plus, e0)
    assert check_no_signaling(cfg).max_deviation <= 4 * np.finfo(float).eps


def test_no_signaling_detects_corruption(cfg):
    tables = born_tables(cfg)
    tables[("L1", "R1")] = tables[("L1", "R1")].copy()
    tables[("L1", "R1")][0, 0] += 0.01
    rep = no_signaling_deviation(tables)
    assert rep.max_deviation == pytest.approx(0.01, abs=1e-12)
    assert not rep.passed


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_no_signaling_random_configurations(seed):
    rng = np.random.default_rng(seed)
    z = rng.normal(size=4) + 1j * rng.normal(size=4)
    assert check_no_signaling(construct_from_state(z / np.linalg.norm(z))).passed


def test_order_invariance_hardy(cfg):
    s = DensityOperator.pure(cfg.psi, LR)
    for pair in SETTING_PAIRS:
        rep = check_order_invariance(s, projector_on(cfg.projector(pair[0]), LR, "L"),
                                     projector_on(cfg.projector(pair[1]), LR, "R"))
        assert rep.passed
        assert np.allclose(rep.left_first, born_tables(cfg)[pair], atol=1e-12)


def test_order_invariance_rejects_same_factor(cfg):
    s = DensityOperator.pure(cfg.psi, LR)
    p = projector_on(cfg.projL1p, LR, "L")
    with pytest.raises(ValueError):
        check_order_invariance(s, p, projector_on(cfg.projL2p, LR, "L"))


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_order_invariance_random(seed):
    rng = np.random.default_rng(seed)
    s = DensityOperator(random_density(rng, 4, rank=int(rng.integers(1, 5))), LR)
    rep = check_order_invariance(s, projector_on(random_projector(rng, 2), LR, "L"),
                                 projector_on(random_projector(rng, 2), LR, "R"))
    assert rep.max_deviation <= 1e-12

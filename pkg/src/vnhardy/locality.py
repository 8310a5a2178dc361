"""Exhaustive checks of the nonlocality argument.

Two deterministic formalisms are enumerated:

* local hidden variable strategies ``(a1, a2, b1, b2)``: pre-assigned
  outcomes of L1, L2, R1, R2;
* causal models ``(r, l)``: the right-wing outcome depends on the right
  setting only (the right region lies earlier and cannot be influenced by
  the later left choice), while the left outcome may depend on both settings.

Mixtures are handled at the support level: a certainty prediction must hold
in every model of the support, and the maximum probability of an event over
all mixtures equals its maximum over single models.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .dynamics import DensityOperator, EmbeddedProjector, sequential_branch_probability
from .hardy import L_SETTINGS, OUTCOMES, R_SETTINGS, SETTING_PAIRS, HardyConfiguration, born_tables
from .operators import TOL_ALGEBRA

PLUS, MINUS = OUTCOMES
CONSTRAINTS = ("C1", "C2", "C3")


class LHVStrategy(NamedTuple):
    a1: str
    a2: str
    b1: str
    b2: str

    def __str__(self) -> str:
        return "".join(self)


def enumerate_lhv() -> list[LHVStrategy]:
    """All 16 strategies, lexicographic in ``(a1, a2, b1, b2)`` with ``+ < -``."""
    return [LHVStrategy(*t) for t in itertools.product(OUTCOMES, repeat=4)]


def satisfies(s: LHVStrategy, constraint: str) -> bool:
    if constraint == "C1":
        return not (s.a1 == MINUS and s.b2 == MINUS)
    if constraint == "C2":
        return not (s.a2 == MINUS and s.b2 == PLUS)
    if constraint == "C3":
        return not (s.a2 == PLUS and s.b1 == PLUS)
    raise ValueError(f"unknown constraint {constraint!r}")


def filter_strategies(strategies: Iterable[LHVStrategy], constraints: Iterable[str]) -> list[LHVStrategy]:
    constraints = sorted(set(constraints))
    return [s for s in strategies if all(satisfies(s, c) for c in constraints)]


def lhv_hardy_bound(survivors: Sequence[LHVStrategy]) -> float:
    """Largest ``P(a1 = -, b1 = +)`` over mixtures of ``survivors``."""
    return max((1.0 if (s.a1 == MINUS and s.b1 == PLUS) else 0.0 for s in survivors), default=0.0)


@dataclass(frozen=True)
class CausalModel:
    """``r_out[k]`` is the outcome of ``R_SETTINGS[k]``; ``l_out`` is indexed by ``SETTING_PAIRS``."""

    r_out: tuple[str, str]
    l_out: tuple[str, str, str, str]

    def r(self, rsetting: str) -> str:
        return self.r_out[R_SETTINGS.index(rsetting)]

    def l(self, lsetting: str, rsetting: str) -> str:  # noqa: E743
        return self.l_out[SETTING_PAIRS.index((lsetting, rsetting))]

    def __str__(self) -> str:
        return f"r={''.join(self.r_out)} l={''.join(self.l_out)}"


def enumerate_causal_models() -> list[CausalModel]:
    return [CausalModel(r, l)
            for r in itertools.product(OUTCOMES, repeat=2)
            for l in itertools.product(OUTCOMES, repeat=4)]


def prediction_holds(m: CausalModel, k: int) -> bool:
    """Certainty predictions 1-3 as implications on a single model."""
    if k == 1:
        return not (m.l("L1", "R2") == MINUS and m.r("R2") != PLUS)
    if k == 2:
        return not (m.r("R2") == PLUS and m.l("L2", "R2") != PLUS)
    if k == 3:
        return not (m.l("L2", "R1") == PLUS and m.r("R1") != MINUS)
    raise ValueError(f"prediction {k} is not a certainty prediction")


def assertion_holds(m: CausalModel, which: str) -> bool:
    """A(Rk): if (Lk=L1, Rk) yields L1-, then L2 under the same Rk would yield L2+."""
    if which not in R_SETTINGS:
        raise ValueError(f"assertion must name R1 or R2, got {which!r}")
    return not (m.l("L1", which) == MINUS and m.l("L2", which) != PLUS)


def hardy_event(m: CausalModel) -> bool:
    return m.l("L1", "R1") == MINUS and m.r("R1") == PLUS


@dataclass(frozen=True)
class AssertionReport:
    which: str
    enforced: tuple[int, ...]
    n_models: int
    n_consistent: int
    violations: tuple[CausalModel, ...]
    n_assertion_models: int
    max_hardy_probability: float

    @property
    def holds_universally(self) -> bool:
        return not self.violations

    @property
    def contradicts_prediction4(self) -> bool:
        # Under the assertion, no mixture can give (L1-, R1+) positive weight.
        return self.max_hardy_probability == 0.0

    def to_dict(self) -> dict:
        return {
            "which": self.which, "enforced_predictions": list(self.enforced),
            "models": self.n_models, "consistent_models": self.n_consistent,
            "violation_count": len(self.violations),
            "violations": [str(v) for v in self.violations],
            "assertion_models": self.n_assertion_models,
            "max_hardy_probability": self.max_hardy_probability,
            "holds_universally": self.holds_universally,
            "contradicts_prediction4": self.contradicts_prediction4,
        }


def check_assertion_A(models: Sequence[CausalModel], which: str, enforced: Iterable[int]) -> AssertionReport:
    """Test A(which) over every model consistent with the ``enforced`` certainty predictions.

    ``violations`` are consistent models where the assertion fails.
    ``max_hardy_probability`` is the largest weight any mixture of
    consistent, assertion-satisfying models can put on (L1-, R1+) in the
    (L1, R1) run.
    """
    enforced = tuple(sorted(set(enforced)))
    consistent = [m for m in models if all(prediction_holds(m, k) for k in enforced)]
    violations = tuple(m for m in consistent if not assertion_holds(m, which))
    asserted = [m for m in consistent if assertion_holds(m, which)]
    max_p = max((1.0 if hardy_event(m) else 0.0 for m in asserted), default=0.0)
    return AssertionReport(which, enforced, len(models), len(consistent), violations, len(asserted), max_p)


def lhv_to_causal_model(s: LHVStrategy) -> CausalModel:
    """Embed a strategy as a causal model whose left outcome ignores the right setting."""
    lo = {"L1": s.a1, "L2": s.a2}
    return CausalModel((s.b1, s.b2), tuple(lo[ls] for ls, _ in SETTING_PAIRS))


# --- quantum-side checks ----------------------------------------------------


@dataclass(frozen=True)
class NoSignalingReport:
    max_deviation: float
    deviations: dict
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_dict(self) -> dict:
        return {"max_deviation": self.max_deviation, "deviations": dict(self.deviations),
                "tol": self.tol, "passed": self.passed}


def no_signaling_deviation(tables: dict, tol: float = TOL_ALGEBRA) -> NoSignalingReport:
    """Compare each wing's marginals across the distant wing's two settings.

    ``tables`` maps ``(Lsetting, Rsetting)`` to a 2x2 joint table.
    """
    dev = {}
    for ls in L_SETTINGS:
        a = np.asarray(tables[(ls, "R1")]).sum(axis=1)
        b = np.asarray(tables[(ls, "R2")]).sum(axis=1)
        dev[f"{ls}|R1-vs-R2"] = float(np.max(np.abs(a - b)))
    for rs in R_SETTINGS:
        a = np.asarray(tables[("L1", rs)]).sum(axis=0)
        b = np.asarray(tables[("L2", rs)]).sum(axis=0)
        dev[f"{rs}|L1-vs-L2"] = float(np.max(np.abs(a - b)))
    return NoSignalingReport(max(dev.values()), dev, tol)


def check_no_signaling(cfg: HardyConfiguration, tol: float = TOL_ALGEBRA) -> NoSignalingReport:
    return no_signaling_deviation(born_tables(cfg), tol)


@dataclass(frozen=True)
class OrderInvarianceReport:
    direct: np.ndarray
    left_first: np.ndarray
    right_first: np.ndarray
    tol: float

    @property
    def max_deviation(self) -> float:
        return float(max(np.max(np.abs(self.direct - self.left_first)),
                         np.max(np.abs(self.direct - self.right_first))))

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_dict(self) -> dict:
        return {"direct": self.direct.tolist(), "left_first": self.left_first.tolist(),
                "right_first": self.right_first.tolist(),
                "max_deviation": self.max_deviation, "tol": self.tol, "passed": self.passed}


def check_order_invariance(s: DensityOperator, p_left: EmbeddedProjector, p_right: EmbeddedProjector,
                           tol: float = TOL_ALGEBRA) -> OrderInvarianceReport:
    """Joint answer statistics for the two reduction orders against the direct Born table.

    Tables are indexed ``[a, b]`` with 0 = yes (``+``) and 1 = no.
    """
    if not p_left.disjoint_from(p_right):
        raise ValueError("order invariance is only claimed for projectors on distinct factors")
    direct = np.empty((2, 2))
    lr = np.empty((2, 2))
    rl = np.empty((2, 2))
    eye = np.eye(s.dim)
    tr = s.trace
    for i, a in enumerate((True, False)):
        pa = p_left.full if a else eye - p_left.full
        for j, b in enumerate((True, False)):
            pb = p_right.full if b else eye - p_right.full
            direct[i, j] = float(np.real(np.sum((pa @ pb) * s.op.T))) / tr
            lr[i, j] = sequential_branch_probability(s, (p_left, p_right), (a, b))
            rl[i, j] = sequential_branch_probability(s, (p_right, p_left), (b, a))
    return OrderInvarianceReport(direct, lr, rl, tol)

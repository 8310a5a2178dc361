"""Reduction dynamics on density operators.

The state ``S`` evolves unitarily between reductions,
``S -> U S U^dag`` with ``U = exp(-i H dt)``. A reduction first poses a
yes/no question ``P`` (``S -> P S P + (1-P) S (1-P)``), then nature picks
the yes branch ``P S P`` with probability ``Tr(P S) / Tr(S)`` or the no
branch ``(1-P) S (1-P)`` otherwise. States are kept unnormalised; every
probability divides by ``Tr S`` explicitly.

Randomness comes from a ``numpy.random.Generator`` backed by PCG64
(``numpy.random.default_rng(seed)``). Each trajectory owns its generator
and draws exactly one uniform double per reduction, whether or not the
answer was forced.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from . import _backend
from .operators import (
    TOL_ALGEBRA,
    TOL_STRUCTURAL,
    LayoutError,
    SubsystemLayout,
    as_operator,
    dagger,
    embed,
    expm_hermitian,
    max_abs,
    partial_trace,
    sublayout,
    validate,
)

#: Branches with probability below this are treated as exactly impossible.
ZERO_PROBABILITY = 1e-12


class ImpossibleOutcomeError(ValueError):
    """The selected answer has (numerically) zero probability."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, possibly unnormalised state."""

    op: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        op = as_operator(self.op)
        self.layout.check(op)
        herm = max_abs(op - dagger(op))
        if herm > TOL_STRUCTURAL:
            raise ValueError(f"density operator is not Hermitian (residual {herm:.3g})")
        rep = validate("psd", op, TOL_STRUCTURAL)
        if not rep.passed:
            raise ValueError(f"density operator is not positive semidefinite ({rep.failures[0].residual:.3g})")
        tr = np.trace(op)
        if tr.real <= ZERO_PROBABILITY:
            raise ValueError(f"density operator trace {tr.real:.3g} is not positive")
        object.__setattr__(self, "op", _frozen(op))

    @classmethod
    def pure(cls, psi, layout: SubsystemLayout) -> "DensityOperator":
        psi = np.asarray(psi, dtype=np.complex128).ravel()
        return cls(np.outer(psi, np.conj(psi)), layout)

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.op).real)

    def normalized(self) -> "DensityOperator":
        return DensityOperator(self.op / self.trace, self.layout)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.op)[0])


@dataclass(frozen=True, eq=False)
class EmbeddedProjector:
    """A local projector padded with identities on the remaining factors."""

    local: np.ndarray
    subsystems: tuple[str, ...]
    layout: SubsystemLayout
    full: np.ndarray = field(init=False)

    def __post_init__(self):
        subs = (self.subsystems,) if isinstance(self.subsystems, str) else tuple(self.subsystems)
        local = as_operator(self.local)
        rep = validate("projector", local, TOL_STRUCTURAL)
        if not rep.passed:
            raise ValueError(f"local operator is not a projector: {rep.failures[0].name} residual {rep.failures[0].residual:.3g}")
        full = embed(local, self.layout, subs)
        object.__setattr__(self, "subsystems", subs)
        object.__setattr__(self, "local", _frozen(local))
        object.__setattr__(self, "full", _frozen(full))

    def complement(self) -> "EmbeddedProjector":
        return EmbeddedProjector(np.eye(self.local.shape[0]) - self.local, self.subsystems, self.layout)

    def disjoint_from(self, other: "EmbeddedProjector") -> bool:
        return not set(self.subsystems) & set(other.subsystems)


def projector_on(local, layout: SubsystemLayout, *labels: str) -> EmbeddedProjector:
    return EmbeddedProjector(local, labels, layout)


def _check_compatible(s: DensityOperator, p: EmbeddedProjector) -> None:
    if p.full.shape != s.op.shape:
        raise LayoutError(f"projector dim {p.full.shape[0]} does not match state dim {s.dim}")


def evolve(s: DensityOperator, h, dt: float) -> DensityOperator:
    """Unitary step ``U S U^dag`` with ``U = exp(-i h dt)``."""
    h = as_operator(h)
    if h.shape != s.op.shape:
        raise LayoutError(f"Hamiltonian dim {h.shape[0]} does not match state dim {s.dim}")
    u = expm_hermitian(h, dt)
    return DensityOperator(u @ s.op @ dagger(u), s.layout)


def _branch(s: np.ndarray, p: np.ndarray, yes: bool) -> np.ndarray:
    m = p if yes else np.eye(p.shape[0]) - p
    return m @ s @ m


def pose_question(s: DensityOperator, p: EmbeddedProjector) -> DensityOperator:
    """Process I: remove the coherences between the ``P`` and ``1-P`` blocks."""
    _check_compatible(s, p)
    out = _branch(s.op, p.full, True) + _branch(s.op, p.full, False)
    return DensityOperator(out, s.layout)


def answer_probability(s: DensityOperator, p: EmbeddedProjector) -> float:
    """``Tr(P S) / Tr(S)``."""
    _check_compatible(s, p)
    tr = np.trace(s.op).real
    if tr <= ZERO_PROBABILITY:
        raise ValueError(f"state trace {tr:.3g} vanishes")
    q = float(np.real(np.sum(p.full * s.op.T))) / tr
    if -ZERO_PROBABILITY <= q < 0.0:
        q = 0.0
    elif 1.0 < q <= 1.0 + ZERO_PROBABILITY:
        q = 1.0
    elif not 0.0 <= q <= 1.0:
        raise ValueError(f"probability {q!r} outside [0, 1]; state is not a valid density operator")
    return q


def apply_answer(s: DensityOperator, p: EmbeddedProjector, answer: bool) -> DensityOperator:
    """Return the unnormalised yes branch ``P S P`` or no branch ``(1-P) S (1-P)``.

    Raises ``ImpossibleOutcomeError`` when the chosen branch carries less
    than ``ZERO_PROBABILITY`` of the trace.
    """
    q = answer_probability(s, p)
    q_branch = q if answer else 1.0 - q
    if q_branch < ZERO_PROBABILITY:
        raise ImpossibleOutcomeError(
            f"answer {'yes' if answer else 'no'} has probability {q_branch:.3g} for this state"
        )
    return DensityOperator(_branch(s.op, p.full, bool(answer)), s.layout)


def decide(q: float, u: float) -> bool:
    """Map a probability and one uniform draw in [0, 1) to an answer."""
    if q < ZERO_PROBABILITY:
        return False
    if q > 1.0 - ZERO_PROBABILITY:
        return True
    return u < q


@dataclass(frozen=True, eq=False)
class ReductionEvent:
    time: float
    projector: EmbeddedProjector
    answer: bool
    probability: float


@dataclass(frozen=True, eq=False)
class UnitaryStep:
    time: float
    hamiltonian: np.ndarray
    dt: float


def sample_reduction(s: DensityOperator, p: EmbeddedProjector, rng: np.random.Generator, time: float = 0.0):
    """Pose ``p`` and let nature answer; returns ``(event, new_state)``."""
    q = answer_probability(s, p)
    answer = decide(q, rng.random())
    return ReductionEvent(time, p, answer, q), apply_answer(s, p, answer)


@dataclass(frozen=True)
class Evolve:
    hamiltonian: np.ndarray
    dt: float


@dataclass(frozen=True)
class Reduce:
    projector: EmbeddedProjector


Step = Union[Evolve, Reduce]


@dataclass(frozen=True, eq=False)
class Trajectory:
    initial: DensityOperator
    events: tuple[Union[UnitaryStep, ReductionEvent], ...]
    final: DensityOperator
    seed: int

    def replay(self) -> DensityOperator:
        """Recompute the final state from ``initial`` using the recorded answers."""
        s = self.initial
        for ev in self.events:
            if isinstance(ev, UnitaryStep):
                s = evolve(s, ev.hamiltonian, ev.dt)
            else:
                s = apply_answer(s, ev.projector, ev.answer)
        return s

    def replay_error(self) -> float:
        return max_abs(self.replay().op - self.final.op)

    def reductions(self) -> list[ReductionEvent]:
        return [ev for ev in self.events if isinstance(ev, ReductionEvent)]

    def probability(self) -> float:
        """Probability of the recorded answer sequence, ``Tr(final)/Tr(initial)``."""
        return self.final.trace / self.initial.trace


def run_trajectory(initial: DensityOperator, schedule: Sequence[Step], seed: int, t0: float = 0.0) -> Trajectory:
    rng = np.random.default_rng(seed)
    s, t = initial, t0
    events: list[Union[UnitaryStep, ReductionEvent]] = []
    for step in schedule:
        if isinstance(step, Evolve):
            s = evolve(s, step.hamiltonian, step.dt)
            events.append(UnitaryStep(t, as_operator(step.hamiltonian), step.dt))
            t += step.dt
        elif isinstance(step, Reduce):
            ev, s = sample_reduction(s, step.projector, rng, time=t)
            events.append(ev)
        else:
            raise TypeError(f"unknown schedule step {step!r}")
    return Trajectory(initial, tuple(events), s, seed)


def subsystem_state(s: DensityOperator, keep) -> DensityOperator:
    if isinstance(keep, str):
        keep = (keep,)
    return DensityOperator(partial_trace(s.op, s.layout, keep), sublayout(s.layout, keep))


def sample_reduction_sequence(s: DensityOperator, projectors: Sequence[EmbeddedProjector],
                              n: int, rng: np.random.Generator) -> np.ndarray:
    """Run ``n`` independent trajectories posing ``projectors`` in order.

    Returns an ``(n, len(projectors))`` int8 array of answers (1 = yes).
    Draws ``n * len(projectors)`` uniforms row by row, so trajectory ``i``
    consumes the same stream a sequence of :func:`sample_reduction` calls
    would. The inner loop runs in the compiled kernel when available.
    """
    for p in projectors:
        _check_compatible(s, p)
    k = len(projectors)
    full = np.ascontiguousarray(np.stack([p.full for p in projectors]).reshape(k, s.dim, s.dim))
    comp = np.ascontiguousarray(np.eye(s.dim)[None, :, :] - full)
    u = rng.random((n, k))
    return _backend.kernels().sample_reductions(
        np.ascontiguousarray(s.op), full, comp, u, ZERO_PROBABILITY)


def sequential_branch_probability(s: DensityOperator, projectors: Sequence[EmbeddedProjector],
                                  answers: Sequence[bool]) -> float:
    """Probability of a given answer sequence, without raising on zero branches."""
    op = s.op
    for p, a in zip(projectors, answers):
        _check_compatible(s, p)
        op = _branch(op, p.full, bool(a))
    return float(np.trace(op).real) / s.trace


__all__ = [
    "DensityOperator", "EmbeddedProjector", "ReductionEvent", "UnitaryStep", "Trajectory",
    "Evolve", "Reduce", "ImpossibleOutcomeError", "ZERO_PROBABILITY", "TOL_ALGEBRA",
    "projector_on", "evolve", "pose_question", "answer_probability", "apply_answer",
    "sample_reduction", "run_trajectory", "subsystem_state", "sample_reduction_sequence",
    "sequential_branch_probability", "decide",
]

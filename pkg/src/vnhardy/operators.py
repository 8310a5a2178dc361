"""Dense complex-operator arithmetic.

Operators are plain square ``complex128`` numpy arrays. Tensor products use
the Kronecker layout with the first factor as the slow index; every other
module relies on that ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from math import prod
from typing import Iterable, Sequence

import numpy as np

#: Structural checks: Hermiticity, idempotence, unitarity.
TOL_STRUCTURAL = 1e-10
#: Algebraic identities: trace conservation, idempotence of Process I, etc.
TOL_ALGEBRA = 1e-12


class NonHermitianError(ValueError):
    """Raised when a Hermitian operator was required but not supplied."""


class LayoutError(ValueError):
    """Raised on unknown subsystem labels or layout/dimension mismatch."""


def as_operator(a) -> np.ndarray:
    """Return ``a`` as a square complex matrix, raising ``ValueError`` otherwise."""
    op = np.asarray(a, dtype=np.complex128)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] < 1:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {op.shape}")
    return op


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def ket_projector(v) -> np.ndarray:
    """Rank-1 projector onto the span of ``v`` (normalised internally)."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot project onto the zero vector")
    v = v / n
    return np.outer(v, np.conj(v))


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered tensor factors ``(label, dim)``; the first factor is the slowest index."""

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        if not factors:
            raise LayoutError("layout needs at least one factor")
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate subsystem labels in {labels}")
        if any(dim < 1 for _, dim in factors):
            raise LayoutError("factor dimensions must be positive")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, **dims: int) -> "SubsystemLayout":
        """``SubsystemLayout.of(L=2, R=2)``; keyword order is the factor order."""
        return cls(tuple(dims.items()))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def check(self, op: np.ndarray) -> None:
        if op.shape != (self.dim, self.dim):
            raise LayoutError(f"operator of shape {op.shape} does not match layout dim {self.dim}")


def tensor(*ops) -> np.ndarray:
    """Kronecker product of the given operators, first factor slow."""
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    return reduce(np.kron, (np.asarray(o, dtype=np.complex128) for o in ops))


def partial_trace(s, layout: SubsystemLayout, keep: Iterable[str]) -> np.ndarray:
    """Trace out every factor of ``layout`` whose label is not in ``keep``.

    Kept factors stay in layout order, so the result is laid out as the
    sub-layout of ``layout`` restricted to ``keep``.
    """
    s = as_operator(s)
    layout.check(s)
    keep = set(keep)
    if not keep:
        raise LayoutError("keep must name at least one subsystem")
    kept_idx = sorted(layout.index(label) for label in keep)
    n = len(layout.factors)
    dims = layout.dims
    t = s.reshape(dims + dims)
    # Trace from the highest axis down so lower axis numbers stay valid.
    for i in reversed(range(n)):
        if i not in kept_idx:
            m = t.ndim // 2
            t = np.trace(t, axis1=i, axis2=i + m)
    d = prod(dims[i] for i in kept_idx)
    return t.reshape(d, d)


def sublayout(layout: SubsystemLayout, keep: Iterable[str]) -> SubsystemLayout:
    keep = set(keep)
    for label in keep:
        layout.index(label)
    return SubsystemLayout(tuple(f for f in layout.factors if f[0] in keep))


def embed(local, layout: SubsystemLayout, labels: Sequence[str] | str) -> np.ndarray:
    """Pad ``local`` with identities so it acts on ``labels`` inside ``layout``.

    With several labels, ``local`` acts on their tensor product taken in
    layout order.
    """
    if isinstance(labels, str):
        labels = (labels,)
    idx = sorted(layout.index(label) for label in labels)
    if len(set(idx)) != len(idx):
        raise LayoutError("repeated subsystem label")
    local = as_operator(local)
    dims = layout.dims
    dl = prod(dims[i] for i in idx)
    if local.shape[0] != dl:
        raise LayoutError(f"local operator dim {local.shape[0]} does not match factors {labels} (dim {dl})")
    if idx == list(range(idx[0], idx[-1] + 1)):
        # contiguous factors: a plain Kronecker sandwich
        left = np.eye(prod(dims[: idx[0]]))
        right = np.eye(prod(dims[idx[-1] + 1 :]))
        return tensor(left, local, right)
    # general case: build on the permuted layout, then permute axes back
    rest = [i for i in range(len(dims)) if i not in idx]
    order = idx + rest
    full = np.kron(local, np.eye(prod(dims[i] for i in rest)))
    n = len(dims)
    t = full.reshape(tuple(dims[i] for i in order) * 2)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [n + k for k in inv])
    return t.reshape(layout.dim, layout.dim)


def is_hermitian(a, tol: float = TOL_STRUCTURAL) -> bool:
    return max_abs(a - dagger(a)) <= tol


def expm_hermitian(h, dt: float) -> np.ndarray:
    """``exp(-i h dt)`` by spectral decomposition of the Hermitian ``h``."""
    h = as_operator(h)
    residual = max_abs(h - dagger(h))
    if residual > TOL_STRUCTURAL:
        raise NonHermitianError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {residual:.3g})")
    h = 0.5 * (h + dagger(h))
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise NonHermitianError(f"eigendecomposition failed: {exc}") from exc
    return (v * np.exp(-1j * w * dt)) @ dagger(v)


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "residual": c.residual, "tol": c.tol, "passed": c.passed}
                for c in self.checks
            ],
        }


def validate(kind: str, op, tol: float = TOL_STRUCTURAL) -> ValidationReport:
    """Check ``op`` for one of ``hermitian``, ``projector``, ``psd``, ``unitary``.

    Never raises on a failed check; the report carries each residual. For
    ``psd`` the residual is the magnitude of the most negative eigenvalue.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    op = as_operator(op)
    if kind == "unitary":
        r = max_abs(dagger(op) @ op - np.eye(op.shape[0]))
        return ValidationReport(kind, (Check("unitarity", r, tol),))
    if kind not in ("hermitian", "projector", "psd"):
        raise ValueError(f"unknown validation kind {kind!r}")
    herm = Check("hermiticity", max_abs(op - dagger(op)), tol)
    checks = [herm]
    if kind == "projector":
        checks.append(Check("idempotence", max_abs(op @ op - op), tol))
    elif kind == "psd":
        w = np.linalg.eigvalsh(0.5 * (op + dagger(op)))
        checks.append(Check("min_eigenvalue", max(0.0, -float(w[0])), tol))
    return ValidationReport(kind, tuple(checks))

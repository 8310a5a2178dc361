"""Two-qubit Hardy configurations.

Settings are ``L1, L2`` on the left wing and ``R1, R2`` on the right; each
has outcomes ``+`` and ``-``. A configuration stores the ``+`` projector of
every setting, ``-`` being its complement. The four predictions are

1. (L1, R2): L1- forces R2+          -> c1 = P(L1-, R2-) = 0
2. (L2, R2): R2+ forces L2+          -> c2 = P(L2-, R2+) = 0
3. (L2, R1): L2+ forces R1-          -> c3 = P(L2+, R1+) = 0
4. (L1, R1): L1- with R1+ sometimes  -> q  = P(L1-, R1+) > 0

The state vector is indexed ``2 * l + r`` (left factor slow).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .operators import TOL_STRUCTURAL, ket_projector, max_abs, tensor, validate

OUTCOMES = ("+", "-")
L_SETTINGS = ("L1", "L2")
R_SETTINGS = ("R1", "R2")
SETTING_PAIRS = tuple((a, b) for a in L_SETTINGS for b in R_SETTINGS)

TOL_CERTAINTY = 1e-9
Q_SOMETIMES = 1e-6
TOL_CONSTRUCTION = 1e-10
#: Conditioning events below this probability leave a conditional undefined.
TOL_CONDITION = 1e-12

Q_CLOSED_FORM = (5 * math.sqrt(5) - 11) / 2


class NoHardyConfigurationError(ValueError):
    """The state admits no Hardy configuration (product or maximally entangled)."""


def canonical_phase(v) -> np.ndarray:
    """Normalise ``v`` and rotate its global phase so the first nonzero entry is real positive."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    v = v / np.linalg.norm(v)
    for i, x in enumerate(v):
        if abs(x) > 1e-15:
            v = v * (abs(x) / x)
            v[i] = abs(x)
            return v
    return v


def perp(v) -> np.ndarray:
    """Unit vector orthogonal to the 2-vector ``v``."""
    v = np.asarray(v, dtype=np.complex128)
    w = np.array([-np.conj(v[1]), np.conj(v[0])])
    n = np.linalg.norm(w)
    if n < 1e-300:
        raise NoHardyConfigurationError("degenerate null-vector computation")
    return w / n


def projector_vector(p) -> np.ndarray:
    """Canonical unit vector spanning the rank-1 projector ``p``."""
    w, v = np.linalg.eigh(np.asarray(p, dtype=np.complex128))
    return canonical_phase(v[:, -1])


def bloch_angles(v) -> tuple[float, float]:
    """``(theta, phi)`` with ``v ~ (cos(theta/2), e^{i phi} sin(theta/2))``."""
    v = canonical_phase(v)
    theta = 2.0 * math.atan2(abs(v[1]), abs(v[0]))
    phi = float(np.angle(v[1])) if abs(v[0]) > 1e-15 and abs(v[1]) > 1e-15 else 0.0
    return theta, phi


def from_bloch(theta: float, phi: float) -> np.ndarray:
    return np.array([math.cos(theta / 2), np.exp(1j * phi) * math.sin(theta / 2)])


@dataclass(frozen=True, eq=False)
class HardyConfiguration:
    """Pure two-qubit state plus the ``+`` projectors of the four settings.

    Construction checks only the structural invariants (unit state, rank-1
    projectors); whether the Hardy predictions hold is reported by
    :func:`verify_predictions`.
    """

    psi: np.ndarray
    projL1p: np.ndarray
    projL2p: np.ndarray
    projR1p: np.ndarray
    projR2p: np.ndarray

    def __post_init__(self):
        psi = np.array(self.psi, dtype=np.complex128).ravel()
        if psi.shape != (4,):
            raise ValueError("psi must have 4 components")
        if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
            raise ValueError(f"psi is not normalised (norm {np.linalg.norm(psi)!r})")
        psi.flags.writeable = False
        object.__setattr__(self, "psi", psi)
        for name in ("projL1p", "projL2p", "projR1p", "projR2p"):
            p = np.array(getattr(self, name), dtype=np.complex128)
            if p.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2")
            rep = validate("projector", p, TOL_STRUCTURAL)
            if not rep.passed or abs(np.trace(p).real - 1.0) > TOL_STRUCTURAL:
                raise ValueError(f"{name} is not a rank-1 projector")
            p.flags.writeable = False
            object.__setattr__(self, name, p)

    @classmethod
    def from_vectors(cls, psi, l1p, l2p, r1p, r2p) -> "HardyConfiguration":
        return cls(psi, ket_projector(l1p), ket_projector(l2p), ket_projector(r1p), ket_projector(r2p))

    def projector(self, setting: str, outcome: str = "+") -> np.ndarray:
        p = getattr(self, f"proj{setting}p")
        if outcome == "+":
            return p
        if outcome == "-":
            return np.eye(2) - p
        raise ValueError(f"outcome must be '+' or '-', got {outcome!r}")

    def transformed(self, u_left, u_right) -> "HardyConfiguration":
        """Apply ``u_left (x) u_right`` to the state and conjugate the projectors to match."""
        ul = np.asarray(u_left, dtype=np.complex128)
        ur = np.asarray(u_right, dtype=np.complex128)
        conj = lambda u, p: u @ p @ np.conj(u).T  # noqa: E731
        return HardyConfiguration(
            tensor(ul, ur) @ self.psi,
            conj(ul, self.projL1p), conj(ul, self.projL2p),
            conj(ur, self.projR1p), conj(ur, self.projR2p),
        )

    def to_dict(self) -> dict:
        psi = []
        for z in self.psi:
            psi.extend((float(z.real), float(z.imag)))
        bases = {}
        for s in L_SETTINGS + R_SETTINGS:
            theta, phi = bloch_angles(projector_vector(self.projector(s)))
            bases[s] = {"theta": theta, "phi": phi}
        return {"psi": psi, "bases": bases}

    @classmethod
    def from_dict(cls, d: dict) -> "HardyConfiguration":
        psi = d["psi"]
        if len(psi) != 8:
            raise ValueError("psi must be 8 interleaved re/im reals")
        vec = np.array([complex(float(psi[2 * i]), float(psi[2 * i + 1])) for i in range(4)])
        # serialised digits may drift the norm by an ulp or two
        n = np.linalg.norm(vec)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"psi is not normalised (norm {n!r})")
        vec = vec / n
        kets = [from_bloch(float(d["bases"][s]["theta"]), float(d["bases"][s]["phi"]))
                for s in ("L1", "L2", "R1", "R2")]
        return cls.from_vectors(vec, *kets)


def born_joint(cfg: HardyConfiguration, settings: tuple[str, str]) -> np.ndarray:
    """Joint outcome table ``t[a, b]`` for ``settings = (Lk, Rm)``.

    Index 0 is ``+`` and 1 is ``-`` on both axes.
    """
    ls, rs = settings
    if ls not in L_SETTINGS or rs not in R_SETTINGS:
        raise ValueError(f"unknown setting pair {settings!r}")
    t = np.empty((2, 2))
    for i, a in enumerate(OUTCOMES):
        for j, b in enumerate(OUTCOMES):
            op = np.kron(cfg.projector(ls, a), cfg.projector(rs, b))
            t[i, j] = float(np.real(np.vdot(cfg.psi, op @ cfg.psi)))
    t[(t < 0) & (t >= -1e-12)] = 0.0
    return t


def born_tables(cfg: HardyConfiguration) -> dict[tuple[str, str], np.ndarray]:
    return {pair: born_joint(cfg, pair) for pair in SETTING_PAIRS}


@dataclass(frozen=True)
class PredictionReport:
    p1: Optional[float]
    p2: Optional[float]
    p3: Optional[float]
    q: float
    c1: float
    c2: float
    c3: float
    tol_certainty: float = TOL_CERTAINTY
    q_min: float = Q_SOMETIMES

    @property
    def certainties_hold(self) -> bool:
        return all(p is not None and p >= 1.0 - self.tol_certainty for p in (self.p1, self.p2, self.p3))

    @property
    def sometimes_holds(self) -> bool:
        return self.q > self.q_min

    @property
    def passed(self) -> bool:
        return self.certainties_hold and self.sometimes_holds

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k in ("p1", "p2", "p3") if getattr(self, k) is None)

    def to_dict(self) -> dict:
        return {
            "p1": self.p1, "p2": self.p2, "p3": self.p3, "q": self.q,
            "c1": self.c1, "c2": self.c2, "c3": self.c3,
            "undefined": list(self.undefined),
            "tol_certainty": self.tol_certainty, "q_min": self.q_min,
            "passed": self.passed,
        }


def _conditional(joint: float, given: float) -> Optional[float]:
    if given < TOL_CONDITION:
        return None
    return min(1.0, max(0.0, joint / given))


def verify_predictions(cfg: HardyConfiguration, tol_certainty: float = TOL_CERTAINTY,
                       q_min: float = Q_SOMETIMES) -> PredictionReport:
    t12 = born_joint(cfg, ("L1", "R2"))
    t22 = born_joint(cfg, ("L2", "R2"))
    t21 = born_joint(cfg, ("L2", "R1"))
    t11 = born_joint(cfg, ("L1", "R1"))
    # P(R2+ | L1-), P(L2+ | R2+), P(R1- | L2+)
    p1 = _conditional(t12[1, 0], t12[1].sum())
    p2 = _conditional(t22[0, 0], t22[:, 0].sum())
    p3 = _conditional(t21[0, 1], t21[0].sum())
    return PredictionReport(
        p1=p1, p2=p2, p3=p3, q=float(t11[1, 0]),
        c1=float(t12[1, 1]), c2=float(t22[1, 0]), c3=float(t21[0, 0]),
        tol_certainty=tol_certainty, q_min=q_min,
    )


def schmidt_state(theta: float) -> np.ndarray:
    """``cos(theta)|00> + sin(theta)|11>``."""
    return np.array([math.cos(theta), 0.0, 0.0, math.sin(theta)], dtype=np.complex128)


def construct_from_state(psi) -> HardyConfiguration:
    """Build the Hardy configuration of ``psi`` with the largest paradox probability.

    The ``L1-`` direction is taken as ``(cos a, sin a)`` in the left Schmidt
    basis with ``cos^2 a = s^3 / (s^3 + c^3)`` for Schmidt coefficients
    ``c >= s``, the maximiser of ``q`` over that choice. Each remaining
    direction is then the null vector of one zero-probability condition:
    R2- from c1, L2- from c2 (with R2+ fixed), R1+ from c3 (with L2+ fixed).
    """
    psi = np.asarray(psi, dtype=np.complex128).ravel()
    if psi.shape != (4,):
        raise ValueError("psi must have 4 components")
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > 1e-9:
        raise ValueError(f"psi is not normalised (norm {n!r})")
    psi = canonical_phase(psi)
    m = psi.reshape(2, 2)
    u, sv, _ = np.linalg.svd(m)
    c, s = float(sv[0]), float(sv[1])
    if s < TOL_CONSTRUCTION:
        raise NoHardyConfigurationError("product state: no Hardy configuration exists")
    if c - s < TOL_CONSTRUCTION:
        raise NoHardyConfigurationError("maximally entangled state: Hardy probability vanishes")

    a = math.atan2(math.sqrt(c ** 3), math.sqrt(s ** 3))
    l1m = u @ np.array([math.cos(a), math.sin(a)])
    # <x (x) y | psi> = conj(y) . (m^T conj(x)) = conj(x) . (m conj(y))
    r2m = perp(m.T @ np.conj(l1m))
    r2p = perp(r2m)
    l2m = perp(m @ np.conj(r2p))
    l2p = perp(l2m)
    r1p = perp(m.T @ np.conj(l2p))
    l1p = perp(l1m)

    cfg = HardyConfiguration.from_vectors(
        psi, canonical_phase(l1p), canonical_phase(l2p), canonical_phase(r1p), canonical_phase(r2p))
    rep = verify_predictions(cfg)
    worst = max(rep.c1, rep.c2, rep.c3)
    if worst > TOL_CONSTRUCTION:
        raise NoHardyConfigurationError(f"constraint residual {worst:.3g} too large")
    if rep.q <= TOL_CONDITION:
        raise NoHardyConfigurationError(f"Hardy probability {rep.q:.3g} vanishes")
    return cfg


def hardy_q(theta: float) -> float:
    """Paradox probability of the constructed configuration for the Schmidt angle ``theta``."""
    try:
        cfg = construct_from_state(schmidt_state(theta))
    except NoHardyConfigurationError:
        return 0.0
    return float(born_joint(cfg, ("L1", "R1"))[1, 0])


@dataclass(frozen=True, eq=False)
class HardyOptimum:
    config: HardyConfiguration
    q_max: float
    theta: float
    grid_theta: float
    grid_q: float
    bracket_width: float
    evaluations: int

    def to_dict(self) -> dict:
        return {
            "q_max": self.q_max, "theta": self.theta,
            "grid_theta": self.grid_theta, "grid_q": self.grid_q,
            "bracket_width": self.bracket_width, "evaluations": self.evaluations,
            "closed_form": Q_CLOSED_FORM, "deviation": abs(self.q_max - Q_CLOSED_FORM),
        }


_INVPHI = (math.sqrt(5) - 1) / 2


def optimize_hardy(resolution: int = 256, iterations: int = 100, tol_theta: float = 1e-8) -> HardyOptimum:
    """Maximise the paradox probability over the Schmidt angle in (0, pi/4).

    A uniform grid ``theta_i = i * (pi/4) / resolution`` picks the best cell
    (lowest index on ties); golden-section search then shrinks the bracket
    around it to ``tol_theta`` or until ``iterations`` run out.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64 points")
    h = (math.pi / 4) / resolution
    grid = [i * h for i in range(1, resolution)]
    qs = [hardy_q(t) for t in grid]
    evals = len(qs)
    k = int(np.argmax(qs))
    best_t, best_q = grid[k], qs[k]

    lo, hi = grid[k] - h, grid[k] + h
    x1 = hi - _INVPHI * (hi - lo)
    x2 = lo + _INVPHI * (hi - lo)
    f1, f2 = hardy_q(x1), hardy_q(x2)
    evals += 2
    it = 0
    while hi - lo > tol_theta and it < iterations:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _INVPHI * (hi - lo)
            f2 = hardy_q(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _INVPHI * (hi - lo)
            f1 = hardy_q(x1)
        evals += 1
        it += 1
    theta, q = (x1, f1) if f1 >= f2 else (x2, f2)
    if q < best_q:
        theta, q = best_t, best_q
    return HardyOptimum(
        config=construct_from_state(schmidt_state(theta)), q_max=q, theta=theta,
        grid_theta=best_t, grid_q=best_q, bracket_width=hi - lo, evaluations=evals,
    )


def max_deviation(a, b) -> float:
    return max_abs(np.asarray(a) - np.asarray(b))

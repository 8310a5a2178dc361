import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vnhardy.operators import SubsystemLayout  # noqa: E402

# q_max from oracles.hardy_grid_max(300, 300) polished with Nelder-Mead
Q_ORACLE = 0.09016994374947432
THETA_ORACLE = 0.43469235


def random_unitary(rng, d):
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, d, rank=None, normalize=True):
    rank = d if rank is None else rank
    a = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    s = a @ a.conj().T
    return s / np.trace(s).real if normalize else s


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * (a + a.conj().T) / 2


def random_projector(rng, d, rank=None):
    rank = rng.integers(0, d + 1) if rank is None else rank
    u = random_unitary(rng, d)[:, :rank]
    return u @ u.conj().T


def random_layout(rng, d):
    """Split d into factors where possible."""
    for f in (2, 3):
        if d % f == 0 and d > f and rng.random() < 0.7:
            return SubsystemLayout((("a", f), ("b", d // f)))
    return SubsystemLayout((("a", d),))


@pytest.fixture
def rng():
    return np.random.default_rng(20240531)

"""Independent reference computations used to derive frozen test values.

Nothing here imports the package's construction or exponentiation code.
"""
import itertools
import math

import numpy as np
from scipy.linalg import null_space


def taylor_expm(a, terms=30):
    """exp(a) by a truncated power series."""
    a = np.asarray(a, dtype=complex)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, terms):
        term = term @ a / k
        out = out + term
    return out


def _null_partner(psi, fixed, side):
    """Unit 2-vector y with <fixed (x) y|psi> = 0 (side='L' fixes the left vector)."""
    m = psi.reshape(2, 2)
    if side == "L":
        row = (np.conj(fixed) @ m)          # coefficients multiplying conj(y)
    else:
        row = (m @ np.conj(fixed))
    ns = null_space(row.reshape(1, 2))      # conj(y) in the null space
    return np.conj(ns[:, 0])


def hardy_q_bruteforce(theta, alpha):
    """Hardy probability for cos t|00>+sin t|11> with L1- = (cos a, sin a), via null spaces."""
    psi = np.array([math.cos(theta), 0, 0, math.sin(theta)], dtype=complex)
    l1m = np.array([math.cos(alpha), math.sin(alpha)], dtype=complex)
    r2m = _null_partner(psi, l1m, "L")
    r2p = null_space(np.conj(r2m).reshape(1, 2))[:, 0]
    l2m = _null_partner(psi, r2p, "R")
    l2p = null_space(np.conj(l2m).reshape(1, 2))[:, 0]
    r1p = _null_partner(psi, l2p, "L")
    amp = np.vdot(np.kron(l1m, r1p), psi)
    return float(abs(amp) ** 2)


def hardy_grid_max(n_theta=400, n_alpha=400):
    best = (-1.0, None, None)
    for t in np.linspace(0, math.pi / 4, n_theta + 1)[1:-1]:
        for a in np.linspace(0, math.pi / 2, n_alpha + 1)[1:-1]:
            q = hardy_q_bruteforce(t, a)
            if q > best[0]:
                best = (q, t, a)
    return best


def lhv_survivors_bruteforce():
    """Strategies as bit tuples (0 = '+', 1 = '-') over (a1, a2, b1, b2)."""
    out = []
    for a1, a2, b1, b2 in itertools.product((0, 1), repeat=4):
        if a1 == 1 and b2 == 1:
            continue
        if a2 == 1 and b2 == 0:
            continue
        if a2 == 0 and b1 == 0:
            continue
        out.append((a1, a2, b1, b2))
    return out

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampling kernel; same contract as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

ctypedef double complex cplx


cdef inline void _sandwich(const cplx[:, ::1] m, cplx[:, ::1] s, cplx[:, ::1] tmp, Py_ssize_t d) noexcept nogil:
    # s <- m s m
    cdef Py_ssize_t a, b, c
    cdef cplx acc
    for a in range(d):
        for b in range(d):
            acc = 0
            for c in range(d):
                acc = acc + m[a, c] * s[c, b]
            tmp[a, b] = acc
    for a in range(d):
        for b in range(d):
            acc = 0
            for c in range(d):
                acc = acc + tmp[a, c] * m[c, b]
            s[a, b] = acc


def sample_reductions(const cplx[:, ::1] rho, const cplx[:, :, ::1] proj,
                      const cplx[:, :, ::1] comp, const double[:, ::1] uniforms,
                      double threshold):
    cdef Py_ssize_t n = uniforms.shape[0]
    cdef Py_ssize_t k = uniforms.shape[1]
    cdef Py_ssize_t d = rho.shape[0]
    if proj.shape[0] != k or comp.shape[0] != k:
        raise ValueError("one projector per uniform column required")
    if proj.shape[1] != d or proj.shape[2] != d or rho.shape[1] != d:
        raise ValueError("projector and state dimensions differ")

    out = np.empty((n, k), dtype=np.int8)
    cdef signed char[:, ::1] o = out
    cdef cplx[:, ::1] s = np.empty((d, d), dtype=np.complex128)
    cdef cplx[:, ::1] tmp = np.empty((d, d), dtype=np.complex128)
    cdef Py_ssize_t i, j, a, b
    cdef double total, py, q
    cdef bint yes

    with nogil:
        for i in range(n):
            for a in range(d):
                for b in range(d):
                    s[a, b] = rho[a, b]
            for j in range(k):
                total = 0.0
                py = 0.0
                for a in range(d):
                    total = total + s[a, a].real
                    for b in range(d):
                        py = py + (proj[j, a, b] * s[b, a]).real
                q = py / total
                if q < threshold:
                    yes = False
                elif q > 1.0 - threshold:
                    yes = True
                else:
                    yes = uniforms[i, j] < q
                if yes:
                    _sandwich(proj[j], s, tmp, d)
                else:
                    _sandwich(comp[j], s, tmp, d)
                o[i, j] = yes
    return out

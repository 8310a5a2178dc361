"""Reference implementation of the sampling kernel, numpy per trajectory."""
import numpy as np


def sample_reductions(rho, proj, comp, uniforms, threshold):
    """Sequential reductions for many trajectories.

    ``proj[j]`` / ``comp[j]`` are the full-space projector of step ``j`` and
    its complement. Row ``i`` of ``uniforms`` drives trajectory ``i``.
    Returns int8 answers, 1 for yes.
    """
    n, k = uniforms.shape
    out = np.empty((n, k), dtype=np.int8)
    for i in range(n):
        s = rho
        for j in range(k):
            total = np.trace(s).real
            q = np.sum(proj[j] * s.T).real / total
            if q < threshold:
                yes = False
            elif q > 1.0 - threshold:
                yes = True
            else:
                yes = uniforms[i, j] < q
            m = proj[j] if yes else comp[j]
            s = m @ s @ m
            out[i, j] = yes
    return out

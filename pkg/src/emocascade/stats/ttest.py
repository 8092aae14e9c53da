import numpy as np
from scipy import stats

from ..exceptions import DegenerateVariance, InvalidInput


def welch_t_test(sample_a, sample_b):
    """Unequal-variance two-sample t-test; returns ``(t, dof, two-sided p)``."""
    a = np.asarray(sample_a, dtype=float).ravel()
    b = np.asarray(sample_b, dtype=float).ravel()
    if a.size < 2 or b.size < 2:
        raise InvalidInput("each sample needs at least two values")
    va, vb = a.var(ddof=1) / a.size, b.var(ddof=1) / b.size
    if va + vb == 0.0:
        raise DegenerateVariance("both samples have zero variance; t is undefined")
    t = (a.mean() - b.mean()) / np.sqrt(va + vb)
    dof = (va + vb) ** 2 / (va**2 / (a.size - 1) + vb**2 / (b.size - 1))
    p = 2 * stats.t.sf(abs(t), dof)
    return float(t), float(dof), float(p)

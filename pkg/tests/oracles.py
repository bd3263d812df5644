"""Independent reference computations shared by the property and acceptance suites."""
import numpy as np

from opindex.gamma import SeqOperator
from opindex.toeplitz import CircleSymbol


def root_count_winding(phi: CircleSymbol) -> int:
    """Winding of a trig polynomial by the argument principle: ``z^{-lo} phi`` is a
    polynomial, its winding is the number of roots inside the unit disk."""
    lo, hi = min(phi.fourier), max(phi.fourier)
    roots = np.roots([phi.coef(k) for k in range(hi, lo - 1, -1)])
    inside = int(np.sum(np.abs(roots) < 1))
    return inside + lo


def random_trig_poly(rng, degree: int, margin: float = 0.05) -> CircleSymbol:
    """Random coefficients on ``-degree..degree`` with ``|phi| > margin`` on the circle."""
    theta = 2 * np.pi * np.arange(4096) / 4096
    while True:
        c = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
        phi = CircleSymbol({k - degree: c[k] for k in range(2 * degree + 1)})
        if np.abs(phi(theta)).min() > margin * np.abs(c).sum():
            return phi


def shift_with_tail(k: int, J: int) -> np.ndarray:
    """``e_j -> e_{j+k}`` for ``j >= 0`` and identity below 0 (index ``-k``); the
    adjoint pattern for negative ``k``."""
    if k < 0:
        return shift_with_tail(-k, J).T.copy()
    n = 2 * J + 1
    m = np.zeros((n, n))
    for j in range(-J, J + 1):
        if j < 0:
            m[j + J, j + J] = 1
        elif j + k <= J:
            m[j + k + J, j + J] = 1
    return m


def random_band_operator(rng, J: int = 40, radius: int = 2) -> tuple[SeqOperator, int]:
    """A shift-with-tail of random step in -3..3 plus a small dyadic perturbation on
    ``|j| <= radius``; returns the operator and its index ``-k``."""
    k = int(rng.integers(-3, 4))
    m = shift_with_tail(k, J).astype(complex)
    w = 2 * radius + 1
    pert = rng.integers(-1, 2, size=(w, w)) + 1j * rng.integers(-1, 2, size=(w, w))
    m[J - radius:J + radius + 1, J - radius:J + radius + 1] += pert / 32
    return SeqOperator(m, J, f"band k={k}"), -k

"""Hardy space projection, truncated Toeplitz and Hankel matrices, the Toeplitz
index as minus the winding number, and the Cayley transform from the circle
to the line.

Circle functions are written in the basis ``e_k(z) = z^k``; a two-sided
coefficient vector of half-width K stores frequencies ``-K..K`` in order.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .discretize import GapReport, localized_index
from .errors import CorroborationError, NotFredholmError, UndersampledLoopError
from .symbols import SampledLoop, winding_number


@dataclass(frozen=True, eq=False)
class CircleSymbol:
    """Trigonometric polynomial ``phi(e^{i theta}) = sum_k fourier[k] e^{i k theta}``."""

    fourier: dict

    def __post_init__(self):
        clean = {int(k): complex(v) for k, v in self.fourier.items() if complex(v) != 0}
        object.__setattr__(self, "fourier", clean)

    @property
    def degree(self) -> int:
        return max((abs(k) for k in self.fourier), default=0)

    def coef(self, k: int) -> complex:
        return self.fourier.get(k, 0j)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        out = np.zeros(theta.shape, dtype=complex)
        for k, c in self.fourier.items():
            out += c * np.exp(1j * k * theta)
        return out

    def conj(self) -> "CircleSymbol":
        return CircleSymbol({-k: c.conjugate() for k, c in self.fourier.items()})

    def __mul__(self, other: "CircleSymbol") -> "CircleSymbol":
        acc = {}
        for k1, c1 in self.fourier.items():
            for k2, c2 in other.fourier.items():
                acc[k1 + k2] = acc.get(k1 + k2, 0j) + c1 * c2
        return CircleSymbol(acc)

    def __add__(self, other: "CircleSymbol") -> "CircleSymbol":
        acc = dict(self.fourier)
        for k, c in other.fourier.items():
            acc[k] = acc.get(k, 0j) + c
        return CircleSymbol(acc)

    def __sub__(self, other: "CircleSymbol") -> "CircleSymbol":
        return self + CircleSymbol({k: -c for k, c in other.fourier.items()})

    @classmethod
    def monomial(cls, k: int, c: complex = 1.0) -> "CircleSymbol":
        return cls({k: c})

    @classmethod
    def from_json(cls, doc: dict) -> "CircleSymbol":
        coeffs = doc["fourier"]
        return cls({int(k): complex(*v) if isinstance(v, (list, tuple)) else complex(v)
                    for k, v in coeffs.items()})

    def to_json(self) -> dict:
        return {"fourier": {str(k): c.real if c.imag == 0 else [c.real, c.imag]
                            for k, c in sorted(self.fourier.items())}}


@dataclass(frozen=True, eq=False)
class ToeplitzTruncation:
    symbol: CircleSymbol
    size: int
    matrix: np.ndarray


def toeplitz_truncation(phi: CircleSymbol, m: int) -> ToeplitzTruncation:
    """``M[p, q] = fourier[p - q]`` for ``0 <= p, q < m``."""
    mat = np.zeros((m, m), dtype=complex)
    p = np.arange(m)
    for k, c in phi.fourier.items():
        if abs(k) < m:
            q = p - k
            ok = (q >= 0) & (q < m)
            mat[p[ok], q[ok]] = c
    mat.setflags(write=False)
    return ToeplitzTruncation(phi, m, mat)


def hardy_projection(v: np.ndarray) -> np.ndarray:
    """Zero the negative frequencies of a centred two-sided coefficient vector."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or len(v) % 2 == 0:
        raise ValueError("expected a centred vector of odd length")
    out = v.copy()
    out[: len(v) // 2] = 0
    return out


def hankel_block(phi: CircleSymbol, m: int) -> np.ndarray:
    """Matrix of ``(Id - P) phi(M) P``: rows are frequencies -1..-m, columns 0..m-1."""
    mat = np.zeros((m, m), dtype=complex)
    for r in range(1, m + 1):
        for q in range(m):
            mat[r - 1, q] = phi.coef(-r - q)
    return mat


def sample_loop(phi: CircleSymbol, n: int) -> SampledLoop:
    theta = 2 * np.pi * np.arange(n + 1) / n
    return SampledLoop(phi(theta))


def circle_winding(phi: CircleSymbol, n: Optional[int] = None) -> int:
    """Winding number of ``phi`` around 0, doubling the sampling until it is resolved."""
    n = n or 4 * (phi.degree + 1)
    while True:
        try:
            return winding_number(sample_loop(phi, n))
        except UndersampledLoopError:
            if n > 1 << 20:
                raise
            n *= 2


def root_proximity(phi: CircleSymbol) -> float:
    """``max min(|r|, 1/|r|)`` over the roots of ``z^d phi(z)``; 0 for monomials."""
    if not phi.fourier:
        return 0.0
    lo, hi = min(phi.fourier), max(phi.fourier)
    roots = np.roots([phi.coef(k) for k in range(hi, lo - 1, -1)])
    roots = roots[roots != 0]
    if roots.size == 0:
        return 0.0
    mod = np.abs(roots)
    return float(np.max(np.minimum(mod, 1.0 / mod)))


@dataclass(frozen=True)
class ToeplitzIndex:
    index: int
    winding: int
    truncation_index: int
    gap: GapReport

    @property
    def corroborated(self) -> bool:
        """True when the truncation estimate is reliable (and then it agrees)."""
        return self.gap.reliable

    def to_json(self) -> dict:
        return {"index": self.index, "winding": self.winding,
                "truncation_index": self.truncation_index,
                "corroborated": self.corroborated, "gap": self.gap.to_json()}


def toeplitz_index(phi: CircleSymbol, m: int = 256, eps: float = 1e-8) -> ToeplitzIndex:
    """Index of ``T_phi`` as ``-winding(phi)``, corroborated on the m-truncation.

    The truncation has as many near-null right as left singular vectors; the
    ones concentrated on the first half of the basis approximate ker/coker of
    ``T_phi``, those at the far end are produced by the truncation.  Kernel
    vectors decay like ``rho^k`` where ``rho`` is the root modulus of
    ``z^d phi(z)`` closest to the circle (measured as ``min(|r|, 1/|r|)``), so
    the truncation resolves them only when ``rho^m <= eps``; otherwise the
    estimate is marked unstable regardless of the singular value gap.
    """
    probe = np.abs(phi(2 * np.pi * np.arange(4 * m) / (4 * m)))
    scale = max(1.0, sum(abs(c) for c in phi.fourier.values()))
    if probe.min() <= 1e-10 * scale:
        raise NotFredholmError(float(probe.min()))
    w = circle_winding(phi)
    mat = toeplitz_truncation(phi, m).matrix
    head = np.arange(m) < m // 2

    def core(v):
        p = np.abs(v) ** 2
        return float(p[head].sum() / p.sum())

    t_idx, gap = localized_index(mat, eps, core)
    if root_proximity(phi) ** m > eps:
        gap = replace(gap, unstable=True)
    if gap.reliable and t_idx != -w:
        raise CorroborationError(f"truncation index {t_idx} disagrees with -winding {-w}")
    return ToeplitzIndex(-w, w, t_idx, gap)


# ---------------------------------------------------------------------------
# Cayley transform

def trig_interpolate(g_samples: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of uniform samples ``g(2 pi p / N)``."""
    g = np.asarray(g_samples, dtype=complex)
    n = len(g)
    c = np.fft.fft(g) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        # split the Nyquist coefficient symmetrically so real data stays real
        c = np.append(c, c[n // 2] / 2)
        c[n // 2] /= 2
        k = np.append(k, n // 2)
        k[n // 2] = -n // 2
    theta = np.asarray(theta, dtype=float)
    return np.exp(1j * np.multiply.outer(theta, k)) @ c


def cayley_transform(g_samples: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``(Ug)(t) = g((1 + it)/(1 - it)) / (sqrt(pi) (1 - it))``.

    ``g_samples`` are values on the uniform grid ``theta_p = 2 pi p / N``; the
    circle point ``(1 + it)/(1 - it)`` has angle ``2 arctan t``.
    """
    t = np.asarray(t, dtype=float)
    gz = trig_interpolate(g_samples, 2.0 * np.arctan(t))
    return gz / (np.sqrt(np.pi) * (1.0 - 1j * t))


def inverse_cayley(h, z: np.ndarray) -> np.ndarray:
    """``(U^{-1} h)(z) = 2 sqrt(pi) / (z + 1) * h(i (z - 1) / (-z - 1))`` for ``z != -1``."""
    z = np.asarray(z, dtype=complex)
    t = (1j * (z - 1) / (-z - 1)).real
    return 2 * np.sqrt(np.pi) / (z + 1) * h(t)


def cayley_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Points ``t_k = tan(theta_k / 2)`` and trapezoid weights ``(1 + t^2)/2 * dtheta``.

    ``theta_k`` runs over the uniform grid on ``(-pi, pi)`` (the point at
    infinity is omitted), so ``sum w |h(t)|^2`` approximates ``||h||^2`` on the line.
    """
    theta = -np.pi + 2 * np.pi * (np.arange(n) + 0.5) / n
    t = np.tan(theta / 2)
    w = (1 + t * t) / 2 * (2 * np.pi / n)
    return t, w


def circle_norm_sq(g_samples: np.ndarray) -> float:
    """``||g||^2`` for the normalised measure ``d theta / 2 pi`` (trapezoid rule)."""
    g = np.asarray(g_samples, dtype=complex)
    return float(np.mean(np.abs(g) ** 2))


def line_norm_sq(h_values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.sum(weights * np.abs(h_values) ** 2))

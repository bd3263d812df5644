"""Periodic FFT-grid discretization of generator words on L^2(R), compactness
diagnostics and epsilon-rank index estimation.

The grid covers ``[-L, L)`` with ``n`` points; the dual grid is the FFT frequency
grid with spacing ``pi / L``.  Fourier multipliers are ``F_g^{-1} diag(b(xi)) F_g``
with ``F_g[m, k] = exp(-i xi_m x_k) / sqrt(n)``, the discrete counterpart of the
unitary transform with kernel ``exp(-i x xi) / sqrt(2 pi)``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np

from .errors import GridIncommensurableError
from .symbols import (GeneratorWord, ScalarFn, SemiperiodicSymbol, eval_semiperiodic)


@dataclass(frozen=True)
class GridSpec:
    n: int
    half_width: float

    def __post_init__(self):
        n = int(self.n)
        if n < 64 or n & (n - 1):
            raise ValueError("grid size must be a power of two >= 64")
        if not self.half_width > 0:
            raise ValueError("half width must be positive")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "half_width", float(self.half_width))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    @property
    def dual_spacing(self) -> float:
        return np.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return np.pi / self.spacing

    @property
    def x(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        """Dual points in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, self.spacing)

    def fourier_matrix(self) -> np.ndarray:
        return np.exp(-1j * np.outer(self.xi, self.x)) / np.sqrt(self.n)

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"n=1024,L=50.27"``."""
        kv = dict(item.split("=", 1) for item in text.replace(" ", "").split(","))
        return cls(int(kv["n"]), float(kv["L"]))


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    matrix: np.ndarray
    grid: GridSpec
    provenance: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.grid.n, self.grid.n):
            raise ValueError(f"matrix shape {m.shape} does not match grid size {self.grid.n}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def _same_grid(self, other):
        if other.grid != self.grid:
            raise ValueError("operators live on different grids")

    def __matmul__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        self._same_grid(other)
        return DiscreteOperator(self.matrix @ other.matrix, self.grid,
                                f"({self.provenance})({other.provenance})")

    def __add__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        self._same_grid(other)
        return DiscreteOperator(self.matrix + other.matrix, self.grid,
                                f"{self.provenance} + {other.provenance}")

    def __sub__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        self._same_grid(other)
        return DiscreteOperator(self.matrix - other.matrix, self.grid,
                                f"{self.provenance} - ({other.provenance})")

    def __mul__(self, c) -> "DiscreteOperator":
        return DiscreteOperator(self.matrix * c, self.grid, f"{c}*({self.provenance})")

    __rmul__ = __mul__

    def adjoint(self) -> "DiscreteOperator":
        return DiscreteOperator(self.matrix.conj().T, self.grid, f"({self.provenance})*")

    @cached_property
    def svd(self):
        return np.linalg.svd(self.matrix)

    @property
    def singular_values(self) -> np.ndarray:
        return self.svd[1]

    def norm(self) -> float:
        return float(self.singular_values[0])

    def core_fraction(self, v: np.ndarray) -> float:
        """Share of ``v`` living in ``|x| <= L/2`` and ``|xi| <= nyquist/2``."""
        g = self.grid
        p = np.abs(v) ** 2
        fx = p[np.abs(g.x) <= g.half_width / 2].sum() / p.sum()
        pf = np.abs(np.fft.fft(v)) ** 2
        ff = pf[np.abs(g.xi) <= g.nyquist / 2].sum() / pf.sum()
        return float(min(fx, ff))


def identity_op(g: GridSpec) -> DiscreteOperator:
    return DiscreteOperator(np.eye(g.n, dtype=complex), g, "Id")


def multiplication_op(a: Union[ScalarFn, SemiperiodicSymbol, Callable], g: GridSpec) -> DiscreteOperator:
    """``diag(a(x_k))``."""
    if isinstance(a, SemiperiodicSymbol):
        vals = eval_semiperiodic(a, g.x)
    else:
        vals = np.asarray(a(g.x), dtype=complex)
    return DiscreteOperator(np.diag(vals), g, "a(M)")


def _fourier_conjugate(sym: np.ndarray) -> np.ndarray:
    n = len(sym)
    return np.fft.ifft(sym[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)


def fourier_multiplier_op(b: Union[ScalarFn, Callable], g: GridSpec) -> DiscreteOperator:
    """``F_g^{-1} diag(b(xi_m)) F_g``; the phases from the grid offset cancel."""
    return DiscreteOperator(_fourier_conjugate(np.asarray(b(g.xi), dtype=complex)), g, "b(D)")


def modulation_op(j: int, g: GridSpec) -> DiscreteOperator:
    """``diag(exp(i j x_k))``."""
    return DiscreteOperator(np.diag(np.exp(1j * j * g.x)), g, f"e^{{i{j}M}}")


def translation_op(j: int, g: GridSpec) -> DiscreteOperator:
    """``(T_j u)(x) = u(x + j)`` as a circulant shift."""
    steps = j / g.spacing
    if abs(steps - round(steps)) > 1e-9:
        raise GridIncommensurableError(j, g.spacing)
    s = int(round(steps))
    mat = np.roll(np.eye(g.n, dtype=complex), s, axis=1)
    return DiscreteOperator(mat, g, f"T_{j}")


def _factor_matrix(f, g: GridSpec) -> np.ndarray:
    if f.kind == "M":
        return multiplication_op(f.fn, g).matrix
    if f.kind == "D":
        return fourier_multiplier_op(f.fn, g).matrix
    return modulation_op(f.j, g).matrix


def assemble(w: GeneratorWord, g: GridSpec) -> DiscreteOperator:
    """Matrix of the word on the grid, each term multiplied in word order."""
    total = np.zeros((g.n, g.n), dtype=complex)
    for t in w.terms:
        acc = None
        for f in t.factors:
            m = _factor_matrix(f, g)
            acc = m if acc is None else acc @ m
        if acc is None:
            acc = np.eye(g.n)
        total += t.coef * acc
    return DiscreteOperator(total, g, w.label or "word")


# ---------------------------------------------------------------------------
# diagnostics

@dataclass(frozen=True)
class CompactnessReport:
    singular_values: np.ndarray
    decay_rate: float
    effective_rank: dict

    def to_json(self, top: int = 32) -> dict:
        return {"singular_values": self.singular_values[:top].tolist(),
                "decay_rate": self.decay_rate,
                "effective_rank": {f"{k:.0e}": v for k, v in self.effective_rank.items()}}


def compactness_profile(A, thresholds=(1e-3, 1e-6, 1e-9)) -> CompactnessReport:
    """Singular value decay of ``A`` (a DiscreteOperator or any matrix).

    The decay rate is the slope of a least-squares line through
    ``log sigma_k`` over the values above ``1e-14 sigma_1``; effective ranks
    count ``sigma_k > t sigma_1``.
    """
    m = A.matrix if hasattr(A, "matrix") else np.asarray(A)
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return CompactnessReport(s, 0.0, {t: 0 for t in thresholds})
    keep = s > 1e-14 * s[0]
    k = np.flatnonzero(keep)
    rate = 0.0
    if len(k) >= 2:
        rate = float(-np.polyfit(k, np.log(s[keep]), 1)[0])
    ranks = {t: int(np.count_nonzero(s > t * s[0])) for t in thresholds}
    return CompactnessReport(s, rate, ranks)


@dataclass(frozen=True)
class GapReport:
    """Evidence behind an epsilon-rank index.

    ``ratio`` is (largest counted singular value, or eps if none) divided by the
    smallest uncounted one.  ``kernel_core`` / ``cokernel_core`` are the core
    fractions of the counted right / left singular vectors.
    """

    eps: float
    counted: tuple
    smallest_uncounted: float
    ratio: float
    kernel_core: tuple
    cokernel_core: tuple
    ambiguous: bool
    unstable: bool = False

    @property
    def reliable(self) -> bool:
        return self.ratio <= 0.1 and not self.ambiguous and not self.unstable

    def to_json(self) -> dict:
        return {"eps": self.eps, "counted": list(self.counted),
                "smallest_uncounted": self.smallest_uncounted, "ratio": self.ratio,
                "kernel_core": list(self.kernel_core), "cokernel_core": list(self.cokernel_core),
                "ambiguous": self.ambiguous, "unstable": self.unstable, "reliable": self.reliable}


def localized_index(matrix: np.ndarray, eps: float, core_fraction: Callable[[np.ndarray], float],
                    svd=None, ambiguity: float = 0.25) -> tuple[int, GapReport]:
    """Epsilon-rank index of a square truncation.

    A square matrix has as many near-null right singular vectors as left ones,
    so the raw counts always cancel.  Each counted vector is therefore
    classified by ``core_fraction``: vectors living mostly in the resolved core
    approximate the kernel (right) or cokernel (left) of the untruncated
    operator; the others are truncation artifacts and are not counted.
    """
    U, s, Vh = np.linalg.svd(matrix) if svd is None else svd
    small = np.flatnonzero(s < eps)
    big = s[s >= eps]
    smallest_uncounted = float(big.min()) if big.size else np.inf
    top = float(s[small].max()) if small.size else eps
    ratio = 0.0 if smallest_uncounted == np.inf else top / smallest_uncounted
    kc = tuple(core_fraction(Vh[i].conj()) for i in small)
    cc = tuple(core_fraction(U[:, i]) for i in small)
    ambiguous = any(ambiguity < f < 1 - ambiguity for f in kc + cc)
    index = sum(f >= 0.5 for f in kc) - sum(f >= 0.5 for f in cc)
    return int(index), GapReport(float(eps), tuple(float(v) for v in s[small]), smallest_uncounted,
                                 float(ratio), kc, cc, bool(ambiguous))


def fredholm_index_estimate(A: DiscreteOperator, eps: float = 1e-6) -> tuple[int, GapReport]:
    """dim_eps ker A - dim_eps ker A* with truncation artifacts filtered out.

    Artifacts of the periodic grid sit near the spatial wrap ``|x| ~ L`` or the
    frequency wrap ``|xi| ~ nyquist``; genuine (co)kernel vectors of the
    operator on the line live in ``|x| <= L/2, |xi| <= nyquist/2``.
    """
    return localized_index(A.matrix, eps, A.core_fraction, svd=A.svd)


# ---------------------------------------------------------------------------
# export

_MAGIC = b"OPIX"


def write_operator(A: DiscreteOperator, path) -> None:
    """Binary container: magic, version, n, L, provenance, row-major complex128 matrix."""
    prov = A.provenance.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IQdI", 1, A.grid.n, A.grid.half_width, len(prov)))
        fh.write(prov)
        fh.write(np.ascontiguousarray(A.matrix, dtype="<c16").tobytes())


def read_operator(path) -> DiscreteOperator:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not an operator container")
        version, n, L, plen = struct.unpack("<IQdI", fh.read(struct.calcsize("<IQdI")))
        if version != 1:
            raise ValueError(f"unsupported container version {version}")
        prov = fh.read(plen).decode("utf-8")
        mat = np.frombuffer(fh.read(16 * n * n), dtype="<c16").reshape(n, n)
    return DiscreteOperator(mat.copy(), GridSpec(n, L), prov)


def operator_summary(A: DiscreteOperator, eps: Optional[float] = None, top: int = 32) -> dict:
    s = A.singular_values
    out = {"provenance": A.provenance, "n": A.grid.n, "L": A.grid.half_width,
           "norm": float(s[0]), "frobenius": float(np.linalg.norm(A.matrix)),
           "singular_values_top": s[:top].tolist(),
           "singular_values_bottom": s[-top:][::-1].tolist()}
    if eps is not None:
        idx, gap = fredholm_index_estimate(A, eps)
        out["index"] = idx
        out["gap_ratio"] = gap.ratio
        out["reliable"] = gap.reliable
    return out


# ---------------------------------------------------------------------------
# word-level estimate with a resolution guard

def _variation_interval(f: ScalarFn, pts: np.ndarray, tol: float = 1e-12):
    """Smallest [lo, hi] outside which ``f`` equals its declared limits on ``pts``."""
    vals = f(pts)
    off = (pts > 0) & (np.abs(vals - f.limit_plus) > tol) | \
          (pts <= 0) & (np.abs(vals - f.limit_minus) > tol)
    if not np.any(off):
        return None
    return float(pts[off].min()), float(pts[off].max())


def resolution_issues(w: GeneratorWord, g: GridSpec) -> list:
    """Reasons why the grid does not resolve the symbols of ``w``.

    Spatial variation of CS symbols must lie in ``|x| <= L/2`` (so the spatial
    wrap sees constant symbols) and frequency variation of every ``b(D)`` must
    lie in ``|xi| <= nyquist/4`` (at least fourfold oversampling of the band
    where the symbol changes).
    """
    issues = []
    xs = np.linspace(-g.half_width, g.half_width, 8 * g.n + 1)
    xis = np.linspace(-g.nyquist, g.nyquist, 8 * g.n + 1)
    for t in w.terms:
        for f in t.factors:
            if f.kind == "M" and isinstance(f.fn, ScalarFn) and f.fn.has_limits:
                iv = _variation_interval(f.fn, xs)
                if iv and max(-iv[0], iv[1]) > g.half_width / 2 + 1e-9:
                    issues.append(f"a(M) varies on [{iv[0]:.3g}, {iv[1]:.3g}] beyond |x| <= L/2")
            elif f.kind == "D":
                iv = _variation_interval(f.fn, xis)
                if iv and max(-iv[0], iv[1]) > g.nyquist / 4 + 1e-9:
                    issues.append(f"b(D) varies on [{iv[0]:.3g}, {iv[1]:.3g}] beyond |xi| <= nyquist/4"
                                  f" = {g.nyquist / 4:.3g}")
    return sorted(set(issues))


@dataclass(frozen=True)
class WordIndex:
    index: int
    gap: GapReport
    issues: tuple

    @property
    def reliable(self) -> bool:
        return self.gap.reliable and not self.issues

    def to_json(self) -> dict:
        return {"index": self.index, "reliable": self.reliable, "issues": list(self.issues),
                "gap": self.gap.to_json()}


def word_index(w: GeneratorWord, g: GridSpec, eps: float = 1e-6) -> WordIndex:
    idx, gap = fredholm_index_estimate(assemble(w, g), eps)
    return WordIndex(idx, gap, tuple(resolution_issues(w, g)))

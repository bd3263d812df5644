"""Operators on l^2(Z): the shift family Y_phi, the boundary map gamma on
generator words, trace-regularised indices, the connecting-map tables for the
four quotient unitaries and the W-transform from L^2(R) to functions of phi.

Sequences are truncated to indices ``-J..J`` (row/column ``j + J``) with
cyclic wrap.  Two shift conventions are available:

* ``"literal"``: ``(Y_k u)_j = u_{j+k}``, i.e. ``Y_phi = F diag(e^{-i phi theta_p}) F^H``
  with ``F[j, p] = e^{-i j theta_p} / sqrt(2J+1)``.
* ``"reversed"``: the opposite direction, ``Y_phi`` replaced by ``Y_{-phi}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .discretize import GapReport, localized_index
from .errors import CorroborationError, NotTraceReadyError, SupportLeakError
from .symbols import (Factor, GeneratorWord, SampledLoop, ScalarFn,
                      as_semiperiodic, fourier_op, mult_op, semiperiodic_L,
                      semiperiodic_Ltilde, standard_bc, winding_number)

CONVENTIONS = ("literal", "reversed")
DEFAULT_J = 32


def _check_convention(convention: str) -> int:
    if convention not in CONVENTIONS:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    return 1 if convention == "literal" else -1


# ---------------------------------------------------------------------------
# sequence operators

@dataclass(frozen=True, eq=False)
class SeqOperator:
    """Dense matrix on the truncated lattice ``-J..J``."""

    matrix: np.ndarray
    halfwidth: int
    provenance: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        size = 2 * int(self.halfwidth) + 1
        if m.shape != (size, size):
            raise ValueError(f"matrix must be {size}x{size} for halfwidth {self.halfwidth}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "halfwidth", int(self.halfwidth))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.halfwidth, self.halfwidth + 1)

    def pos(self, j: int) -> int:
        if abs(j) > self.halfwidth:
            raise IndexError(f"lattice index {j} outside -{self.halfwidth}..{self.halfwidth}")
        return j + self.halfwidth

    def entry(self, i: int, k: int) -> complex:
        return complex(self.matrix[self.pos(i), self.pos(k)])

    def _check(self, other: "SeqOperator"):
        if other.halfwidth != self.halfwidth:
            raise ValueError("sequence operators with different truncations")

    def __matmul__(self, other: "SeqOperator") -> "SeqOperator":
        self._check(other)
        return SeqOperator(self.matrix @ other.matrix, self.halfwidth,
                           f"({self.provenance})({other.provenance})")

    def __add__(self, other: "SeqOperator") -> "SeqOperator":
        self._check(other)
        return SeqOperator(self.matrix + other.matrix, self.halfwidth,
                           f"{self.provenance} + {other.provenance}")

    def __sub__(self, other: "SeqOperator") -> "SeqOperator":
        self._check(other)
        return SeqOperator(self.matrix - other.matrix, self.halfwidth,
                           f"{self.provenance} - ({other.provenance})")

    def __mul__(self, c) -> "SeqOperator":
        return SeqOperator(complex(c) * self.matrix, self.halfwidth, f"{c}*({self.provenance})")

    __rmul__ = __mul__

    def adjoint(self) -> "SeqOperator":
        return SeqOperator(self.matrix.conj().T, self.halfwidth, f"({self.provenance})*")

    def block(self, radius: int) -> np.ndarray:
        """Submatrix on ``|j| <= radius``."""
        sl = slice(self.halfwidth - radius, self.halfwidth + radius + 1)
        return self.matrix[sl, sl]

    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    def to_json(self, max_size: int = 33) -> dict:
        doc = {"halfwidth": self.halfwidth, "provenance": self.provenance, "norm": self.norm()}
        if self.matrix.shape[0] <= max_size:
            doc["re"] = self.matrix.real.tolist()
            doc["im"] = self.matrix.imag.tolist()
        return doc


def seq_identity(J: int) -> SeqOperator:
    return SeqOperator(np.eye(2 * J + 1), J, "Id")


def seq_diag(values, J: int, provenance: str = "diag") -> SeqOperator:
    return SeqOperator(np.diag(np.asarray(values, dtype=complex)), J, provenance)


def rank_one_projection(J: int) -> SeqOperator:
    """``E(u) = u_0 e_0``."""
    m = np.zeros((2 * J + 1, 2 * J + 1))
    m[J, J] = 1.0
    return SeqOperator(m, J, "E")


def exact_shift(k: int, J: int) -> np.ndarray:
    """Cyclic permutation matrix with ``(S u)_j = u_{j+k}``."""
    return np.roll(np.eye(2 * J + 1), k, axis=1)


def _dft(J: int) -> tuple[np.ndarray, np.ndarray]:
    n = 2 * J + 1
    theta = 2 * np.pi * np.arange(n) / n
    js = np.arange(-J, J + 1)
    return np.exp(-1j * np.outer(js, theta)) / np.sqrt(n), theta


# ---------------------------------------------------------------------------
# the shift family

@dataclass(frozen=True, eq=False)
class YOperator:
    phi: float
    halfwidth: int
    matrix: np.ndarray
    convention: str = "literal"

    def as_seq(self) -> SeqOperator:
        return SeqOperator(self.matrix, self.halfwidth, f"Y_{self.phi:g}")


def y_op(phi: float, J: int = DEFAULT_J, convention: str = "literal") -> YOperator:
    """``Y_phi``: the phase multiplier ``e^{-i phi theta}`` conjugated by the DFT on 2J+1 points.

    Integer ``phi`` gives the exact permutation matrix, so dyadic inputs stay dyadic.
    """
    if J < 8:
        raise ValueError("halfwidth J must be at least 8")
    phi_eff = _check_convention(convention) * float(phi)
    if float(phi_eff).is_integer():
        mat = exact_shift(int(phi_eff), J).astype(complex)
    else:
        F, theta = _dft(J)
        mat = (F * np.exp(-1j * phi_eff * theta)) @ F.conj().T
    mat.setflags(write=False)
    return YOperator(float(phi), J, mat, convention)


def _y(phi: float, J: int, convention: str) -> np.ndarray:
    return y_op(phi, J, convention).matrix


def periodic_operator(f: ScalarFn, J: int, convention: str = "literal") -> np.ndarray:
    """``sum_k c_k Y_{-k}`` for a 2 pi-periodic ``f = sum_k c_k e^{ikx}``.

    Exact shifts are used when the coefficients are known; otherwise the
    equivalent ``F diag(f(+-theta_p)) F^H`` is formed from samples.
    """
    n = 2 * J + 1
    if f.fourier is not None:
        out = np.zeros((n, n), dtype=complex)
        for k, c in f.fourier:
            if c != 0:
                out += complex(c) * _y(-k, J, convention)
        return out
    sgn = _check_convention(convention)
    F, theta = _dft(J)
    return (F * np.asarray(f(sgn * theta), dtype=complex)) @ F.conj().T


# ---------------------------------------------------------------------------
# gamma

@dataclass(frozen=True, eq=False)
class GammaValue:
    phi: float
    sign: int
    operator: SeqOperator
    convention: str = "literal"

    @property
    def base_point(self) -> tuple[float, int]:
        return (float(self.phi) % 1.0, self.sign)

    def to_json(self, max_size: int = 33) -> dict:
        return {"phi": self.phi, "sign": self.sign, "convention": self.convention,
                "operator": self.operator.to_json(max_size)}


def _factor_of(gen) -> Factor:
    if isinstance(gen, Factor):
        return gen
    if isinstance(gen, GeneratorWord) and len(gen.terms) == 1 and len(gen.terms[0].factors) == 1:
        return gen.terms[0].factors[0]
    raise ValueError("expected a single generator a(M), b(D) or e^{ijM}")


def _gamma_factor(f: Factor, phi: float, sign: int, J: int, convention: str) -> np.ndarray:
    if f.kind == "E":
        return _y(-f.j, J, convention)
    if f.kind == "D":
        js = np.arange(-J, J + 1)
        diag = np.asarray(f.fn(js - phi), dtype=complex)
        return _y(phi, J, convention) @ (diag[:, None] * _y(-phi, J, convention))
    sp = as_semiperiodic(f.fn)
    part = sp.periodic_plus if sign > 0 else sp.periodic_minus
    return periodic_operator(part, J, convention)


def gamma_generator(gen, phi: float, sign: int, J: int = DEFAULT_J,
                    convention: str = "literal") -> GammaValue:
    """gamma of one generator: ``a(M) -> a(+-inf)`` (periodic part at +-inf),
    ``b(D) -> Y_phi b(M - phi) Y_{-phi}``, ``e^{ijM} -> Y_{-j}``."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    f = _factor_of(gen)
    mat = _gamma_factor(f, phi, sign, J, convention)
    label = {"M": "a(M)", "D": "b(D)", "E": f"e^{{i{f.j}M}}"}[f.kind]
    return GammaValue(phi, sign, SeqOperator(mat, J, f"gamma[{label}]"), convention)


def gamma_word(w: GeneratorWord, phi: float, sign: int, J: int = DEFAULT_J,
               convention: str = "literal") -> GammaValue:
    """gamma of a word, multiplied out term by term in word order."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    _check_convention(convention)
    n = 2 * J + 1
    total = np.zeros((n, n), dtype=complex)
    for t in w.terms:
        m = np.eye(n, dtype=complex)
        for f in t.factors:
            m = m @ _gamma_factor(f, phi, sign, J, convention)
        total += complex(t.coef) * m
    return GammaValue(phi, sign, SeqOperator(total, J, f"gamma[{w.label or 'word'}]"), convention)


def gamma_norm_diagnostic(w: GeneratorWord, phis: Sequence[float], J: int = DEFAULT_J,
                          convention: str = "literal") -> float:
    """``max ||gamma_w(phi, +-1)||`` over the given base points; ~0 flags words killed by gamma."""
    return max(gamma_word(w, p, s, J, convention).operator.norm() for p in phis for s in (1, -1))


# ---------------------------------------------------------------------------
# trace-regularised index

def cyclic_bandwidth(mat: np.ndarray, tol: float = 1e-14) -> int:
    """Largest cyclic distance ``|i - k|`` (mod n) between significant entries."""
    n = mat.shape[0]
    i, k = np.nonzero(np.abs(mat) > tol)
    if i.size == 0:
        return 0
    d = np.abs(i - k)
    return int(np.max(np.minimum(d, n - d)))


# exact arithmetic on matrices (R + iI) / 2^e with integer object entries

def _dyadic(mat: np.ndarray, max_exp: int) -> Optional[tuple]:
    fr = [Fraction(float(v)) for v in np.concatenate([mat.real.ravel(), mat.imag.ravel()])]
    den = max((f.denominator for f in fr), default=1)
    if den > 2 ** max_exp:
        return None
    e = den.bit_length() - 1
    ints = np.array([f.numerator * (den // f.denominator) for f in fr], dtype=object)
    half = mat.size
    return ints[:half].reshape(mat.shape), ints[half:].reshape(mat.shape), e


def _gmul(a, b):
    ar, ai, ea = a
    br, bi, eb = b
    return ar.dot(br) - ai.dot(bi), ar.dot(bi) + ai.dot(br), ea + eb


def _gadj(a):
    return a[0].T.copy(), -a[1].T, a[2]


def _gid_minus(a):
    r, i, e = a
    n = r.shape[0]
    eye = np.array([[(1 << e) if p == q else 0 for q in range(n)] for p in range(n)], dtype=object)
    return eye - r, -i, e


def _gpow(a, N):
    out = a
    for _ in range(N - 1):
        out = _gmul(out, a)
    return out


def _gtrace(a, radius: int) -> Fraction:
    r, i, e = a
    c = r.shape[0] // 2
    sl = range(c - radius, c + radius + 1)
    im = sum(i[p, p] for p in sl)
    if im != 0:
        raise NotTraceReadyError("trace of a self-adjoint deviation has an imaginary part")
    return Fraction(sum(r[p, p] for p in sl), 1 << e)


@dataclass(frozen=True)
class TraceIndex:
    """``Tr(D1) - Tr(D2)`` over the centred block, with D1, D2 the two deviations."""

    value: float
    trace_kernel: float
    trace_cokernel: float
    exact: Optional[Fraction]
    exact_kernel: Optional[Fraction]
    exact_cokernel: Optional[Fraction]
    block_radius: int
    bandwidth: int

    @property
    def certified(self) -> bool:
        return self.exact is not None

    def to_json(self) -> dict:
        fr = lambda q: None if q is None else str(q)
        return {"value": self.value, "trace_kernel": self.trace_kernel,
                "trace_cokernel": self.trace_cokernel, "exact": fr(self.exact),
                "exact_kernel": fr(self.exact_kernel), "exact_cokernel": fr(self.exact_cokernel),
                "block_radius": self.block_radius, "bandwidth": self.bandwidth}


def _centre_trace(mat: np.ndarray, radius: int) -> float:
    c = mat.shape[0] // 2
    return math.fsum(np.diag(mat)[c - radius:c + radius + 1].real.tolist())


def _restricted_traces(a: np.ndarray, b: np.ndarray, poly_k, poly_c, degree: int,
                       max_exp: int = 30, tol: float = 1e-12):
    """Traces of two polynomials in (a, b) over the centred block, with the support guard.

    ``degree`` is the number of a/b factors in the longest monomial.  A product
    of ``degree`` band matrices of bandwidth w agrees with the untruncated
    operator on rows ``|j| <= J - degree*w``; inside that interior every entry
    outside the block ``|j| <= J//2`` must vanish, and a ring of width at
    least the product bandwidth must be visible around the block.
    """
    J = a.shape[0] // 2
    w = max(cyclic_bandwidth(a), cyclic_bandwidth(b), 1)
    r_block = J // 2
    r_int = J - degree * w
    if r_int < r_block + degree * w:
        raise NotTraceReadyError(f"bandwidth {w} too large for halfwidth {J}")
    dk, dc = poly_k(a, b), poly_c(a, b)
    js = np.arange(-J, J + 1)
    inner = np.abs(js) <= r_int
    outside = np.maximum.outer(np.abs(js), np.abs(js)) > r_block
    mask = np.outer(inner, inner) & outside
    leak = max(float(np.max(np.abs(dk[mask]), initial=0.0)), float(np.max(np.abs(dc[mask]), initial=0.0)))
    if leak >= tol:
        raise NotTraceReadyError(f"deviation entry {leak:.2e} outside the centred block")
    tk, tc = _centre_trace(dk, r_block), _centre_trace(dc, r_block)

    # exact certificate on a window that contains every entry the block trace depends on
    R = r_block + degree * w
    sl = slice(J - R, J + R + 1)
    ea, eb = _dyadic(a[sl, sl], max_exp), _dyadic(b[sl, sl], max_exp)
    xk = xc = None
    if ea is not None and eb is not None:
        xk = _gtrace(poly_k(ea, eb, exact=True), r_block)
        xc = _gtrace(poly_c(ea, eb, exact=True), r_block)
    return tk, tc, xk, xc, r_block, w


def _dev(x, y, N, exact=False):
    """``(Id - x y)^N`` in float or exact arithmetic."""
    if exact:
        return _gpow(_gid_minus(_gmul(x, y)), N)
    d = np.eye(x.shape[0]) - x @ y
    return np.linalg.matrix_power(d, N)


def trace_index(A: Union[SeqOperator, GammaValue], N: int = 1, max_exp: int = 30) -> TraceIndex:
    """``Tr((Id - A*A)^N) - Tr((Id - AA*)^N)`` restricted to the centred block.

    Raises :class:`NotTraceReadyError` when the deviations are not confined to
    the block at this truncation.  When every entry of ``A`` is a dyadic
    rational with denominator at most ``2**max_exp`` the traces are also
    computed in exact rational arithmetic and returned as ``Fraction``.
    """
    if isinstance(A, GammaValue):
        A = A.operator
    if N < 1:
        raise ValueError("N must be positive")
    a = A.matrix
    astar = a.conj().T

    def pk(x, y, exact=False):
        return _dev(y, x, N, exact)

    def pc(x, y, exact=False):
        return _dev(x, y, N, exact)

    tk, tc, xk, xc, r, w = _restricted_traces(a, astar, pk, pc, 2 * N, max_exp)
    exact = None if xk is None else xk - xc
    return TraceIndex(tk - tc, tk, tc, exact, xk, xc, r, w)


def seq_eps_index(A: Union[SeqOperator, GammaValue], eps: float = 1e-8) -> tuple[int, GapReport]:
    """dim_eps ker A - dim_eps ker A*, counting only vectors concentrated on ``|j| <= J//2``."""
    if isinstance(A, GammaValue):
        A = A.operator
    J = A.halfwidth
    core = np.abs(A.indices) <= J // 2

    def frac(v):
        p = np.abs(v) ** 2
        return float(p[core].sum() / p.sum())

    return localized_index(A.matrix, eps, frac)


@dataclass(frozen=True, eq=False)
class IndexElement:
    """The idempotent ``W1`` attached to an invertible-modulo-finite-rank pair and ``diag(1, 0)``."""

    w1: np.ndarray
    reference: np.ndarray
    idempotent_error: float
    trace_difference: float
    exact: Optional[Fraction]


def index_element(a: SeqOperator, b: SeqOperator, max_exp: int = 30) -> IndexElement:
    """``W1 = [[2ab - (ab)^2, a(2 - ba)(1 - ba)], [(1 - ba)b, (1 - ba)^2]]``.

    ``Tr W1 - Tr diag(1, 0)`` over the centred block reduces to
    ``Tr((1 - ba)^2) - Tr((1 - ab)^2)``, which is what is returned.
    """
    a._check(b)
    x, y = a.matrix, b.matrix
    n = x.shape[0]
    eye = np.eye(n)
    ab, ba = x @ y, y @ x
    w1 = np.block([[2 * ab - ab @ ab, x @ (2 * eye - ba) @ (eye - ba)],
                   [(eye - ba) @ y, (eye - ba) @ (eye - ba)]])
    ref = np.block([[eye, np.zeros((n, n))], [np.zeros((n, n)), np.zeros((n, n))]])
    err = float(np.max(np.abs(w1 @ w1 - w1)))
    if err > 1e-8:
        raise NotTraceReadyError(f"W1 is not idempotent (error {err:.2e})")

    def pk(p, q, exact=False):
        return _dev(q, p, 2, exact)

    def pc(p, q, exact=False):
        return _dev(p, q, 2, exact)

    tk, tc, xk, xc, _, _ = _restricted_traces(x, y, pk, pc, 4, max_exp)
    exact = None if xk is None else xk - xc
    return IndexElement(w1, ref, err, tk - tc, exact)


# ---------------------------------------------------------------------------
# the four quotient unitaries and their connecting-map table

def quotient_unitaries(b: Optional[ScalarFn] = None, c: Optional[ScalarFn] = None) -> dict:
    """``A1 = L(M)b(D) + c(D)``, ``A2 = L~(M)b(D) + c(D)``, ``A3 = b(D) + L(M)c(D)``,
    ``A4 = b(D) + L~(M)c(D)``."""
    if b is None or c is None:
        b, c = standard_bc()
    L, Lt = mult_op(semiperiodic_L(), "L(M)"), mult_op(semiperiodic_Ltilde(), "L~(M)")
    B, C = fourier_op(b, "b(D)"), fourier_op(c, "c(D)")
    return {"A1": L * B + C, "A2": Lt * B + C, "A3": B + L * C, "A4": B + Lt * C}


EXPECTED_DELTA1 = ((1, 0), (0, 1), (-1, 0), (0, -1))


@dataclass(frozen=True)
class Delta1Table:
    rows: tuple
    traces: dict
    convention: str
    global_sign: int

    def to_json(self) -> dict:
        return {"rows": [list(r) for r in self.rows], "convention": self.convention,
                "global_sign": self.global_sign,
                "traces": {k: v.to_json() for k, v in self.traces.items()}}


def delta1_table(J: int = DEFAULT_J, convention: str = "literal",
                 words: Optional[dict] = None) -> Delta1Table:
    """Index pairs ``(ind gamma_{A_i}(1, +1), ind gamma_{A_i}(1, -1))`` for the four unitaries.

    The result must equal the reference pattern up to one global sign;
    otherwise :class:`CorroborationError` is raised.
    """
    words = words or quotient_unitaries()
    rows, traces = [], {}
    for name in ("A1", "A2", "A3", "A4"):
        pair = []
        for sign in (1, -1):
            g = gamma_word(words[name], 1.0, sign, J, convention)
            ti = trace_index(g, 1)
            val = ti.exact if ti.exact is not None else ti.value
            if abs(float(val) - round(float(val))) > 1e-9:
                raise CorroborationError(f"non-integer trace index {val} for {name} at sign {sign}")
            traces[f"{name}{'+' if sign > 0 else '-'}"] = ti
            pair.append(int(round(float(val))))
        rows.append(tuple(pair))
    rows = tuple(rows)
    if rows == EXPECTED_DELTA1:
        s = 1
    elif rows == tuple((-x, -y) for x, y in EXPECTED_DELTA1):
        s = -1
    else:
        raise CorroborationError(f"table {rows} does not match the reference pattern up to sign")
    return Delta1Table(rows, traces, convention, s)


# ---------------------------------------------------------------------------
# exponential map: the single-site identity

@dataclass(frozen=True, eq=False)
class Delta0Result:
    loop: SampledLoop
    winding: int
    klass: tuple
    max_leak: float
    rescaled: bool

    def to_json(self) -> dict:
        return {"winding": self.winding, "class": list(self.klass),
                "max_leak": self.max_leak, "rescaled": self.rescaled, "samples": len(self.loop)}


def _constant_outside(b: ScalarFn, r: float) -> bool:
    left = np.asarray(b(np.linspace(-4, -r, 200)))
    right = np.asarray(b(np.linspace(r, 4, 200)))
    return bool(np.ptp(left.real) + np.ptp(left.imag) < 1e-14 and
                np.ptp(right.real) + np.ptp(right.imag) < 1e-14)


def delta0_exponential(b: Optional[ScalarFn] = None, P: int = 512, J: int = 16,
                       tol: float = 1e-10) -> Delta0Result:
    """Check ``e^{2 pi i b(M - phi)} = Id + (g(phi) - 1)E`` and wind ``g(phi) = e^{2 pi i b(-phi)}``.

    ``b`` must be constant outside ``[-1/5, 1/5]``; a transition on ``[-1, 1]``
    is compressed by 5 automatically.  As ``phi`` runs over ``[-1/2, 1/2]`` the
    loop ``g`` has winding ``w`` and the class returned is ``-w (1, 1)``.
    """
    if b is None:
        b = standard_bc()[0]
    rescaled = False
    if not _constant_outside(b, 0.2):
        b = b.dilate(5.0)
        rescaled = True
        if not _constant_outside(b, 0.2):
            raise ValueError("transition must be constant outside [-1, 1]")
    js = np.arange(-J, J + 1)
    off = js != 0
    phis = np.linspace(-0.5, 0.5, P)
    g = np.empty(P, dtype=complex)
    worst = 0.0
    for p, phi in enumerate(phis):
        d = np.exp(2j * np.pi * np.asarray(b(js - phi), dtype=complex))
        leak = float(np.max(np.abs(d[off] - 1.0)))
        if leak >= tol:
            raise SupportLeakError(float(phi), leak)
        worst = max(worst, leak)
        g[p] = d[J]
    loop = SampledLoop(g)
    w = winding_number(loop)
    return Delta0Result(loop, w, (-w, -w), worst, rescaled)


# ---------------------------------------------------------------------------
# W-transform

def w_grid(J: int, P: int) -> np.ndarray:
    """Real grid ``x = phi_p - j`` (spacing 1/P, ascending) carrying the W-transform."""
    return (np.arange((2 * J + 1) * P) - J * P) / P


def w_matrix(J: int, P: int) -> np.ndarray:
    """Unitary matrix of ``u -> (Y_{phi_p} (u(phi_p - j))_j)_p`` on the grid of :func:`w_grid`.

    Rows are ordered ``(p, j)`` with ``p`` slow; ``phi_p = p / P``.
    """
    n_seq = 2 * J + 1
    n = n_seq * P
    js = np.arange(-J, J + 1)
    W = np.zeros((P * n_seq, n), dtype=complex)
    for p in range(P):
        Yp = _y(p / P, J, "literal")
        cols = p - js * P + J * P
        W[p * n_seq:(p + 1) * n_seq, cols] = Yp
    return W


def w_transform(u: np.ndarray, J: int, P: int, tol: float = 1e-12) -> np.ndarray:
    """``(Wu)(phi_p) = Y_{phi_p} (u(phi_p - j))_j`` for samples ``u`` on :func:`w_grid`.

    Returns an array of shape ``(P, 2J+1)``.  With grid spacing ``1/P``,
    ``sum_p ||(Wu)(phi_p)||^2 / P`` equals the Riemann sum of ``|u|^2``.
    """
    u = np.asarray(u, dtype=complex)
    x = w_grid(J, P)
    if u.shape != x.shape:
        raise ValueError(f"expected {x.size} samples on the W grid")
    outside = np.abs(x) > J - 1
    if np.any(np.abs(u[outside]) > tol):
        raise ValueError(f"u is not supported inside [-{J - 1}, {J - 1}]")
    n_seq = 2 * J + 1
    return (w_matrix(J, P) @ u).reshape(P, n_seq)


def w_conjugation_residual(b: ScalarFn, a, j: int, J: int, P: int) -> np.ndarray:
    """Singular values of ``W (b(D) a(M) T_j) W^-1 - b(D_theta) Y_phi a(phi - M) Y_{-phi-j}``.

    ``b(D_theta)`` multiplies the mode ``e^{2 pi i k phi}`` by ``b(k)`` on the
    phi-grid; the second operator is block diagonal in phi.  The residual
    should be compact, i.e. its singular values decay quickly.
    """
    x = w_grid(J, P)
    n = x.size
    n_seq = 2 * J + 1
    W = w_matrix(J, P)
    xi = 2 * np.pi * np.fft.fftfreq(n, 1.0 / P)
    bD = np.fft.ifft(np.asarray(b(xi), dtype=complex)[:, None] * np.fft.fft(np.eye(n), axis=0), axis=0)
    T = np.roll(np.eye(n), j * P, axis=1)
    lhs = W @ (bD * np.asarray(a(x), dtype=complex)[None, :]) @ T @ W.conj().T
    js = np.arange(-J, J + 1)
    blocks = np.zeros((P * n_seq, P * n_seq), dtype=complex)
    for p in range(P):
        phi = p / P
        d = np.asarray(a(phi - js), dtype=complex)
        sl = slice(p * n_seq, (p + 1) * n_seq)
        blocks[sl, sl] = (_y(phi, J, "literal") * d[None, :]) @ _y(-phi - j, J, "literal")
    k = np.fft.fftfreq(P, 1.0 / P)
    Fp = np.exp(-2j * np.pi * np.outer(k, np.arange(P) / P)) / np.sqrt(P)
    b_theta = Fp.conj().T @ (np.asarray(b(k), dtype=complex)[:, None] * Fp)
    rhs = np.kron(b_theta, np.eye(n_seq)) @ blocks
    return np.linalg.svd(lhs - rhs, compute_uv=False)

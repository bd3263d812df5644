"""Scalar symbol classes, semiperiodic symbols, operator words and their
boundary symbols on the two compactifications used for index computations.

Conventions
-----------
* ``b(D) = F^{-1} b(M) F`` with ``Fu(xi) = (2 pi)^{-1/2} \\int e^{-i x xi} u(x) dx``.
* A :class:`GeneratorWord` is a finite sum of ordered products of the generators
  ``a(M)`` (multiplication), ``b(D)`` (Fourier multiplier) and ``e^{ijM}``.
* The loop around the cross at infinity ``{|x| + |xi| = inf}`` is traversed
  counterclockwise in the ``(x, xi)`` plane (x horizontal, xi vertical):
  top edge right to left, left edge top to bottom, bottom edge left to right,
  right edge bottom to top.  Infinite ranges are compactified through
  ``s(x) = x / sqrt(1 + x^2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from .errors import NotInCSError, NotInvertibleError, UndersampledLoopError

TWO_PI = 2.0 * np.pi
CLASS_TAGS = ("CS", "C0", "P2pi", "generic")
MAX_MODULATION = 64

_PROBE_POINTS = np.array([-7.3, -3.1, -0.7, 0.0, 0.4, 1.9, 5.3, 11.2])


# ---------------------------------------------------------------------------
# elementary profiles

def _b_std(x):
    return np.clip((x + 1.0) / 2.0, 0.0, 1.0)


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        h0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        h1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return h0 / (h0 + h1)


def s_fn(x):
    x = np.asarray(x, dtype=float)
    return x / np.sqrt(1.0 + x * x)


def s_inverse(u):
    """Inverse of ``s`` on [-1, 1], with +-1 sent to +-inf."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        out = u / np.sqrt(np.maximum(1.0 - u * u, 0.0))
    return out


def _L(x):
    return np.where(x >= 0, np.exp(1j * x), 1.0 + 0j)


def _Ltilde(x):
    return np.where(x > 0, 1.0 + 0j, np.exp(1j * x))


# ---------------------------------------------------------------------------
# ScalarFn

def _as_complex_or_none(v):
    return None if v is None else complex(v)


@dataclass(frozen=True, eq=False)
class ScalarFn:
    """A function R -> C with declared behaviour at infinity.

    ``fourier`` holds exact Fourier coefficients ``((k, c_k), ...)`` when the
    function is a known trigonometric polynomial in ``e^{ix}``; it is used by
    the gamma calculus to stay in exact arithmetic.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    limit_plus: Optional[complex] = None
    limit_minus: Optional[complex] = None
    class_tag: str = "generic"
    recipe: Optional[dict] = None
    fourier: Optional[tuple] = None

    def __post_init__(self):
        if self.class_tag not in CLASS_TAGS:
            raise ValueError(f"unknown class tag {self.class_tag!r}")
        object.__setattr__(self, "limit_plus", _as_complex_or_none(self.limit_plus))
        object.__setattr__(self, "limit_minus", _as_complex_or_none(self.limit_minus))
        if self.class_tag == "C0":
            if self.limit_plus is None:
                object.__setattr__(self, "limit_plus", 0j)
            if self.limit_minus is None:
                object.__setattr__(self, "limit_minus", 0j)
            if self.limit_plus != 0 or self.limit_minus != 0:
                raise ValueError("class C0 requires both limits equal to 0")
        if self.class_tag == "CS" and (self.limit_plus is None or self.limit_minus is None):
            raise ValueError("class CS requires both declared limits")
        vals = np.asarray(self.evaluator(_PROBE_POINTS), dtype=complex)
        if vals.shape != _PROBE_POINTS.shape or not np.all(np.isfinite(vals)):
            raise ValueError("evaluator must be vectorised and finite on finite inputs")
        if self.class_tag == "P2pi":
            shifted = np.asarray(self.evaluator(_PROBE_POINTS + TWO_PI), dtype=complex)
            scale = max(1.0, float(np.max(np.abs(vals))))
            if np.max(np.abs(shifted - vals)) > 1e-9 * scale:
                raise ValueError("class P2pi requires a 2*pi-periodic evaluator")

    # evaluation -----------------------------------------------------------
    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = np.empty(arr.shape, dtype=complex)
        fin = np.isfinite(arr)
        if np.any(fin):
            out[fin] = np.asarray(self.evaluator(arr[fin]), dtype=complex)
        if not np.all(fin):
            pos = arr == np.inf
            neg = arr == -np.inf
            if np.any(pos):
                if self.limit_plus is None:
                    raise NotInCSError("no declared limit at +inf")
                out[pos] = self.limit_plus
            if np.any(neg):
                if self.limit_minus is None:
                    raise NotInCSError("no declared limit at -inf")
                out[neg] = self.limit_minus
            if np.any(np.isnan(arr)):
                raise ValueError("NaN argument")
        if out.ndim == 0:
            return complex(out)
        return out

    @property
    def has_limits(self) -> bool:
        return self.limit_plus is not None and self.limit_minus is not None

    @property
    def is_constant(self) -> bool:
        return self.fourier is not None and all(k == 0 for k, _ in self.fourier)

    def limit(self, sign: int) -> complex:
        v = self.limit_plus if sign > 0 else self.limit_minus
        if v is None:
            raise NotInCSError(f"no declared limit at {'+' if sign > 0 else '-'}inf")
        return v

    # algebra ----------------------------------------------------------------
    def conj(self) -> "ScalarFn":
        f = self.evaluator
        four = None if self.fourier is None else tuple(
            sorted((-k, complex(c).conjugate()) for k, c in self.fourier))
        return ScalarFn(lambda x: np.conj(f(x)),
                        _conj_or_none(self.limit_plus), _conj_or_none(self.limit_minus),
                        self.class_tag, _recipe_op("conj", self.recipe), four)

    def __add__(self, other) -> "ScalarFn":
        other = _coerce(other)
        f, g = self.evaluator, other.evaluator
        return ScalarFn(lambda x: f(x) + g(x),
                        _combine(self.limit_plus, other.limit_plus, np.add),
                        _combine(self.limit_minus, other.limit_minus, np.add),
                        _sum_tag(self, other), _recipe_op("sum", self.recipe, other.recipe),
                        _fourier_add(self.fourier, other.fourier))

    __radd__ = __add__

    def __neg__(self) -> "ScalarFn":
        return self * -1.0

    def __sub__(self, other) -> "ScalarFn":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "ScalarFn":
        return _coerce(other) + (-self)

    def __mul__(self, other) -> "ScalarFn":
        other = _coerce(other)
        f, g = self.evaluator, other.evaluator
        tag = _prod_tag(self, other)
        lp = _combine(self.limit_plus, other.limit_plus, np.multiply)
        lm = _combine(self.limit_minus, other.limit_minus, np.multiply)
        if tag == "C0":
            lp = lm = 0j
        return ScalarFn(lambda x: f(x) * g(x), lp, lm, tag,
                        _recipe_op("product", self.recipe, other.recipe),
                        _fourier_mul(self.fourier, other.fourier))

    __rmul__ = __mul__

    def expi(self, scale: float = 1.0) -> "ScalarFn":
        """The function ``exp(i * scale * f)``."""
        f = self.evaluator
        tag = self.class_tag
        if tag == "C0":
            tag = "CS"
        lp = None if self.limit_plus is None else np.exp(1j * scale * self.limit_plus)
        lm = None if self.limit_minus is None else np.exp(1j * scale * self.limit_minus)
        recipe = None if self.recipe is None else {"kind": "expi", "scale": float(scale), "arg": self.recipe}
        four = None
        if self.is_constant:
            four = ((0, complex(np.exp(1j * scale * self.fourier[0][1]))),)
        return ScalarFn(lambda x: np.exp(1j * scale * f(x)), lp, lm, tag, recipe, four)

    def exp2pii(self) -> "ScalarFn":
        return self.expi(TWO_PI)

    def dilate(self, factor: float) -> "ScalarFn":
        """The function ``x -> f(factor * x)`` for ``factor > 0``."""
        if factor <= 0:
            raise ValueError("dilation factor must be positive")
        f = self.evaluator
        tag = "generic" if self.class_tag == "P2pi" else self.class_tag
        recipe = None if self.recipe is None else {"kind": "dilate", "factor": float(factor), "arg": self.recipe}
        four = self.fourier if self.is_constant else None
        return ScalarFn(lambda x: f(factor * np.asarray(x, dtype=float)),
                        self.limit_plus, self.limit_minus, tag, recipe, four)

    def to_json(self) -> dict:
        if self.recipe is None:
            raise ValueError("this ScalarFn was built from a bare callable and has no JSON form")
        return self.recipe


def _conj_or_none(v):
    return None if v is None else v.conjugate()


def _combine(u, v, op):
    if u is None or v is None:
        return None
    return complex(op(u, v))


def _sum_tag(f: ScalarFn, g: ScalarFn) -> str:
    if f.is_constant:
        return "CS" if g.class_tag == "C0" else g.class_tag
    if g.is_constant:
        return "CS" if f.class_tag == "C0" else f.class_tag
    if f.class_tag == g.class_tag:
        return f.class_tag
    if {f.class_tag, g.class_tag} == {"CS", "C0"}:
        return "CS"
    return "generic"


def _prod_tag(f: ScalarFn, g: ScalarFn) -> str:
    if f.is_constant:
        return g.class_tag
    if g.is_constant:
        return f.class_tag
    bounded = ("CS", "C0", "P2pi")
    if "C0" in (f.class_tag, g.class_tag) and f.class_tag in bounded and g.class_tag in bounded:
        return "C0"
    if f.class_tag == g.class_tag:
        return f.class_tag
    return "generic"


def _fourier_add(p, q):
    if p is None or q is None:
        return None
    acc = {}
    for k, c in p + q:
        acc[k] = acc.get(k, 0j) + c
    return tuple(sorted((k, c) for k, c in acc.items() if c != 0)) or ((0, 0j),)


def _fourier_mul(p, q):
    if p is None or q is None:
        return None
    acc = {}
    for k1, c1 in p:
        for k2, c2 in q:
            acc[k1 + k2] = acc.get(k1 + k2, 0j) + c1 * c2
    return tuple(sorted((k, c) for k, c in acc.items() if c != 0)) or ((0, 0j),)


def _recipe_op(kind, *args):
    if any(a is None for a in args):
        return None
    if kind == "conj":
        return {"kind": "conj", "arg": args[0]}
    return {"kind": kind, "args": list(args)}


def _coerce(v) -> ScalarFn:
    if isinstance(v, ScalarFn):
        return v
    if isinstance(v, (int, float, complex, np.number)):
        return constant(v)
    raise TypeError(f"cannot combine ScalarFn with {type(v).__name__}")


# constructors ---------------------------------------------------------------

def _encode_complex(c: complex):
    c = complex(c)
    return c.real if c.imag == 0 else [c.real, c.imag]


def _decode_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def constant(c) -> ScalarFn:
    c = complex(c)
    return ScalarFn(lambda x: np.full(np.shape(x), c, dtype=complex), c, c, "CS",
                    {"kind": "constant", "value": _encode_complex(c)}, ((0, c),))


def fourier_series(coeffs: dict) -> ScalarFn:
    """Trigonometric polynomial ``sum_k c_k e^{ikx}`` (class P2pi)."""
    items = tuple(sorted((int(k), complex(c)) for k, c in coeffs.items()))
    ks = np.array([k for k, _ in items], dtype=float)
    cs = np.array([c for _, c in items], dtype=complex)

    def ev(x):
        x = np.asarray(x, dtype=float)
        return np.exp(1j * np.multiply.outer(x, ks)) @ cs

    recipe = {"kind": "fourier", "coeffs": {str(k): _encode_complex(c) for k, c in items}}
    if all(k == 0 for k, _ in items):
        c0 = complex(cs.sum()) if len(cs) else 0j
        return ScalarFn(ev, c0, c0, "CS", recipe, items or ((0, 0j),))
    return ScalarFn(ev, None, None, "P2pi", recipe, items)


def piecewise_linear(knots: Sequence[float], values: Sequence) -> ScalarFn:
    """Linear interpolation through the knots, constant outside them (class CS)."""
    k = np.asarray(knots, dtype=float)
    v = np.asarray([_decode_complex(z) for z in values], dtype=complex)
    if k.ndim != 1 or k.shape != v.shape or len(k) < 1 or np.any(np.diff(k) <= 0):
        raise ValueError("knots must be strictly increasing and match values")

    def ev(x):
        x = np.asarray(x, dtype=float)
        return np.interp(x, k, v.real) + 1j * np.interp(x, k, v.imag)

    tag = "C0" if v[0] == 0 and v[-1] == 0 else "CS"
    recipe = {"kind": "piecewise_linear", "knots": k.tolist(),
            "values": [_encode_complex(z) for z in v]}
    return ScalarFn(ev, v[-1], v[0], tag, recipe)


def _builtin_table():
    def mk(name, ev, lp, lm, tag, four=None):
        return ScalarFn(ev, lp, lm, tag, {"kind": "builtin", "name": name}, four)

    return {
        "s": lambda: mk("s", s_fn, 1, -1, "CS"),
        "b_std": lambda: mk("b_std", _b_std, 1, 0, "CS"),
        "c_std": lambda: mk("c_std", lambda x: 1.0 - _b_std(x), 0, 1, "CS"),
        "b_smooth": lambda: mk("b_smooth", lambda x: smooth_step((np.asarray(x) + 1.0) / 2.0), 1, 0, "CS"),
        "c_smooth": lambda: mk("c_smooth", lambda x: 1.0 - smooth_step((np.asarray(x) + 1.0) / 2.0), 0, 1, "CS"),
        "L": lambda: mk("L", _L, None, None, "generic"),
        "Ltilde": lambda: mk("Ltilde", _Ltilde, None, None, "generic"),
        "exp_i_theta": lambda: mk("exp_i_theta", lambda x: np.exp(1j * np.asarray(x, dtype=float)),
                                  None, None, "P2pi", ((1, 1 + 0j),)),
        "one": lambda: mk("one", lambda x: np.ones(np.shape(x), dtype=complex), 1, 1, "CS", ((0, 1 + 0j),)),
        "zero": lambda: mk("zero", lambda x: np.zeros(np.shape(x), dtype=complex), 0, 0, "C0", ((0, 0j),)),
        "gauss": lambda: mk("gauss", lambda x: np.exp(-np.asarray(x, dtype=float) ** 2), 0, 0, "C0"),
    }


BUILTIN_NAMES = tuple(_builtin_table())


def builtin(name: str) -> ScalarFn:
    try:
        return _builtin_table()[name]()
    except KeyError:
        raise ValueError(f"unknown builtin {name!r}; choose from {BUILTIN_NAMES}") from None


def scalar_from_json(recipe: dict) -> ScalarFn:
    kind = recipe.get("kind")
    if kind == "builtin":
        return builtin(recipe["name"])
    if kind == "constant":
        return constant(_decode_complex(recipe["value"]))
    if kind == "fourier":
        return fourier_series({int(k): _decode_complex(c) for k, c in recipe["coeffs"].items()})
    if kind == "piecewise_linear":
        return piecewise_linear(recipe["knots"], recipe["values"])
    if kind == "sum":
        out = scalar_from_json(recipe["args"][0])
        for a in recipe["args"][1:]:
            out = out + scalar_from_json(a)
        return out
    if kind == "product":
        out = scalar_from_json(recipe["args"][0])
        for a in recipe["args"][1:]:
            out = out * scalar_from_json(a)
        return out
    if kind == "conj":
        return scalar_from_json(recipe["arg"]).conj()
    if kind == "expi":
        return scalar_from_json(recipe["arg"]).expi(float(recipe["scale"]))
    if kind == "dilate":
        return scalar_from_json(recipe["arg"]).dilate(float(recipe["factor"]))
    raise ValueError(f"unknown ScalarFn kind {kind!r}")


def standard_bc() -> tuple[ScalarFn, ScalarFn]:
    """The piecewise-linear transition pair ``b`` (0 -> 1 across [-1, 1]) and ``c = 1 - b``."""
    return builtin("b_std"), builtin("c_std")


def probe_limit(f: Callable, theta: float, sign: int = 1, k_max: int = 64,
                tol: float = 1e-8) -> complex:
    """Estimate ``lim_k f(theta + sign 2 pi k)`` from samples k <= k_max.

    Validation helper only: raises ``ValueError`` when the tail samples are not
    Cauchy to ``tol``.
    """
    ks = np.arange(k_max // 2, k_max + 1)
    vals = np.asarray(f(theta + sign * TWO_PI * ks), dtype=complex)
    spread = float(np.max(np.abs(vals - vals[-1])))
    if spread > tol:
        raise ValueError(f"limit probe not Cauchy (spread {spread:.2e} > {tol:.1e})")
    return complex(vals[-1])


# ---------------------------------------------------------------------------
# semiperiodic symbols

@dataclass(frozen=True, eq=False)
class CutoffPair:
    chi_plus: ScalarFn
    chi_minus: ScalarFn

    def __post_init__(self):
        t = np.linspace(-4, 4, 161)
        if np.max(np.abs(self.chi_plus(t) + self.chi_minus(t) - 1)) > 1e-12:
            raise ValueError("cutoffs must sum to 1")
        if np.max(np.abs(self.chi_plus(t[t < -1]))) > 1e-12 or \
                np.max(np.abs(self.chi_minus(t[t > 1]))) > 1e-12:
            raise ValueError("chi_plus must vanish below -1 and chi_minus above 1")
        if self.chi_plus.limit_plus != 1 or self.chi_minus.limit_minus != 1:
            raise ValueError("cutoffs must tend to 1 at their own end")


def standard_cutoffs() -> CutoffPair:
    b, c = standard_bc()
    return CutoffPair(b, c)


def _is_periodic(f: ScalarFn) -> bool:
    return f.class_tag == "P2pi" or f.is_constant


@dataclass(frozen=True, eq=False)
class SemiperiodicSymbol:
    """``a = a_+ chi_+ + a_- chi_- + a_0`` with ``a_+-`` 2 pi-periodic and ``a_0`` in C0."""

    periodic_plus: ScalarFn
    periodic_minus: ScalarFn
    decaying: ScalarFn
    cutoffs: CutoffPair = field(default_factory=standard_cutoffs)
    name: Optional[str] = None

    def __post_init__(self):
        if not _is_periodic(self.periodic_plus) or not _is_periodic(self.periodic_minus):
            raise ValueError("periodic parts must be 2*pi-periodic (class P2pi or constant)")
        if self.decaying.class_tag != "C0":
            raise ValueError("decaying part must be of class C0")

    def __call__(self, x):
        return eval_semiperiodic(self, x)

    def conj(self) -> "SemiperiodicSymbol":
        return SemiperiodicSymbol(self.periodic_plus.conj(), self.periodic_minus.conj(),
                                  self.decaying.conj(), self.cutoffs,
                                  None if self.name is None else f"conj({self.name})")

    def limits(self) -> Optional[tuple[complex, complex]]:
        """(a(+inf), a(-inf)) when both periodic parts are constant, else None."""
        if self.periodic_plus.is_constant and self.periodic_minus.is_constant:
            return self.periodic_plus.fourier[0][1], self.periodic_minus.fourier[0][1]
        return None

    def to_json(self) -> dict:
        if self.name in ("L", "Ltilde"):
            return {"kind": "builtin", "name": self.name}
        return {"kind": "semiperiodic", "plus": self.periodic_plus.to_json(),
                "minus": self.periodic_minus.to_json(), "decaying": self.decaying.to_json()}


def eval_semiperiodic(a: SemiperiodicSymbol, x):
    """``a_+(x) chi_+(x) + a_-(x) chi_-(x) + a_0(x)`` at finite x."""
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("eval_semiperiodic needs finite arguments")
    cp, cm = a.cutoffs.chi_plus, a.cutoffs.chi_minus
    out = a.periodic_plus(arr) * cp(arr) + a.periodic_minus(arr) * cm(arr) + a.decaying(arr)
    return complex(out) if np.ndim(out) == 0 else out


def semiperiodic_from_parts(f: Callable, plus: ScalarFn, minus: ScalarFn,
                            cutoffs: Optional[CutoffPair] = None,
                            name: Optional[str] = None) -> SemiperiodicSymbol:
    """Split a function with known periodic ends; the remainder becomes ``a_0``."""
    cutoffs = cutoffs or standard_cutoffs()
    cp, cm = cutoffs.chi_plus, cutoffs.chi_minus

    def rest(x):
        return np.asarray(f(x), dtype=complex) - plus(x) * cp(x) - minus(x) * cm(x)

    recipe = None
    if isinstance(f, ScalarFn) and f.recipe is not None and plus.recipe is not None and minus.recipe is not None:
        recipe = {"kind": "remainder", "f": f.recipe, "plus": plus.recipe, "minus": minus.recipe}
    return SemiperiodicSymbol(plus, minus, ScalarFn(rest, 0, 0, "C0", recipe), cutoffs, name)


def semiperiodic_from_cs(f: ScalarFn) -> SemiperiodicSymbol:
    if not f.has_limits:
        raise NotInCSError("cannot split a function without declared limits")
    return semiperiodic_from_parts(f, constant(f.limit_plus), constant(f.limit_minus),
                                   name=None if f.recipe is None else str(f.recipe.get("name", "")) or None)


def semiperiodic_L() -> SemiperiodicSymbol:
    """``L(x) = e^{ix}`` for ``x >= 0`` and ``1`` for ``x < 0``."""
    return semiperiodic_from_parts(builtin("L"), builtin("exp_i_theta"), constant(1), name="L")


def semiperiodic_Ltilde() -> SemiperiodicSymbol:
    """``L~(x) = 1`` for ``x > 0`` and ``e^{ix}`` for ``x <= 0``."""
    return semiperiodic_from_parts(builtin("Ltilde"), constant(1), builtin("exp_i_theta"), name="Ltilde")


def as_semiperiodic(a: Union[ScalarFn, SemiperiodicSymbol]) -> SemiperiodicSymbol:
    if isinstance(a, SemiperiodicSymbol):
        return a
    if a.recipe is not None and a.recipe.get("kind") == "builtin" and a.recipe.get("name") in ("L", "Ltilde"):
        return semiperiodic_L() if a.recipe["name"] == "L" else semiperiodic_Ltilde()
    if a.class_tag == "P2pi":
        return SemiperiodicSymbol(a, a, builtin("zero"))
    return semiperiodic_from_cs(a)


def semiperiodic_from_json(recipe: dict) -> Union[ScalarFn, SemiperiodicSymbol]:
    if recipe.get("kind") == "semiperiodic":
        return SemiperiodicSymbol(scalar_from_json(recipe["plus"]), scalar_from_json(recipe["minus"]),
                                  scalar_from_json(recipe["decaying"]))
    if recipe.get("kind") == "builtin" and recipe.get("name") in ("L", "Ltilde"):
        return semiperiodic_L() if recipe["name"] == "L" else semiperiodic_Ltilde()
    return scalar_from_json(recipe)


# ---------------------------------------------------------------------------
# points of the symbol spaces

@dataclass(frozen=True)
class MSharpPoint:
    """A point of ``{(x, e^{ix})} u ({+-inf} x S^1)``.

    ``kind`` is ``"finite"`` (value = x) or ``"plus"`` / ``"minus"`` (value = theta in [0, 2 pi)).
    """

    kind: str
    value: float

    def __post_init__(self):
        if self.kind not in ("finite", "plus", "minus"):
            raise ValueError(f"bad MSharpPoint kind {self.kind!r}")
        v = float(self.value)
        if not math.isfinite(v):
            raise ValueError("MSharpPoint coordinates are finite")
        if self.kind != "finite":
            v = v % TWO_PI
        object.__setattr__(self, "value", v)

    @classmethod
    def finite(cls, x: float) -> "MSharpPoint":
        return cls("finite", x)

    @classmethod
    def plus_inf(cls, theta: float) -> "MSharpPoint":
        return cls("plus", theta)

    @classmethod
    def minus_inf(cls, theta: float) -> "MSharpPoint":
        return cls("minus", theta)

    @property
    def phase(self) -> float:
        """The S^1 coordinate: x for finite points, theta at infinity."""
        return self.value


_EDGE_ORDER = ("top", "left", "bottom", "right")


@dataclass(frozen=True)
class MCPoint:
    """A point of the cross at infinity ``{(x, xi) : |x| + |xi| = inf}``.

    ``kind`` names the edge; ``t`` is the free coordinate (x on the top and
    bottom edges, xi on the left and right edges).  Each edge contains the
    corner where the counterclockwise traversal enters it, so corners have a
    single representative.
    """

    kind: str
    t: float

    def __post_init__(self):
        if self.kind not in _EDGE_ORDER:
            raise ValueError(f"bad MCPoint edge {self.kind!r}")
        t = float(self.t)
        if math.isnan(t):
            raise ValueError("NaN coordinate")
        kind = self.kind
        # exit corners belong to the next edge
        if kind == "top" and t == -np.inf:
            kind, t = "left", np.inf
        elif kind == "left" and t == -np.inf:
            kind, t = "bottom", -np.inf
        elif kind == "bottom" and t == np.inf:
            kind, t = "right", -np.inf
        elif kind == "right" and t == np.inf:
            kind, t = "top", np.inf
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "t", t)

    @classmethod
    def top(cls, x: float) -> "MCPoint":
        return cls("top", x)

    @classmethod
    def bottom(cls, x: float) -> "MCPoint":
        return cls("bottom", x)

    @classmethod
    def left(cls, xi: float) -> "MCPoint":
        return cls("left", xi)

    @classmethod
    def right(cls, xi: float) -> "MCPoint":
        return cls("right", xi)

    @property
    def x(self) -> float:
        if self.kind in ("top", "bottom"):
            return self.t
        return np.inf if self.kind == "right" else -np.inf

    @property
    def xi(self) -> float:
        if self.kind in ("left", "right"):
            return self.t
        return np.inf if self.kind == "top" else -np.inf


# ---------------------------------------------------------------------------
# words

Symbol = Union[ScalarFn, SemiperiodicSymbol]


@dataclass(frozen=True, eq=False)
class Factor:
    """One generator: ``kind`` is "M" (a(M)), "D" (b(D)) or "E" (e^{ijM})."""

    kind: str
    fn: Optional[Symbol] = None
    j: int = 0

    def __post_init__(self):
        if self.kind == "M":
            if not isinstance(self.fn, (ScalarFn, SemiperiodicSymbol)):
                raise TypeError("a(M) needs a ScalarFn or SemiperiodicSymbol")
        elif self.kind == "D":
            if not isinstance(self.fn, ScalarFn) or not self.fn.has_limits:
                raise NotInCSError("b(D) needs b with declared limits")
        elif self.kind == "E":
            if int(self.j) != self.j or abs(self.j) > MAX_MODULATION:
                raise ValueError(f"modulation exponent must be an integer with |j| <= {MAX_MODULATION}")
            object.__setattr__(self, "j", int(self.j))
        else:
            raise ValueError(f"bad factor kind {self.kind!r}")

    def adjoint(self) -> "Factor":
        if self.kind == "E":
            return Factor("E", None, -self.j)
        return Factor(self.kind, self.fn.conj())

    def to_json(self) -> dict:
        if self.kind == "E":
            return {"E": self.j}
        return {self.kind: self.fn.to_json()}


@dataclass(frozen=True, eq=False)
class Term:
    coef: complex
    factors: tuple

    def adjoint(self) -> "Term":
        return Term(complex(self.coef).conjugate(), tuple(f.adjoint() for f in reversed(self.factors)))


@dataclass(frozen=True, eq=False)
class GeneratorWord:
    """Finite sum of ordered products of generators, e.g. ``sum_j a_j(M) b_j(D) e^{ijM}``."""

    terms: tuple = ()
    label: str = ""

    def __add__(self, other: "GeneratorWord") -> "GeneratorWord":
        other = _coerce_word(other)
        return GeneratorWord(self.terms + other.terms, _join(self.label, "+", other.label))

    __radd__ = __add__

    def __neg__(self) -> "GeneratorWord":
        return self * -1

    def __sub__(self, other) -> "GeneratorWord":
        return self + (-_coerce_word(other))

    def __rsub__(self, other) -> "GeneratorWord":
        return _coerce_word(other) + (-self)

    def __mul__(self, other) -> "GeneratorWord":
        if isinstance(other, (int, float, complex, np.number)):
            return GeneratorWord(tuple(Term(t.coef * other, t.factors) for t in self.terms), self.label)
        other = _coerce_word(other)
        terms = tuple(Term(s.coef * t.coef, s.factors + t.factors) for s in self.terms for t in other.terms)
        return GeneratorWord(terms, _join(self.label, "*", other.label))

    __matmul__ = __mul__

    def __rmul__(self, other) -> "GeneratorWord":
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return _coerce_word(other) * self

    def adjoint(self) -> "GeneratorWord":
        return GeneratorWord(tuple(t.adjoint() for t in self.terms),
                             f"({self.label})*" if self.label else "")

    @property
    def max_modulation(self) -> int:
        return max((abs(f.j) for t in self.terms for f in t.factors if f.kind == "E"), default=0)

    def to_json(self) -> dict:
        out = []
        for t in self.terms:
            kinds = tuple(f.kind for f in t.factors)
            rec = {}
            if kinds in (("M", "D"), ("M", "D", "E")):
                rec["a"] = t.factors[0].to_json()["M"]
                rec["b"] = t.factors[1].to_json()["D"]
                rec["j"] = t.factors[2].j if len(kinds) == 3 else 0
            else:
                rec["factors"] = [f.to_json() for f in t.factors]
            if t.coef != 1:
                rec["coef"] = _encode_complex(t.coef)
            out.append(rec)
        doc = {"terms": out}
        if self.label:
            doc["label"] = self.label
        return doc


def _join(a, op, b):
    if a and b:
        return f"{a}{op}{b}" if op == "*" else f"{a} {op} {b}"
    return a or b


def _coerce_word(v) -> GeneratorWord:
    if isinstance(v, GeneratorWord):
        return v
    if isinstance(v, (int, float, complex, np.number)):
        return identity_word() * v
    raise TypeError(f"cannot combine a word with {type(v).__name__}")


def identity_word() -> GeneratorWord:
    return GeneratorWord((Term(1 + 0j, ()),), "Id")


def mult_op(a: Symbol, label: str = "") -> GeneratorWord:
    return GeneratorWord((Term(1 + 0j, (Factor("M", a),)),), label)


def fourier_op(b: ScalarFn, label: str = "") -> GeneratorWord:
    return GeneratorWord((Term(1 + 0j, (Factor("D", b),)),), label)


def modulation(j: int, label: str = "") -> GeneratorWord:
    return GeneratorWord((Term(1 + 0j, (Factor("E", None, j),)),), label or f"e^{{i{j}M}}")


def word(*triples, label: str = "") -> GeneratorWord:
    """Word in normal form from ``(a, b, j)`` triples meaning ``a(M) b(D) e^{ijM}``."""
    terms = []
    for tri in triples:
        a, b, j = tri
        fs = [Factor("M", a), Factor("D", b)]
        if j:
            fs.append(Factor("E", None, j))
        terms.append(Term(1 + 0j, tuple(fs)))
    return GeneratorWord(tuple(terms), label)


def word_from_json(doc: dict) -> GeneratorWord:
    terms = []
    for rec in doc["terms"]:
        coef = _decode_complex(rec.get("coef", 1))
        if "factors" in rec:
            fs = []
            for f in rec["factors"]:
                (kind, val), = f.items()
                if kind == "E":
                    fs.append(Factor("E", None, int(val)))
                elif kind == "M":
                    fs.append(Factor("M", semiperiodic_from_json(val)))
                else:
                    fs.append(Factor("D", scalar_from_json(val)))
        else:
            fs = [Factor("M", semiperiodic_from_json(rec["a"])), Factor("D", scalar_from_json(rec["b"]))]
            if int(rec.get("j", 0)):
                fs.append(Factor("E", None, int(rec["j"])))
        terms.append(Term(coef, tuple(fs)))
    return GeneratorWord(tuple(terms), doc.get("label", ""))


# ---------------------------------------------------------------------------
# boundary symbols

def limit_functional(a: Symbol, p: MSharpPoint) -> complex:
    """Value of ``a`` at a point of M#: a(x), or a_+-(theta) at +-infinity."""
    if isinstance(a, ScalarFn) and p.kind == "finite":
        return complex(a(p.value))
    a = as_semiperiodic(a)
    if p.kind == "finite":
        return complex(eval_semiperiodic(a, p.value))
    part = a.periodic_plus if p.kind == "plus" else a.periodic_minus
    return complex(part(p.value))


def _value_at(a: Symbol, x: float) -> complex:
    if isinstance(a, ScalarFn):
        return complex(a(x))
    if math.isfinite(x):
        return complex(eval_semiperiodic(a, x))
    lim = a.limits()
    if lim is None:
        raise NotInCSError("semiperiodic symbol with nonconstant periodic part")
    return lim[0] if x > 0 else lim[1]


def sigma_C(w: GeneratorWord, p: MCPoint) -> complex:
    """Symbol on the cross at infinity: a(M) -> a(x), b(D) -> b(xi)."""
    total = 0j
    for t in w.terms:
        val = complex(t.coef)
        for f in t.factors:
            if f.kind == "M":
                val *= _value_at(f.fn, p.x)
            elif f.kind == "D":
                val *= complex(f.fn(p.xi))
            elif f.j != 0:
                raise ValueError("sigma_C is defined for words without modulations")
        total += val
    return total


def sigma_A(w: GeneratorWord, m: MSharpPoint, sign: int) -> complex:
    """Symbol on M# x {+-inf}: a(M) -> a(m), b(D) -> b(sign inf), e^{ijM} -> e^{ij m}."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    total = 0j
    for t in w.terms:
        val = complex(t.coef)
        for f in t.factors:
            if f.kind == "M":
                val *= limit_functional(f.fn, m)
            elif f.kind == "D":
                val *= f.fn.limit(sign)
            else:
                val *= np.exp(1j * f.j * m.phase)
        total += val
    return total


# ---------------------------------------------------------------------------
# loops and winding numbers

@dataclass(frozen=True, eq=False)
class SampledLoop:
    samples: np.ndarray
    closed: bool = True

    def __post_init__(self):
        z = np.asarray(self.samples, dtype=complex).ravel()
        if self.closed and len(z) and z[0] != z[-1]:
            if abs(z[0] - z[-1]) > 1e-9 * max(1.0, float(np.max(np.abs(z)))):
                z = np.append(z, z[0])
            else:
                z = z.copy()
                z[-1] = z[0]
        z.setflags(write=False)
        object.__setattr__(self, "samples", z)

    def __len__(self):
        return len(self.samples)

    def concat(self, other: "SampledLoop") -> "SampledLoop":
        return SampledLoop(np.concatenate([self.samples, other.samples[1:]]), self.closed and other.closed)

    def __mul__(self, other: "SampledLoop") -> "SampledLoop":
        if len(self) != len(other):
            raise ValueError("pointwise product needs loops of equal length")
        return SampledLoop(self.samples * other.samples, self.closed and other.closed)

    def csv_rows(self):
        return [(k, float(z.real), float(z.imag)) for k, z in enumerate(self.samples)]


def winding_number(loop: SampledLoop, tol: float = 1e-10, max_step: float = np.pi / 2) -> int:
    """Degree of a closed nonvanishing sampled curve around 0.

    Phase increments are taken between consecutive samples; each must stay
    below ``max_step`` for the unwrapping to be unambiguous.
    """
    z = loop.samples
    if len(z) < 2:
        return 0
    mags = np.abs(z)
    if np.min(mags) <= tol * max(1.0, float(np.max(mags))):
        raise NotInvertibleError(float(np.min(mags)))
    steps = np.angle(z[1:] / z[:-1])
    bad = np.flatnonzero(np.abs(steps) >= max_step)
    if len(bad):
        raise UndersampledLoopError(float(steps[bad[0]]), int(bad[0]))
    total = math.fsum(steps.tolist()) / TWO_PI
    return int(round(total))


def loop_from_function(f: Callable, t0: float, t1: float, n: int) -> SampledLoop:
    t = np.linspace(t0, t1, n)
    return SampledLoop(np.asarray(f(t), dtype=complex))


def mc_points(n: int) -> list:
    """``n`` points of the cross at infinity in counterclockwise order (n divisible by 4 is best)."""
    if n < 16:
        raise ValueError("need at least 16 samples")
    m = -(-n // 4)
    u = 1.0 - 2.0 * np.arange(m) / m          # 1 -> -1, end excluded
    top = s_inverse(u)
    pts = [MCPoint.top(x) for x in top]
    pts += [MCPoint.left(xi) for xi in top]
    pts += [MCPoint.bottom(x) for x in -top]
    pts += [MCPoint.right(xi) for xi in -top]
    return pts


def loop_sigma_C(w: GeneratorWord, n: int = 1024) -> SampledLoop:
    """Closed loop of ``sigma_C(w, .)`` around the cross at infinity."""
    vals = [sigma_C(w, p) for p in mc_points(n)]
    return SampledLoop(np.array(vals + vals[:1]))


def sigma_winding(w: GeneratorWord, n: int = 1024) -> int:
    """Winding number of the symbol loop, refining the sampling until it is resolved."""
    while True:
        try:
            return winding_number(loop_sigma_C(w, n))
        except UndersampledLoopError:
            if n >= 1 << 18:
                raise
            n *= 2

"""End-to-end replication run: every fixture becomes a record with the value
it should have, the value computed, how it was verified, and a status.

Statuses are ``match``, ``match-up-to-global-sign`` (the shift-convention
sign), ``flagged`` (numerical evidence not conclusive, e.g. an unreliable
singular value gap) and ``error`` (an exception or a reliable mismatch).
"""
from __future__ import annotations

import csv
import io
import json
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .discretize import GridSpec, word_index
from .gamma import CONVENTIONS, delta0_exponential, delta1_table, gamma_word, index_element, \
    quotient_unitaries
from .lattice import NODE_ORDER, check_exact, fixtures, replicate_k_groups
from .symbols import (builtin, fourier_op, identity_word, loop_from_function, mult_op,
                      sigma_winding, standard_bc, winding_number)
from .toeplitz import CircleSymbol, toeplitz_index

GROUPS = ("winding", "toeplitz", "index", "gamma", "ktheory")
STATUSES = ("match", "match-up-to-global-sign", "flagged", "error")
DEFAULT_SEED = 20240601
ORIENTATION = ("counterclockwise in the (x, xi) plane: top edge right to left, left edge top to "
               "bottom, bottom edge left to right, right edge bottom to top")


def default_seed() -> int:
    return int(os.environ.get("OPINDEX_SEED", DEFAULT_SEED))


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 1024
    half_width: float = 16 * np.pi
    J: int = 32
    P: int = 512
    eps_ladder: tuple = (1e-6, 1e-8)
    toeplitz_m: int = 256
    toeplitz_eps: float = 1e-8
    convention: str = "literal"
    output_dir: Optional[str] = None
    only: tuple = ()
    strict: bool = False
    workers: int = 1
    seed: int = field(default_factory=default_seed)

    def __post_init__(self):
        GridSpec(self.grid_n, self.half_width)      # validates n
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.J < 8:
            raise ValueError("J must be at least 8")
        if self.P < 16:
            raise ValueError("P must be at least 16")
        if not self.eps_ladder or any(not 0 < e < 1 for e in self.eps_ladder):
            raise ValueError("eps_ladder must be a nonempty list of values in (0, 1)")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        if self.workers < 1:
            raise ValueError("workers must be positive")
        object.__setattr__(self, "eps_ladder", tuple(float(e) for e in self.eps_ladder))
        object.__setattr__(self, "only", tuple(self.only))

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.grid_n, self.half_width)

    def selected(self, name: str) -> bool:
        return not self.only or any(name.startswith(p) for p in self.only)

    def to_json(self) -> dict:
        d = asdict(self)
        d["eps_ladder"] = list(self.eps_ladder)
        d["only"] = list(self.only)
        return d

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        doc = dict(doc)
        if "grid" in doc:
            g = doc.pop("grid")
            g = GridSpec.parse(g) if isinstance(g, str) else GridSpec(int(g["n"]), float(g["L"]))
            doc["grid_n"], doc["half_width"] = g.n, g.half_width
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        for k in ("eps_ladder", "only"):
            if k in doc:
                doc[k] = tuple(doc[k])
        return cls(**doc)


@dataclass(frozen=True)
class Record:
    name: str
    citation: str
    expected: object
    computed: object
    status: str
    route: str
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "citation": self.citation, "expected": self.expected,
                "computed": self.computed, "status": self.status, "route": self.route,
                "details": self.details}


@dataclass(frozen=True)
class Report:
    config: RunConfig
    records: tuple

    def count(self, status: str) -> int:
        return sum(r.status == status for r in self.records)

    @property
    def exit_code(self) -> int:
        """1 on any error; 2 when ``strict`` and something is flagged; else 0."""
        if self.count("error"):
            return 1
        if self.config.strict and self.count("flagged"):
            return 2
        return 0

    def k_group_line(self) -> str:
        recs = {r.name: r for r in self.records}
        k0, k1 = recs.get("ktheory.algebra.via_quotient.K0"), recs.get("ktheory.algebra.via_quotient.K1")
        if k0 is None or k1 is None:
            return ""
        return f"K₀(A)={k0.computed}, K₁(A)={k1.computed}"

    def summary(self) -> dict:
        return {s: self.count(s) for s in STATUSES}

    def to_json(self) -> dict:
        return {"config": self.config.to_json(), "seed": self.config.seed, "orientation": ORIENTATION,
                "summary": self.summary(), "k_groups": self.k_group_line(),
                "records": [r.to_json() for r in self.records]}


# ---------------------------------------------------------------------------
# fixtures

def _winding_fixtures(cfg: RunConfig) -> list:
    b, c = standard_bc()
    tp = t_prime_word(cfg.half_width)
    u = mult_op(b.exp2pii()) * fourier_op(b) + fourier_op(c)
    w = mult_op(c.exp2pii()) * fourier_op(c) + fourier_op(b)
    gen = mult_op(c.exp2pii()) * fourier_op(b) + fourier_op(c)

    def circle():
        return winding_number(loop_from_function(lambda t: np.exp(1j * t), 0, 2 * np.pi, 256))

    def plain(fn):
        return lambda: (fn(), False, {"orientation": ORIENTATION})

    items = [
        ("winding.unit_circle", "degree of t -> e^{it} is 1", 1, circle),
        ("winding.comparison_generator", "symbol of e^{2 pi i c(M)} b(D) + c(D) winds once", 1,
         lambda: sigma_winding(gen)),
        ("winding.t_prime", "symbol of T' winds once", 1, lambda: sigma_winding(tp)),
        ("winding.U", "symbol of U = e^{2 pi i b(M)} b(D) + c(D) has winding -1", -1,
         lambda: sigma_winding(u)),
        ("winding.W", "symbol of W = e^{2 pi i c(M)} c(D) + b(D) has winding -1", -1,
         lambda: sigma_winding(w)),
    ]
    return [(n, cite, exp, plain(fn)) for n, cite, exp, fn in items]


def t_prime_word(half_width: float = 16 * np.pi):
    """``phi(M) b(D) + c(D)`` with ``phi`` of winding -1, constant outside ``|x| <= half_width / 2``."""
    b, c = standard_bc()
    R = half_width / 2
    phi = builtin("b_smooth").dilate(1.0 / R).exp2pii().conj()
    return mult_op(phi) * fourier_op(b) + fourier_op(c)


def b_exp_word():
    """``b(M) e^{2 pi i c(D)} + c(M)`` with a smooth transition inside the exponential."""
    b, c = standard_bc()
    return mult_op(b) * fourier_op(builtin("c_smooth").exp2pii()) + mult_op(c)


def _index_fixtures(cfg: RunConfig) -> list:
    tp, bop = t_prime_word(cfg.half_width), b_exp_word()
    words = [
        ("index.identity", "identity has index 0", 0, identity_word()),
        ("index.t_prime", "index of T' is 1", 1, tp),
        ("index.b_exp", "index of b(M) e^{2 pi i c(D)} + c(M) is -1", -1, bop),
        ("index.t_prime_squared", "index is additive: ind(T'^2) = 2", 2, tp * tp),
        ("index.t_prime_b_exp", "index is additive: ind(T' (b(M) e^{2 pi i c(D)} + c(M))) = 0", 0, tp * bop),
    ]
    return [(n, cite, exp, (lambda w=w: _word_index_record(w, cfg))) for n, cite, exp, w in words]


def _word_index_record(w, cfg: RunConfig):
    g = cfg.grid
    results = [word_index(w, g, eps) for eps in cfg.eps_ladder]
    first = results[0]
    flagged = not first.reliable or any(r.reliable and r.index != first.index for r in results[1:])
    details = {"grid": {"n": g.n, "L": g.half_width}, "ladder": [r.to_json() for r in results]}
    reasons = []
    if not first.gap.reliable:
        reasons.append("unreliable gap")
    if first.issues:
        reasons.append("unresolved symbol")
    if any(r.reliable and r.index != first.index for r in results[1:]):
        reasons.append("index changes along the eps ladder")
    if reasons:
        details["flag"] = reasons
    return first.index, flagged, details


def _toeplitz_fixtures(cfg: RunConfig) -> list:
    out = []
    for k in range(-3, 4):
        def run(k=k):
            t = toeplitz_index(CircleSymbol.monomial(k), cfg.toeplitz_m, cfg.toeplitz_eps)
            return t.index, not t.corroborated, t.to_json()
        out.append((f"toeplitz.z^{k:+d}", "index of T_phi is minus the winding of phi", -k, run))
    return out


def _gamma_fixtures(cfg: RunConfig) -> list:
    out = []
    state = {}

    def table():
        if "table" not in state:
            state["table"] = delta1_table(cfg.J, cfg.convention)
        return state["table"]

    names = ("A1", "A2", "A3", "A4")
    expected = ((1, 0), (0, 1), (-1, 0), (0, -1))
    for i, name in enumerate(names):
        def run(i=i):
            t = table()
            return list(t.rows[i]), t.global_sign, {"convention": t.convention}
        out.append((f"gamma.delta1.{name}", f"index map on [{name}] (pair over sign +1, -1)",
                    list(expected[i]), run))

    def traces():
        t = table()
        conv = cfg.convention if t.global_sign == 1 else next(c for c in CONVENTIONS if c != cfg.convention)
        other = delta1_table(cfg.J, conv)
        ti = other.traces["A1+"]
        return [str(ti.exact_kernel), str(ti.exact_cokernel)], False, {"convention": conv,
                                                                       "trace_index": ti.to_json()}
    out.append(("gamma.traces.A1", "traces of the two deviations of gamma_A1(1, +1) are 1/2 and -1/2",
                ["1/2", "-1/2"], traces))

    def element():
        words = quotient_unitaries()
        g = gamma_word(words["A1"], 1.0, 1, cfg.J, cfg.convention).operator
        e = index_element(g, g.adjoint())
        val = e.exact if e.exact is not None else e.trace_difference
        sign = table().global_sign
        return int(round(float(val))) * sign, False, {"idempotent_error": e.idempotent_error,
                                                      "raw": str(val)}
    out.append(("gamma.index_element.A1", "the idempotent W1 of gamma_A1(1, +1) has trace difference 1",
                1, element))

    def d0(which):
        def run():
            b, c = standard_bc()
            r = delta0_exponential(b if which == "b" else c, cfg.P)
            return list(r.klass), False, r.to_json()
        return run
    out.append(("gamma.delta0.b", "exponential map sends (1, 0) to (1, 1)", [1, 1], d0("b")))
    out.append(("gamma.delta0.c", "exponential map sends (0, 1) to (-1, -1)", [-1, -1], d0("c")))
    return out


_KGROUP_TARGETS = (
    ("comparison", "K0A", "ℤ", "K0 of the comparison algebra"),
    ("comparison", "K1A", "0", "K1 of the comparison algebra"),
    ("msharp", "K0A", "ℤ", "K0 of C(M#)"),
    ("msharp", "K1A", "ℤ²", "K1 of C(M#)"),
    ("split", "K0A", "ℤ²", "K0 of E modulo compacts"),
    ("split", "K1A", "ℤ²", "K1 of E modulo compacts"),
    ("quotient", "K0A", "ℤ", "K0 of A modulo compacts"),
    ("quotient", "K1A", "ℤ³", "K1 of A modulo compacts"),
    ("boundary", "K0A", "ℤ", "K0 of A modulo compacts, boundary-map route"),
    ("boundary", "K1A", "ℤ³", "K1 of A modulo compacts, boundary-map route"),
    ("algebra.via_quotient", "K0A", "ℤ", "K0 of A"),
    ("algebra.via_quotient", "K1A", "ℤ²", "K1 of A"),
    ("algebra.via_boundary", "K0A", "ℤ", "K0 of A, crossed-product route"),
    ("algebra.via_boundary", "K1A", "ℤ²", "K1 of A, crossed-product route"),
    ("crossed", "K0Q", "ℤ", "K0 of the crossed product by Z"),
    ("crossed", "K1Q", "ℤ", "K1 of the crossed product by Z"),
)


def _ktheory_fixtures(cfg: RunConfig) -> list:
    state = {}

    def solved():
        if "s" not in state:
            state["s"] = replicate_k_groups()
        return state["s"]

    out = []
    for diag, node, expected, cite in _KGROUP_TARGETS:
        def run(diag=diag, node=node):
            s = solved()[diag]
            return str(s.diagram.group(node)), False, {"status": s.status[node], "exact": s.exact}
        k = node[:2]
        out.append((f"ktheory.{diag}.{k}", cite, expected, run))

    def full():
        d = fixtures()["quotient.full"]
        v = check_exact(d.maps, cyclic=True, nodes=NODE_ORDER)
        return all(x.exact for x in v), False, {"verdicts": [x.to_json() for x in v]}
    out.append(("ktheory.quotient.full_exactness",
                "quotient sequence with induced maps is exact at all six nodes", True, full))
    return out


_BUILDERS = {"winding": _winding_fixtures, "toeplitz": _toeplitz_fixtures, "index": _index_fixtures,
             "gamma": _gamma_fixtures, "ktheory": _ktheory_fixtures}

_ROUTES = {"winding": "winding", "toeplitz": "winding", "index": "eps-rank", "gamma": "trace",
           "ktheory": "SNF"}


def _plain(v):
    if isinstance(v, tuple):
        return [_plain(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def _run_one(group: str, name: str, cite: str, expected, fn: Callable) -> Record:
    route = _ROUTES[group]
    if group == "gamma" and name.startswith("gamma.delta0"):
        route = "winding"
    try:
        out = fn()
        computed, extra, details = out
        computed = _plain(computed)
        if group == "gamma" and name.startswith("gamma.delta1"):
            sign = extra
            status = "match" if sign == 1 and computed == expected else \
                "match-up-to-global-sign" if sign == -1 and computed == [-x for x in expected] else "error"
        elif computed == expected:
            status = "flagged" if extra else "match"
        else:
            status = "flagged" if extra else "error"
        return Record(name, cite, expected, computed, status, route, _jsonable(details))
    except Exception as exc:  # every failure becomes a record
        return Record(name, cite, expected, None, "error", route,
                      {"exception": type(exc).__name__, "message": str(exc)})


def _jsonable(obj):
    return json.loads(json.dumps(obj, default=_default))


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, tuple)):
        return list(o)
    return str(o)


def run_replication(cfg: RunConfig) -> Report:
    """Run the selected fixture groups in the order winding, toeplitz, index, gamma, ktheory."""
    jobs = []
    for group in GROUPS:
        for name, cite, expected, fn in _BUILDERS[group](cfg):
            if cfg.selected(name):
                jobs.append((group, name, cite, expected, fn))
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as ex:
            records = list(ex.map(lambda j: _run_one(*j), jobs))
    else:
        records = [_run_one(*j) for j in jobs]
    return Report(cfg, tuple(sorted(records, key=lambda r: r.name)))


# ---------------------------------------------------------------------------
# export

def report_json(report: Report) -> str:
    return json.dumps(report.to_json(), sort_keys=True, indent=2, ensure_ascii=False,
                      default=_default) + "\n"


def report_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "citation", "expected", "computed", "status", "route"])
    for r in report.records:
        w.writerow([r.name, r.citation, json.dumps(r.expected, ensure_ascii=False),
                    json.dumps(r.computed, ensure_ascii=False), r.status, r.route])
    return buf.getvalue()


def _cell(v) -> str:
    s = v if isinstance(v, str) else json.dumps(v, ensure_ascii=False)
    return s.replace("|", "\\|")


def report_md(report: Report) -> str:
    lines = ["# Replication report", ""]
    if report.k_group_line():
        lines += [f"**{report.k_group_line()}**", ""]
    summ = report.summary()
    lines.append("Summary: " + ", ".join(f"{k}: {v}" for k, v in summ.items()))
    if summ["match-up-to-global-sign"]:
        lines.append("")
        lines.append(f"**{summ['match-up-to-global-sign']} record(s) match only up to the global "
                     f"shift-convention sign (convention: {report.config.convention}).**")
    lines += ["", f"Symbol loop orientation: {ORIENTATION}.", f"Seed: {report.config.seed}.", "",
              "| name | claim | expected | computed | status | route |",
              "|---|---|---|---|---|---|"]
    for r in report.records:
        lines.append(f"| {r.name} | {_cell(r.citation)} | {_cell(r.expected)} | {_cell(r.computed)} "
                     f"| {r.status} | {r.route} |")
    return "\n".join(lines) + "\n"


EXPORTERS = {"json": report_json, "csv": report_csv, "md": report_md}


def export(report: Report, fmt: str, directory, stem: str = "report") -> Path:
    """Write ``<stem>.<fmt>``; JSON output also writes a separate metadata file with timestamps."""
    if fmt not in EXPORTERS:
        raise ValueError(f"format must be one of {sorted(EXPORTERS)}")
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    path = d / f"{stem}.{fmt}"
    path.write_text(EXPORTERS[fmt](report), encoding="utf-8")
    if fmt == "json":
        meta = {"created": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "version": __version__,
                "python": platform.python_version(), "numpy": np.__version__}
        (d / f"{stem}.meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n",
                                             encoding="utf-8")
    return path


def loop_csv(samples: Sequence[complex]) -> str:
    """``index,re,im`` rows of a sampled loop."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "re", "im"])
    for k, z in enumerate(samples):
        w.writerow([k, repr(float(np.real(z))), repr(float(np.imag(z)))])
    return buf.getvalue()

"""``opindex`` command line."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .discretize import (GridSpec, assemble, fredholm_index_estimate, operator_summary,
                         read_operator, word_index, write_operator)
from .errors import OpIndexError
from .gamma import CONVENTIONS, DEFAULT_J, delta0_exponential, delta1_table, gamma_word
from .lattice import FIXTURES, NODE_ORDER, SixTermDiagram, check_exact, solve_unknown
from .report import EXPORTERS, RunConfig, export, loop_csv, run_replication
from .symbols import loop_sigma_C, scalar_from_json, sigma_winding, word_from_json
from .toeplitz import CircleSymbol, toeplitz_index, toeplitz_truncation


def _load_json(arg: str):
    """Inline JSON, or the path of a JSON file."""
    text = arg.strip()
    if text[:1] in "{[":
        return json.loads(text)
    return json.loads(Path(arg).read_text(encoding="utf-8"))


def _emit(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False, default=_default))


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _write_rows(path, header, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(repr(x) if isinstance(x, float) else str(x) for x in r) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_assemble(args) -> int:
    g = GridSpec.parse(args.grid)
    A = assemble(word_from_json(_load_json(args.word)), g)
    if args.out:
        write_operator(A, args.out)
    _emit(operator_summary(A, args.eps))
    return 0


def cmd_index(args) -> int:
    if args.operator:
        A = read_operator(args.operator)
        idx, gap = fredholm_index_estimate(A, args.eps)
        _emit({"index": idx, "gap": gap.to_json(), "reliable": gap.reliable})
        return 0
    if not args.word:
        raise SystemExit("index: give --word or --operator")
    res = word_index(word_from_json(_load_json(args.word)), GridSpec.parse(args.grid), args.eps)
    _emit(res.to_json())
    return 0


def cmd_toeplitz(args) -> int:
    phi = CircleSymbol.from_json(_load_json(args.symbol))
    res = toeplitz_index(phi, args.m, args.eps)
    if args.sv_csv:
        s = np.linalg.svd(toeplitz_truncation(phi, args.m).matrix, compute_uv=False)
        _write_rows(args.sv_csv, ["k", "sigma"], [(k, float(v)) for k, v in enumerate(s)])
    if args.loop_csv:
        theta = 2 * np.pi * np.arange(args.samples + 1) / args.samples
        Path(args.loop_csv).write_text(loop_csv(phi(theta)), encoding="utf-8")
    _emit(res.to_json())
    return 0


def cmd_winding(args) -> int:
    w = word_from_json(_load_json(args.word))
    loop = loop_sigma_C(w, args.n)
    if args.loop_csv:
        Path(args.loop_csv).write_text(loop_csv(loop.samples), encoding="utf-8")
    _emit({"winding": sigma_winding(w, args.n), "samples": len(loop)})
    return 0


def cmd_gamma(args) -> int:
    w = word_from_json(_load_json(args.word))
    g = gamma_word(w, args.phi, args.sign, args.J, args.convention)
    _emit(g.to_json(args.max_size))
    return 0


def cmd_delta1(args) -> int:
    _emit(delta1_table(args.J, args.convention).to_json())
    return 0


def cmd_delta0(args) -> int:
    b = scalar_from_json(_load_json(args.symbol)) if args.symbol else None
    res = delta0_exponential(b, args.P, args.J)
    if args.loop_csv:
        Path(args.loop_csv).write_text(loop_csv(res.loop.samples), encoding="utf-8")
    _emit(res.to_json())
    return 0


def cmd_ktheory(args) -> int:
    if args.fixture:
        if args.fixture not in FIXTURES:
            raise SystemExit(f"unknown fixture {args.fixture!r}; known: {', '.join(sorted(FIXTURES))}")
        d = FIXTURES[args.fixture]
    elif args.diagram:
        d = SixTermDiagram.from_json(_load_json(args.diagram))
    else:
        raise SystemExit("ktheory: give --diagram or --fixture")
    if args.solve:
        s = solve_unknown(d)
        _emit(s.to_json())
        return 0 if s.determined else 1
    if any(m is None for m in d.maps):
        raise SystemExit("ktheory: exactness check needs all six maps (use --solve)")
    verdicts = check_exact(d.maps, cyclic=True, nodes=NODE_ORDER)
    _emit({"name": d.name, "exact": all(v.exact for v in verdicts),
           "verdicts": [v.to_json() for v in verdicts]})
    return 0 if all(v.exact for v in verdicts) else 1


def cmd_replicate(args) -> int:
    doc = _load_json(args.config) if args.config else {}
    cfg = RunConfig.from_json(doc)
    changes = {}
    if args.only:
        changes["only"] = tuple(args.only)
    if args.strict:
        changes["strict"] = True
    if args.convention:
        changes["convention"] = args.convention
    if args.out:
        changes["output_dir"] = args.out
    if args.workers:
        changes["workers"] = args.workers
    cfg = dataclasses.replace(cfg, **changes)
    report = run_replication(cfg)
    if cfg.output_dir:
        for fmt in args.format or sorted(EXPORTERS):
            export(report, fmt, cfg.output_dir)
    sys.stdout.write(EXPORTERS["md"](report))
    return report.exit_code


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="opindex", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("assemble", help="assemble a generator word on a grid")
    a.add_argument("--word", required=True, help="word JSON (inline or file)")
    a.add_argument("--grid", default="n=1024,L=50.27")
    a.add_argument("--eps", type=float, default=None)
    a.add_argument("--out", help="binary operator file")
    a.set_defaults(func=cmd_assemble)

    a = sub.add_parser("index", help="eps-rank Fredholm index")
    a.add_argument("--word")
    a.add_argument("--operator", help="binary operator file from 'assemble'")
    a.add_argument("--grid", default="n=1024,L=50.27")
    a.add_argument("--eps", type=float, default=1e-6)
    a.set_defaults(func=cmd_index)

    a = sub.add_parser("toeplitz", help="Toeplitz index of a trigonometric polynomial")
    a.add_argument("--symbol", required=True, help='e.g. \'{"fourier":{"1":1}}\'')
    a.add_argument("--m", type=int, default=256)
    a.add_argument("--eps", type=float, default=1e-8)
    a.add_argument("--sv-csv", help="write singular values of the truncation")
    a.add_argument("--loop-csv", help="write the sampled symbol loop")
    a.add_argument("--samples", type=int, default=512)
    a.set_defaults(func=cmd_toeplitz)

    a = sub.add_parser("winding", help="winding number of the boundary symbol of a word")
    a.add_argument("--word", required=True)
    a.add_argument("--n", type=int, default=1024)
    a.add_argument("--loop-csv")
    a.set_defaults(func=cmd_winding)

    a = sub.add_parser("gamma", help="gamma_A(phi, sign) on sequence space")
    a.add_argument("--word", required=True)
    a.add_argument("--phi", type=float, default=1.0)
    a.add_argument("--sign", type=int, choices=(1, -1), default=1)
    a.add_argument("--J", type=int, default=DEFAULT_J)
    a.add_argument("--convention", choices=CONVENTIONS, default="literal")
    a.add_argument("--max-size", type=int, default=33, help="largest matrix printed in full")
    a.set_defaults(func=cmd_gamma)

    a = sub.add_parser("delta1-table", help="index pairs of the four quotient unitaries")
    a.add_argument("--J", type=int, default=DEFAULT_J)
    a.add_argument("--convention", choices=CONVENTIONS, default="literal")
    a.set_defaults(func=cmd_delta1)

    a = sub.add_parser("delta0", help="exponential-map class of a transition function")
    a.add_argument("--symbol", help="scalar function JSON; default is the standard b")
    a.add_argument("--P", type=int, default=512)
    a.add_argument("--J", type=int, default=16)
    a.add_argument("--loop-csv")
    a.set_defaults(func=cmd_delta0)

    a = sub.add_parser("ktheory", help="solve or check a six-term exact sequence")
    a.add_argument("--diagram", help="diagram JSON")
    a.add_argument("--fixture", help="built-in diagram name")
    a.add_argument("--solve", action="store_true")
    a.set_defaults(func=cmd_ktheory)

    a = sub.add_parser("replicate", help="run every fixture and report")
    a.add_argument("--config")
    a.add_argument("--only", action="append", help="fixture name prefix (repeatable)")
    a.add_argument("--strict", action="store_true", help="flagged records fail the run")
    a.add_argument("--convention", choices=CONVENTIONS)
    a.add_argument("--out", help="directory for report files")
    a.add_argument("--format", action="append", choices=sorted(EXPORTERS))
    a.add_argument("--workers", type=int)
    a.set_defaults(func=cmd_replicate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OpIndexError, ValueError, OSError) as exc:
        print(f"opindex {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

import csv
import io
import json

import numpy as np
import pytest

from opindex import report as rep
from opindex.cli import main
from opindex.report import (RunConfig, Report, export, loop_csv, report_csv, report_json, report_md,
                            run_replication)
from opindex.symbols import loop_sigma_C, mult_op, fourier_op, standard_bc

FAST = ("toeplitz", "gamma", "ktheory", "winding")


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(grid_n=100)
    with pytest.raises(ValueError):
        RunConfig(J=4)
    with pytest.raises(ValueError):
        RunConfig(eps_ladder=())
    with pytest.raises(ValueError):
        RunConfig(convention="sideways")
    with pytest.raises(ValueError):
        RunConfig.from_json({"bogus": 1})
    cfg = RunConfig.from_json({"grid": "n=512,L=20", "eps_ladder": [1e-5], "only": ["index"]})
    assert (cfg.grid_n, cfg.half_width, cfg.eps_ladder, cfg.only) == (512, 20.0, (1e-5,), ("index",))
    assert RunConfig.from_json(cfg.to_json()) == cfg


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv("OPINDEX_SEED", "77")
    assert RunConfig().seed == 77


def test_toeplitz_only():
    r = run_replication(RunConfig(only=("toeplitz",)))
    assert len(r.records) == 7
    assert all(x.status == "match" for x in r.records)
    assert r.exit_code == 0


def test_empty_selection(tmp_path):
    r = run_replication(RunConfig(only=("nothing",)))
    assert r.records == ()
    path = export(r, "json", tmp_path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    assert doc["records"] == [] and doc["summary"]["error"] == 0
    assert (tmp_path / "report.meta.json").exists()


def test_records_carry_route_and_citation():
    r = run_replication(RunConfig(only=FAST))
    assert r.count("error") == 0 and r.count("flagged") == 0
    assert r.k_group_line() == "K₀(A)=ℤ, K₁(A)=ℤ²"
    for x in r.records:
        assert x.citation and x.route in ("winding", "eps-rank", "trace", "SNF")
    assert [x.name for x in r.records] == sorted(x.name for x in r.records)
    assert r.count("match-up-to-global-sign") == 4


def test_reversed_convention_matches_without_sign():
    r = run_replication(RunConfig(only=("gamma.delta1",), convention="reversed"))
    assert [x.status for x in r.records] == ["match"] * 4


def test_json_is_deterministic():
    cfg = RunConfig(only=FAST)
    a = report_json(run_replication(cfg))
    b = report_json(run_replication(cfg))
    c = report_json(run_replication(RunConfig(only=FAST, workers=3)))
    assert a == b
    # worker count changes the config block only
    assert json.loads(a)["records"] == json.loads(c)["records"]
    assert "created" not in a


def test_md_has_one_row_per_record():
    r = run_replication(RunConfig(only=("toeplitz", "ktheory")))
    md = report_md(r)
    rows = [ln for ln in md.splitlines() if ln.startswith("| ") and not ln.startswith("| name")]
    assert len(rows) == len(r.records)
    assert "K₀(A)=ℤ, K₁(A)=ℤ²" in md


def test_csv_export():
    r = run_replication(RunConfig(only=("toeplitz",)))
    rows = list(csv.reader(io.StringIO(report_csv(r))))
    assert rows[0] == ["name", "citation", "expected", "computed", "status", "route"]
    assert len(rows) == 8


def test_loop_csv_matches_loop_length():
    b, c = standard_bc()
    loop = loop_sigma_C(mult_op(c.exp2pii()) * fourier_op(b) + fourier_op(c), 64)
    rows = list(csv.reader(io.StringIO(loop_csv(loop.samples))))
    assert rows[0] == ["index", "re", "im"]
    assert len(rows) - 1 == len(loop)
    assert complex(float(rows[5][1]), float(rows[5][2])) == loop.samples[4]


def test_errors_become_records(monkeypatch):
    def boom(cfg):
        def fail():
            raise RuntimeError("broken fixture")
        return [("toeplitz.broken", "a fixture that fails", 0, fail)]

    monkeypatch.setitem(rep._BUILDERS, "toeplitz", boom)
    r = run_replication(RunConfig(only=("toeplitz", "ktheory.comparison")))
    broken = [x for x in r.records if x.name == "toeplitz.broken"][0]
    assert broken.status == "error" and broken.details["exception"] == "RuntimeError"
    assert len(r.records) == 3 and r.exit_code == 1


def test_coarse_grid_flags_index_records():
    r = run_replication(RunConfig(grid_n=64, only=("index.t_prime",)))
    assert {x.status for x in r.records} == {"flagged"}
    assert all(x.details["flag"] for x in r.records)
    assert r.exit_code == 0
    strict = Report(RunConfig(grid_n=64, strict=True), r.records)
    assert strict.exit_code == 2


def test_cli_toeplitz(capsys, tmp_path):
    sv = tmp_path / "sv.csv"
    assert main(["toeplitz", "--symbol", '{"fourier":{"1":1}}', "--m", "64", "--sv-csv", str(sv)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["index"] == -1 and doc["corroborated"]
    assert len(sv.read_text().splitlines()) == 65


def test_cli_ktheory(capsys, tmp_path):
    from opindex.lattice import FIXTURES
    path = tmp_path / "hex.json"
    path.write_text(json.dumps(FIXTURES["quotient"].to_json()), encoding="utf-8")
    assert main(["ktheory", "--diagram", str(path), "--solve"]) == 0
    doc = json.loads(capsys.readouterr().out)
    k1a = [g for g in doc["diagram"]["groups"] if g["node"] == "K1A"][0]
    assert k1a["display"] == "ℤ³"
    assert main(["ktheory", "--fixture", "quotient.full"]) == 0
    assert json.loads(capsys.readouterr().out)["exact"]


def test_cli_gamma_tables(capsys):
    assert main(["delta1-table", "--J", "16", "--convention", "reversed"]) == 0
    assert json.loads(capsys.readouterr().out)["rows"] == [[1, 0], [0, 1], [-1, 0], [0, -1]]
    assert main(["delta0"]) == 0
    assert json.loads(capsys.readouterr().out)["class"] == [1, 1]
    word = json.dumps({"terms": [{"factors": [{"E": 1}]}]})
    assert main(["gamma", "--word", word, "--J", "8", "--phi", "0.5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert np.allclose(np.array(doc["operator"]["re"]) + 1j * np.array(doc["operator"]["im"]),
                       np.roll(np.eye(17), -1, axis=1))


def test_cli_assemble_and_index(capsys, tmp_path):
    word = json.dumps({"terms": [{"factors": [{"D": {"kind": "builtin", "name": "b_std"}}]}]})
    out = tmp_path / "op.bin"
    assert main(["assemble", "--word", word, "--grid", "n=64,L=8", "--out", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["n"] == 64
    assert main(["index", "--operator", str(out), "--eps", "1e-6"]) == 0
    assert "index" in json.loads(capsys.readouterr().out)


def test_cli_winding(capsys, tmp_path):
    b, c = standard_bc()
    word = json.dumps((mult_op(c.exp2pii()) * fourier_op(b) + fourier_op(c)).to_json())
    lp = tmp_path / "loop.csv"
    assert main(["winding", "--word", word, "--n", "256", "--loop-csv", str(lp)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["winding"] == 1
    assert len(lp.read_text().splitlines()) == doc["samples"] + 1


def test_cli_replicate(capsys, tmp_path):
    code = main(["replicate", "--only", "toeplitz", "--out", str(tmp_path), "--format", "json",
                 "--format", "md"])
    assert code == 0
    assert "toeplitz.z^+3" in capsys.readouterr().out
    assert sorted(p.name for p in tmp_path.iterdir()) == ["report.json", "report.md", "report.meta.json"]


def test_cli_reports_library_errors(capsys):
    assert main(["toeplitz", "--symbol", '{"fourier":{"0":1,"1":1}}']) == 1
    assert "NotFredholmError" in capsys.readouterr().err

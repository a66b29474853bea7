import io
import json
import subprocess
import sys

import numpy as np
import pytest

from gendiag.chainio import load_chain_set
from gendiag.cli import main
from gendiag.diagnostics import NearestNeighbor, run_generalized_diagnostic, write_traceplot_csv
from gendiag.distances import Euclidean


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def m3_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("m3") / "m3.ndjson"
    assert run("simulate", "--scenario", "m3", "--seed", 3, "-o", p) == 0
    return p


def test_simulate_shape_and_determinism(tmp_path):
    a, b = tmp_path / "a.ndjson", tmp_path / "b.ndjson"
    assert run("simulate", "--scenario", "m2", "--seed", 7, "-o", a) == 0
    assert run("simulate", "--scenario", "m2", "--seed", 7, "-o", b) == 0
    assert a.read_bytes() == b.read_bytes()
    cs = load_chain_set(a)
    assert (cs.k, cs.n) == (7, 2000)
    meta = json.loads((tmp_path / "a.ndjson.meta.json").read_text())
    assert meta["scenario"]["seed"] == 7 and len(meta["spec_hash"]) == 64 and "PCG64" in meta["rng"]


def test_simulate_trapped_partition(tmp_path):
    p = tmp_path / "p.ndjson"
    assert run("simulate", "--scenario", "synthetic-partition", "--trapped", "--seed", 1, "-o", p) == 0
    cs = load_chain_set(p)
    assert sum(len(set(row.tolist())) == 1 for row in cs.index_chains) == 1


def test_simulate_from_config(tmp_path):
    cfg = tmp_path / "s.json"
    cfg.write_text(json.dumps({"target": "x2", "proposal": {"family": "random_walk", "sd": 1.0},
                               "starts": [0, 1], "n_iter": 40}))
    out = tmp_path / "c.ndjson"
    assert run("simulate", "--config", cfg, "-o", out) == 0
    assert load_chain_set(out).k == 2


def test_unknown_scenario_exits_2(capsys):
    with pytest.raises(SystemExit) as e:
        run("simulate", "--scenario", "m9")
    assert e.value.code == 2


def test_diag_m3_matches_library(m3_file, tmp_path):
    out, csv = tmp_path / "r.json", tmp_path / "t.csv"
    assert run("diag", m3_file, "--distance", "euclidean", "--map", "nn", "-o", out, "--csv", csv) == 0
    rep = json.loads(out.read_text())
    lib = run_generalized_diagnostic(load_chain_set(m3_file), Euclidean(), NearestNeighbor())
    assert rep["ess"] == lib.ess and rep["psrf"] == lib.psrf
    buf = io.StringIO()
    write_traceplot_csv(lib.traceplot, buf)
    assert csv.read_text() == buf.getvalue()
    assert rep["config"]["run"]["input_sha256"]


def test_diag_is_reproducible(m3_file, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("diag", m3_file, "--burn-in", 100, "--random-start", "--seed", 5, "-o", a)
    run("diag", m3_file, "--burn-in", 100, "--random-start", "--seed", 5, "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["config"]["draws_per_chain"] == 1900


def test_diag_toggles(m3_file, tmp_path):
    out = tmp_path / "r.json"
    run("diag", m3_file, "--no-ess", "--no-psrf", "-o", out)
    rep = json.loads(out.read_text())
    assert rep["ess"] is None and rep["psrf"] is None


def test_traceplot_svg_deterministic(m3_file, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run("traceplot", m3_file, "--svg", a) == 0
    assert run("traceplot", m3_file, "--svg", b) == 0
    text = a.read_text()
    assert text == b.read_text()
    assert text.startswith("<svg") and text.count("<polyline") == 7 and "Iteration" in text


def test_lanfear_reference_file(tmp_path):
    p = tmp_path / "p.ndjson"
    run("simulate", "--scenario", "synthetic-partition", "--trapped", "--seed", 1, "-o", p)
    ref = tmp_path / "ref.json"
    ref.write_text(json.dumps({"type": "partition", "labels": list(range(30))}))
    out = tmp_path / "r.json"
    assert run("diag", p, "--distance", "hamming", "--map", "lanfear", "--reference", ref, "-o", out) == 0
    assert json.loads(out.read_text())["psrf"] >= 1.5
    ref.write_text(json.dumps({"type": "partition", "labels": [0, 1]}))
    assert run("diag", p, "--distance", "hamming", "--map", "lanfear", "--reference", ref) == 2


@pytest.mark.parametrize("extra", [["--burn-in", 2000], ["--distance", "hamming"],
                                   ["--start-index", 10 ** 7], ["--distance", "bogus"],
                                   ["--distance", "table:/nonexistent.csv"]])
def test_usage_errors_exit_2(m3_file, extra, capsys):
    assert run("diag", m3_file, *extra) == 2
    assert "gendiag: error" in capsys.readouterr().err


def test_format_error_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.ndjson"
    p.write_text('{"chain":0,"iter":0,"state":{"type":"real_vector","values":[1]}}\n{oops\n')
    assert run("diag", p) == 2
    assert "line 2" in capsys.readouterr().err


def test_table_distance(tmp_path):
    p = tmp_path / "c.ndjson"
    lines = [{"chain": c, "iter": t, "state": {"type": "real_vector", "values": [v]}}
             for c, row in enumerate([[0, 1, 2, 1], [2, 2, 1, 0]]) for t, v in enumerate(row)]
    p.write_text("".join(json.dumps(x) + "\n" for x in lines))
    table = tmp_path / "d.csv"
    table.write_text("i,j,distance\n0,1,1\n0,2,2\n1,2,1\n")
    out = tmp_path / "r.json"
    assert run("diag", p, "--distance", f"table:{table}", "-o", out) == 0
    rep = json.loads(out.read_text())
    assert rep["config"]["distance"]["distance"] == "table"


def test_mh_distance_needs_target(m3_file, tmp_path):
    bare = tmp_path / "bare.ndjson"
    bare.write_bytes(m3_file.read_bytes())
    assert run("diag", bare, "--distance", "mh") == 2
    short = tmp_path / "short.ndjson"
    assert run("simulate", "--scenario", "m2", "--n-iter", 60, "-o", short) == 0
    out = tmp_path / "r.json"
    assert run("diag", short, "--distance", "mh", "-o", out) == 0
    assert json.loads(out.read_text())["config"]["distance"]["target"] == "m2"


def test_input_not_mutated(m3_file, tmp_path):
    before = m3_file.read_bytes()
    run("diag", m3_file, "-o", tmp_path / "r.json")
    assert m3_file.read_bytes() == before


def test_console_entry_point_exit_code(tmp_path):
    r = subprocess.run([sys.executable, "-m", "gendiag.cli", "diag", str(tmp_path / "missing.ndjson")],
                       capture_output=True, text=True)
    assert r.returncode == 2

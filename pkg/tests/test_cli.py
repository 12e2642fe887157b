import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from twistwold import cli
from twistwold.errors import ParseError
from twistwold.io import canonicalize, dense_document, dumps, lattice_document, number, parse_tuple
from twistwold.zoo import clock_shift_tuple, commuting_shifts, hardy_pair_DU

DATA = Path(__file__).parent / "data"


def run(*argv, capsys=None):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr() if capsys is not None else None
    return code, out


def test_number_formatting():
    assert number(1 / 3) == 0.333333333333
    assert number(3e-12, residual=True) == 0.0
    assert number(3e-12) == 3e-12


def test_dense_round_trip():
    t = clock_shift_tuple(3, (0.5, 0.7))
    tf = parse_tuple(dumps(dense_document(t.ops, t.twist)))
    assert all(np.array_equal(a, b) for a, b in zip(tf.payload.ops, t.ops))
    assert np.array_equal(tf.payload.twist.unit(1, 2), t.twist.unit(1, 2))


def test_lattice_round_trip():
    t = hardy_pair_DU(1j, 1, "phase", 0.4 * np.pi)
    tf = parse_tuple(dumps(lattice_document(t, window=6)))
    assert tf.payload.ops == t.ops and tf.payload.twists == t.twists and tf.window == 6


@pytest.mark.parametrize("text,where", [
    ("{bad", "line 1 column 2"),
    ('{"format_version": 2, "kind": "dense"}', "$.format_version"),
    ('{"format_version": 1, "kind": "dense", "dim": 2, "operators": [[[[1, 0], [0, 0]], [[0, 0]]]]}',
     "$.operators[0][1]"),
    ('{"format_version": 1, "kind": "lattice", "shape": {"d_plus": 1}, "operators": '
     '[{"A": [[1]], "delta": [1], "weight": {"modulus": "x/2"}}]}', "$.operators[0].weight.modulus"),
])
def test_parse_errors_are_positioned(text, where):
    with pytest.raises(ParseError) as info:
        parse_tuple(text)
    assert info.value.position == where


def test_verify_exit_codes(tmp_path, capsys):
    du = tmp_path / "du.json"
    assert run("zoo", "hardy-du", "--theta", "0.4π", "--out", du)[0] == 0
    assert run("verify", du, capsys=capsys)[0] == 0
    br = tmp_path / "br.json"
    run("zoo", "counterexample-br", "--out", br)
    code, out = run("verify", br, capsys=capsys)
    assert code == 1 and "adjoint relation (i, j) = (1, 2)" in out.err
    bad = tmp_path / "bad.json"
    bad.write_text("not json")
    assert run("verify", bad, capsys=capsys)[0] == 2
    assert run("verify", tmp_path / "missing.json", capsys=capsys)[0] == 2


def test_decompose_clock_shift(tmp_path, capsys):
    f = tmp_path / "cs.json"
    run("zoo", "clock-shift", "--d", 4, "--scales", 0.5, 0.7, "--out", f)
    code, out = run("decompose", f, capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0
    assert {s["label"]: s["dim"] for s in rep["slices"]}["{1,2}"] == 4


def test_decompose_single_contraction(tmp_path, capsys):
    f = tmp_path / "one.json"
    T = np.diag([np.exp(0.5j), 0.3, 0.2])
    f.write_text(dumps(dense_document([T])))
    code, out = run("decompose", f, capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and [s["dim"] for s in rep["slices"]] == [1, 2]


def test_decompose_audit_mode(tmp_path, capsys):
    f = tmp_path / "bad.json"
    J = np.eye(2, k=-1)
    f.write_text(dumps(dense_document([J, J])))
    assert run("decompose", f, capsys=capsys)[0] == 1
    assert run("decompose", f, "--audit", capsys=capsys)[0] == 0


def test_decompose_golden(capsys):
    code, out = run("decompose", DATA / "planted_n2_seed3.json", "--canonical", capsys=capsys)
    assert code == 0
    assert out.out == (DATA / "planted_n2_seed3.report.json").read_text()


def test_decompose_deterministic_across_workers(tmp_path):
    f = tmp_path / "p.json"
    run("zoo", "planted", "--n", 3, "--seed", 7, "--out", f)
    run("decompose", f, "--canonical", "--out", tmp_path / "a.json")
    run("decompose", f, "--canonical", "--workers", 3, "--out", tmp_path / "b.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_timestamp_excluded_by_canonicalize(tmp_path, capsys):
    f = tmp_path / "cs.json"
    run("zoo", "clock-shift", "--out", f)
    _, out = run("decompose", f, capsys=capsys)
    rep = json.loads(out.out)
    assert "generated_at" in rep and "generated_at" not in canonicalize(rep)


def test_wold_commuting_shifts(tmp_path, capsys):
    f = tmp_path / "s.json"
    f.write_text(dumps(lattice_document(commuting_shifts(2))))
    code, out = run("wold", f, "--window", 6, capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["counts"]["{1,2}"] == 36 and len(rep["indices"]) == 36


def test_wold_oracle_and_bilateral(tmp_path, capsys):
    f = tmp_path / "du.json"
    run("zoo", "hardy-du", "--theta", "0.4pi", "--out", f)
    code, out = run("wold", f, "--window", 8, "--oracle", capsys=capsys)
    assert code == 0 and json.loads(out.out)["oracle"]["agreement"] == 1.0
    b = tmp_path / "bi.json"
    run("zoo", "hardy-du", "--mode", "bilateral", "--out", b)
    code, out = run("wold", b, "--window", 4, capsys=capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["unitary_directions"] == [3]
    assert rep["counts"]["{1}"] == 0 and rep["counts"]["{1,2}"] == 64


def test_wold_rejects_non_isometric(tmp_path, capsys):
    f = tmp_path / "ar.json"
    run("zoo", "hardy-ar", "--theta", "0.5pi", "--alpha", "0.5", "--out", f)
    assert run("wold", f, capsys=capsys)[0] == 1


def test_zoo_planted_sidecar(tmp_path):
    f = tmp_path / "p.json"
    assert run("zoo", "planted", "--n", 3, "--seed", 7, "--out", f)[0] == 0
    truth = json.loads((tmp_path / "p.json.truth.json").read_text())
    assert len(truth["slices"]) == 8 and truth["seed"] == 7


def test_zoo_deterministic(tmp_path):
    for k in "ab":
        run("zoo", "planted", "--n", 2, "--seed", 4, "--out", tmp_path / f"{k}.json")
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_env_tolerance():
    assert cli.tolerance_from_env({"TWISTWOLD_TOL": "1e-9"}).residual_tol == 1e-9
    t = cli.tolerance_from_env({"TWISTWOLD_TOL": "rank_rtol=1e-11, stabilization_window=4"})
    assert t.rank_rtol == 1e-11 and t.stabilization_window == 4
    with pytest.raises(cli.InputError):
        cli.tolerance_from_env({"TWISTWOLD_TOL": "bogus"})


def test_module_entry_point(tmp_path):
    f = tmp_path / "cs.json"
    run("zoo", "clock-shift", "--out", f)
    env = dict(os.environ, TWISTWOLD_TOL="1e-9")
    p = subprocess.run([sys.executable, "-m", "twistwold", "verify", str(f), "--format", "text"],
                       capture_output=True, text=True, env=env)
    assert p.returncode == 0 and "relations: pass" in p.stdout


def test_round_trip_matches_in_process(tmp_path, capsys):
    from twistwold.multi import decompose
    from twistwold.zoo import PlantedSpec, planted_tuple

    t, _ = planted_tuple(PlantedSpec(2, (1, 2, 1, 1), seed=6))
    f = tmp_path / "p.json"
    f.write_text(dumps(dense_document(t.ops, t.twist)))
    _, out = run("decompose", f, "--canonical", capsys=capsys)
    rep = json.loads(out.out)
    assert [s["dim"] for s in rep["slices"]] == [s.dim for s in decompose(t).slices]

import json
import subprocess
import sys

import pytest

from galois_index import cli


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def small_genus0(tmp_path, classification):
    g0, _ = classification
    from galois_index.congruence import format_records
    f = tmp_path / "g0.txt"
    f.write_text(format_records([r for r in g0 if r.level <= 4], 0))
    return f


def test_inspect_borel_ap(capsys):
    code, out, _ = run(["inspect", "--group", "borel11", "ap", "--prime", "13"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["schema_version"] == cli.SCHEMA_VERSION
    assert rep["rows"][0]["ap"] == 4 and rep["rows"][0]["points"] == 10


def test_inspect_bad_prime(capsys):
    code, _, err = run(["inspect", "--group", "borel11", "ap", "--prime", "11"], capsys)
    assert code == cli.EXIT_DATA and "not admissible" in err
    code, _, err = run(["inspect", "--group", "borel11", "ap"], capsys)
    assert code == cli.EXIT_DATA


def test_inspect_group_file(tmp_path, capsys):
    f = tmp_path / "b5.json"
    f.write_text(json.dumps({"level": 5, "gens": [[[1, 1], [0, 1]], [[2, 0], [0, 1]], [[1, 0], [0, 2]]]}))
    code, out, _ = run(["inspect", "--group", str(f), "cusps"], capsys)
    assert code == 0
    row = json.loads(out)["rows"][0]
    assert row["cusps"]["geometric"] == 2 and row["cusps"]["Q"] == 2


def test_inspect_unknown(capsys):
    assert run(["inspect", "--group", "nonsense", "index"], capsys)[0] == cli.EXIT_DATA
    assert run(["inspect", "--gamma", "999Z9", "index"], capsys)[0] == cli.EXIT_DATA


def test_inspect_level_one(capsys):
    code, out, _ = run(["inspect", "--gamma", "1A0", "candidates"], capsys)
    assert code == 0
    assert json.loads(out)["rows"][0]["n"] == 2


def test_inspect_gamma_index(capsys):
    code, out, _ = run(["inspect", "--gamma", "4A0", "index"], capsys)
    assert code == 0
    rows = json.loads(out)["rows"]
    assert rows and all(r["gamma"] == "4A0" for r in rows)
    assert {r["n"] for r in rows if r["real"]} <= {8, 16, 32}


def test_verify_cp_small(small_genus0, tmp_path, capsys):
    code, out, err = run(["verify-cp", "--genus0", str(small_genus0), "--genus1",
                          str(tmp_path / "missing.txt"), "--allow-partial"], capsys)
    assert code == 0 and "warning" in err
    rep = json.loads(out)
    assert rep["summary"]["failures"] == []
    assert all(r["computed_genus"] == 0 for r in rep["rows"])


def test_verify_cp_errors(small_genus0, tmp_path, capsys):
    code, _, _ = run(["verify-cp", "--genus0", str(small_genus0), "--genus1", str(tmp_path / "missing.txt")],
                     capsys)
    assert code == cli.EXIT_DATA
    # corrupt one generator of 3A0 so that its determinant is no longer 1
    lines = small_genus0.read_text().splitlines()
    k = next(i for i, l in enumerate(lines) if l.startswith("3A0 "))
    f = lines[k].split()
    f[5] = str(int(f[5]) + 1)
    lines[k] = " ".join(f)
    bad = tmp_path / "bad.txt"
    bad.write_text("\n".join(lines) + "\n")
    code, _, err = run(["verify-cp", "--genus0", str(bad), "--allow-partial"], capsys)
    assert code == cli.EXIT_DATA
    assert "3A0" in err


def test_reproduce_subset_reports_mismatch_and_is_deterministic(small_genus0, tmp_path, capsys):
    outs = []
    for jobs, cache in [(1, None), (2, tmp_path / "c"), (1, tmp_path / "c")]:
        out = tmp_path / f"r{jobs}{cache is None}.json"
        args = ["--output", str(out), "reproduce", "--target", "i0", "--genus0", str(small_genus0),
                "--jobs", str(jobs)] + (["--cache", str(cache)] if cache else [])
        code, _, err = run(args, capsys)
        # a partial classification cannot produce the full set
        assert code == cli.EXIT_MISMATCH
        assert "mismatch" in err
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    rep = json.loads(outs[0])
    assert rep["summary"]["mismatch"]["set"]["missing"]
    assert "time" not in json.dumps(rep)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "galois_index", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "reproduce" in res.stdout

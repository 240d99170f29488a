import json
import subprocess
import sys

import pytest

from qexch.cli import REPORT_SCHEMA, main
from qexch.codes import builtin_code, save_code


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_and_show(capsys):
    code, out, _ = run(capsys, "list-codes")
    assert code == 0 and "exch9" in out and "shor9" in out
    code, out, _ = run(capsys, "show", "--code", "exch9")
    assert code == 0 and "{0:1, 6:84}" in out and "{3:84, 9:1}" in out
    code, out, _ = run(capsys, "show", "--code", "shor9")
    assert out.count("4 terms") == 2
    code, _, err = run(capsys, "show", "--code", "missing-file.json")
    assert code == 2 and "error" in err


@pytest.mark.parametrize(
    "ref,errors,expected",
    [("exch9", "pauli,exchange", 0), ("shor9", "z,exchange", 1), ("rep3", "x,exchange", 0)],
)
def test_check_exit_codes(capsys, ref, errors, expected):
    code, out, _ = run(capsys, "check", "--code", ref, "--errors", errors)
    assert code == expected
    if expected == 1:
        assert "E_34" in out or "E_" in out


def test_check_shor_witness_json(capsys):
    code, out, _ = run(capsys, "check", "--code", "shor9", "--errors", "z,exchange", "--format", "json")
    doc = json.loads(out)
    assert code == 1 and doc["schema"] == REPORT_SCHEMA
    pairs = [tuple(w["errors"]) for w in doc["report"]["witnesses"]]
    assert any("E_34" in p and any(e.startswith("Z_") for e in p) for p in pairs)


def test_check_strict_and_float(capsys):
    assert run(capsys, "check", "--code", "exch9", "--errors", "exchange", "--strict")[0] == 1
    assert run(capsys, "check", "--code", "exch9", "--errors", "pauli", "--float", "--tol", "1e-9")[0] == 0


def test_check_usage_errors(capsys, tmp_path):
    assert run(capsys, "check", "--code", "exch9", "--errors", "bogus")[0] == 2
    assert run(capsys, "check", "--code", "exch9", "--errors", "x", "--extended")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "qexch-code v1", "n": 2, "radicand": 1, "words": [], "x": 1}')
    assert run(capsys, "check", "--code", str(bad), "--errors", "x")[0] == 2
    with pytest.raises(SystemExit) as info:
        main(["check", "--code", "exch9"])
    assert info.value.code == 2


def test_code_file_via_cli(capsys, tmp_path):
    path = tmp_path / "e.json"
    save_code(builtin_code("exch9"), path)
    assert run(capsys, "check", "--code", str(path), "--errors", "pauli,exchange")[0] == 0


def test_dmatrix(capsys):
    code, out, _ = run(capsys, "dmatrix", "--code", "exch9", "--errors", "pauli,exchange")
    assert code == 0 and "rank 28" in out and "[37, 9, 9, 9]" in out and "54" in out
    code, out, _ = run(capsys, "dmatrix", "--code", "exch9", "--errors", "pauli,exchange", "--format", "json")
    doc = json.loads(out)
    assert doc["rank"] == 28 and doc["block_sizes"] == [37, 9, 9, 9]
    assert doc["span"]["dimension"] == doc["span"]["gram_rank"]
    code, out, _ = run(capsys, "dmatrix", "--code", "exch9", "--errors", "x", "--format", "csv")
    assert out.splitlines()[0] == "p,q,error_p,error_q,block,value" and ",3/2" in out


def test_gram(capsys):
    code, out, _ = run(capsys, "gram", "--code", "exch9", "--errors", "x", "--format", "csv")
    rows = [line.split(",") for line in out.splitlines()[1:]]
    x_off = {r[6] for r in rows if r[0] == r[1] and r[4].startswith("X") and r[5].startswith("X") and r[4] != r[5]}
    assert x_off == {"3/2"}
    code, out, _ = run(capsys, "gram", "--code", "exch9", "--errors", "z", "--format", "json")
    doc = json.loads(out)
    values = {(tuple(e["index"]), e["value"]["text"]) for e in doc["entries"]}
    assert ((0, 0, 1, 1), "4") in values and ((0, 0, 1, 2), "1") in values


def test_exact_numbers_round_trip(capsys):
    from qexch.field import ExactScalar

    _, out, _ = run(capsys, "gram", "--code", "exch9", "--errors", "x", "--format", "json")
    for entry in json.loads(out)["entries"]:
        value = entry["value"]
        parsed = ExactScalar.parse(value["text"], value["radicand"])
        assert parsed == ExactScalar.from_dict({k: value[k] for k in ("a", "b", "c", "d", "radicand")})


def test_demo(capsys):
    code, out, _ = run(capsys, "demo", "shor-exchange")
    assert code == 0
    for ket in ("|001011111>", "|110100111>", "|110100000>", "|001011000>"):
        assert ket in out
    assert out.strip().splitlines()[-1] == "degenerate condition: FAIL"


def test_recover_test(capsys):
    code, out, _ = run(capsys, "recover-test", "--code", "exch9", "--errors", "pauli,exchange",
                       "--trials", "20", "--seed", "7", "--tol", "1e-9")
    assert code == 0 and "28 syndrome" in out and "0 outside" in out
    assert run(capsys, "recover-test", "--code", "shor9", "--errors", "z,exchange")[0] == 1


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--model", "all_two_bit")
    assert code == 0 and "n >= 10" in out
    _, out, _ = run(capsys, "bounds", "--format", "json")
    doc = json.loads(out)
    assert [r["n"] for r in doc["results"]] == [5, 7, 10, 9]
    assert doc["repetition"]["printed"] == 10


def test_search(capsys):
    code, out, _ = run(capsys, "search", "--n", "9", "--errors", "pauli,exchange", "--patterns", "0,6/3,9",
                       "--restarts", "5", "--seed", "1")
    assert code == 0 and "candidate code found" in out
    code, out, _ = run(capsys, "search", "--n", "5", "--errors", "pauli,exchange", "--patterns", "0,1;0,2",
                       "--restarts", "3", "--seed", "1")
    assert code == 1 and "not a proof" in out
    assert run(capsys, "search", "--n", "5", "--errors", "pauli", "--patterns", "0,9")[0] == 2


def test_output_is_deterministic():
    cmd = [sys.executable, "-m", "qexch.cli", "dmatrix", "--code", "exch9", "--errors", "pauli,exchange", "--format", "json"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second and first

import json

import pytest

from selmerstab.cli import main, read_curve_list


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_density_json(capsys):
    code, out = run(capsys, "density", "--curve", "0,0,0,1,1", "--ell", "5", "--bound", "5000")
    d = json.loads(out)
    assert code == 0 and d["theoretical"] == "19/96" and d["sigma"] == [2, 5, 31]


def test_field_disc(capsys):
    code, out = run(capsys, "field", "disc", "--desc", "ell=5; gen: 11^1")
    assert json.loads(out)["disc"] == 14641


def test_field_split_and_scholz(capsys):
    _, out = run(capsys, "field", "split", "--desc", "ell=5; gen: 11^1", "--primes", "23,2,11")
    d = json.loads(out)
    assert d == {"23": {"splits": True}, "2": {"splits": False}, "11": {"inertial_degree": 1}}
    _, out = run(capsys, "field", "scholz", "--desc", "ell=5; gen: 11^1", "--N", "2")
    assert json.loads(out)["holds"] is False


def test_selmer_wiles(capsys):
    code, out = run(capsys, "selmer", "wiles", "--S", "11,41,61", "--Z", "2,5,31")
    assert code == 0 and json.loads(out)["wiles"] == 0
    code, out = run(capsys, "selmer", "wiles", "--S", "11,31,41", "--Z", "5,2,31")
    assert code == 2 and json.loads(out)["error"] == "inconsistent-spec"


def test_selmer_find_s0_and_wt(capsys):
    _, out = run(capsys, "selmer", "find-s0", "--curve", "0,0,0,1,1", "--bound", "100000")
    d = json.loads(out)
    assert d["S0"] == [11, 71, 131] and d["complete"]
    _, out = run(capsys, "selmer", "enumerate-wt", "--S", "11,71,131", "--Z", "2,5,31", "--T", "151")
    assert json.loads(out)["count"] == 4


def test_selmer_certify_records_hypotheses(capsys):
    _, out = run(capsys, "selmer", "certify", "--curve", "0,0,0,1,1", "--desc", "ell=5; gen: 11^1",
                 "--assert-selmer-zero")
    d = json.loads(out)
    assert d["hypotheses"]["selmer_zero_over_Q"] is True and d["verdict"] == "rejected"


def test_count_commands(capsys):
    _, out = run(capsys, "count", "partial-sum", "--pool", "11,31", "--X", "350")
    assert json.loads(out) == [{"S": 25, "X": 350}]
    _, out = run(capsys, "count", "lower", "--pool", "11,31", "--X", str(341**4), "--csv")
    assert out.splitlines()[1] == f"{341**4},25,25"
    _, out = run(capsys, "count", "malle", "--ell", "5", "--n", "2")
    assert json.loads(out)["a"] == "1/20"


def test_group_commands(capsys):
    _, out = run(capsys, "group", "h2", "--name", "C2^2", "--ell", "2")
    assert json.loads(out)["h2"] == 3
    _, out = run(capsys, "group", "extension-class", "--name", "Heis5", "--ell", "5")
    assert json.loads(out)["split"] is False
    _, out = run(capsys, "group", "malle-invariant", "--name", "C125", "--ell", "5")
    assert json.loads(out)["a"] == "1/100"


def test_find_prime(capsys):
    _, out = run(capsys, "find-prime", "--curve", "0,0,0,1,1", "--in-te", "--count", "3", "--bound", "1000")
    assert json.loads(out)["primes"] == [11, 71, 131]


def test_errors_are_structured(capsys):
    code, out = run(capsys, "nope")
    assert code == 2 and json.loads(out)["error"] == "usage"
    code, out = run(capsys, "density", "--curve", "0,0,0,0,0")
    assert code == 2 and json.loads(out)["error"] == "invalid-input"
    code, out = run(capsys, "density", "--curve", "1,1", "--ell", "3", "--bound", "200")
    assert code == 2
    code, out = run(capsys, "density", "--curve", "1,1", "--ell", "3", "--bound", "200", "--allow-small-ell",
                    "--assert-surjective")
    assert code == 0


def test_deterministic_output(capsys, tmp_path):
    args = ["sieve", "--curve", "0,0,0,1,1", "--bound", "2000", "--cache-dir", str(tmp_path)]
    _, a = run(capsys, *args)
    _, b = run(capsys, *args)
    assert a == b and a.startswith("p,member")


def test_curve_list(capsys, tmp_path):
    path = tmp_path / "curves.csv"
    path.write_text("label,a1,a2,a3,a4,a6\n37a1,0,0,1,-1,0\n11a1,0,-1,1,-10,-20\n")
    assert [label for label, _ in read_curve_list(path)] == ["37a1", "11a1"]
    _, out = run(capsys, "ap", "--curve-list", str(path), "--bound", "7")
    assert out.splitlines()[0] == "curve,p,ap" and "37a1,2,-2" in out

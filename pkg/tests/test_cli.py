from __future__ import annotations

import json

import pytest

from forcing_lab.cli import SELFTEST, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, _ = run(capsys, *argv)
    return code, json.loads(out)


class TestGeneric:
    def test_rowsplit_example(self, capsys):
        code, rep = report(capsys, "generic", "--notion", "cohen", "--dense", "rowsplit:0,1", "--seed", "7")
        assert code == 0
        assert set(rep) >= {"poset", "denses", "chain", "met", "verdicts"}
        assert rep["verdicts"]["distinct:0,1"] == "PASS"
        assert "rowsplit:0,1" in rep["met"]

    def test_replay(self, capsys):
        argv = ("generic", "--notion", "cohen", "--dense", "rowsplit:0,1", "--seed", "7")
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

    def test_empty_dense_list(self, capsys):
        code, rep = report(capsys, "generic", "--notion", "interval")
        assert code == 0 and len(rep["chain"]) == 1

    def test_malformed_dense(self, capsys):
        code, out, err = run(capsys, "generic", "--notion", "cohen", "--dense", "rowsplit:zz")
        assert code == 2 and out == ""
        e = json.loads(err)
        assert e["error"] == "CONFIG_PARSE" and e["details"]["argument"] == "--dense"

    def test_finite_poset(self, capsys, tmp_path):
        f = tmp_path / "p.txt"
        f.write_text("a <= 1\nb <= 1\n")
        code, rep = report(capsys, "generic", "--poset", str(f), "--dense", "dp:a")
        assert code == 0

    def test_rationals_as_pairs(self, capsys):
        code, rep = report(capsys, "generic", "--notion", "interval", "--random", "5", "--seed", "1")
        cond = rep["chain"][-1]
        assert code == 0
        assert all(isinstance(v, list) and len(v) == 2 and all(isinstance(n, int) for n in v) for v in cond)


class TestErrors:
    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "limsup-cover", "--covers", str(tmp_path / "nope.json"))
        assert code == 2 and json.loads(err)["error"] == "FILE_NOT_FOUND"

    def test_bad_caps(self, capsys):
        code, _, err = run(capsys, "measure", "--caps", "count=-3")
        assert code == 2 and json.loads(err)["error"] == "CONFIG_PARSE"
        code, _, err = run(capsys, "measure", "--caps", "bogus=1")
        assert code == 2

    def test_bad_json(self, capsys):
        code, _, err = run(capsys, "delta", "--family", "[[1,2],")
        assert code == 2 and json.loads(err)["error"] == "CONFIG_PARSE"

    def test_undecided_prikry(self, capsys):
        code, _, err = run(capsys, "prikry", "decide", "--phi", "C(0) in evens")
        assert code == 2 and json.loads(err)["error"] == "ORACLE_UNDECIDED"


class TestVerdicts:
    def test_failing_antichain(self, capsys):
        code, rep = report(capsys, "antichain", "--notion", "cohen", "--conds", "[[[0,1,0]],[[0,2,1]]]")
        assert code == 1 and "FAIL" in rep["verdicts"].values()

    def test_antichain_pass(self, capsys):
        code, _ = report(capsys, "antichain", "--notion", "cohen", "--conds", "[[[0,1,0]],[[0,1,1]]]")
        assert code == 0

    def test_mathias_fail(self, capsys):
        code, rep = report(capsys, "prikry", "mathias", "--C", "1,3,5,7", "--set", "evens")
        assert code == 1

    def test_out_file(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        code, stdout, _ = run(capsys, "godel", "val", "--formula", "(in v0 v1)", "--x", "{{},{{}}}", "--out", str(out))
        assert code == 0 and stdout == ""
        rep = json.loads(out.read_text())
        assert rep["verdicts"] == {"val_equals_direct": "PASS"}


@pytest.mark.parametrize("argv", SELFTEST, ids=lambda a: " ".join(a[:2]))
def test_selftest_configs_pass(capsys, argv):
    code, rep = report(capsys, *argv)
    assert code == 0, rep["verdicts"]


def test_selftest_command(capsys):
    code, rep = report(capsys, "selftest")
    assert code == 0 and len(rep["verdicts"]) == len(SELFTEST)

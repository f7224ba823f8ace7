from __future__ import annotations

import subprocess
import sys

import pytest

from simplicity.cli import main

FLIP = "(comp (pair iden unit) (case (injr unit) (injl unit)))\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def flip(tmp_path):
    p = tmp_path / "flip.simp"
    p.write_text(FLIP)
    return p


def test_check(capsys, flip):
    assert run(capsys, "check", flip) == (0, "2 |- 2\n", "")


def test_eval(capsys, flip):
    assert run(capsys, "eval", flip, "--input", "(L u)")[:2] == (0, "(R u)\n")


def test_eval_bottom(capsys, tmp_path):
    p = tmp_path / "f.simp"
    p.write_text("(comp unit fail)")
    assert run(capsys, "eval", p)[:2] == (1, "bottom\n")
    assert run(capsys, "run", p)[:2] == (1, "bottom\n")


def test_run_stats_and_trace(capsys, flip):
    code, out, _ = run(capsys, "run", flip, "--input", "(R u)", "--stats")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "(L u)"
    stats = dict(line.split("=") for line in lines[1:])
    assert stats == {"instructions": "11", "cellsCopied": "1", "peakCells": "3", "peakFrames": "3", "jetCalls": "0"}
    code, out, _ = run(capsys, "run", flip, "--input", "(R u)", "--trace", "--tco")
    trace = out.splitlines()[:-1]
    assert code == 0 and trace
    for i, line in enumerate(trace, 1):
        assert line.startswith(f"{i} ") and " cells=" in line and " frames=" in line
    assert out.splitlines()[-1] == "(L u)"


def test_analyze(capsys, flip):
    code, out, _ = run(capsys, "analyze", flip)
    kv = dict(line.split("=", 1) for line in out.splitlines())
    assert code == 0
    assert kv["cb"] == "3"
    assert "cb_tco" in kv and "merkle_root" in kv
    code, human, _ = run(capsys, "analyze", flip, "--human")
    assert code == 0 and "=" not in human


def test_merkle_is_deterministic(capsys, flip):
    a = run(capsys, "merkle", flip)
    b = run(capsys, "merkle", flip)
    assert a == b and a[0] == 0 and len(a[1].strip()) == 64


def test_gen_and_reparse(capsys, tmp_path):
    for what in [["flip"], ["adder"], ["fulladder", 4], ["multiplier", 2], ["eq", 8]]:
        out = tmp_path / "g.simp"
        assert run(capsys, "gen", *what, "-o", out)[0] == 0
        assert run(capsys, "check", out)[0] == 0
    code, text, _ = run(capsys, "gen", "flip")
    assert code == 0 and text.strip().startswith("(comp")


def test_gen_usage_errors(capsys):
    assert run(capsys, "gen", "eq")[0] == 2
    assert run(capsys, "gen", "flip", 8)[0] == 2
    assert run(capsys, "gen", "fulladder", 3)[0] == 2


def test_usage_errors(capsys, tmp_path):
    bad = tmp_path / "bad.simp"
    bad.write_text("(comp iden")
    code, _, err = run(capsys, "check", bad)
    assert code == 2 and "1:11" in err
    assert run(capsys, "check", tmp_path / "missing.simp")[0] == 2
    clash = tmp_path / "clash.simp"
    clash.write_text("(comp unit (take iden))")
    assert run(capsys, "check", clash)[0] == 2
    trailing = tmp_path / "trailing.simp"
    trailing.write_text("iden iden")
    assert run(capsys, "check", trailing)[0] == 2
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 2


def test_wrong_input_type(capsys, flip):
    assert run(capsys, "eval", flip, "--input", "u")[0] == 2


def test_witness_flag(capsys, tmp_path):
    prog = tmp_path / "w.simp"
    prog.write_text("(comp (witness _) (comp (pair iden unit) (case (injr unit) (injl unit))))")
    wf = tmp_path / "w.txt"
    wf.write_text("(L u)\n")
    assert run(capsys, "eval", prog, "--witness", wf)[:2] == (0, "(R u)\n")
    wf.write_text("(L u) (L u)\n")
    assert run(capsys, "eval", prog, "--witness", wf)[0] == 2
    assert run(capsys, "eval", prog)[0] == 2


def test_prune(capsys, tmp_path, flip):
    out = tmp_path / "p.simp"
    assert run(capsys, "prune", flip, "--input", "(L u)", "-o", out)[0] == 0
    assert "assertl" in out.read_text()
    assert run(capsys, "merkle", out)[1] == run(capsys, "merkle", flip)[1]
    assert run(capsys, "eval", out, "--input", "(L u)")[:2] == (0, "(R u)\n")
    assert run(capsys, "eval", out, "--input", "(R u)")[:2] == (1, "bottom\n")


def test_jets_list(capsys):
    code, out, _ = run(capsys, "jets", "list")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 317
    assert lines == sorted(lines, key=lambda s: s.split()[1])
    assert any(" sha256_compress : " in line for line in lines)


def test_basicverify_flow(capsys, tmp_path):
    tx = tmp_path / "tx.hex"
    tx.write_text("0102030405\n")
    prog, wit = tmp_path / "bv.simp", tmp_path / "bv.wit"
    assert run(capsys, "gen", "basicverify", "--tx", tx, "-o", prog, "--witness-out", wit)[0] == 0
    root = run(capsys, "merkle", prog)[1]
    assert run(capsys, "merkle", prog, "--witness", wit)[1] == root
    assert run(capsys, "eval", prog, "--witness", wit, "--tx", tx)[:2] == (0, "u\n")
    other = tmp_path / "other.hex"
    other.write_text("ff\n")
    assert run(capsys, "eval", prog, "--witness", wit, "--tx", other)[0] == 1


def test_module_entry_point(tmp_path):
    p = tmp_path / "flip.simp"
    p.write_text(FLIP)
    res = subprocess.run(
        [sys.executable, "-m", "simplicity", "eval", str(p), "--input", "(R u)"],
        capture_output=True,
        text=True,
    )
    assert res.returncode == 0 and res.stdout == "(L u)\n"

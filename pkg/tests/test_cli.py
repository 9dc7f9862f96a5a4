import csv
import subprocess
import sys

import pytest

from conftest import PROGRAMS, ROOT
from vauforge.cli import main
from vauforge.interp import Counters


def cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_run_interp_add(capsys):
    assert cli(capsys, "run", "--mode", "interp", PROGRAMS / "add.krk")[:2] == (0, "3\n")


@pytest.mark.parametrize("mode", ["interp", "pe-interp", "compile"])
def test_fib_every_mode(capsys, tmp_path, mode):
    out = tmp_path / "c.csv"
    code, text, _ = cli(capsys, "run", "--mode", mode, ROOT / "bench" / "fib.krk",
                        "--arg", 10, "--counters", out)
    assert (code, text) == (0, "55\n")
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == Counters.header().split(",")
    assert all(int(v) >= 0 for k, v in rows[0].items() if k != "name")
    if mode == "compile":
        assert rows[0]["evals"] == "0"
    else:
        assert rows[0]["comp_dyn_w1_calls"] == "1"


def test_dump_residual_golden(capsys, tmp_path):
    out = tmp_path / "r.txt"
    code, text, _ = cli(capsys, "run", "--mode", "pe-interp", ROOT / "bench" / "double.krk",
                        "--dump-residual", out)
    assert code == 0 and text == "<combiner/0>\n"
    assert out.read_text() == "(vau#1/0 (x) (+/0 (+/0 3 x@1) (+/0 3 x@1)))\n"


def test_emit_bytecode_and_alloc_stats(capsys, tmp_path):
    bc, al = tmp_path / "b.txt", tmp_path / "a.csv"
    code, text, _ = cli(capsys, "run", "--mode", "compile", PROGRAMS / "sum.krk",
                        "--arg", 1000, "--emit-bytecode", bc, "--alloc-stats", al,
                        "--engine", "bytecode")
    assert (code, text) == (0, "500500\n")
    assert bc.read_text().startswith("; entry")
    row = list(csv.DictReader(al.open()))[0]
    assert int(row["max_stack_depth"]) < 100 and row["closures_allocated"] == "0"


def test_time_and_pe_stats(capsys):
    code, _, err = cli(capsys, "run", "--mode", "compile", PROGRAMS / "add.krk", "--time", "--pe-stats")
    assert code == 0 and "time " in err and "PEStats" in err


def test_prelude_from_environment(capsys, tmp_path, monkeypatch):
    tiny = tmp_path / "p.krk"
    tiny.write_text("(seven 7)\n")
    prog = tmp_path / "s.krk"
    prog.write_text("(+ seven 1)")
    monkeypatch.setenv("KRAKEN_PRELUDE", str(tiny))
    for mode in ("interp", "compile"):
        assert cli(capsys, "run", "--mode", mode, prog)[:2] == (0, "8\n")
    # the bundled prelude is gone, so let is unbound
    assert cli(capsys, "run", PROGRAMS / "double.krk")[0] == 1
    tiny.write_text("(define nothing 1)\n")
    code, _, err = cli(capsys, "run", prog)
    assert code == 1 and "prelude" in err


@pytest.mark.parametrize("src, code", [("(+ 1 (quote a))", 1), ("(+ 1", 1), ("undefined-name", 1)])
def test_program_errors_exit_1(capsys, tmp_path, src, code):
    p = tmp_path / "e.krk"
    p.write_text(src)
    c, out, err = cli(capsys, "run", p)
    assert c == code and out == "" and err.startswith("error:")


def test_step_budget_exit_1(capsys):
    assert cli(capsys, "run", "--mode", "compile", PROGRAMS / "fact.krk", "--step-budget", 10)[0] == 1


@pytest.mark.parametrize("argv", [
    ["run"], ["run", "x.krk", "--mode", "jit"], ["frobnicate"],
    ["run", "definitely-missing.krk"], ["bench", "--sizes", "fib"], ["bench", "--suite", "nope"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert cli(capsys, *argv)[0] == 2


def test_bench_small(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, text, _ = cli(capsys, "bench", "--suite", "fib", "nqueens", "--sizes", "fib=8,nqueens=4",
                        "--modes", "interp", "compile", "--repeat", 1, "--out", out, "--speedup")
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert {(r["name"], r["mode"]) for r in rows} == {
        ("fib", "interp"), ("fib", "compile"), ("nqueens", "interp"), ("nqueens", "compile")}
    assert {r["value"] for r in rows if r["name"] == "fib"} == {"21"}
    assert text.startswith("benchmark,interp_size,compile_size,ratio")


def test_bench_is_deterministic_except_time(capsys):
    rows = []
    for _ in range(2):
        code, text, _ = cli(capsys, "bench", "--suite", "cfold", "--sizes", "cfold=3",
                            "--modes", "pe-interp", "compile", "--repeat", 1)
        assert code == 0
        rows.append([{k: v for k, v in r.items() if k != "wall_ms"} for r in csv.DictReader(text.splitlines())])
    assert rows[0] == rows[1]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "vauforge", "run", str(PROGRAMS / "add.krk")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout == "3\n"

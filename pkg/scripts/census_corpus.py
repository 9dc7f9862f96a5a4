#!/usr/bin/env python3
"""Specialize each program given (default: the macro corpus) and print a
census of what is left in its residual, plus compiled counter values."""
import pathlib
import sys

from vauforge import backend
from vauforge.analysis import census
from vauforge.interp import Counters
from vauforge.peval import PartialEvaluator
from vauforge.program import load_pe_prelude, pe_program
from vauforge.reader import parse

ROOT = pathlib.Path(__file__).resolve().parent.parent


def main(paths):
    paths = paths or sorted((ROOT / "programs" / "macros").glob("*.krk"))
    print("program,calls,operative_calls,vevals,evals,dynamic_heads,comp_evals,comp_dyn_w0")
    for path in map(pathlib.Path, paths):
        env, first = load_pe_prelude()
        pe = PartialEvaluator(first_id=first)
        res = pe_program(parse(path.read_text(), str(path)), pe, env)
        c = census(res[-1], env)
        counters = Counters()
        backend.vm_run(backend.compile_program(res, pe, env), counters, 4)
        print("%s,%d,%d,%d,%d,%d,%d,%d" % (path.stem, c.calls, c.operative_calls, c.vevals, c.evals,
                                           c.dynamic_heads, counters.evals, counters.comp_dyn_w0_calls))


if __name__ == "__main__":
    main(sys.argv[1:])

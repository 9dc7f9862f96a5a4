"""vauforge: a fexpr Lisp (vau calculus) with an online partial evaluator
that removes macro-like operatives, and a closure-compiling backend."""
from .backend import alloc_stats, compile_program, disassemble, vm_run
from .interp import Counters, EvalError, Interpreter
from .peval import PartialEvaluator
from .program import load_pe_prelude, load_prelude, pe_program, run_program, run_residual
from .reader import ParseError, parse, print_term

__version__ = "0.1.0"

__all__ = [
    "alloc_stats", "compile_program", "disassemble", "vm_run",
    "Counters", "EvalError", "Interpreter", "PartialEvaluator",
    "load_pe_prelude", "load_prelude", "pe_program", "run_program", "run_residual",
    "ParseError", "parse", "print_term",
]

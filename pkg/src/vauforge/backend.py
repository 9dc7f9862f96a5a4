"""Residual backend entry points: compile, run, allocation statistics."""
from .bytecode import VM, Emitter, disassemble
from .compiler import compile_residual
from .hostgen import HostEngine
from .interp import Counters, EvalError
from .program import run_deep
from .runtime import Runtime

ENGINES = ("host", "bytecode")


def compile_program(residuals, pe, prelude, with_arg=True, **kw):
    """Closure-convert PE output and emit its bytecode."""
    prog = compile_residual(residuals, prelude, pe, with_arg, **kw)
    Emitter(prog).emit_all()
    prog.prelude = prelude
    return prog


def load(program, counters=None, engine="host", instrument=False):
    """A Runtime with an entry for every live function."""
    counters = counters if counters is not None else Counters()
    rt = Runtime(program, counters, getattr(program, "prelude", None))
    vm = VM(program, rt, instrument)
    if engine == "bytecode":
        vm.install()
    elif engine == "host":
        HostEngine(program, rt, instrument, fallback=vm.entry).build()
    else:
        raise ValueError("unknown engine %r" % engine)
    return rt


def _enter(rt, program, arg):
    args = (arg,) if program.arg_names else ()
    try:
        return rt.entries[program.entry.index](None, *args)
    except TypeError as e:
        # host arithmetic on a non-integer surfaces as TypeError
        raise EvalError("type", str(e))


def vm_run(program, counters=None, arg=None, engine="host", instrument=False):
    """Execute a compiled program; returns its value.  The entry is a static
    call into the main function and is not counted as dynamic."""
    rt = load(program, counters, engine, instrument)
    if program.arg_names and arg is None:
        arg = 0
    return run_deep(_enter, rt, program, arg)


def alloc_stats(program, arg=None, engine="host", counters=None):
    """Run instrumented; returns (value, AllocStats)."""
    rt = load(program, counters, engine, instrument=True)
    if program.arg_names and arg is None:
        arg = 0
    value = run_deep(_enter, rt, program, arg)
    rt.alloc.max_stack_depth = rt.depth[1]
    return value, rt.alloc


__all__ = ["compile_program", "vm_run", "alloc_stats", "disassemble", "load", "ENGINES"]

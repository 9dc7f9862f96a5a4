"""Program pipeline: parse, then interpret, or specialize and interpret the
residual, or specialize, compile and execute."""
import time
from dataclasses import dataclass, field

from . import backend
from .interp import Counters
from .peval import DEFAULT_STEP_BUDGET, PartialEvaluator
from .program import load_pe_prelude, load_prelude, pe_program, run_deep, run_program, run_residual
from .reader import parse, print_term

MODES = ("interp", "pe-interp", "compile")


@dataclass
class RunConfig:
    mode: str = "interp"
    input: str = None
    source: str = None          # program text instead of a file
    prelude: str = None
    counters: str = None
    dump_residual: str = None
    emit_bytecode: str = None
    alloc_stats: str = None
    arg: int = None
    time: bool = False
    step_budget: int = DEFAULT_STEP_BUDGET
    engine: str = "host"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError("unknown mode %r" % self.mode)
        if (self.input is None) == (self.source is None):
            raise ValueError("exactly one of input and source is required")
        if self.engine not in backend.ENGINES:
            raise ValueError("unknown engine %r" % self.engine)


@dataclass
class RunResult:
    value: object
    counters: Counters
    timings: dict = field(default_factory=dict)   # stage -> seconds
    residuals: list = None
    program: object = None
    alloc: object = None
    pe_stats: object = None

    def printed(self):
        return print_term(self.value)


def _read(cfg):
    if cfg.source is not None:
        return cfg.source, "<input>"
    with open(cfg.input, encoding="utf-8") as f:
        return f.read(), cfg.input


def residual_text(residuals):
    return "\n".join(print_term(r, show_marks=True, canonical_ids=True)
                     for r in residuals) + "\n"


def run(cfg):
    """Run ``cfg``'s program; writes the requested artifacts."""
    timings = {}
    text, name = _read(cfg)
    t0 = time.perf_counter()
    forms = parse(text, name)
    timings["parse"] = time.perf_counter() - t0
    counters = Counters()

    if cfg.mode == "interp":
        env = load_prelude(cfg.prelude)
        t0 = time.perf_counter()
        value = run_deep(run_program, forms, counters, env, cfg.arg)
        timings["run"] = time.perf_counter() - t0
        res = RunResult(value, counters, timings)
    else:
        env, first = load_pe_prelude(cfg.prelude)
        pe = PartialEvaluator(cfg.step_budget, first_id=first)
        t0 = time.perf_counter()
        residuals = pe_program(forms, pe, env, dynamic_arg=cfg.arg is not None)
        timings["pe"] = time.perf_counter() - t0
        if cfg.dump_residual:
            with open(cfg.dump_residual, "w", encoding="utf-8") as f:
                f.write(residual_text(residuals))
        if cfg.mode == "pe-interp":
            t0 = time.perf_counter()
            value = run_residual(residuals, env, counters, cfg.arg)
            timings["run"] = time.perf_counter() - t0
            res = RunResult(value, counters, timings, residuals)
        else:
            t0 = time.perf_counter()
            prog = backend.compile_program(residuals, pe, env, with_arg=cfg.arg is not None)
            timings["compile"] = time.perf_counter() - t0
            if cfg.emit_bytecode:
                with open(cfg.emit_bytecode, "w", encoding="utf-8") as f:
                    f.write(backend.disassemble(prog))
            alloc = None
            t0 = time.perf_counter()
            if cfg.alloc_stats:
                value, alloc = backend.alloc_stats(prog, cfg.arg, cfg.engine, counters)
            else:
                value = backend.vm_run(prog, counters, cfg.arg, cfg.engine)
            timings["run"] = time.perf_counter() - t0
            res = RunResult(value, counters, timings, residuals, prog, alloc)
        res.pe_stats = pe.stats

    label = cfg.input or "<input>"
    if cfg.counters:
        with open(cfg.counters, "w", encoding="utf-8") as f:
            f.write(Counters.header() + "\n" + counters.row(label) + "\n")
    if cfg.alloc_stats and res.alloc is not None:
        with open(cfg.alloc_stats, "w", encoding="utf-8") as f:
            f.write(res.alloc.header() + "\n" + res.alloc.row(label) + "\n")
    return res

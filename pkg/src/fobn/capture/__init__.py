"""Nondeterministic machines and their compilation into acceptance queries."""

from importlib import resources

from .compile import (CaptureLayout, CompiledCapture, build_order_formula, compile_machine,
                      per_order_ratios, structured_conditional, witness_structure)
from .machine import (NTMachine, PathCount, Transition, count_paths, majority_decision,
                      normalize_machine, parse_machine, simulate)
from .verify import CaptureReport, verify_capture

__all__ = ["CaptureLayout", "CompiledCapture", "CaptureReport", "NTMachine", "PathCount",
           "Transition", "build_order_formula", "bundled_machine", "bundled_machines",
           "compile_machine", "count_paths", "majority_decision", "normalize_machine",
           "parse_machine", "per_order_ratios", "simulate", "structured_conditional",
           "verify_capture", "witness_structure"]


def bundled_machines() -> list[str]:
    root = resources.files(__package__) / "machines"
    return sorted(p.name[:-3] for p in root.iterdir() if p.name.endswith(".tm"))


def bundled_machine(name: str) -> NTMachine:
    """Load one of the example machines shipped with the package."""
    path = resources.files(__package__) / "machines" / f"{name}.tm"
    if not path.is_file():
        raise KeyError(f"no bundled machine {name!r}; have {bundled_machines()}")
    return parse_machine(path.read_text())

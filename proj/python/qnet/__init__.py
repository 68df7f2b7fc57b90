"""Qualitative change propagation (Python bindings to the C++ core)."""

from ._qnet import (
    ContainmentReport,
    Network,
    NetworkError,
    EvidenceError,
    Sign,
    check_containment,
    explain,
    load_network,
    parse_diagnostics,
    propagate,
    qadd,
    qmul,
    run_command,
)

__all__ = [
    "ContainmentReport",
    "Network",
    "NetworkError",
    "EvidenceError",
    "Sign",
    "check_containment",
    "explain",
    "load_network",
    "parse_diagnostics",
    "propagate",
    "qadd",
    "qmul",
    "run_command",
]

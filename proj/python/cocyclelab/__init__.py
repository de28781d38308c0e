"""Numerical lab for linear cocycles over hyperbolic bases."""

import json

from ._core import (
    ConfigError,
    Group,
    NumericalError,
    RefusalError,
    __version__,
    commands,
    common_invariant_measure,
    constant_exponents,
    contains,
    lie_basis,
    make_group,
    run,
    selftest,
)


def run_summary(command, config, **kwargs):
    """Like run(), but returns (exit_code, parsed JSON summary or None)."""
    r = run(command, config, **kwargs)
    return r["exit_code"], (json.loads(r["summary_json"]) if r["summary_json"] else None)


__all__ = [
    "ConfigError",
    "Group",
    "NumericalError",
    "RefusalError",
    "__version__",
    "commands",
    "common_invariant_measure",
    "constant_exponents",
    "contains",
    "lie_basis",
    "make_group",
    "run",
    "run_summary",
    "selftest",
]

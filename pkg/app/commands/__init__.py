"""CLI subcommands, one module each."""

from . import compare_heat, fit, gcc, plot, simulate, sweep, verify

SUBCOMMANDS = [simulate, sweep, gcc, fit, compare_heat, verify, plot]

__all__ = ["SUBCOMMANDS"]

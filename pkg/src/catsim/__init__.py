"""Numerical toolkit for non-Hermitian Hamiltonians, their Q metric, truncated
Fock realizations and future-included expectation values."""

from .errors import *  # noqa: F401,F403
from .scenarios import SCENARIOS, list_scenarios, resolve_config, run_scenario

__version__ = "0.1.0"

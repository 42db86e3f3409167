"""Deficiency One realizations of mass action systems."""

from crn_dot.analysis import DeficiencyReport, deficiency_report
from crn_dot.crn import MassActionSystem, Network, canonical_realization, mass_action_rhs
from crn_dot.parsing import parse_network, parse_ode

__version__ = "0.1.0"
__all__ = [
    "DeficiencyReport",
    "MassActionSystem",
    "Network",
    "canonical_realization",
    "deficiency_report",
    "mass_action_rhs",
    "parse_network",
    "parse_ode",
]

"""Performance model of an Autler-Townes-splitting spin-wave memory in an ultracold or condensed atomic cloud."""

from .errors import ConfigError, ConvergenceError, DomainError
from .phys import CONST, AtomSpecies, Line, rb87

__version__ = "0.1.0"
__all__ = ["CONST", "AtomSpecies", "Line", "rb87", "ConfigError", "ConvergenceError", "DomainError"]

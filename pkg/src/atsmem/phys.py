"""Physical constants and atomic-species parameters.

Unit rule: SI everywhere. Linewidths and splittings are angular frequencies
(rad/s). The only ordinary-frequency quantity in the package is the probe
bandwidth ``B`` (Hz), so ``F = 2*pi*B / Gamma_eg`` is dimensionless.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Mapping

from scipy import constants as _sc

from .errors import ConfigError


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = _sc.h
    hbar: float = _sc.hbar
    k_B: float = _sc.k
    mu_B: float = _sc.physical_constants["Bohr magneton"][0]


CONST = PhysicalConstants()
BOHR_RADIUS = _sc.physical_constants["Bohr radius"][0]
ATOMIC_MASS = _sc.atomic_mass


@dataclass(frozen=True)
class Line:
    """One optical transition: wavelength (m), linewidth (rad/s), strengths."""

    wavelength: float
    Gamma: float
    alpha_sq: float
    degeneracy: float

    @property
    def cross_section(self) -> float:
        """Resonant absorption cross-section 3 lambda^2/(2 pi) * alpha^2 * degeneracy."""
        return 3 * self.wavelength**2 / (2 * math.pi) * self.alpha_sq * self.degeneracy


@dataclass(frozen=True)
class AtomSpecies:
    name: str
    mass: float
    lines: Mapping[str, Line]
    Delta_gs: float
    zeta: float
    a_sc: float
    g_F: Mapping[int, float] = field(default_factory=dict)
    im_a_sc: float | None = None
    memory_line: str = "D2"

    def __post_init__(self):
        if self.memory_line not in self.lines:
            raise ConfigError(f"memory line {self.memory_line!r} not among {sorted(self.lines)}",
                              "species.memory_line")

    def line(self, name: str | None = None) -> Line:
        name = self.memory_line if name is None else name
        try:
            return self.lines[name]
        except KeyError:
            raise ConfigError(f"unknown line {name!r}; have {sorted(self.lines)}", "line") from None

    def lambda_probe(self, line: str | None = None) -> float:
        return self.line(line).wavelength

    @property
    def Gamma_eg(self) -> float:
        """Natural linewidth of the memory transition (rad/s)."""
        return self.line().Gamma

    @property
    def gamma_eg(self) -> float:
        """Optical coherence decay rate, Gamma_eg / 2 (rad/s)."""
        return self.Gamma_eg / 2

    @property
    def tau_eg(self) -> float:
        """Optical coherence lifetime 1/(2 pi * (gamma_eg / 2 pi)), i.e. 1/gamma_eg."""
        return 1.0 / self.gamma_eg

    @property
    def g_int(self) -> float:
        """Contact interaction strength g = 4 pi hbar^2 a / m."""
        return 4 * math.pi * CONST.hbar**2 * self.a_sc / self.mass

    def with_overrides(self, **changes) -> AtomSpecies:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lines"] = {k: asdict(v) for k, v in self.lines.items()}
        d["g_F"] = {str(k): v for k, v in self.g_F.items()}
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> AtomSpecies:
        d = dict(d)
        d["lines"] = {k: Line(**v) for k, v in d["lines"].items()}
        d["g_F"] = {int(k): float(v) for k, v in d.get("g_F", {}).items()}
        return cls(**d)


# The D2 linewidth follows from the quoted optical coherence lifetime
# tau_eg = 1/(2 pi gamma_eg) = 54 ns with gamma_eg in Hz, so the angular
# half-width is 1/tau_eg. D1 wavelength, D1 linewidth, mass and scattering
# length are standard reference data (Steck, "Rubidium 87 D Line Data").
_RB87_TAU_EG = 54e-9


def rb87(**overrides) -> AtomSpecies:
    """Rubidium-87 preset; keyword arguments override any field."""
    lines = {
        "D1": Line(wavelength=794.98e-9, Gamma=2 * math.pi * 5.746e6, alpha_sq=0.5, degeneracy=1.0),
        "D2": Line(wavelength=780.24e-9, Gamma=2.0 / _RB87_TAU_EG, alpha_sq=0.5, degeneracy=2.0),
    }
    species = AtomSpecies(
        name="Rb87",
        mass=86.909180527 * ATOMIC_MASS,
        lines=lines,
        Delta_gs=2 * math.pi * 6.83e9,
        zeta=1.33,
        a_sc=100.4 * BOHR_RADIUS,
        g_F={1: -0.5, 2: 0.5},
        im_a_sc=None,
        memory_line="D2",
    )
    return species.with_overrides(**overrides) if overrides else species


PRESETS = {"rb87": rb87}

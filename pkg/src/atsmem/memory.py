"""Closed-form ATS memory efficiencies and protocol resource scalings."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import DomainError
from .phys import AtomSpecies

GAUSSIAN_TBP = 0.44  # time-bandwidth product B * tau_p of a Gaussian pulse (FWHM)
BACKWARD_OPTIMAL_RATIO = 4.0  # d / 2F at the backward-recall working point
BROADBAND_MIN_F = 10.0

# (optical depth / F, control Rabi frequency / (2 pi B)) for optimal broadband memories
RESOURCE_SCALINGS = {
    "ATS": (8.0, 1.5),
    "EIT": (50.0, 4.0),
}


def bandwidth_from_duration(tau_p: float) -> float:
    if not tau_p > 0:
        raise DomainError(f"pulse duration must be positive, got {tau_p}")
    return GAUSSIAN_TBP / tau_p


def duration_from_bandwidth(B: float) -> float:
    if not B > 0:
        raise DomainError(f"bandwidth must be positive, got {B}")
    return GAUSSIAN_TBP / B


@dataclass(frozen=True)
class MemoryConfig:
    """Protocol settings. Give exactly one of ``tau_p`` (s, FWHM) and ``B`` (Hz)."""

    protocol: str = "ATS"
    recall: str = "backward"
    tau_p: float | None = None
    B: float | None = None
    d: float | None = None

    def __post_init__(self):
        if self.protocol not in RESOURCE_SCALINGS:
            raise DomainError(f"protocol must be one of {sorted(RESOURCE_SCALINGS)}, got {self.protocol!r}")
        if self.recall not in ("forward", "backward"):
            raise DomainError(f"recall must be 'forward' or 'backward', got {self.recall!r}")
        if (self.tau_p is None) == (self.B is None):
            raise DomainError("exactly one of tau_p and B must be given")
        if self.d is not None and self.d < 0:
            raise DomainError(f"optical depth must be non-negative, got {self.d}")

    @property
    def bandwidth(self) -> float:
        return self.B if self.B is not None else bandwidth_from_duration(self.tau_p)

    @property
    def duration(self) -> float:
        return self.tau_p if self.tau_p is not None else duration_from_bandwidth(self.B)


def ats_factor(B: float, species: AtomSpecies) -> float:
    """F = 2 pi B / Gamma_eg."""
    if not B > 0:
        raise DomainError(f"bandwidth must be positive, got {B}")
    return 2 * math.pi * B / species.Gamma_eg


def _check(d, F):
    if d < 0:
        raise DomainError(f"optical depth must be non-negative, got {d}")
    if not F > 0:
        raise DomainError(f"ATS factor must be positive, got {F}")


def eta_forward(d: float, F: float) -> float:
    """Forward-recall efficiency (d/2F)^2 exp(-d/2F) exp(-1/F)."""
    _check(d, F)
    x = d / (2 * F)
    return x * x * math.exp(-x) * math.exp(-1 / F)


def eta_backward(d: float, F: float) -> float:
    """Backward-recall efficiency (1 - exp(-d/2F))^2 exp(-1/F)."""
    _check(d, F)
    return (-math.expm1(-d / (2 * F))) ** 2 * math.exp(-1 / F)


def efficiency(d: float, F: float, recall: str = "backward") -> float:
    if recall == "forward":
        return eta_forward(d, F)
    if recall == "backward":
        return eta_backward(d, F)
    raise DomainError(f"recall must be 'forward' or 'backward', got {recall!r}")


def optimal_od(F: float, recall: str = "backward", backward_ratio: float = BACKWARD_OPTIMAL_RATIO) -> float:
    """Working-point optical depth: argmax 4F for forward recall, 2F * ratio for backward."""
    if not F > 0:
        raise DomainError(f"ATS factor must be positive, got {F}")
    if recall == "forward":
        return 4 * F
    if recall == "backward":
        return 2 * backward_ratio * F
    raise DomainError(f"recall must be 'forward' or 'backward', got {recall!r}")


@dataclass(frozen=True)
class Resources:
    d: float
    omega_c: float
    broadband: bool


def required_resources(protocol: str, B: float, species: AtomSpecies) -> Resources:
    """Optical depth and peak control Rabi frequency (rad/s) for an optimal memory.

    Scalings hold in the broadband regime B >= 10 Gamma_eg / 2pi; below it a
    warning is issued and ``broadband`` is False, but values are still returned.
    """
    try:
        d_per_F, omega_per_B = RESOURCE_SCALINGS[protocol]
    except KeyError:
        raise DomainError(f"protocol must be one of {sorted(RESOURCE_SCALINGS)}, got {protocol!r}") from None
    F = ats_factor(B, species)
    broadband = F >= BROADBAND_MIN_F * (1 - 1e-12)
    if not broadband:
        warnings.warn(f"B = {F:.3g} Gamma_eg/2pi is below the broadband regime (>= {BROADBAND_MIN_F:g})",
                      stacklevel=2)
    return Resources(d=d_per_F * F, omega_c=omega_per_B * 2 * math.pi * B, broadband=broadband)

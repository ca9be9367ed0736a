"""Four-wave-mixing phase matching and relative noise strength of ATS vs EIT."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .cloud import CloudState
from .errors import DomainError
from .memory import BROADBAND_MIN_F, required_resources
from .phys import AtomSpecies

NOISE_RANGE_F = (10.0, 40.0)
CSV_COLUMNS = ("B_Hz", "B_over_linewidth", "d_ats", "d_eit", "omega_ats", "omega_eit",
               "s_ats_norm", "s_eit_norm", "ratio")


@dataclass(frozen=True)
class FwmGeometry:
    theta: float
    wavelength: float
    length: float

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"medium length must be positive, got {self.length}")
        if not 0 <= self.theta <= math.pi:
            raise DomainError(f"angle must lie in [0, pi], got {self.theta}")


def effective_length(cloud: CloudState) -> float:
    """Extent of the cloud along the probe: 2 R_z for a condensate, else 4 sigma_z."""
    if cloud.has_condensate:
        return 2 * float(cloud.tf_radii[2])
    return 4 * float(cloud.thermal_widths[2])


def phase_mismatch(g: FwmGeometry) -> float:
    """|Delta k| L = (8 pi L / lambda) sin^2(theta / 2)."""
    return 8 * math.pi * g.length / g.wavelength * math.sin(g.theta / 2) ** 2


def threshold_angle(wavelength: float, length: float) -> float:
    """Angle where the mismatch reaches 1: 2 arcsin(sqrt(lambda / (8 pi L)))."""
    ratio = wavelength / (8 * math.pi * length)
    if not 0 < ratio <= 1:
        raise DomainError(f"lambda/(8 pi L) = {ratio:.3g} outside (0, 1]; medium too short")
    return 2 * math.asin(math.sqrt(ratio))


def _gamma(species: AtomSpecies, convention: str) -> float:
    if convention == "half":
        return species.gamma_eg
    if convention == "full":
        return species.Gamma_eg
    raise ValueError(f"gamma convention must be 'half' or 'full', got {convention!r}")


def noise_strength(omega_c: float, d: float, species: AtomSpecies, convention: str = "half") -> float:
    """Un-normalised FWM strength Omega_c^4 sinh^2(zeta d gamma / Delta_gs).

    ``convention`` selects gamma = Gamma_eg / 2 ("half") or Gamma_eg ("full").
    """
    if d < 0:
        raise DomainError(f"optical depth must be non-negative, got {d}")
    arg = species.zeta * d * _gamma(species, convention) / species.Delta_gs
    return omega_c**4 * math.sinh(arg) ** 2


def _protocol_strength(protocol, B, species, convention):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = required_resources(protocol, B, species)
    return res, noise_strength(res.omega_c, res.d, species, convention)


def protocol_noise_curve(B_values, species: AtomSpecies, convention: str = "half") -> list[dict]:
    """Noise strength of optimal ATS and EIT memories across bandwidths ``B_values`` (Hz).

    Each protocol is normalised to its own value at B = 10 Gamma_eg / 2pi;
    ``ratio`` is the un-normalised S_EIT / S_ATS.
    """
    linewidth_hz = species.Gamma_eg / (2 * math.pi)
    B_ref = BROADBAND_MIN_F * linewidth_hz
    _, s_ats_ref = _protocol_strength("ATS", B_ref, species, convention)
    _, s_eit_ref = _protocol_strength("EIT", B_ref, species, convention)

    rows = []
    lo, hi = NOISE_RANGE_F
    for B in B_values:
        F = B / linewidth_hz
        if not lo * (1 - 1e-9) <= F <= hi * (1 + 1e-9):
            warnings.warn(f"B = {F:.3g} Gamma_eg/2pi outside the modelled range [{lo:g}, {hi:g}]",
                          stacklevel=2)
        ats, s_ats = _protocol_strength("ATS", B, species, convention)
        eit, s_eit = _protocol_strength("EIT", B, species, convention)
        rows.append({
            "B_Hz": float(B),
            "B_over_linewidth": F,
            "d_ats": ats.d,
            "d_eit": eit.d,
            "omega_ats": ats.omega_c,
            "omega_eit": eit.omega_c,
            "s_ats_norm": s_ats / s_ats_ref,
            "s_eit_norm": s_eit / s_eit_ref,
            "ratio": s_eit / s_ats,
        })
    return rows

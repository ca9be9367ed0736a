"""Bimodal cloud: Maxwell-Boltzmann thermal part plus Thomas-Fermi condensate.

Positions are metres, densities m^-3, column densities m^-2. The probe
propagates along z, so column densities are line integrals over z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import ConvergenceError, DomainError
from .phys import CONST, AtomSpecies

THERMAL_CUTOFF = 8.0  # truncation of Gaussian tails, in units of sigma


@dataclass(frozen=True)
class TrapConfig:
    omega_x: float
    omega_y: float
    omega_z: float

    def __post_init__(self):
        for name in ("omega_x", "omega_y", "omega_z"):
            if not getattr(self, name) > 0:
                raise DomainError(f"trap frequency {name} must be positive, got {getattr(self, name)}")

    @property
    def omegas(self) -> np.ndarray:
        return np.array([self.omega_x, self.omega_y, self.omega_z])

    @property
    def omega_ho(self) -> float:
        return (self.omega_x * self.omega_y * self.omega_z) ** (1 / 3)

    @classmethod
    def isotropic(cls, omega: float) -> TrapConfig:
        return cls(omega, omega, omega)


def chemical_potential(n_bec: float, trap: TrapConfig, species: AtomSpecies) -> float:
    """Thomas-Fermi chemical potential (J) normalising the profile to ``n_bec`` atoms.

    Uses N = (8 pi / 15) (mu/g) R_x R_y R_z with R_i = sqrt(2 mu / (m w_i^2)).
    """
    if not n_bec > 0:
        raise DomainError(f"condensate atom number must be positive, got {n_bec}")
    g, m = species.g_int, species.mass
    mu52 = 15 * n_bec * g * m**1.5 * trap.omega_ho**3 / (8 * math.pi * 2**1.5)
    return mu52 ** 0.4


def tf_radii(mu: float, trap: TrapConfig, species: AtomSpecies) -> np.ndarray:
    return np.sqrt(2 * mu / (species.mass * trap.omegas**2))


def isotropic_trap_for_tf_radius(n_bec: float, radius: float, species: AtomSpecies) -> TrapConfig:
    """Spherical trap whose condensate of ``n_bec`` atoms has Thomas-Fermi radius ``radius``."""
    if not (n_bec > 0 and radius > 0):
        raise DomainError("n_bec and radius must be positive")
    peak = 15 * n_bec / (8 * math.pi * radius**3)
    mu = species.g_int * peak
    return TrapConfig.isotropic(math.sqrt(2 * mu / species.mass) / radius)


def condensate_fraction_from_temperature(T: float, T_c: float) -> float:
    """Ideal-gas harmonic-trap law 1 - (T/T_c)^3, clamped to [0, 1]."""
    if not (T > 0 and T_c > 0):
        raise DomainError("temperatures must be positive")
    return min(1.0, max(0.0, 1.0 - (T / T_c) ** 3))


@dataclass(frozen=True)
class CloudState:
    """Atomic cloud, either in trap (``tof == 0``) or after free expansion.

    ``bec_scale`` holds the Castin-Dum scaling factors of the condensate
    radii; it is filled in by :func:`expand` and should not be set by hand.
    """

    n_total: float
    temperature: float
    f_bec: float
    trap: TrapConfig
    species: AtomSpecies
    tof: float = 0.0
    bec_scale: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        if not self.n_total >= 0:
            raise DomainError(f"atom number must be non-negative, got {self.n_total}")
        if not 0.0 <= self.f_bec <= 1.0:
            raise DomainError(f"condensate fraction must lie in [0, 1], got {self.f_bec}")
        if not self.temperature >= 0:
            raise DomainError(f"temperature must be non-negative, got {self.temperature}")
        if not self.tof >= 0:
            raise DomainError(f"expansion time must be non-negative, got {self.tof}")

    @property
    def n_th(self) -> float:
        return self.n_total * (1.0 - self.f_bec)

    @property
    def n_bec(self) -> float:
        return self.n_total * self.f_bec

    @cached_property
    def mu(self) -> float:
        """In-trap chemical potential (J); zero without a condensate."""
        if self.n_bec <= 0:
            return 0.0
        return chemical_potential(self.n_bec, self.trap, self.species)

    @property
    def has_condensate(self) -> bool:
        """True when the condensate has a resolvable Thomas-Fermi profile (mu does not underflow)."""
        return self.n_bec > 0 and self.mu > 0

    @cached_property
    def tf_radii(self) -> np.ndarray:
        return tf_radii(self.mu, self.trap, self.species) * np.asarray(self.bec_scale)

    @cached_property
    def peak_bec_density(self) -> float:
        """Peak condensate density mu/g, diluted by the expansion volume factor."""
        if not self.has_condensate:
            return 0.0
        return self.mu / self.species.g_int / float(np.prod(self.bec_scale))

    @cached_property
    def thermal_widths(self) -> np.ndarray:
        """Gaussian rms widths sigma_i(t) = sqrt(kT/(m w_i^2) + (kT/m) t^2)."""
        if self.n_th > 0 and not self.temperature > 0:
            raise DomainError("thermal component requires a positive temperature")
        kt_m = CONST.k_B * self.temperature / self.species.mass
        return np.sqrt(kt_m / self.trap.omegas**2 + kt_m * self.tof**2)

    @property
    def peak_thermal_density(self) -> float:
        if self.n_th <= 0:
            return 0.0
        return self.n_th / ((2 * math.pi) ** 1.5 * float(np.prod(self.thermal_widths)))

    def extent(self) -> np.ndarray:
        """Half-size of a box containing the cloud (8 sigma and the TF ellipsoid)."""
        ext = np.zeros(3)
        if self.n_th > 0:
            ext = np.maximum(ext, THERMAL_CUTOFF * self.thermal_widths)
        if self.has_condensate:
            ext = np.maximum(ext, self.tf_radii)
        return ext


def _split(r):
    r = np.asarray(r, dtype=float)
    return r[..., 0], r[..., 1], r[..., 2]


def thermal_density(r, cloud: CloudState):
    """Maxwell-Boltzmann density at position(s) ``r`` (last axis = x, y, z)."""
    x, y, z = _split(r)
    if cloud.n_th <= 0:
        return np.zeros_like(x)
    sx, sy, sz = cloud.thermal_widths
    arg = x**2 / (2 * sx**2) + y**2 / (2 * sy**2) + z**2 / (2 * sz**2)
    return cloud.peak_thermal_density * np.exp(-arg)


def condensate_density(r, cloud: CloudState):
    """Thomas-Fermi density, exactly zero outside the ellipsoid."""
    x, y, z = _split(r)
    if not cloud.has_condensate:
        return np.zeros_like(x)
    rx, ry, rz = cloud.tf_radii
    u = 1.0 - x**2 / rx**2 - y**2 / ry**2 - z**2 / rz**2
    return cloud.peak_bec_density * np.maximum(u, 0.0)


def total_density(r, cloud: CloudState):
    return thermal_density(r, cloud) + condensate_density(r, cloud)


def thermal_column_density(x, y, cloud: CloudState):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if cloud.n_th <= 0:
        return np.zeros(np.broadcast(x, y).shape)
    sx, sy, _ = cloud.thermal_widths
    return cloud.n_th / (2 * math.pi * sx * sy) * np.exp(-x**2 / (2 * sx**2) - y**2 / (2 * sy**2))


def condensate_column_density(x, y, cloud: CloudState):
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if not cloud.has_condensate:
        return np.zeros(np.broadcast(x, y).shape)
    rx, ry, rz = cloud.tf_radii
    u = np.maximum(1.0 - x**2 / rx**2 - y**2 / ry**2, 0.0)
    return cloud.peak_bec_density * (4 * rz / 3) * u**1.5


def _numeric_column(x: float, y: float, cloud: CloudState) -> float:
    total = 0.0
    if cloud.n_th > 0:
        zmax = THERMAL_CUTOFF * cloud.thermal_widths[2]
        val, _ = quad(lambda z: float(thermal_density((x, y, z), cloud)), -zmax, zmax,
                      epsabs=0.0, epsrel=1e-10, limit=200)
        total += val
    if cloud.has_condensate:
        rx, ry, rz = cloud.tf_radii
        u = 1.0 - x**2 / rx**2 - y**2 / ry**2
        if u > 0:
            zmax = rz * math.sqrt(u)
            val, _ = quad(lambda z: float(condensate_density((x, y, z), cloud)), -zmax, zmax,
                          epsabs=0.0, epsrel=1e-10, limit=200)
            total += val
    return total


def column_density(x, y, cloud: CloudState, method: str = "closed"):
    """Areal density integrated along z.

    ``method="closed"`` evaluates the analytic line integrals (vectorised;
    for w_x = w_y these are the familiar radially symmetric forms, and the
    same integrals hold per axis for anisotropic clouds). ``"numeric"``
    integrates the 3D densities with adaptive quadrature, point by point.
    """
    if method == "closed":
        return thermal_column_density(x, y, cloud) + condensate_column_density(x, y, cloud)
    if method == "numeric":
        return np.vectorize(lambda a, b: _numeric_column(a, b, cloud), otypes=[float])(x, y)
    raise ValueError(f"unknown method {method!r}")


def _castin_dum(omegas: np.ndarray, t: float) -> np.ndarray:
    """Scaling factors lambda_i(t) after release from a harmonic trap.

    Solves lambda_i'' = w_i^2 / (lambda_i * lambda_x * lambda_y * lambda_z)
    with lambda(0) = 1, lambda'(0) = 0, in units of the fastest trap period.
    """
    w0 = float(omegas.max())
    wr = omegas / w0

    def rhs(_, s):
        lam, dlam = s[:3], s[3:]
        return np.concatenate([dlam, wr**2 / (lam * np.prod(lam))])

    sol = solve_ivp(rhs, (0.0, w0 * t), np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0]),
                    method="DOP853", rtol=1e-11, atol=1e-13)
    if not sol.success:
        raise ConvergenceError("Castin-Dum integration failed", message=sol.message, t=t)
    return sol.y[:3, -1]


def expand(cloud: CloudState, t: float) -> CloudState:
    """Release an in-trap cloud and let it expand freely for time ``t``.

    Thermal atoms expand ballistically; the condensate follows Castin-Dum
    scaling. Only clouds still in the trap can be expanded.
    """
    if t < 0:
        raise DomainError(f"expansion time must be non-negative, got {t}")
    if cloud.tof != 0.0:
        raise DomainError("cloud has already been released; expand the in-trap state instead")
    if t == 0:
        return cloud
    scale = (1.0, 1.0, 1.0)
    if cloud.has_condensate:
        scale = tuple(float(v) for v in _castin_dum(cloud.trap.omegas, t))
    return replace(cloud, tof=float(t), bec_scale=scale)

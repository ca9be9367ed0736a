"""Spin-wave decoherence times, decay curves and the 1/e memory lifetime.

Two decay models are provided. ``fit`` is the empirical form used to
analyse measured storage-time scans: a common magnetic-dephasing exponential
times a thermal Gaussian acting on the non-condensed fraction, anchored at
the shortest measured storage time ``t_s0``. ``predict`` combines thermal
diffusion (thermal atoms), recoil and inelastic collisions (condensate) for
a trapped cloud with magnetic dephasing assumed eliminated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import bisect

from .errors import ConfigError, DomainError
from .phys import CONST

INV_E = math.exp(-1.0)


@dataclass(frozen=True)
class DecoherenceParams:
    """Inputs of the decoherence models (SI units, angles in radians).

    ``tau_th``, ``tau_rec`` and ``tau_col`` override the values that would
    otherwise be computed from the physical inputs; ``math.inf`` switches a
    mechanism off.
    """

    theta: float
    wavelength: float
    mass: float
    temperature: float = 0.0
    f_bec: float = 0.0
    tau_mag: float | None = None
    r_p: float | None = None
    rho_b: float | None = None
    im_a_sc: float | None = None
    t_s0: float = 0.0
    tau_th: float | None = None
    tau_rec: float | None = None
    tau_col: float | None = None

    def __post_init__(self):
        if not 0 < self.theta <= math.pi:
            raise DomainError(f"separation angle must lie in (0, pi], got {self.theta}")
        if not 0 <= self.f_bec <= 1:
            raise DomainError(f"condensate fraction must lie in [0, 1], got {self.f_bec}")
        if self.temperature < 0:
            raise DomainError(f"temperature must be non-negative, got {self.temperature}")
        for name in ("tau_mag", "r_p", "rho_b", "im_a_sc", "tau_th", "tau_rec", "tau_col"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise DomainError(f"{name} must be positive when given, got {v}")

    @property
    def f_th(self) -> float:
        return 1.0 - self.f_bec

    def with_overrides(self, **changes) -> DecoherenceParams:
        return replace(self, **changes)


def tau_thermal(p: DecoherenceParams) -> float:
    """Thermal-diffusion time lambda / (4 pi sin(theta/2)) * sqrt(m / (k_B T))."""
    if p.tau_th is not None:
        return p.tau_th
    if not p.temperature > 0:
        raise DomainError("thermal decoherence time needs a positive temperature")
    return p.wavelength / (4 * math.pi * math.sin(p.theta / 2)) * math.sqrt(p.mass / (CONST.k_B * p.temperature))


def tau_recoil(p: DecoherenceParams) -> float:
    """Recoil time R_p lambda m / (2 h sin(theta/2))."""
    if p.tau_rec is not None:
        return p.tau_rec
    if p.r_p is None:
        raise ConfigError("probe diameter is required for the recoil time", "decoherence.r_p")
    return p.r_p * p.wavelength * p.mass / (2 * CONST.h * math.sin(p.theta / 2))


def tau_collision(p: DecoherenceParams) -> float:
    """Inelastic two-body collision time m / (4 h Im(a_sc) rho_B)."""
    if p.tau_col is not None:
        return p.tau_col
    if p.im_a_sc is None:
        raise ConfigError("Im(a_sc) has no default and must be supplied", "decoherence.im_a_sc")
    if p.rho_b is None:
        raise ConfigError("peak condensate density is required for the collision time", "decoherence.rho_b")
    return p.mass / (4 * CONST.h * p.im_a_sc * p.rho_b)


def _gauss(t, tau):
    return np.exp(-(t / tau) ** 2) if math.isfinite(tau) else np.ones_like(t)


def _expo(t, tau):
    return np.exp(-t / tau) if math.isfinite(tau) else np.ones_like(t)


def _fit_shape(s, p):
    if p.tau_mag is None:
        raise ConfigError("tau_mag is required by the fit model", "decoherence.tau_mag")
    thermal = _gauss(s, tau_thermal(p)) if p.f_th > 0 else 0.0
    return _expo(s, p.tau_mag) * (p.f_bec + p.f_th * thermal)


def _predict_shape(t, p):
    out = np.zeros_like(t)
    if p.f_bec > 0:
        out = out + p.f_bec * _expo(t, tau_collision(p)) * _gauss(t, tau_recoil(p))
    if p.f_th > 0:
        out = out + p.f_th * _gauss(t, tau_thermal(p))
    return out


def _scalar_or_array(t, value):
    return float(value) if np.ndim(t) == 0 else value


def decay_fit_model(t, eta0: float, p: DecoherenceParams, t0: float | None = None):
    """eta(t0) exp(-(t-t0)/tau_mag) [F_BEC + F_th exp(-(t-t0)^2/tau_th^2)], t >= t0.

    ``t0`` defaults to ``p.t_s0``.
    """
    t0 = p.t_s0 if t0 is None else t0
    s = np.asarray(t, dtype=float) - t0
    if np.any(s < 0):
        raise DomainError("fit model is defined for t >= t0 only")
    return _scalar_or_array(t, eta0 * _fit_shape(s, p))


def decay_predict_model(t, eta0: float, p: DecoherenceParams):
    """eta(0) [F_BEC exp(-t/tau_col) exp(-t^2/tau_rec^2) + (1-F_BEC) exp(-t^2/tau_th^2)]."""
    ta = np.asarray(t, dtype=float)
    if np.any(ta < 0):
        raise DomainError("storage time must be non-negative")
    return _scalar_or_array(t, eta0 * _predict_shape(ta, p))


def component_times(p: DecoherenceParams, model: str = "predict") -> dict[str, float]:
    """Decay constants that enter ``model``; inactive mechanisms map to inf."""
    out = {"tau_th": tau_thermal(p) if p.f_th > 0 else math.inf}
    if model == "fit":
        out["tau_mag"] = p.tau_mag if p.tau_mag is not None else math.inf
    else:
        out["tau_rec"] = tau_recoil(p) if p.f_bec > 0 else math.inf
        out["tau_col"] = tau_collision(p) if p.f_bec > 0 else math.inf
    return out


def memory_lifetime(p: DecoherenceParams, model: str = "predict", rtol: float = 1e-12) -> float:
    """Storage time at which efficiency has fallen to 1/e of its starting value.

    For ``model="fit"`` the start is the anchor ``p.t_s0`` and the returned
    time is measured on the same storage-time axis (i.e. it includes
    ``t_s0``). Returns ``math.inf`` when the curve never reaches 1/e.
    """
    if model == "fit":
        shape, offset = (lambda s: float(_fit_shape(np.asarray(s), p))), p.t_s0
    elif model == "predict":
        shape, offset = (lambda s: float(_predict_shape(np.asarray(s), p))), 0.0
    else:
        raise ValueError(f"unknown model {model!r}")

    comp = component_times(p, model)
    taus = [v for v in comp.values() if math.isfinite(v)]
    if not taus:
        return math.inf
    # long-time limit: weight of components with no finite decay constant
    if model == "fit":
        floor = 0.0 if math.isfinite(comp["tau_mag"]) else p.f_bec + (p.f_th if math.isinf(comp["tau_th"]) else 0.0)
    else:
        bec_free = math.isinf(comp["tau_rec"]) and math.isinf(comp["tau_col"])
        floor = (p.f_bec if bec_free else 0.0) + (p.f_th if math.isinf(comp["tau_th"]) else 0.0)
    if floor >= INV_E:
        return math.inf

    hi = min(taus)
    while shape(hi) > INV_E:
        hi *= 2.0
    lo = 0.0
    root = bisect(lambda s: shape(s) - INV_E, lo, hi, xtol=1e-300, rtol=rtol, maxiter=500)
    return offset + root

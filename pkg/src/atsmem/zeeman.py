"""Interference of Zeeman-split spin waves during storage.

With a DC field the stored excitation splits into spin waves S0, S1, S2
whose phases evolve as exp(-i w t), 1 and exp(+i w t). The retrieved
intensity is |q0 exp(-i w t) + q1 + q2 exp(i w t)|^2. Amplitudes are real
and non-negative; any relative phase is absorbed into the time origin.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit

from .decoherence import DecoherenceParams, decay_fit_model
from .errors import ConvergenceError, DomainError
from .phys import CONST

GAUSS = 1e-4  # tesla


@dataclass(frozen=True)
class SpinWaveAmplitudes:
    q0: float
    q1: float
    q2: float

    def __post_init__(self):
        qs = (self.q0, self.q1, self.q2)
        if any(q < 0 for q in qs) or not any(q > 0 for q in qs):
            raise DomainError(f"amplitudes must be non-negative and not all zero, got {qs}")


def zeeman_splitting(g_f: float, b_field: float) -> float:
    """Angular frequency g_F mu_B B / hbar between adjacent sublevels."""
    if b_field < 0:
        raise DomainError(f"field magnitude must be non-negative, got {b_field}")
    return g_f * CONST.mu_B * b_field / CONST.hbar


def beat_frequency(b_field: float) -> float:
    """Relative phase rate of neighbouring spin waves, mu_B B / (2 hbar)."""
    return zeeman_splitting(0.5, b_field)


def oscillation_period(b_field: float) -> float:
    """Beat period 2h / (mu_B B); ``math.inf`` at zero field."""
    if b_field < 0:
        raise DomainError(f"field magnitude must be non-negative, got {b_field}")
    if b_field == 0:
        return math.inf
    return 2 * CONST.h / (CONST.mu_B * b_field)


def field_for_period(period: float) -> float:
    if not period > 0:
        raise DomainError(f"period must be positive, got {period}")
    return 2 * CONST.h / (CONST.mu_B * period)


def retrieved_intensity(t, q: SpinWaveAmplitudes, omega: float, decay: DecoherenceParams | None = None):
    """Relative retrieved intensity, optionally times the fit-model decay envelope."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("storage time must be non-negative")
    # |q0 e^{-iwt} + q1 + q2 e^{iwt}|^2 expanded for real amplitudes
    c1, c2 = np.cos(omega * t), np.cos(2 * omega * t)
    out = q.q0**2 + q.q1**2 + q.q2**2 + 2 * q.q1 * (q.q0 + q.q2) * c1 + 2 * q.q0 * q.q2 * c2
    out = np.maximum(out, 0.0)
    if decay is not None:
        out = out * decay_fit_model(t, 1.0, decay, t0=0.0)
    return float(out) if out.ndim == 0 else out


def visibility(i_max: float, i_min: float) -> float:
    """(I_max - I_min) / (I_max + I_min)."""
    if not (i_max >= i_min >= 0 and i_max > 0):
        raise DomainError(f"need i_max >= i_min >= 0 and i_max > 0, got {i_max}, {i_min}")
    return (i_max - i_min) / (i_max + i_min)


def intensity_extrema(q: SpinWaveAmplitudes) -> tuple[float, float]:
    """Max and min of the undamped intensity over one period."""
    # stationary points: sin(phi) = 0 or cos(phi) = -q1 (q0 + q2) / (4 q0 q2)
    phases = [0.0, math.pi]
    if q.q0 * q.q2 > 0:
        c = -q.q1 * (q.q0 + q.q2) / (4 * q.q0 * q.q2)
        if -1 <= c <= 1:
            phases.append(math.acos(c))
    vals = retrieved_intensity(np.array(phases), q, 1.0)
    return float(vals.max()), float(vals.min())


def interference_visibility(q: SpinWaveAmplitudes) -> float:
    i_max, i_min = intensity_extrema(q)
    return visibility(i_max, i_min)


@dataclass(frozen=True)
class OscillationFit:
    omega: float
    offset: float
    amplitude: float
    phase: float

    @property
    def period(self) -> float:
        return 2 * math.pi / self.omega


def fit_oscillation(t, intensity, decay: DecoherenceParams | None = None,
                    omega_guess: float | None = None) -> OscillationFit:
    """Least-squares fit of env(t) [a + b cos(w t + phi)] to a retrieved-intensity trace.

    ``env`` is the fit-model decay envelope of ``decay`` (unity when None).
    Without ``omega_guess`` the starting frequency is the periodogram peak,
    so ``t`` should be uniformly sampled and cover a few periods.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(intensity, dtype=float)
    if t.shape != y.shape or t.size < 8:
        raise DomainError("need matching t and intensity arrays with at least 8 samples")
    env = decay_fit_model(t, 1.0, decay, t0=0.0) if decay is not None else np.ones_like(t)
    z = y / env
    if omega_guess is None:
        dt = float(np.mean(np.diff(t)))
        n = 8 * t.size  # zero padding refines the peak location
        spec = np.abs(np.fft.rfft(z - z.mean(), n))
        k = int(np.argmax(spec[1:])) + 1
        omega_guess = 2 * math.pi * k / (n * dt)
    c, s = np.cos(omega_guess * t), np.sin(omega_guess * t)
    a0, bc, bs = np.linalg.lstsq(np.column_stack([np.ones_like(t), c, s]), z, rcond=None)[0]

    def model(tt, a, b, w, phi):
        return np.interp(tt, t, env) * (a + b * np.cos(w * tt + phi))

    p0 = (a0, math.hypot(bc, bs), omega_guess, math.atan2(-bs, bc))
    try:
        with warnings.catch_warnings():
            # the covariance is not used; a degenerate one is harmless here
            warnings.simplefilter("ignore", OptimizeWarning)
            (a, b, w, phi), _ = curve_fit(model, t, y, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise ConvergenceError("oscillation fit did not converge", reason=str(exc)) from None
    return OscillationFit(float(abs(w)), float(a), float(b), float(phi))

"""Photon-counting measurement model, estimators and the tau_mag fit.

Times in a histogram are relative to the nominal recall time. Detection
probabilities are per storage-and-recall event. A single detector registers
at most one click per event, so the counts of one run are multinomial over
the bins (Poisson per bin in the low-probability limit).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr

from .decoherence import DecoherenceParams, decay_fit_model
from .errors import DomainError

FWHM_TO_SIGMA = 1.0 / (2 * math.sqrt(2 * math.log(2)))
INV_PHI = (math.sqrt(5) - 1) / 2


def make_rng(seed) -> np.random.Generator:
    """Counter-based (Philox) generator; ``seed`` is an int or a SeedSequence."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class MeasurementPlan:
    n_bar_in: float = 1.0
    n_r: int = 1000
    n_cyc: int = 300
    bin_width: float = 1e-9
    window: tuple[float, float] = (-25e-9, 25e-9)
    span: tuple[float, float] = (-200e-9, 200e-9)
    p_n: float = 6.6e-5
    det_eff: float = 1.0

    def __post_init__(self):
        if self.n_bar_in < 0 or self.p_n < 0 or not 0 <= self.det_eff <= 1:
            raise DomainError("n_bar_in and p_n must be non-negative and det_eff in [0, 1]")
        if self.n_r < 1 or self.n_cyc < 1:
            raise DomainError("n_r and n_cyc must be at least 1")
        if not self.bin_width > 0:
            raise DomainError("bin_width must be positive")
        (w0, w1), (s0, s1) = self.window, self.span
        if not (s0 <= w0 < w1 <= s1):
            raise DomainError(f"window {self.window} must lie inside span {self.span}")
        for edge in (s0, w0 - s0, w1 - s0, s1 - s0):
            k = edge / self.bin_width
            if abs(k - round(k)) > 1e-6:
                raise DomainError("window and span edges must fall on bin boundaries")

    @property
    def n_events(self) -> int:
        return self.n_r * self.n_cyc

    @property
    def window_length(self) -> float:
        return self.window[1] - self.window[0]

    def bin_edges(self) -> np.ndarray:
        k0 = round(self.span[0] / self.bin_width)
        n = int(round((self.span[1] - self.span[0]) / self.bin_width))
        return (k0 + np.arange(n + 1)) * self.bin_width


@dataclass(frozen=True)
class CountHistogram:
    edges: np.ndarray
    counts: np.ndarray
    n_events: int
    metadata: dict = field(default_factory=dict)

    @property
    def bins(self) -> list[tuple[float, int]]:
        return [(float(t), int(c)) for t, c in zip(self.edges[:-1], self.counts)]

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.n_events

    def window_counts(self, window: tuple[float, float]) -> int:
        centres = 0.5 * (self.edges[:-1] + self.edges[1:])
        mask = (centres > window[0]) & (centres < window[1])
        return int(self.counts[mask].sum())

    def window_probability(self, window: tuple[float, float]) -> float:
        return self.window_counts(window) / self.n_events

    def rows(self) -> list[dict]:
        p = self.probabilities
        return [{"t_start": float(self.edges[i]), "t_end": float(self.edges[i + 1]),
                 "count": int(self.counts[i]), "probability": float(p[i])}
                for i in range(len(self.counts))]


def signal_probability(eta_m: float, plan: MeasurementPlan) -> float:
    """Per-event probability of detecting a retrieved photon, eta_m n_in det_eff."""
    return eta_m * plan.n_bar_in * plan.det_eff


def bin_probabilities(eta_m: float, plan: MeasurementPlan, tau_p: float) -> np.ndarray:
    """Expected per-event click probability in each histogram bin."""
    edges = plan.bin_edges()
    centre = 0.5 * (plan.window[0] + plan.window[1])
    sigma = tau_p * FWHM_TO_SIGMA
    shape = np.diff(ndtr((edges - centre) / sigma))
    noise = plan.p_n * np.diff(edges) / plan.window_length
    return signal_probability(eta_m, plan) * shape + noise


def simulate_histogram(eta_m: float, plan: MeasurementPlan, tau_p: float, seed) -> CountHistogram:
    """Detection-vs-time histogram for ``plan.n_events`` storage-and-recall events."""
    if not 0 <= eta_m <= 1:
        raise DomainError(f"efficiency must lie in [0, 1], got {eta_m}")
    if not tau_p > 0:
        raise DomainError("pulse duration must be positive")
    p_s = plan.p_n + signal_probability(eta_m, plan)
    probs = bin_probabilities(eta_m, plan, tau_p)
    if p_s > 1 or probs.sum() > 1:
        raise DomainError(f"click probability per event exceeds 1 (p_s = {p_s:.4g}); nonphysical plan")
    rng = make_rng(seed)
    counts = rng.multinomial(plan.n_events, np.append(probs, max(0.0, 1.0 - probs.sum())))[:-1]
    meta = {"seed": seed if isinstance(seed, int) else repr(seed), "eta_m": eta_m, "tau_p": tau_p,
            "n_events": plan.n_events, "p_s_expected": p_s}
    return CountHistogram(plan.bin_edges(), counts.astype(np.int64), plan.n_events, meta)


class EfficiencyEstimate(NamedTuple):
    raw: float
    clamped: float


class SnrEstimate(NamedTuple):
    snr: float
    error_probability: float


def estimate_efficiency(p_s: float, p_n: float, p_in: float) -> EfficiencyEstimate:
    """eta_m = (p_s - p_n) / p_in; the raw value may be negative under noise."""
    if not p_in > 0:
        raise DomainError(f"input detection probability must be positive, got {p_in}")
    raw = (p_s - p_n) / p_in
    return EfficiencyEstimate(raw, min(1.0, max(0.0, raw)))


def estimate_snr(p_s: float, p_n: float) -> SnrEstimate:
    """SNR = (p_s - p_n) / p_n and error probability 1 / SNR."""
    if p_n < 0:
        raise DomainError("noise probability must be non-negative")
    if p_n == 0:
        return SnrEstimate(math.inf, 0.0)
    snr = (p_s - p_n) / p_n
    return SnrEstimate(snr, 1.0 / snr if snr != 0 else math.inf)


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / n)


@dataclass(frozen=True)
class Measurement:
    p_in: float
    p_s: float
    p_n: float
    efficiency: EfficiencyEstimate
    snr: SnrEstimate
    histograms: dict


def measure(eta_m: float, plan: MeasurementPlan, tau_p: float, seed) -> Measurement:
    """Simulate the three runs behind one data point: input, recall and no-probe noise.

    ``seed`` is an int or a SeedSequence; the three runs use independent children.
    """
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    ss_in, ss_s, ss_n = ss.spawn(3)
    no_probe = replace(plan, n_bar_in=0.0)
    h_in = simulate_histogram(1.0, plan, tau_p, ss_in)
    h_s = simulate_histogram(eta_m, plan, tau_p, ss_s)
    h_n = simulate_histogram(0.0, no_probe, tau_p, ss_n)
    p_in, p_s, p_n = (h.window_probability(plan.window) for h in (h_in, h_s, h_n))
    return Measurement(p_in, p_s, p_n, estimate_efficiency(p_s, p_n, p_in), estimate_snr(p_s, p_n),
                       {"input": h_in, "signal": h_s, "noise": h_n})


def golden_section(f, a: float, b: float, tol: float = 1e-10, max_iter: int = 500) -> float:
    """Minimiser of a unimodal ``f`` on [a, b] to within ``tol``."""
    c, d = b - INV_PHI * (b - a), a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


class TauMagFit(NamedTuple):
    tau_mag: float
    residual: float
    eta0: float


def fit_tau_mag(data, f_bec: float, tau_th: float, t_s0: float, eta0: float | None = None,
                bounds: tuple[float, float] = (1e-8, 10.0), n_scan: int = 161) -> TauMagFit:
    """Least-squares tau_mag of the fit decay model with F_BEC, tau_th, t_s0 held fixed.

    ``data`` is a sequence of (storage time, efficiency). When ``eta0`` is
    None the anchor efficiency is profiled out (it enters linearly), so the
    search is still one-dimensional. The search runs on log(tau_mag): a
    coarse scan locates the basin, then golden-section refines it.
    """
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 3:
        raise DomainError("need at least 3 (t, eta) points")
    t, y = arr[:, 0], arr[:, 1]
    if np.any(t < t_s0):
        raise DomainError("all storage times must be >= t_s0")
    base = DecoherenceParams(theta=math.pi / 2, wavelength=1.0, mass=1.0, f_bec=f_bec,
                             tau_th=tau_th, t_s0=t_s0, tau_mag=1.0)

    def solve(u):
        g = decay_fit_model(t, 1.0, base.with_overrides(tau_mag=math.exp(u)))
        a = eta0 if eta0 is not None else float(g @ y / (g @ g))
        r = y - a * g
        return float(r @ r), a

    lo, hi = math.log(bounds[0]), math.log(bounds[1])
    grid = np.linspace(lo, hi, n_scan)
    obj = np.array([solve(u)[0] for u in grid])
    if np.ptp(y) == 0 or np.ptp(obj) <= 1e-14 * max(obj.max(), 1e-300):
        warnings.warn("flat objective: data do not constrain tau_mag", stacklevel=2)
    interior = (obj[1:-1] < obj[:-2]) & (obj[1:-1] <= obj[2:])
    if interior.sum() > 1:
        warnings.warn("objective has several local minima on the search bracket", stacklevel=2)
    k = int(np.argmin(obj))
    u = golden_section(lambda v: solve(v)[0], grid[max(k - 1, 0)], grid[min(k + 1, n_scan - 1)])
    res, a = solve(u)
    return TauMagFit(math.exp(u), res, a)

"""Module invariants as plain check functions plus random parameter draws.

Each entry of ``INVARIANTS`` pairs a ``draw(rng) -> kwargs`` sampler with a
``check(**kwargs)`` that raises AssertionError on violation. The hypothesis
suites call the checks with their own strategies; the acceptance test runs
every check over 1000 seeded draws.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from atsmem import cloud as cl
from atsmem import counting, decoherence, fwm, memory, optics, zeeman
from atsmem.decoherence import DecoherenceParams
from atsmem.errors import DomainError
from atsmem.phys import CONST, Line, rb87

RB = rb87()
LAMBDA_D2 = RB.lambda_probe("D2")


# ----------------------------------------------------------------- draws ---

def draw_cloud_kwargs(rng) -> dict:
    return {
        "omegas": tuple(2 * math.pi * rng.uniform(30.0, 400.0, 3)),
        "n_total": float(10 ** rng.uniform(3, 6)),
        "temperature": float(rng.uniform(30e-9, 3e-6)),
        "f_bec": float(rng.uniform(0, 1)),
    }


def make_cloud(omegas, n_total, temperature, f_bec) -> cl.CloudState:
    return cl.CloudState(n_total, temperature, f_bec, cl.TrapConfig(*omegas), RB)


def draw_decoherence_kwargs(rng) -> dict:
    return {
        "theta": float(rng.uniform(1e-3, math.pi)),
        "temperature": float(10 ** rng.uniform(-9, -5)),
        "f_bec": float(rng.uniform(0, 1)),
        "tau_mag": float(10 ** rng.uniform(-6, -3)),
        "r_p": float(rng.uniform(1e-6, 50e-6)),
        "rho_b": float(10 ** rng.uniform(18, 21)),
        "im_a_sc": float(10 ** rng.uniform(-14, -11)),
        "t_s0": float(rng.uniform(0, 5e-6)),
    }


def make_params(**kw) -> DecoherenceParams:
    return DecoherenceParams(wavelength=LAMBDA_D2, mass=RB.mass, **kw)


# ------------------------------------------------------------------ phys ---

def check_coherence_lifetime_roundtrip(gamma_hz):
    sp = RB.with_overrides(lines={**RB.lines, "D2": Line(
        wavelength=LAMBDA_D2, Gamma=2 * 2 * math.pi * gamma_hz, alpha_sq=0.5, degeneracy=2.0)})
    tau = 1 / (2 * math.pi * (sp.gamma_eg / (2 * math.pi)))
    assert math.isclose(tau, sp.tau_eg, rel_tol=1e-12)
    assert math.isclose(sp.tau_eg, 1 / (2 * math.pi * gamma_hz), rel_tol=1e-12)


def check_overrides_not_shadowed(mass, a_sc, zeta, delta_gs):
    sp = rb87(mass=mass, a_sc=a_sc, zeta=zeta, Delta_gs=delta_gs)
    assert (sp.mass, sp.a_sc, sp.zeta, sp.Delta_gs) == (mass, a_sc, zeta, delta_gs)
    back = type(sp).from_dict(sp.to_dict())
    assert back == sp


# ----------------------------------------------------------------- cloud ---

def check_densities_nonnegative(cloud_kw, points):
    c = make_cloud(**cloud_kw)
    r = np.asarray(points) * c.extent() * 1.5
    assert np.all(cl.total_density(r, c) >= 0)
    assert np.all(cl.column_density(r[:, 0], r[:, 1], c) >= 0)


_GH_X, _GH_W = np.polynomial.hermite.hermgauss(60)
_GL_X, _GL_W = np.polynomial.legendre.leggauss(80)


def integrated_column(c: cl.CloudState) -> float:
    """Fixed-rule oracle for the transverse integral of the column density.

    Thermal part: Gauss-Hermite in each axis. Condensate part: elliptic
    polar coordinates with v = r^2, Gauss-Legendre in v and phi.
    """
    total = 0.0
    if c.n_th > 0:
        sx, sy, _ = c.thermal_widths
        x = math.sqrt(2) * sx * _GH_X
        y = math.sqrt(2) * sy * _GH_X
        X, Y = np.meshgrid(x, y, indexing="ij")
        w = np.outer(_GH_W * np.exp(_GH_X**2), _GH_W * np.exp(_GH_X**2)) * 2 * sx * sy
        total += float(np.sum(w * cl.thermal_column_density(X, Y, c)))
    if c.has_condensate:
        rx, ry, _ = c.tf_radii
        v = 0.5 * (_GL_X + 1)
        phi = math.pi * (_GL_X + 1)
        V, P = np.meshgrid(v, phi, indexing="ij")
        r = np.sqrt(V)
        w = np.outer(0.5 * _GL_W, math.pi * _GL_W) * 0.5 * rx * ry  # r dr = dv / 2
        total += float(np.sum(w * cl.condensate_column_density(rx * r * np.cos(P), ry * r * np.sin(P), c)))
    return total


def check_column_normalisation(cloud_kw):
    c = make_cloud(**cloud_kw)
    assert math.isclose(integrated_column(c), c.n_total, rel_tol=1e-4)


def check_thermal_peak_decreases_with_temperature(omegas, n_th, t1, t2):
    lo, hi = sorted((t1, t2))
    if hi <= lo * (1 + 1e-9):
        return
    a = make_cloud(omegas, n_th, lo, 0.0).peak_thermal_density
    b = make_cloud(omegas, n_th, hi, 0.0).peak_thermal_density
    assert b < a


def check_expand_single_release(cloud_kw, t):
    c = make_cloud(**cloud_kw)
    e = cl.expand(c, t)
    if c.n_th > 0:
        kt_m = CONST.k_B * c.temperature / RB.mass
        np.testing.assert_allclose(e.thermal_widths**2, c.thermal_widths**2 + kt_m * t**2, rtol=1e-12)
    if c.n_bec > 0:
        assert np.all(e.tf_radii >= c.tf_radii * (1 - 1e-12))
    if t == 0:
        assert e is c
        return
    try:
        cl.expand(e, t)
    except DomainError:
        pass
    else:
        raise AssertionError("second expansion accepted")


# ---------------------------------------------------------------- optics ---

OD_RTOL = 1e-4


def check_effective_od_bounds_and_monotone(cloud_kw, r_p, factor):
    c = make_cloud(**cloud_kw)
    d0 = optics.peak_od(c)
    d1 = optics.effective_od(optics.BeamProfile.circular(r_p), c, rtol=OD_RTOL)
    d2 = optics.effective_od(optics.BeamProfile.circular(r_p * factor), c, rtol=OD_RTOL)
    slack = 20 * OD_RTOL
    assert 0 <= d2 <= d1 * (1 + slack) + 1e-12, (d1, d2)
    assert d1 <= d0 * (1 + slack), (d1, d0)


def check_od_intensity_scale_invariant(d0_peak, width, r_p, i0):
    beam = optics.BeamProfile.circular(r_p)
    x = np.linspace(-3 * max(width, r_p), 3 * max(width, r_p), 257)
    X, Y = np.meshgrid(x, x, indexing="ij")
    d0 = d0_peak * np.exp(-(X**2 + Y**2) / (2 * width**2))

    def od(scale):
        # log-space sums: the transmitted power may underflow for large d0
        log_in = np.log(scale) - 8 * (X**2 + Y**2) / r_p**2
        return -(logsumexp(log_in - d0) - logsumexp(log_in))

    assert math.isclose(od(1.0), od(i0), rel_tol=1e-10, abs_tol=1e-12)


# ---------------------------------------------------------------- memory ---

def check_efficiency_bounds(d, F):
    for eta in (memory.eta_forward(d, F), memory.eta_backward(d, F)):
        assert 0.0 <= eta <= 1.0


def check_backward_increasing(d1, d2, F):
    lo, hi = sorted((d1, d2))
    # strict increase is only resolvable while the change exceeds rounding
    if hi - lo < 1e-6 * hi or (hi - lo) / (2 * F) * math.exp(-lo / (2 * F)) < 1e-12:
        return
    assert memory.eta_backward(hi, F) > memory.eta_backward(lo, F)


def check_forward_argmax(F):
    d_star = counting.golden_section(lambda d: -memory.eta_forward(d, F), 0.0, 20 * F, tol=1e-9 * F)
    assert abs(d_star - 4 * F) <= 1e-6 * 4 * F
    assert memory.eta_forward(4 * F, F) >= memory.eta_forward(4 * F * 0.999, F)
    assert memory.eta_forward(4 * F, F) >= memory.eta_forward(4 * F * 1.001, F)


def check_efficiency_vanishes_as_F_to_zero(d):
    F = 1e-3
    assert memory.eta_forward(d, F) < 1e-300 or memory.eta_forward(d, F) == 0.0
    assert memory.eta_backward(d, F) < 1e-300 or memory.eta_backward(d, F) == 0.0


# ----------------------------------------------------------- decoherence ---

def _dense_times(p, model):
    taus = [v for v in decoherence.component_times(p, model).values() if math.isfinite(v)]
    span = 5 * max(taus) if taus else 1e-3
    return np.linspace(0, span, 2001)


def check_models_nonincreasing(par_kw):
    p = make_params(**par_kw)
    t = _dense_times(p, "predict")
    y = decoherence.decay_predict_model(t, 1.0, p)
    assert np.all(np.diff(y) <= 1e-15)
    t = p.t_s0 + _dense_times(p, "fit")
    y = decoherence.decay_fit_model(t, 1.0, p)
    assert np.all(np.diff(y) <= 1e-15)


def check_lifetime_independent_of_eta0(par_kw, eta0):
    p = make_params(**par_kw)
    tp = decoherence.memory_lifetime(p, "predict")
    if math.isfinite(tp):
        assert math.isclose(decoherence.decay_predict_model(tp, eta0, p) / eta0, math.exp(-1), rel_tol=1e-9)
    tf = decoherence.memory_lifetime(p, "fit")
    if math.isfinite(tf):
        assert math.isclose(decoherence.decay_fit_model(tf, eta0, p) / eta0, math.exp(-1), rel_tol=1e-9)


def check_mixed_lifetime_between_pure(par_kw):
    p = make_params(**par_kw)
    for model in ("predict", "fit"):
        mixed = decoherence.memory_lifetime(p, model)
        a = decoherence.memory_lifetime(p.with_overrides(f_bec=0.0), model)
        b = decoherence.memory_lifetime(p.with_overrides(f_bec=1.0), model)
        lo, hi = min(a, b), max(a, b)
        assert lo * (1 - 1e-9) <= mixed <= hi * (1 + 1e-9), (model, a, mixed, b)


# ------------------------------------------------------------------- fwm ---

def check_mismatch_increasing(th1, th2, length):
    lo, hi = sorted((th1, th2))
    if hi - lo < 1e-9:
        return
    g = lambda th: fwm.FwmGeometry(th, LAMBDA_D2, length)  # noqa: E731
    assert fwm.phase_mismatch(g(hi)) > fwm.phase_mismatch(g(lo))


def check_noise_strength_increasing(omega, d, factor, convention):
    s = fwm.noise_strength(omega, d, RB, convention)
    assert fwm.noise_strength(omega * factor, d, RB, convention) > s
    assert fwm.noise_strength(omega, d * factor, RB, convention) > s


def check_threshold_roundtrip(length):
    th = fwm.threshold_angle(LAMBDA_D2, length)
    assert math.isclose(fwm.phase_mismatch(fwm.FwmGeometry(th, LAMBDA_D2, length)), 1.0, rel_tol=1e-12)


# ---------------------------------------------------------------- zeeman ---

def check_intensity_periodic(q, omega, t):
    q = zeeman.SpinWaveAmplitudes(*q)
    scale = (q.q0 + q.q1 + q.q2) ** 2
    a = zeeman.retrieved_intensity(t, q, omega)
    b = zeeman.retrieved_intensity(t + 2 * math.pi / omega, q, omega)
    assert abs(a - b) <= 1e-9 * scale
    if q.q0 + q.q1 == 0:
        return
    sym = zeeman.SpinWaveAmplitudes(q.q0, q.q1, q.q0)
    # evenness: I(t) = I(-t); use I(T - t) = I(t - T) = I(t) via periodicity to stay at t >= 0
    period = 2 * math.pi / omega
    tt = t % period
    a = zeeman.retrieved_intensity(tt, sym, omega)
    b = zeeman.retrieved_intensity(period - tt, sym, omega)
    assert abs(a - b) <= 1e-9 * (2 * q.q0 + q.q1) ** 2


def check_visibility_scale_invariant(i_max, ratio, k):
    i_min = i_max * ratio
    assert math.isclose(zeeman.visibility(i_max, i_min), zeeman.visibility(k * i_max, k * i_min),
                        rel_tol=1e-12, abs_tol=1e-15)
    assert 0 <= zeeman.visibility(i_max, i_min) <= 1


def check_oscillation_fit_recovers_omega(q, b_gauss, tau_mag_periods):
    q = zeeman.SpinWaveAmplitudes(*q)
    w = zeeman.beat_frequency(b_gauss * zeeman.GAUSS)
    period = 2 * math.pi / w
    t = np.linspace(0, 5 * period, 201)
    dec = None
    if tau_mag_periods is not None:
        dec = DecoherenceParams(theta=math.pi / 2, wavelength=1.0, mass=1.0, f_bec=1.0,
                                tau_mag=tau_mag_periods * period)
    y = zeeman.retrieved_intensity(t, q, w, dec)
    fit = zeeman.fit_oscillation(t, y, dec)
    assert abs(fit.omega / w - 1) < 0.01, fit.omega / w


# -------------------------------------------------------------- counting ---

def check_estimator_consistency(eta, n_bar, n_events, seed):
    plan = counting.MeasurementPlan(n_bar_in=n_bar, n_r=n_events, n_cyc=1, det_eff=0.5)
    m = counting.measure(eta, plan, 20e-9, seed)
    n = plan.n_events
    var = (m.p_s * (1 - m.p_s) + m.p_n * (1 - m.p_n) + eta**2 * m.p_in * (1 - m.p_in)) / n
    sigma = math.sqrt(var) / m.p_in
    # 5 sigma: this check runs over many draws, so 3 sigma would fail by chance
    assert abs(m.efficiency.raw - eta) <= 5 * sigma, (m.efficiency.raw, eta, sigma)


def check_estimators_rescaling(p_s, p_n, p_in, k):
    a = counting.estimate_efficiency(p_s, p_n, p_in)
    b = counting.estimate_efficiency(k * p_s, k * p_n, k * p_in)
    assert math.isclose(a.raw, b.raw, rel_tol=1e-12, abs_tol=1e-15)
    # subnormal p_n cannot be rescaled exactly
    if p_n > 1e-300:
        assert math.isclose(counting.estimate_snr(p_s, p_n).snr, counting.estimate_snr(k * p_s, k * p_n).snr,
                            rel_tol=1e-12, abs_tol=1e-12)


def check_fit_unimodal_and_exact(f_bec, tau_th, tau_mag, t_s0):
    # f_bec > 0 keeps tau_mag identifiable once the thermal part has died out
    t = t_s0 + np.linspace(0, 4 * tau_mag, 12)
    p = DecoherenceParams(theta=math.pi / 2, wavelength=1.0, mass=1.0, f_bec=f_bec, tau_th=tau_th,
                          t_s0=t_s0, tau_mag=tau_mag)
    data = np.column_stack([t, decoherence.decay_fit_model(t, 0.3, p)])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit = counting.fit_tau_mag(data, f_bec, tau_th, t_s0)
    assert abs(fit.tau_mag / tau_mag - 1) < 1e-3


def check_simulation_deterministic(eta, seed):
    plan = counting.MeasurementPlan(n_r=200, n_cyc=50, det_eff=0.5)
    a = counting.simulate_histogram(eta, plan, 20e-9, seed)
    b = counting.simulate_histogram(eta, plan, 20e-9, seed)
    assert np.array_equal(a.counts, b.counts)


# -------------------------------------------------------------- registry ---

@dataclass(frozen=True)
class Invariant:
    module: str
    name: str
    draw: Callable[[np.random.Generator], dict]
    check: Callable[..., None]


def _q(rng, fundamental=False):
    # the fit needs a resolvable beat, so the side amplitudes are kept away from zero
    q0, q2 = rng.uniform(0.05, 1, 2) if fundamental else rng.uniform(0, 1, 2)
    q1 = rng.uniform(0.5 * (q0 + q2), 2) if fundamental else rng.uniform(0, 2)
    return (float(q0), float(q1), float(q2)) if q0 + q1 + q2 > 0 else (1.0, 1.0, 1.0)


INVARIANTS = [
    Invariant("phys", "coherence lifetime round trip",
              lambda r: {"gamma_hz": float(10 ** r.uniform(5, 8))}, check_coherence_lifetime_roundtrip),
    Invariant("phys", "preset overrides not shadowed",
              lambda r: {"mass": float(r.uniform(1e-26, 5e-25)), "a_sc": float(r.uniform(1e-10, 1e-8)),
                         "zeta": float(r.uniform(0.5, 2)), "delta_gs": float(r.uniform(1e9, 1e11))},
              check_overrides_not_shadowed),
    Invariant("cloud", "densities non-negative",
              lambda r: {"cloud_kw": draw_cloud_kwargs(r), "points": r.uniform(-1, 1, (64, 3))},
              check_densities_nonnegative),
    Invariant("cloud", "column density integrates to N",
              lambda r: {"cloud_kw": draw_cloud_kwargs(r)}, check_column_normalisation),
    Invariant("cloud", "thermal peak decreases with T",
              lambda r: {"omegas": tuple(2 * math.pi * r.uniform(30, 400, 3)), "n_th": float(10 ** r.uniform(3, 6)),
                         "t1": float(r.uniform(1e-8, 5e-6)), "t2": float(r.uniform(1e-8, 5e-6))},
              check_thermal_peak_decreases_with_temperature),
    Invariant("cloud", "expansion from a single release",
              lambda r: {"cloud_kw": draw_cloud_kwargs(r), "t": float(r.uniform(0, 30e-3))},
              check_expand_single_release),
    Invariant("optics", "0 <= effective OD <= peak, non-increasing in R_p",
              lambda r: {"cloud_kw": draw_cloud_kwargs(r), "r_p": float(r.uniform(0.5e-6, 50e-6)),
                         "factor": float(r.uniform(1.2, 3))},
              check_effective_od_bounds_and_monotone),
    Invariant("optics", "OD independent of probe peak intensity",
              lambda r: {"d0_peak": float(10 ** r.uniform(-2, 3)), "width": float(r.uniform(1e-6, 3e-5)),
                         "r_p": float(r.uniform(1e-6, 3e-5)), "i0": float(10 ** r.uniform(-6, 6))},
              check_od_intensity_scale_invariant),
    Invariant("memory", "efficiencies in [0, 1]",
              lambda r: {"d": float(10 ** r.uniform(-3, 4)), "F": float(10 ** r.uniform(-2, 4))},
              check_efficiency_bounds),
    Invariant("memory", "backward efficiency increasing in d",
              lambda r: {"d1": float(10 ** r.uniform(-3, 3)), "d2": float(10 ** r.uniform(-3, 3)),
                         "F": float(10 ** r.uniform(-1, 2))},
              check_backward_increasing),
    Invariant("memory", "forward maximum at d = 4F",
              lambda r: {"F": float(10 ** r.uniform(-1, 3))}, check_forward_argmax),
    Invariant("memory", "efficiencies vanish as F -> 0",
              lambda r: {"d": float(10 ** r.uniform(-3, 3))}, check_efficiency_vanishes_as_F_to_zero),
    Invariant("decoherence", "decay models non-increasing",
              lambda r: {"par_kw": draw_decoherence_kwargs(r)}, check_models_nonincreasing),
    Invariant("decoherence", "lifetime independent of eta(0)",
              lambda r: {"par_kw": draw_decoherence_kwargs(r), "eta0": float(10 ** r.uniform(-3, 0))},
              check_lifetime_independent_of_eta0),
    Invariant("decoherence", "mixed lifetime between pure lifetimes",
              lambda r: {"par_kw": draw_decoherence_kwargs(r)}, check_mixed_lifetime_between_pure),
    Invariant("fwm", "phase mismatch increasing in angle",
              lambda r: {"th1": float(r.uniform(0, math.pi)), "th2": float(r.uniform(0, math.pi)),
                         "length": float(10 ** r.uniform(-6, -3))},
              check_mismatch_increasing),
    Invariant("fwm", "noise strength increasing in control and OD",
              lambda r: {"omega": float(10 ** r.uniform(6, 10)), "d": float(10 ** r.uniform(-1, 3)),
                         "factor": float(r.uniform(1.01, 3)), "convention": ("half", "full")[int(r.integers(2))]},
              check_noise_strength_increasing),
    Invariant("fwm", "threshold angle round trip",
              lambda r: {"length": float(10 ** r.uniform(-6.5, -2))}, check_threshold_roundtrip),
    Invariant("zeeman", "intensity periodic, even for q0 = q2",
              lambda r: {"q": _q(r), "omega": float(10 ** r.uniform(4, 8)), "t": float(r.uniform(0, 1e-4))},
              check_intensity_periodic),
    Invariant("zeeman", "visibility scale invariant",
              lambda r: {"i_max": float(10 ** r.uniform(-3, 3)), "ratio": float(r.uniform(0, 1)),
                         "k": float(10 ** r.uniform(-6, 6))},
              check_visibility_scale_invariant),
    Invariant("zeeman", "sinusoid fit recovers omega",
              lambda r: {"q": _q(r, fundamental=True), "b_gauss": float(r.uniform(0.1, 2)),
                         "tau_mag_periods": None if r.uniform() < 0.3 else float(r.uniform(2, 20))},
              check_oscillation_fit_recovers_omega),
    Invariant("counting", "estimators consistent",
              lambda r: {"eta": float(r.uniform(0.05, 0.9)), "n_bar": float(r.uniform(0.1, 1)),
                         "n_events": int(10 ** r.uniform(4, 5.5)), "seed": int(r.integers(2**63))},
              check_estimator_consistency),
    Invariant("counting", "estimators invariant under rescaling",
              lambda r: {"p_s": float(r.uniform(0, 0.5)), "p_n": float(r.uniform(0, 1e-3)),
                         "p_in": float(r.uniform(1e-3, 1)), "k": float(10 ** r.uniform(-3, 3))},
              check_estimators_rescaling),
    Invariant("counting", "tau_mag objective unimodal, exact on clean data",
              lambda r: {"f_bec": float(r.uniform(0.05, 1)), "tau_th": float(10 ** r.uniform(-6, -4)),
                         "tau_mag": float(10 ** r.uniform(-6, -4)), "t_s0": float(r.uniform(0, 5e-6))},
              check_fit_unimodal_and_exact),
    Invariant("counting", "simulation deterministic per seed",
              lambda r: {"eta": float(r.uniform(0, 1)), "seed": int(r.integers(2**63))},
              check_simulation_deterministic),
]

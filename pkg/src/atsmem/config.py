"""JSON run configuration: parsing, validation and object construction.

A config is one JSON object with the sections below; every section is
optional and unknown keys anywhere are rejected so typos fail loudly.

    species      preset name plus overrides of AtomSpecies fields
    trap         omega_x/omega_y/omega_z (rad/s), or tf_radius (m) for an
                 isotropic trap sized to the condensate
    cloud        n_total, temperature, f_bec or t_c, tof
    beam         r_p, or r_px and r_py (1/e^2 diameters, m)
    memory       protocol, recall, B or tau_p, line, backward_ratio
    decoherence  theta or theta_deg, model, tau_mag, t_s0, overrides
    measurement  MeasurementPlan fields plus eta_m and tau_p
    zeeman       b_field (T), g_f, q0/q1/q2, t_max, steps
    sweep        list of {variable, min, max, steps, log} or {variable, values}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .cloud import (CloudState, TrapConfig, condensate_fraction_from_temperature, expand,
                    isotropic_trap_for_tf_radius)
from .counting import MeasurementPlan
from .decoherence import DecoherenceParams
from .errors import ConfigError, DomainError
from .memory import MemoryConfig
from .optics import BeamProfile
from .phys import PRESETS, AtomSpecies, Line

SWEEP_VARIABLES = ("temperature", "beam_diameter", "bandwidth", "angle", "storage_time", "b_field", "n_bar_in")

_NUM = (int, float)
SCHEMA: dict[str, dict[str, Any]] = {
    "species": {"preset": str, "name": str, "mass": _NUM, "lines": dict, "Delta_gs": _NUM, "zeta": _NUM,
                "a_sc": _NUM, "g_F": dict, "im_a_sc": _NUM, "memory_line": str},
    "trap": {"omega_x": _NUM, "omega_y": _NUM, "omega_z": _NUM, "tf_radius": _NUM},
    "cloud": {"n_total": _NUM, "temperature": _NUM, "f_bec": _NUM, "t_c": _NUM, "tof": _NUM},
    "beam": {"r_p": _NUM, "r_px": _NUM, "r_py": _NUM},
    "memory": {"protocol": str, "recall": str, "B": _NUM, "tau_p": _NUM, "line": str, "backward_ratio": _NUM},
    "decoherence": {"theta": _NUM, "theta_deg": _NUM, "model": str, "tau_mag": _NUM, "t_s0": _NUM,
                    "tau_th": _NUM, "tau_rec": _NUM, "tau_col": _NUM, "im_a_sc": _NUM, "f_bec": _NUM,
                    "temperature": _NUM, "r_p": _NUM, "line": str},
    "measurement": {"n_bar_in": _NUM, "n_r": int, "n_cyc": int, "bin_width": _NUM, "window": list,
                    "span": list, "p_n": _NUM, "det_eff": _NUM, "eta_m": _NUM, "tau_p": _NUM},
    "zeeman": {"b_field": _NUM, "g_f": _NUM, "q0": _NUM, "q1": _NUM, "q2": _NUM, "t_max": _NUM, "steps": int},
    "sweep": list,
}
SWEEP_KEYS = {"variable": str, "min": _NUM, "max": _NUM, "steps": int, "log": bool, "values": list}
LINE_KEYS = {"wavelength", "Gamma", "alpha_sq", "degeneracy"}


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    values: tuple[float, ...]

    @classmethod
    def from_dict(cls, d: dict, path: str) -> SweepSpec:
        _check_keys(d, SWEEP_KEYS, path)
        var = d.get("variable")
        if var not in SWEEP_VARIABLES:
            raise ConfigError(f"variable must be one of {SWEEP_VARIABLES}, got {var!r}", f"{path}.variable")
        if "values" in d:
            if any(k in d for k in ("min", "max", "steps", "log")):
                raise ConfigError("give either values or min/max/steps", path)
            vals = d["values"]
            if not vals or not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in vals):
                raise ConfigError("values must be a non-empty list of numbers", f"{path}.values")
            return cls(var, tuple(float(v) for v in vals))
        for k in ("min", "max", "steps"):
            if k not in d:
                raise ConfigError("missing key", f"{path}.{k}")
        lo, hi, steps, log = float(d["min"]), float(d["max"]), d["steps"], d.get("log", False)
        if not lo < hi:
            raise ConfigError(f"min must be < max, got {lo}, {hi}", path)
        if steps < 2:
            raise ConfigError(f"steps must be >= 2, got {steps}", f"{path}.steps")
        if log:
            if lo <= 0:
                raise ConfigError("log sweep needs min > 0", f"{path}.min")
            vals = np.geomspace(lo, hi, steps)
        else:
            vals = np.linspace(lo, hi, steps)
        return cls(var, tuple(float(v) for v in vals))

    @classmethod
    def parse_cli(cls, text: str) -> SweepSpec:
        """``VAR=min:max:steps[:log]`` or ``VAR=v1,v2,...``."""
        try:
            var, rng = text.split("=", 1)
            if ":" in rng:
                parts = rng.split(":")
                d = {"variable": var, "min": float(parts[0]), "max": float(parts[1]), "steps": int(parts[2])}
                if len(parts) > 3:
                    if parts[3] != "log" or len(parts) > 4:
                        raise ValueError(parts[3])
                    d["log"] = True
            else:
                d = {"variable": var, "values": [float(v) for v in rng.split(",")]}
        except (ValueError, IndexError) as exc:
            raise ConfigError(f"cannot parse sweep {text!r}: {exc}", "--sweep") from None
        return cls.from_dict(d, "--sweep")


def _check_keys(d, allowed, path):
    if not isinstance(d, dict):
        raise ConfigError("expected an object", path)
    for k, v in d.items():
        if k not in allowed:
            raise ConfigError(f"unknown key (allowed: {sorted(allowed)})", f"{path}.{k}" if path else k)
        expected = allowed[k]
        ok = isinstance(v, expected) and not (expected in (_NUM, int) and isinstance(v, bool))
        if not ok:
            raise ConfigError(f"wrong type {type(v).__name__}", f"{path}.{k}" if path else k)


def _require(section: dict, key: str, path: str):
    if key not in section:
        raise ConfigError("missing key", f"{path}.{key}")
    return section[key]


@dataclass
class RunConfig:
    raw: dict
    species: AtomSpecies
    sweeps: list[SweepSpec] = field(default_factory=list)

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    def has(self, name: str) -> bool:
        return name in self.raw

    # builders -----------------------------------------------------------

    def base_f_bec(self, temperature: float) -> float:
        c = self.section("cloud")
        if "f_bec" in c:
            return float(c["f_bec"])
        if "t_c" in c:
            if temperature <= 0:
                return 1.0
            return condensate_fraction_from_temperature(temperature, float(c["t_c"]))
        raise ConfigError("give f_bec or t_c", "cloud.f_bec")

    def trap(self, n_bec: float | None = None) -> TrapConfig:
        t = self.section("trap")
        if not t:
            raise ConfigError("missing section", "trap")
        if "tf_radius" in t:
            if any(k in t for k in ("omega_x", "omega_y", "omega_z")):
                raise ConfigError("give either tf_radius or trap frequencies", "trap")
            if n_bec is None:
                c = self.section("cloud")
                T = float(_require(c, "temperature", "cloud"))
                n_bec = float(_require(c, "n_total", "cloud")) * self.base_f_bec(T)
            if not n_bec > 0:
                raise ConfigError("tf_radius needs a condensate (n_total * f_bec > 0)", "trap.tf_radius")
            return isotropic_trap_for_tf_radius(n_bec, float(t["tf_radius"]), self.species)
        return TrapConfig(*(float(_require(t, k, "trap")) for k in ("omega_x", "omega_y", "omega_z")))

    def cloud(self, temperature: float | None = None, in_trap: bool = False) -> CloudState:
        """Cloud at ``temperature`` (default: config value), expanded by ``cloud.tof`` unless ``in_trap``."""
        c = self.section("cloud")
        if not c:
            raise ConfigError("missing section", "cloud")
        n_total = float(_require(c, "n_total", "cloud"))
        T = float(_require(c, "temperature", "cloud")) if temperature is None else float(temperature)
        cloud = CloudState(n_total=n_total, temperature=T, f_bec=self.base_f_bec(T), trap=self.trap(),
                           species=self.species)
        tof = float(c.get("tof", 0.0))
        return cloud if in_trap or tof == 0 else expand(cloud, tof)

    def beam(self, r_p: float | None = None) -> BeamProfile:
        b = self.section("beam")
        if r_p is not None:
            return BeamProfile.circular(r_p)
        if "r_p" in b:
            return BeamProfile.circular(float(b["r_p"]))
        return BeamProfile(float(_require(b, "r_px", "beam")), float(_require(b, "r_py", "beam")))

    def memory(self) -> MemoryConfig:
        m = self.section("memory")
        kw = {k: m[k] for k in ("protocol", "recall", "B", "tau_p") if k in m}
        if "B" not in kw and "tau_p" not in kw:
            raise ConfigError("give B or tau_p", "memory.B")
        return MemoryConfig(**kw)

    def line(self) -> str | None:
        return self.section("memory").get("line")

    def theta(self) -> float:
        d = self.section("decoherence")
        if "theta" in d and "theta_deg" in d:
            raise ConfigError("give theta or theta_deg, not both", "decoherence")
        if "theta_deg" in d:
            return math.radians(float(d["theta_deg"]))
        return float(_require(d, "theta", "decoherence"))

    def decoherence(self, cloud: CloudState | None = None, **overrides) -> DecoherenceParams:
        d = self.section("decoherence")
        line = d.get("line", self.line())
        kw = dict(theta=self.theta(), wavelength=self.species.lambda_probe(line), mass=self.species.mass,
                  im_a_sc=d.get("im_a_sc", self.species.im_a_sc))
        if cloud is not None:
            kw.update(temperature=cloud.temperature, f_bec=cloud.f_bec,
                      rho_b=cloud.peak_bec_density if cloud.has_condensate else None)
        if self.has("beam"):
            kw["r_p"] = self.beam().r_px
        for k in ("tau_mag", "t_s0", "tau_th", "tau_rec", "tau_col", "f_bec", "temperature", "r_p"):
            if k in d:
                kw[k] = float(d[k])
        kw.update(overrides)
        return DecoherenceParams(**kw)

    def measurement(self) -> MeasurementPlan:
        m = {k: v for k, v in self.section("measurement").items() if k not in ("eta_m", "tau_p")}
        for k in ("window", "span"):
            if k in m:
                if len(m[k]) != 2:
                    raise ConfigError("expected [start, end]", f"measurement.{k}")
                m[k] = (float(m[k][0]), float(m[k][1]))
        return MeasurementPlan(**m)


def _build_species(sec: dict) -> AtomSpecies:
    sec = dict(sec)
    preset = sec.pop("preset", "rb87")
    if preset not in PRESETS:
        raise ConfigError(f"unknown preset {preset!r}; have {sorted(PRESETS)}", "species.preset")
    base = PRESETS[preset]()
    if "lines" in sec:
        lines = dict(base.lines)
        for name, ld in sec.pop("lines").items():
            _check_keys(ld, {k: _NUM for k in LINE_KEYS}, f"species.lines.{name}")
            cur = lines.get(name)
            merged = {**(cur.__dict__ if cur else {}), **{k: float(v) for k, v in ld.items()}}
            missing = LINE_KEYS - merged.keys()
            if missing:
                raise ConfigError(f"new line needs {sorted(missing)}", f"species.lines.{name}")
            lines[name] = Line(**merged)
        sec["lines"] = lines
    if "g_F" in sec:
        sec["g_F"] = {**base.g_F, **{int(k): float(v) for k, v in sec["g_F"].items()}}
    return base.with_overrides(**sec)


def _validate_physics(raw: dict):
    c = raw.get("cloud", {})
    if "temperature" in c and c["temperature"] < 0:
        raise ConfigError("temperature must be non-negative", "cloud.temperature")
    if "f_bec" in c and not 0 <= c["f_bec"] <= 1:
        raise ConfigError("f_bec must lie in [0, 1]", "cloud.f_bec")
    if "tof" in c and c["tof"] < 0:
        raise ConfigError("tof must be non-negative", "cloud.tof")
    if "n_total" in c and c["n_total"] < 0:
        raise ConfigError("n_total must be non-negative", "cloud.n_total")
    for sec, key in (("beam", "r_p"), ("beam", "r_px"), ("beam", "r_py"), ("memory", "B"), ("memory", "tau_p"),
                     ("cloud", "t_c"), ("trap", "tf_radius")):
        v = raw.get(sec, {}).get(key)
        if v is not None and not v > 0:
            raise ConfigError("must be positive", f"{sec}.{key}")
    m = raw.get("measurement", {})
    if "eta_m" in m and not 0 <= m["eta_m"] <= 1:
        raise ConfigError("eta_m must lie in [0, 1]", "measurement.eta_m")


def load_config(source: str | Path | dict | None) -> RunConfig:
    """Parse and validate a config file (or an already-loaded dict)."""
    if source is None:
        raw: dict = {}
    elif isinstance(source, dict):
        raw = source
    else:
        try:
            raw = json.loads(Path(source).read_text())
        except FileNotFoundError:
            raise ConfigError(f"no such file {source}", "--config") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "--config") from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", "")
    for name, val in raw.items():
        if name not in SCHEMA:
            raise ConfigError(f"unknown section (allowed: {sorted(SCHEMA)})", name)
        if name == "sweep":
            if not isinstance(val, list):
                raise ConfigError("expected a list", "sweep")
        else:
            _check_keys(val, SCHEMA[name], name)
    _validate_physics(raw)
    try:
        species = _build_species(raw.get("species", {}))
    except (TypeError, DomainError) as exc:
        raise ConfigError(str(exc), "species") from None
    sweeps = [SweepSpec.from_dict(s, f"sweep[{i}]") for i, s in enumerate(raw.get("sweep", []))]
    return RunConfig(raw=raw, species=species, sweeps=sweeps)

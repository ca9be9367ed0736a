"""Command-line front end: parameter sweeps, simulations and fits emitted as CSV or JSON.

Every command is deterministic given (config, seed). Sweep grid points are
evaluated in a thread pool capped by ``ATSMEM_THREADS`` and written in grid
order; stochastic commands draw per-point streams from SeedSequence([seed, index]).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import counting, decoherence, fwm, memory, optics, zeeman
from .config import RunConfig, SweepSpec, load_config
from .errors import ConfigError, ConvergenceError, DomainError

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE = 0, 2, 3
DEFAULT_B_FIELD = 0.8 * zeeman.GAUSS
DEFAULT_FWM_STEPS = 31

COMMANDS = ("predict-od", "lifetime", "fwm-compare", "zeeman", "simulate-counts", "fit")
ALLOWED_SWEEPS = {
    "predict-od": {"temperature", "beam_diameter"},
    "lifetime": {"temperature", "angle"},
    "fwm-compare": {"bandwidth"},
    "zeeman": {"b_field", "storage_time"},
    "simulate-counts": {"n_bar_in"},
    "fit": set(),
}


# ---------------------------------------------------------------- output ---

def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else _fmt(v)
    return v


def render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    writer.writerow(cols)
    for r in rows:
        writer.writerow([_fmt(r[c]) for c in cols])
    return buf.getvalue()


def render_json(rows: list[dict]) -> str:
    return json.dumps(_jsonable(rows), indent=1) + "\n"


# ----------------------------------------------------------------- grids ---

def thread_count() -> int:
    env = os.environ.get("ATSMEM_THREADS")
    if env is None:
        return max(1, min(8, os.cpu_count() or 1))
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"expected a positive integer, got {env!r}", "ATSMEM_THREADS") from None
    if n < 1:
        raise ConfigError(f"expected a positive integer, got {n}", "ATSMEM_THREADS")
    return n


def build_grid(sweeps: list[SweepSpec], allowed: set[str], command: str) -> list[dict]:
    """Cartesian product of sweeps as a list of {variable: value}, first sweep slowest."""
    seen = set()
    for s in sweeps:
        if s.variable not in allowed:
            raise ConfigError(f"{command} cannot sweep {s.variable!r} (allowed: {sorted(allowed)})", "sweep")
        if s.variable in seen:
            raise ConfigError(f"variable {s.variable!r} swept twice", "sweep")
        seen.add(s.variable)
    if not sweeps:
        return []
    names = [s.variable for s in sweeps]
    return [dict(zip(names, combo)) for combo in itertools.product(*(s.values for s in sweeps))]


def run_grid(fn, grid: list[dict]) -> list[dict]:
    """Evaluate ``fn(index, point)`` over ``grid``; results keep grid order."""
    n = thread_count()
    if n == 1 or len(grid) <= 1:
        return [fn(i, p) for i, p in enumerate(grid)]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, range(len(grid)), grid))


def point_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


# -------------------------------------------------------------- commands ---

def _memory_species(cfg: RunConfig):
    line = cfg.line()
    return cfg.species if line is None else cfg.species.with_overrides(memory_line=line)


def cmd_predict_od(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    grid = build_grid(cfg.sweeps, ALLOWED_SWEEPS["predict-od"], "predict-od") or [{}]
    mem = cfg.memory()
    species = _memory_species(cfg)
    B = mem.bandwidth
    F = memory.ats_factor(B, species)
    line = cfg.line()

    def point(i, p):
        cloud = cfg.cloud(p.get("temperature"))
        beam = cfg.beam(p["beam_diameter"]) if "beam_diameter" in p else cfg.beam()
        d = optics.effective_od(beam, cloud, line=line)
        d0 = optics.peak_od(cloud, line=line) if cloud.n_total > 0 else 0.0
        return {"temperature": cloud.temperature, "f_bec": cloud.f_bec, "beam_diameter": beam.r_px,
                "peak_od": d0, "effective_od": d, "B_Hz": B, "F": F,
                "eta_forward": memory.eta_forward(d, F), "eta_backward": memory.eta_backward(d, F)}

    return run_grid(point, grid), {"line": species.memory_line}


def cmd_lifetime(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    grid = build_grid(cfg.sweeps, ALLOWED_SWEEPS["lifetime"], "lifetime") or [{}]
    model = cfg.section("decoherence").get("model", "predict")
    if model not in ("predict", "fit"):
        raise ConfigError(f"model must be 'predict' or 'fit', got {model!r}", "decoherence.model")

    def point(i, p):
        over = {}
        if "angle" in p:
            over["theta"] = math.radians(p["angle"])
        if cfg.has("cloud"):
            # collision density is that of the trapped condensate
            cloud = cfg.cloud(p.get("temperature"), in_trap=True)
            params = cfg.decoherence(cloud, **over)
        else:
            if "temperature" in p:
                over["temperature"] = p["temperature"]
            params = cfg.decoherence(None, **over)
        times = decoherence.component_times(params, model)
        row = {"temperature": params.temperature, "theta_deg": math.degrees(params.theta), "f_bec": params.f_bec}
        row.update(times)
        row["lifetime"] = decoherence.memory_lifetime(params, model)
        return row

    return run_grid(point, grid), {"model": model}


def cmd_fwm_compare(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    grid = build_grid(cfg.sweeps, ALLOWED_SWEEPS["fwm-compare"], "fwm-compare")
    species = _memory_species(cfg)
    if grid:
        B_values = [p["bandwidth"] for p in grid]
    else:
        lo, hi = fwm.NOISE_RANGE_F
        B_values = list(np.linspace(lo, hi, DEFAULT_FWM_STEPS) * species.Gamma_eg / (2 * math.pi))
    rows = fwm.protocol_noise_curve(B_values, species, args.gamma_convention)
    return rows, {"line": species.memory_line, "gamma_convention": args.gamma_convention}


def cmd_zeeman(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    z = cfg.section("zeeman")
    q = zeeman.SpinWaveAmplitudes(float(z.get("q0", 1.0)), float(z.get("q1", 2.0)), float(z.get("q2", 1.0)))
    g_f = float(z.get("g_f", 0.5))
    sweeps = list(cfg.sweeps)
    if "t_max" in z and not any(s.variable == "storage_time" for s in sweeps):
        sweeps.append(SweepSpec.from_dict({"variable": "storage_time", "min": 0.0, "max": z["t_max"],
                                           "steps": z.get("steps", 201)}, "zeeman"))
    grid = build_grid(sweeps, ALLOWED_SWEEPS["zeeman"], "zeeman") or [{}]
    decay = None
    if "tau_mag" in cfg.section("decoherence"):
        decay = cfg.decoherence(cfg.cloud(in_trap=True) if cfg.has("cloud") else None, t_s0=0.0)
    vis = zeeman.interference_visibility(q)

    def point(i, p):
        b = p.get("b_field", float(z.get("b_field", DEFAULT_B_FIELD)))
        row = {"b_field_T": b, "b_field_G": b / zeeman.GAUSS,
               "splitting": zeeman.zeeman_splitting(g_f, b),
               "period": zeeman.oscillation_period(b), "visibility": vis}
        if "storage_time" in p:
            t = p["storage_time"]
            row["storage_time"] = t
            row["intensity"] = zeeman.retrieved_intensity(t, q, zeeman.beat_frequency(b), decay)
        return row

    return run_grid(point, grid), {"amplitudes": [q.q0, q.q1, q.q2], "g_f": g_f}


def _counts_inputs(cfg: RunConfig):
    m = cfg.section("measurement")
    if "eta_m" not in m:
        raise ConfigError("missing key", "measurement.eta_m")
    if "tau_p" in m:
        tau_p = float(m["tau_p"])
    elif cfg.has("memory"):
        tau_p = cfg.memory().duration
    else:
        raise ConfigError("give measurement.tau_p or a memory section", "measurement.tau_p")
    return float(m["eta_m"]), tau_p, cfg.measurement()


def cmd_simulate_counts(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    eta_m, tau_p, plan = _counts_inputs(cfg)
    grid = build_grid(cfg.sweeps, ALLOWED_SWEEPS["simulate-counts"], "simulate-counts")
    if not grid:
        res = counting.measure(eta_m, plan, tau_p, point_seed(args.seed, 0))
        hists = res.histograms
        rows = [{"t_start": a["t_start"], "t_end": a["t_end"], "input": a["count"],
                 "signal": b["count"], "noise": c["count"]}
                for a, b, c in zip(*(hists[k].rows() for k in ("input", "signal", "noise")))]
        extra = {"n_events": plan.n_events, "p_in": res.p_in, "p_s": res.p_s, "p_n": res.p_n,
                 "eta_raw": res.efficiency.raw, "eta": res.efficiency.clamped, "snr": res.snr.snr,
                 "error_probability": res.snr.error_probability}
        return rows, {"estimates": extra}

    def point(i, p):
        pl = replace(plan, n_bar_in=p["n_bar_in"])
        res = counting.measure(eta_m, pl, tau_p, point_seed(args.seed, i))
        return {"n_bar_in": pl.n_bar_in, "p_in": res.p_in, "p_s": res.p_s, "p_n": res.p_n,
                "eta_raw": res.efficiency.raw, "eta": res.efficiency.clamped,
                "eta_sigma": counting.binomial_sigma(res.p_s, pl.n_events) / res.p_in if res.p_in > 0 else math.inf,
                "snr": res.snr.snr, "error_probability": res.snr.error_probability}

    return run_grid(point, grid), {"n_events": plan.n_events}


FIXTURE = "decay_fixture.csv"
FIXTURE_PARAMS = "decay_fixture.json"


def load_decay_csv(path) -> np.ndarray:
    text = Path(path).read_text() if not hasattr(path, "read_text") else path.read_text()
    reader = csv.DictReader(io.StringIO(text))
    try:
        data = [(float(r["storage_time"]), float(r["efficiency"])) for r in reader]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"expected columns storage_time,efficiency: {exc}", "--data") from None
    return np.array(data)


def fixture_files():
    base = resources.files("atsmem") / "data"
    return base / FIXTURE, json.loads((base / FIXTURE_PARAMS).read_text())


def cmd_fit(cfg: RunConfig, args) -> tuple[list[dict], dict]:
    if args.data:
        if not Path(args.data).exists():
            raise ConfigError(f"no such file {args.data}", "--data")
        data = load_decay_csv(args.data)
        source = str(args.data)
        fixed = {}
    else:
        path, fixed = fixture_files()
        data = load_decay_csv(path)
        source = f"bundled:{FIXTURE}"
    d = cfg.section("decoherence")
    f_bec = float(d.get("f_bec", fixed.get("f_bec", math.nan)))
    t_s0 = float(d.get("t_s0", fixed.get("t_s0", math.nan)))
    if "tau_th" in d or "tau_th" in fixed:
        tau_th = float(d.get("tau_th", fixed.get("tau_th")))
    else:
        tau_th = decoherence.tau_thermal(cfg.decoherence(None))
    for name, v in (("f_bec", f_bec), ("t_s0", t_s0)):
        if math.isnan(v):
            raise ConfigError("missing key (required with --data)", f"decoherence.{name}")
    res = counting.fit_tau_mag(data, f_bec, tau_th, t_s0)
    p = decoherence.DecoherenceParams(theta=math.pi / 2, wavelength=1.0, mass=1.0, f_bec=f_bec,
                                      tau_th=tau_th, t_s0=t_s0, tau_mag=res.tau_mag)
    row = {"tau_mag": res.tau_mag, "eta0": res.eta0, "residual": res.residual, "n_points": len(data),
           "f_bec": f_bec, "tau_th": tau_th, "t_s0": t_s0,
           "lifetime": decoherence.memory_lifetime(p, "fit")}
    return [row], {"data": source}


HANDLERS = {
    "predict-od": cmd_predict_od,
    "lifetime": cmd_lifetime,
    "fwm-compare": cmd_fwm_compare,
    "zeeman": cmd_zeeman,
    "simulate-counts": cmd_simulate_counts,
    "fit": cmd_fit,
}


# ------------------------------------------------------------------ main ---

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    common.add_argument("--out", type=Path, help="output file (default stdout); metadata goes to <out>.meta.json")
    common.add_argument("--json", action="store_true", help="emit a JSON record array instead of CSV")
    common.add_argument("--gamma-convention", choices=("half", "full"), default="half",
                        help="optical decay rate in the FWM exponent: Gamma/2 (half) or Gamma (full)")
    common.add_argument("--sweep", action="append", default=[], metavar="VAR=MIN:MAX:STEPS[:log]",
                        help="add or replace a sweep; repeatable")

    parser = argparse.ArgumentParser(prog="atsmem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "predict-od": "effective optical depth and efficiency over a (T, R_p) grid",
        "lifetime": "decoherence times and 1/e memory lifetime over T or angle",
        "fwm-compare": "four-wave-mixing noise of optimal ATS vs EIT memories",
        "zeeman": "Zeeman beat period and retrieved-intensity interference",
        "simulate-counts": "simulated photon-counting histograms and estimators",
        "fit": "fit tau_mag to a storage-time scan",
    }
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "fit":
            sp.add_argument("--data", type=Path, help="CSV with columns storage_time,efficiency "
                                                      "(default: bundled synthetic fixture)")
    return parser


def _resolve(cfg: RunConfig, args) -> RunConfig:
    extra = [SweepSpec.parse_cli(s) for s in args.sweep]
    names = {s.variable for s in extra}
    cfg.sweeps = [s for s in cfg.sweeps if s.variable not in names] + extra
    return cfg


def metadata(cfg: RunConfig, args, extra: dict) -> dict:
    raw = dict(cfg.raw)
    raw["species"] = cfg.species.to_dict()
    raw["sweep"] = [{"variable": s.variable, "values": list(s.values)} for s in cfg.sweeps]
    return _jsonable({"command": args.command, "seed": args.seed, "gamma_convention": args.gamma_convention,
                      "config": raw, **extra})


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if not 0 <= args.seed < 2**64:
        print("atsmem: config error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _resolve(load_config(args.config), args)
        rows, extra = HANDLERS[args.command](cfg, args)
    except ConvergenceError as exc:
        print(f"atsmem: convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ConfigError, DomainError) as exc:
        print(f"atsmem: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = render_json(rows) if args.json else render_csv(rows)
    meta = metadata(cfg, args, extra)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
        Path(str(args.out) + ".meta.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text)
        sys.stderr.write(json.dumps(meta, sort_keys=True) + "\n")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

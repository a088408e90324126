"""Command-line front end.

  dressedsim <scenario> <action> --config FILE [--seed N] [--out FILE]
                                 [--threads N] [--quiet]

Scenarios: coherence, floquet, optimum, gate1q, gate2q, sensing, clock.
Actions: run (compute, write CSV + JSON sidecar) and validate (schema and
budget check only). Exit codes: 0 success, 2 config error, 3 numeric
failure. Thread count falls back to the DRESSEDSIM_THREADS environment
variable; 0 means one worker per CPU. Outputs are deterministic for a
fixed config and seed, independent of the thread count.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Callable

from .configio import ConfigError, parse_config, write_csv, write_json_meta
from .control import (CIRCULAR, ControlScheme, DOUBLE_DRIVE, NoiseModel,
                      VARIANTS, optimal_detuning)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

TWO_PI = 2.0 * math.pi


# ---- schema machinery -------------------------------------------------------

@dataclass
class Field:
    parse: Callable[[str], object]
    required: bool = False
    default: object = None


def _float(lo=None, hi=None, strict=False):
    def parse(s: str) -> float:
        try:
            v = float(s)
        except ValueError:
            raise ConfigError(f"not a number: {s!r}") from None
        if not math.isfinite(v):
            raise ConfigError(f"must be finite: {s!r}")
        if lo is not None and (v <= lo if strict else v < lo):
            raise ConfigError(f"value {v} below minimum {lo}")
        if hi is not None and v > hi:
            raise ConfigError(f"value {v} above maximum {hi}")
        return v
    return parse


def _hz(lo=None, strict=False):
    base = _float(lo=lo, strict=strict)

    def parse(s: str) -> float:
        return TWO_PI * base(s)
    return parse


def _int(lo=None, hi=None):
    def parse(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise ConfigError(f"not an integer: {s!r}") from None
        if lo is not None and v < lo:
            raise ConfigError(f"value {v} below minimum {lo}")
        if hi is not None and v > hi:
            raise ConfigError(f"value {v} above maximum {hi}")
        return v
    return parse


def _choice(*opts):
    def parse(s: str) -> str:
        if s not in opts:
            raise ConfigError(f"{s!r} not one of {sorted(opts)}")
        return s
    return parse


def _list_of(item_parse):
    def parse(s: str) -> list:
        parts = [p.strip() for p in s.split(",") if p.strip()]
        if not parts:
            raise ConfigError("empty list")
        return [item_parse(p) for p in parts]
    return parse


def apply_schema(raw: dict, schema: dict, scenario: str) -> dict:
    for key in raw:
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for scenario {scenario}")
    out = {}
    for key, field in schema.items():
        if key in raw:
            try:
                out[key] = field.parse(raw[key])
            except ConfigError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        elif field.required:
            raise ConfigError(f"missing required key {key!r}")
        else:
            out[key] = field.default
    return out


_COMMON = {
    "seed": Field(_int(lo=0), default=0),
    "budget.max_grid_points": Field(_int(lo=1), default=64),
}

_NOISE = {
    "noise.t2_star_s": Field(_float(lo=0.0, strict=True), required=True),
    "noise.sigma_eps": Field(_float(lo=0.0), default=0.005),
    "noise.n_realizations": Field(_int(lo=1), default=2048),
}

_SCHEME = {
    "scheme.variant": Field(_choice(*VARIANTS), required=True),
    "scheme.omega1_hz": Field(_hz(lo=0.0, strict=True), required=True),
    "scheme.omega2_hz": Field(_hz(lo=0.0), default=0.0),
    "scheme.detuning": Field(_choice("optimal", "resonant", "magic"),
                             default="optimal"),
    "scheme.mod_freq_hz": Field(_hz(lo=0.0, strict=True), default=None),
    "scheme.phase_rad": Field(_float(), default=0.0),
}

SCHEMAS = {
    "coherence": {
        **_SCHEME, **_NOISE, **_COMMON,
        "horizon_s": Field(_float(lo=0.0, strict=True), default=None),
        "n_points": Field(_int(lo=16), default=1536),
    },
    "floquet": {
        "scheme.omega1_hz": Field(_hz(lo=0.0, strict=True), required=True),
        "scheme.omega2_hz": Field(_hz(lo=0.0, strict=True), required=True),
        "scheme.detuning": Field(_choice("optimal", "resonant", "magic"),
                                 default="optimal"),
        "scheme.mod_freq_hz": Field(_hz(lo=0.0, strict=True), default=None),
        "noise.t2_star_s": Field(_float(lo=0.0, strict=True), required=True),
        "noise.sigma_eps_grid": Field(_list_of(_float(lo=0.0)), required=True),
        "quad_order": Field(_int(lo=3), default=21),
        **_COMMON,
    },
    "optimum": {
        "sigma_eps_grid": Field(_list_of(_float(lo=0.0, strict=True)),
                                required=True),
        "t2_star_s": Field(_float(lo=0.0, strict=True), default=1.0),
        **_COMMON,
    },
    "gate1q": {
        "ratios": Field(_list_of(_float(lo=0.0, strict=True)), required=True),
        "n_values": Field(_list_of(_int(lo=1)), required=True),
        "steps_per_period": Field(_int(lo=16), default=512),
        **_COMMON,
    },
    "gate2q": {
        "nu_hz": Field(_hz(lo=0.0, strict=True), default=TWO_PI * 98800.0),
        "eta": Field(_float(lo=0.0, hi=1.0, strict=True), default=0.033),
        "nbar": Field(_float(lo=0.0), default=0.6),
        "n_fock": Field(_int(lo=4), default=30),
        "omega2_grid_hz": Field(_list_of(_float(lo=0.0, strict=True)),
                                required=True),
        "substeps": Field(_int(lo=64), default=1024),
        **_COMMON,
    },
    "sensing": {
        "omega_s_hz": Field(_hz(lo=0.0, strict=True), required=True),
        "omega1_grid_hz": Field(_list_of(_float(lo=0.0, strict=True)),
                                required=True),
        **_NOISE,
        "probe.g_frac_circ": Field(_float(lo=0.0, strict=True), default=1e-3),
        "probe.g_frac_dd": Field(_float(lo=0.0, strict=True), default=0.05),
        **_COMMON,
    },
    "clock": {
        "omega1_grid_scaled": Field(_list_of(_float(lo=0.0, strict=True)),
                                    required=True),
        "noise.t2_star_s": Field(_float(lo=0.0, strict=True), default=1.0),
        "noise.sigma_eps": Field(_float(lo=0.0), default=0.005),
        "noise.n_realizations": Field(_int(lo=1), default=2048),
        **_COMMON,
    },
}

# omega grids arrive in Hz; convert after list parsing
for _sc, _key in (("gate2q", "omega2_grid_hz"), ("sensing", "omega1_grid_hz")):
    _inner = SCHEMAS[_sc][_key].parse

    def _scaled(s, _inner=_inner):
        return [TWO_PI * v for v in _inner(s)]

    SCHEMAS[_sc][_key] = Field(_scaled, required=True)


def _pmap(fn, items, threads):
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ThreadPoolExecutor
    workers = threads if threads > 0 else (os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items))


def _scheme_from(cfg: dict) -> ControlScheme:
    variant = cfg.get("scheme.variant", CIRCULAR)
    w1 = cfg["scheme.omega1_hz"]
    w2 = cfg["scheme.omega2_hz"]
    mod = cfg.get("scheme.mod_freq_hz")
    try:
        if w2 == 0.0:
            mod = 0.0 if mod is None else mod
        elif mod is None:
            det = cfg["scheme.detuning"]
            if det == "resonant":
                mod = w1
            elif det == "magic":
                mod = 2.0 * w1 if variant == CIRCULAR \
                    else w1 + w2 / math.sqrt(2.0)
            else:
                mod = optimal_detuning(variant, w1, w2)
        return ControlScheme(variant, w1, w2, mod,
                             cfg.get("scheme.phase_rad", 0.0))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# ---- runners ----------------------------------------------------------------

def _points_coherence(cfg):
    return 1


def run_coherence(cfg, seed, threads):
    from .ensemble import memory_fidelity
    scheme = _scheme_from(cfg)
    noise = NoiseModel.from_t2_star(cfg["noise.t2_star_s"],
                                    cfg["noise.sigma_eps"],
                                    cfg["noise.n_realizations"], seed)
    curve = memory_fidelity(scheme, noise, horizon=cfg["horizon_s"],
                            n_points=cfg["n_points"])
    rows = list(zip(curve.times, curve.fidelity, curve.envelope))
    meta = {"t2_s": curve.t2, "beyond_horizon": curve.beyond_horizon,
            "multi_crossing": curve.multi_crossing, **curve.meta}
    summary = (f"T2 = {curve.t2:.6g} s"
               + (" (beyond horizon)" if curve.beyond_horizon else "")
               + (" [multiple threshold crossings]"
                  if curve.multi_crossing else ""))
    return ["time_s", "fidelity", "envelope"], rows, meta, summary


def _points_floquet(cfg):
    return len(cfg["noise.sigma_eps_grid"])


def run_floquet(cfg, seed, threads):
    from .floquet import gap_variance
    scheme = _scheme_from({**cfg, "scheme.variant": CIRCULAR,
                           "scheme.phase_rad": 0.0})
    t2_star = cfg["noise.t2_star_s"]
    sigma_delta = math.sqrt(2.0) / t2_star

    def point(se):
        stats = gap_variance(scheme, NoiseModel(sigma_delta, se, 1, seed),
                             quad_order=cfg["quad_order"])
        return se, stats.mean_gap, stats.var_gap, stats.t2_bar

    rows = _pmap(point, cfg["noise.sigma_eps_grid"], threads)
    meta = {"omega1_rad_s": scheme.omega1, "omega2_rad_s": scheme.omega2,
            "mod_freq_rad_s": scheme.mod_freq}
    summary = (f"gap statistics at {len(rows)} noise widths; "
               f"t2_bar range [{min(r[3] for r in rows):.6g}, "
               f"{max(r[3] for r in rows):.6g}] s")
    return (["sigma_eps", "mean_gap_rad_s", "var_gap", "t2_bar_s"],
            rows, meta, summary)


def _points_optimum(cfg):
    return len(cfg["sigma_eps_grid"])


def run_optimum(cfg, seed, threads):
    from .floquet import global_optimum
    t2s = cfg["t2_star_s"]

    def point(se):
        o = global_optimum(se, t2s)
        return (se, o.t2_opt, o.omega1_opt, o.omega2_opt,
                o.t2_single, o.omega1_single)

    rows = _pmap(point, cfg["sigma_eps_grid"], threads)
    first = rows[0]
    meta = {"t2_star_s": t2s}
    summary = (f"sigma_eps={first[0]:g}: T2_opt = {first[1]:.6g} s at "
               f"omega1 = {first[2]:.6g}, omega2 = {first[3]:.6g} rad/s "
               f"(single-drive baseline {first[4]:.6g} s)")
    return (["sigma_eps", "t2_opt_s", "omega1_opt_rad_s", "omega2_opt_rad_s",
             "t2_single_s", "omega1_single_rad_s"], rows, meta, summary)


def _points_gate1q(cfg):
    return len(cfg["ratios"]) * len(cfg["n_values"])


def run_gate1q(cfg, seed, threads):
    from .gates import gate1q_infidelity
    steps = cfg["steps_per_period"]
    pts = [(r, n) for r in cfg["ratios"] for n in cfg["n_values"]]

    def point(p):
        r, n = p
        return (r, float(n),
                gate1q_infidelity(r, n, CIRCULAR, steps),
                gate1q_infidelity(r, n, DOUBLE_DRIVE, steps))

    rows = _pmap(point, pts, threads)
    worst = max(rows, key=lambda r: r[3])
    meta = {"steps_per_period": steps}
    summary = (f"{len(rows)} gate settings; worst amplitude-modulated "
               f"infidelity {worst[3]:.3e} at ratio {worst[0]:g}, n {worst[1]:g}")
    return (["ratio", "n", "infidelity_circular", "infidelity_double"],
            rows, meta, summary)


def _points_gate2q(cfg):
    return 2 * len(cfg["omega2_grid_hz"])


def run_gate2q(cfg, seed, threads):
    from .gates import IonGateConfig, gate2q_simulate

    def point(w2):
        res = []
        for pol in ("linear", "circular"):
            g = gate2q_simulate(
                IonGateConfig(omega2=w2, polarization=pol, nu=cfg["nu_hz"],
                              eta=cfg["eta"], nbar=cfg["nbar"],
                              n_fock=cfg["n_fock"]),
                substeps=cfg["substeps"])
            res.append(g.infidelity)
        return (w2, res[0], res[1])

    rows = _pmap(point, cfg["omega2_grid_hz"], threads)
    best = min(rows, key=lambda r: r[2])
    meta = {"nu_rad_s": cfg["nu_hz"], "eta": cfg["eta"], "nbar": cfg["nbar"],
            "n_fock": cfg["n_fock"]}
    summary = (f"best circular-tone infidelity {best[2]:.3e} at "
               f"omega2 = {best[0]:.6g} rad/s")
    return (["omega2_rad_s", "infidelity_linear", "infidelity_circular"],
            rows, meta, summary)


def _points_sensing(cfg):
    return 2 * len(cfg["omega1_grid_hz"]) + 1


def run_sensing(cfg, seed, threads):
    from .sensing import sensing_scan
    noise = NoiseModel.from_t2_star(cfg["noise.t2_star_s"],
                                    cfg["noise.sigma_eps"],
                                    cfg["noise.n_realizations"], seed)
    res = sensing_scan(cfg["omega1_grid_hz"], cfg["omega_s_hz"], noise,
                       g_frac_circ=cfg["probe.g_frac_circ"],
                       g_frac_dd=cfg["probe.g_frac_dd"],
                       map_fn=lambda f, xs: _pmap(f, xs, threads))
    circ = [r[1] for r in res.rows if not math.isnan(r[1])]
    meta = {"alpha_ref": res.alpha_ref, "t2_ref_s": res.t2_ref,
            "records": res.records}
    summary = (f"{len(res.rows)} carriers; best circular gain "
               f"{max(circ) if circ else float('nan'):.4g} "
               f"(reference alpha {res.alpha_ref:.4f}, "
               f"T2 {res.t2_ref:.6g} s)")
    return (["omega1_rad_s", "gain_circular", "gain_doubledrive"],
            res.rows, meta, summary)


def _points_clock(cfg):
    return 2 * len(cfg["omega1_grid_scaled"])


def run_clock(cfg, seed, threads):
    from .sensing import clock_comparison, predicted_clock_omega1
    t2s = cfg["noise.t2_star_s"]
    se = cfg["noise.sigma_eps"]
    noise = NoiseModel.from_t2_star(t2s, se, cfg["noise.n_realizations"], seed)
    grid = [x / t2s for x in cfg["omega1_grid_scaled"]]
    res = clock_comparison(grid, noise,
                           map_fn=lambda f, xs: _pmap(f, xs, threads))
    rows = [(w1 * t2s, t2_dd / t2s, t2_ci / t2s)
            for (w1, t2_dd, t2_ci) in res.rows]
    meta = {"ratio": res.ratio,
            "best_t2_dd_scaled": res.best_t2_dd / t2s,
            "best_t2_circ_scaled": res.best_t2_circ / t2s,
            "omega1_best_dd_scaled": res.omega1_best_dd * t2s,
            "omega1_best_circ_scaled": res.omega1_best_circ * t2s,
            "omega1_predicted_circ_scaled": predicted_clock_omega1(se)}
    summary = (f"best scaled T2: circular {meta['best_t2_circ_scaled']:.4g} "
               f"at omega1*t2_star = {meta['omega1_best_circ_scaled']:.4g}, "
               f"amplitude-modulated {meta['best_t2_dd_scaled']:.4g}; "
               f"ratio {res.ratio:.3g}")
    return (["omega1_scaled", "t2_scaled_dd", "t2_scaled_circ"],
            rows, meta, summary)


RUNNERS = {
    "coherence": (run_coherence, _points_coherence),
    "floquet": (run_floquet, _points_floquet),
    "optimum": (run_optimum, _points_optimum),
    "gate1q": (run_gate1q, _points_gate1q),
    "gate2q": (run_gate2q, _points_gate2q),
    "sensing": (run_sensing, _points_sensing),
    "clock": (run_clock, _points_clock),
}


def _precheck(scenario: str, cfg: dict) -> None:
    """Config-consistency checks beyond per-key parsing."""
    if scenario == "coherence":
        _scheme_from(cfg)
    elif scenario == "floquet":
        scheme = _scheme_from({**cfg, "scheme.variant": CIRCULAR,
                               "scheme.phase_rad": 0.0})
        if scheme.omega2 <= 0:
            raise ConfigError("floquet scenario requires omega2 > 0")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dressedsim",
        description="Dressed-qubit drive simulations and benchmarks.")
    p.add_argument("scenario", choices=sorted(SCHEMAS))
    p.add_argument("action", choices=["run", "validate"])
    p.add_argument("--config", required=True, help="flat key=value file")
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads over grid points (0 = one per CPU)")
    p.add_argument("--quiet", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = parse_config(args.config)
        cfg = apply_schema(raw, SCHEMAS[args.scenario], args.scenario)
        _precheck(args.scenario, cfg)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    seed = args.seed if args.seed is not None else cfg["seed"]
    if args.threads is not None:
        threads = args.threads
    else:
        threads = int(os.environ.get("DRESSEDSIM_THREADS", "0") or 0)

    runner, counter = RUNNERS[args.scenario]
    n_points = counter(cfg)
    if args.action == "validate":
        budget = cfg["budget.max_grid_points"]
        if not args.quiet:
            print(f"config valid: scenario={args.scenario}, "
                  f"{n_points} grid points, seed={seed}")
            if n_points > budget:
                print(f"warning: {n_points} points exceed "
                      f"budget.max_grid_points={budget}; run may be slow")
        return EXIT_OK

    out = args.out or f"{args.scenario}.csv"
    t0 = time.perf_counter()
    try:
        header, rows, meta, summary = runner(cfg, seed, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    n = write_csv(out, header, rows)
    meta_path = os.path.splitext(out)[0] + ".meta.json"
    write_json_meta(meta_path, {
        "scenario": args.scenario,
        "seed": seed,
        "config": {k: v for k, v in cfg.items()},
        "stats": meta,
    })
    if not args.quiet:
        print(summary)
        print(f"wrote {n} rows to {out} "
              f"(+ {os.path.basename(meta_path)}) "
              f"in {time.perf_counter() - t0:.1f}s")
    return EXIT_OK

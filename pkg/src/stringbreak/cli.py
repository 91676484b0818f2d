"""Command-line interface: config parsing, dispatch, CSV/JSON writers.

Usage: stringbreak <command> --config FILE [--key=value ...]
Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, dynamics, statics
from .model import (
    ChainSpec,
    Exponential,
    PowerLaw,
    SolverError,
    StringBreakError,
)


class ConfigError(StringBreakError):
    pass


def _parse_kernel(cfg):
    kind = cfg["kernel"]
    if kind == "exp":
        if "xi" not in cfg:
            raise ConfigError("kernel=exp requires key 'xi'")
        try:
            return Exponential(xi=cfg["xi"])
        except ValueError as exc:
            raise ConfigError(f"xi: {exc}") from exc
    if kind in ("powerlaw", "pl"):
        if "alpha" not in cfg:
            raise ConfigError("kernel=powerlaw requires key 'alpha'")
        try:
            return PowerLaw(alpha=cfg["alpha"])
        except ValueError as exc:
            raise ConfigError(f"alpha: {exc}") from exc
    raise ConfigError(f"kernel: unknown kind {kind!r} (use exp or powerlaw)")


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text):
    return [int(v) for v in text.split(",") if v.strip()]


# key -> (parser, description)
KEY_TYPES = {
    "kernel": (str, "coupling kind: exp or powerlaw"),
    "xi": (float, "exponential decay length"),
    "alpha": (float, "power-law exponent"),
    "ell": (int, "number of dynamical spins"),
    "ells": (_ints, "comma-separated list of lengths"),
    "alphas": (_floats, "comma-separated list of alpha values"),
    "taus": (_floats, "comma-separated list of ramp times"),
    "g": (float, "transverse field"),
    "h": (float, "longitudinal field"),
    "h_min": (float, "scan start"),
    "h_max": (float, "scan end"),
    "scan_min": (float, "crossing-scan start"),
    "scan_max": (float, "crossing-scan end"),
    "points": (int, "number of scan points"),
    "k": (int, "number of levels"),
    "mode": (str, "ramp control: h or g"),
    "tau": (float, "ramp time scale"),
    "x_f": (float, "final control value of the ramp"),
    "h_c": (float, "crossing point override"),
    "sample_count": (int, "observable samples along the ramp"),
    "step_dt": (float, "propagator substep"),
    "krylov_dim": (int, "Krylov subspace dimension"),
    "potential": (int, "record the potential V(t) (0/1)"),
    "ell_max": (int, "largest length scanned for ell_c"),
    "n_ext": (int, "dynamical external spins per side"),
    "workers": (int, "parallel workers for sweep commands"),
    "outdir": (str, "output directory"),
}

COMMAND_KEYS = {
    "g0": {"required": ["kernel", "ells"], "optional": {"h": 0.0, "outdir": "out"}},
    "spectrum": {
        "required": ["kernel", "ell", "g", "h_min", "h_max", "points"],
        "optional": {"k": 8, "outdir": "out"},
    },
    "crossing": {
        "required": ["kernel", "ell", "scan_min", "scan_max"],
        "optional": {"mode": "h", "g": 0.0, "h": 0.0, "outdir": "out", "points": 201},
    },
    "gapscaling": {
        "required": ["kernel", "ells", "g"],
        "optional": {"outdir": "out"},
    },
    "ramp": {
        "required": ["kernel", "ell", "tau", "x_f"],
        "optional": {"mode": "h", "g": 0.0, "h": 0.0, "k": 8, "potential": 1,
                     "sample_count": 201, "step_dt": 0.01, "krylov_dim": 20,
                     "outdir": "out"},
    },
    "lzsweep": {
        "required": ["kernel", "ell", "g", "taus", "x_f", "scan_min", "scan_max"],
        "optional": {"k": 2, "sample_count": 51, "step_dt": 0.01,
                     "krylov_dim": 20, "workers": 0, "outdir": "out"},
    },
    "bubbles": {
        "required": ["kernel", "ell", "g", "tau", "x_f"],
        "optional": {"sample_count": 201, "step_dt": 0.01, "krylov_dim": 20,
                     "outdir": "out"},
    },
    "scaling": {
        "required": ["kernel", "ell", "g", "taus", "x_f"],
        "optional": {"h_c": None, "scan_min": None, "scan_max": None,
                     "sample_count": 201, "step_dt": 0.01, "krylov_dim": 20,
                     "workers": 0, "outdir": "out"},
    },
    "lrphase": {
        "required": ["alphas"],
        "optional": {"ell_max": 200, "outdir": "out"},
    },
    "lrpotential": {
        "required": ["kernel", "ells", "g"],
        "optional": {"h": 0.0, "outdir": "out"},
    },
    "extended": {
        "required": ["tau", "g"],
        "optional": {"xi": 1.0, "ell": 5, "n_ext": 3, "x_f": 1.0,
                     "sample_count": 101, "step_dt": 0.01, "krylov_dim": 20,
                     "outdir": "out"},
    },
}

CSV_SCHEMAS = {
    "g0": "g0.csv: ell,gap,h_c,V_s,V_bs (h_c/V columns for the exponential kernel)",
    "spectrum": "spectrum.csv: control,E_0..E_{k-1},m_0..m_{k-1}",
    "crossing": "gapcurve.csv: control,gap",
    "gapscaling": "gapscaling.csv: ell,h_c,gap_c,slope,tau_star",
    "ramp": "ramp.csv: t,control,m_z,mz_site_1..mz_site_n,P_0..P_{k-1},"
            "P_other,C,V; bubbles.csv: t,r,P_d",
    "lzsweep": "lzsweep.csv: tau,P1_final,P_LZ,P_m,P_other_max",
    "bubbles": "bubbles.csv: t,r,P_d; final_histogram.csv: r,P_d; "
               "crossing_fields.csv: r,h_c",
    "scaling": "hsb.csv: tau,h_sb; collapse.csv: tau,x_rescaled,m_z",
    "lrphase": "lrphase.csv: alpha,ell_c (ell_c=inf above alpha_max)",
    "lrpotential": "lrpotential.csv: ell,V_ground,V_excited",
    "extended": "extended_static.csv: t,mz_site_1..5; "
                "extended_dynamical.csv: t,mz_site_1..n",
}


def parse_config(path=None, overrides=()):
    """Read key=value config text plus flag overrides into a plain dict."""
    raw = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            raw[key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        raw[key.strip()] = value.strip()
    cfg = {}
    for key, value in raw.items():
        if key not in KEY_TYPES:
            raise ConfigError(f"unknown key {key!r}")
        parser, _ = KEY_TYPES[key]
        try:
            cfg[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {value!r} ({exc})") from exc
    return cfg


def resolve(command, cfg):
    spec = COMMAND_KEYS.get(command)
    if spec is None:
        raise ConfigError(f"unknown command {command!r}")
    resolved = dict(spec["optional"])
    for key in spec["required"]:
        if key not in cfg:
            raise ConfigError(f"{command}: missing required key {key!r}")
    allowed = set(spec["required"]) | set(spec["optional"]) | {"xi", "alpha"}
    for key, value in cfg.items():
        if key not in allowed:
            raise ConfigError(f"{command}: key {key!r} not accepted")
        resolved[key] = value
    return resolved


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_series(path, header, rows):
    """UTF-8 CSV, LF newlines, floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_metadata(path, command, cfg, started, **derived):
    payload = {
        "command": command,
        "config": {k: v for k, v in sorted(cfg.items())},
        "version": __version__,
        "runtime_seconds": time.time() - started,
        "derived": derived,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _workers(cfg, n_tasks):
    limit = int(os.environ.get("STRINGBREAK_THREADS", "1"))
    requested = cfg.get("workers") or limit
    return max(1, min(requested, limit, n_tasks))


def _propagator(cfg):
    return dynamics.PropagatorConfig(step_dt=cfg["step_dt"],
                                     krylov_dim=cfg["krylov_dim"])


def _run_one_tau(args):
    (chain, mode, fixed, x_f, tau, sample_count, prop, k_levels) = args
    fam = dynamics.RampFamily(chain, mode, fixed)
    sched = dynamics.RampSchedule(mode=mode, fixed=fixed, x_f=x_f, tau=tau,
                                  sample_count=sample_count)
    return dynamics.propagate_ramp(fam, sched, prop, k_levels=k_levels)


def _sweep(chain, mode, fixed, x_f, taus, sample_count, prop, k_levels, n_workers):
    jobs = [(chain, mode, fixed, x_f, tau, sample_count, prop, k_levels)
            for tau in taus]
    if n_workers == 1:
        return [_run_one_tau(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(_run_one_tau, jobs))


def cmd_g0(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    rows = []
    for ell in cfg["ells"]:
        chain = ChainSpec(ell=ell, kernel=kernel)
        gap = statics.g0_energy_gap(chain, cfg["h"])
        if isinstance(kernel, Exponential):
            hc = statics.g0_breaking_field(chain)
            v_s, v_bs = statics.g0_potentials(chain, cfg["h"])
        else:
            hc, v_s, v_bs = np.nan, np.nan, np.nan
        rows.append((ell, gap, hc, v_s, v_bs))
    write_series(outdir / "g0.csv", ["ell", "gap", "h_c", "V_s", "V_bs"], rows)
    write_metadata(outdir / "metadata.json", "g0", cfg, started)


def cmd_spectrum(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    chain = ChainSpec(ell=cfg["ell"], kernel=kernel)
    k = cfg["k"]
    from .model import assemble_operator, field_profile

    rows = []
    for h in np.linspace(cfg["h_min"], cfg["h_max"], cfg["points"]):
        ham = assemble_operator(chain, field_profile(chain, h=h, g=cfg["g"]))
        sl = statics.lowest_spectrum(ham, k, want_vectors=True)
        rows.append((h, *sl.energies, *sl.magnetizations))
    header = (["control"] + [f"E_{i}" for i in range(k)]
              + [f"m_{i}" for i in range(k)])
    write_series(outdir / "spectrum.csv", header, rows)
    write_metadata(outdir / "metadata.json", "spectrum", cfg, started)


def cmd_crossing(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    chain = ChainSpec(ell=cfg["ell"], kernel=kernel)
    mode = "scan_h" if cfg["mode"] == "h" else "scan_g"
    fixed = cfg["g"] if mode == "scan_h" else cfg["h"]
    fit = statics.locate_avoided_crossing(
        chain, fixed, (cfg["scan_min"], cfg["scan_max"]), mode=mode,
        coarse_points=cfg["points"],
    )
    two = statics.gap_function(chain, fixed, mode)
    grid = np.linspace(cfg["scan_min"], cfg["scan_max"], cfg["points"])
    rows = []
    for x in grid:
        e0, e1 = two(x)
        rows.append((x, e1 - e0))
    write_series(outdir / "gapcurve.csv", ["control", "gap"], rows)
    write_metadata(outdir / "metadata.json", "crossing", cfg, started,
                   control_c=fit.control_c, gap_c=fit.gap_c, slope=fit.slope,
                   residual=fit.residual,
                   tau_star=dynamics.lz_timescale(fit.gap_c, fit.slope))


def cmd_gapscaling(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    rows = []
    for ell in cfg["ells"]:
        chain = ChainSpec(ell=ell, kernel=kernel)
        hc0 = statics.g0_breaking_field(chain)
        fit = statics.locate_avoided_crossing(
            chain, cfg["g"], (0.5 * hc0, 1.5 * hc0), coarse_points=41)
        rows.append((ell, fit.control_c, fit.gap_c, fit.slope,
                     dynamics.lz_timescale(fit.gap_c, fit.slope)))
    base, prefactor = statics.gap_length_scaling(kernel, cfg["g"], cfg["ells"])
    write_series(outdir / "gapscaling.csv",
                 ["ell", "h_c", "gap_c", "slope", "tau_star"], rows)
    write_metadata(outdir / "metadata.json", "gapscaling", cfg, started,
                   base=base, prefactor=prefactor)


def cmd_ramp(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    chain = ChainSpec(ell=cfg["ell"], kernel=kernel)
    mode = cfg["mode"]
    fixed = cfg["g"] if mode == "h" else cfg["h"]
    fam = dynamics.RampFamily(chain, mode, fixed)
    sched = dynamics.RampSchedule(mode=mode, fixed=fixed, x_f=cfg["x_f"],
                                  tau=cfg["tau"],
                                  sample_count=cfg["sample_count"])
    res = dynamics.propagate_ramp(fam, sched, _propagator(cfg),
                                  k_levels=cfg["k"],
                                  want_potential=bool(cfg["potential"]))
    n = chain.n_spins
    k = cfg["k"]
    header = ["t", "control", "m_z"]
    header += [f"mz_site_{j}" for j in range(1, n + 1)]
    header += [f"P_{i}" for i in range(k)] + ["P_other"] if k else []
    header += ["C"]
    if res.potential is not None:
        header += ["V"]
    rows = []
    for s in range(sched.sample_count):
        row = [res.t[s], res.control[s], res.m_z[s], *res.profile[s]]
        if k:
            row += [*res.populations[s], res.p_other[s]]
        row.append(res.correlator[s])
        if res.potential is not None:
            row.append(res.potential[s])
        rows.append(row)
    write_series(outdir / "ramp.csv", header, rows)
    brows = [(res.t[s], r, res.bubbles[s, r])
             for s in range(sched.sample_count) for r in range(n + 1)]
    write_series(outdir / "bubbles.csv", ["t", "r", "P_d"], brows)
    first, crossings = dynamics.locate_sign_change(res)
    write_metadata(outdir / "metadata.json", "ramp", cfg, started,
                   h_sb=first, sign_changes=crossings)


def cmd_lzsweep(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    chain = ChainSpec(ell=cfg["ell"], kernel=kernel)
    fit = statics.locate_avoided_crossing(
        chain, cfg["g"], (cfg["scan_min"], cfg["scan_max"]))
    results = _sweep(chain, "h", cfg["g"], cfg["x_f"], cfg["taus"],
                     cfg["sample_count"], _propagator(cfg), max(cfg["k"], 2),
                     _workers(cfg, len(cfg["taus"])))
    rows = []
    for tau, res in zip(cfg["taus"], results):
        p1 = res.populations[-1, 1]
        plz = dynamics.landau_zener_probability(fit.gap_c, fit.slope, tau)
        pm = dynamics.magnetization_population_estimate(res.m_z[0], res.m_z[-1])
        rows.append((tau, p1, plz, pm, res.p_other.max()))
    write_series(outdir / "lzsweep.csv",
                 ["tau", "P1_final", "P_LZ", "P_m", "P_other_max"], rows)
    write_metadata(outdir / "metadata.json", "lzsweep", cfg, started,
                   h_c=fit.control_c, gap_c=fit.gap_c, slope=fit.slope,
                   tau_star=dynamics.lz_timescale(fit.gap_c, fit.slope))


def cmd_bubbles(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    chain = ChainSpec(ell=cfg["ell"], kernel=kernel)
    fam = dynamics.RampFamily(chain, "h", cfg["g"])
    sched = dynamics.RampSchedule(mode="h", fixed=cfg["g"], x_f=cfg["x_f"],
                                  tau=cfg["tau"],
                                  sample_count=cfg["sample_count"])
    res = dynamics.propagate_ramp(fam, sched, _propagator(cfg), k_levels=0)
    n = chain.n_spins
    brows = [(res.t[s], r, res.bubbles[s, r])
             for s in range(sched.sample_count) for r in range(n + 1)]
    write_series(outdir / "bubbles.csv", ["t", "r", "P_d"], brows)
    write_series(outdir / "final_histogram.csv", ["r", "P_d"],
                 [(r, res.bubbles[-1, r]) for r in range(n + 1)])
    hc_map = statics.bubble_crossing_fields(chain)
    write_series(outdir / "crossing_fields.csv", ["r", "h_c"],
                 sorted(hc_map.items()))
    first, _ = dynamics.locate_sign_change(res)
    mode_r = int(np.argmax(res.bubbles[-1]))
    write_metadata(outdir / "metadata.json", "bubbles", cfg, started,
                   h_sb=first, final_mode=mode_r)


def cmd_scaling(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    chain = ChainSpec(ell=cfg["ell"], kernel=kernel)
    h_c = cfg["h_c"]
    if h_c is None:
        if cfg["scan_min"] is None or cfg["scan_max"] is None:
            raise ConfigError("scaling: provide h_c or scan_min/scan_max")
        fit = statics.locate_avoided_crossing(
            chain, cfg["g"], (cfg["scan_min"], cfg["scan_max"]))
        h_c = fit.control_c
    results = _sweep(chain, "h", cfg["g"], cfg["x_f"], cfg["taus"],
                     cfg["sample_count"], _propagator(cfg), 0,
                     _workers(cfg, len(cfg["taus"])))
    pairs = []
    for tau, res in zip(cfg["taus"], results):
        first, _ = dynamics.locate_sign_change(res)
        if first is not None:
            pairs.append((tau, first))
    prefactor, exponent = dynamics.scaling_fit(pairs, h_c)
    write_series(outdir / "hsb.csv", ["tau", "h_sb"], pairs)
    crows = []
    for tau, x, mz in dynamics.collapse_curves(results, h_c, exponent):
        crows.extend((tau, xi_, mzi) for xi_, mzi in zip(x, mz))
    write_series(outdir / "collapse.csv", ["tau", "x_rescaled", "m_z"], crows)
    write_metadata(outdir / "metadata.json", "scaling", cfg, started,
                   h_c=h_c, prefactor=prefactor, exponent=exponent)


def cmd_lrphase(cfg, outdir, started):
    pb = statics.lr_phase_boundaries(cfg["alphas"], ell_max=cfg["ell_max"])
    rows = [(alpha, lc) for alpha, lc in sorted(pb.lc_table.items())]
    write_series(outdir / "lrphase.csv", ["alpha", "ell_c"], rows)
    write_metadata(outdir / "metadata.json", "lrphase", cfg, started,
                   alpha_min=pb.alpha_min, alpha_max=pb.alpha_max)


def cmd_lrpotential(cfg, outdir, started):
    kernel = _parse_kernel(cfg)
    curve = statics.static_potential_curve(kernel, cfg["g"], cfg["h"],
                                           cfg["ells"])
    rows = list(zip(curve.ells, curve.v_ground, curve.v_excited))
    write_series(outdir / "lrpotential.csv", ["ell", "V_ground", "V_excited"],
                 rows)
    write_metadata(outdir / "metadata.json", "lrpotential", cfg, started,
                   ell_c=curve.ell_c)


def cmd_extended(cfg, outdir, started):
    comp = dynamics.run_extended_chain(
        cfg["tau"], cfg["g"], xi=cfg["xi"], ell=cfg["ell"],
        n_ext=cfg["n_ext"], h_f=cfg["x_f"],
        config=dynamics.PropagatorConfig(step_dt=cfg["step_dt"],
                                         krylov_dim=cfg["krylov_dim"]),
        sample_count=cfg["sample_count"])
    for name, res in (("static", comp.static_result),
                      ("dynamical", comp.dynamical_result)):
        n = res.profile.shape[1]
        header = ["t"] + [f"mz_site_{j}" for j in range(1, n + 1)]
        rows = [(res.t[s], *res.profile[s]) for s in range(len(res.t))]
        write_series(outdir / f"extended_{name}.csv", header, rows)
    write_metadata(outdir / "metadata.json", "extended", cfg, started,
                   max_inner_difference=comp.max_inner_difference)


COMMANDS = {
    "g0": cmd_g0,
    "spectrum": cmd_spectrum,
    "crossing": cmd_crossing,
    "gapscaling": cmd_gapscaling,
    "ramp": cmd_ramp,
    "lzsweep": cmd_lzsweep,
    "bubbles": cmd_bubbles,
    "scaling": cmd_scaling,
    "lrphase": cmd_lrphase,
    "lrpotential": cmd_lrpotential,
    "extended": cmd_extended,
}


def _usage():
    lines = ["usage: stringbreak <command> [--config FILE] [--key=value ...]",
             "", "commands and CSV schemas:"]
    for name in COMMANDS:
        lines.append(f"  {name:12s} {CSV_SCHEMAS[name]}")
    lines.append("")
    lines.append("config keys:")
    for key, (_, desc) in KEY_TYPES.items():
        lines.append(f"  {key:14s} {desc}")
    lines.append("")
    lines.append("env: STRINGBREAK_THREADS bounds sweep parallelism; "
                 "STRINGBREAK_NO_NUMBA=1 selects the pure-numpy kernels")
    return "\n".join(lines)


def run_command(command, cfg):
    """Dispatch a resolved config; returns the output directory."""
    started = time.time()
    outdir = Path(cfg["outdir"])
    outdir.mkdir(parents=True, exist_ok=True)
    COMMANDS[command](cfg, outdir, started)
    return outdir


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv or argv[0] in ("-h", "--help", "help"):
        print(_usage())
        return 0
    command = argv[0]
    config_path = None
    overrides = []
    rest = argv[1:]
    i = 0
    try:
        while i < len(rest):
            arg = rest[i]
            if arg == "--config":
                if i + 1 >= len(rest):
                    raise ConfigError("--config requires a file path")
                config_path = rest[i + 1]
                i += 2
            elif arg.startswith("--config="):
                config_path = arg.split("=", 1)[1]
                i += 1
            elif arg.startswith("--") and "=" in arg:
                overrides.append(arg[2:])
                i += 1
            else:
                raise ConfigError(f"unexpected argument {arg!r}")
        if command not in COMMANDS:
            raise ConfigError(f"unknown command {command!r}\n\n{_usage()}")
        cfg = resolve(command, parse_config(config_path, overrides))
        run_command(command, cfg)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StringBreakError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line front end: sweeps, scaling fits, CV noise curves, validation.

Subcommands
    spin-gain     gain vs OAT time mu, MAI times optimized per point
    spin-scaling  optimized xi^-2 vs atom number N with log-log slope fits
    cv-gain       TMSV gain vs detection noise sigma (or squeezing r)
    validate      oracle-equivalence and property suites, JSON report

Config precedence is defaults < preset < config file < flags.  Output is CSV
(comma, '.' decimal, LF, header row) or JSON carrying the resolved config;
floats are printed with 12 significant digits so identical configs produce
byte-identical files.  Exit codes: 0 success, 1 validation failure, 2 config
error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import MaisenseError
from .gaussian_cv import CvStrategy, GaussianScenario, cv_xi2_matrix
from .optimizer import EstimationTarget, optimize_scenario, scaling_sweep
from .spin_moments import Prep, SpinScenario, Strategy
from .validation import run_validation

__all__ = ["main", "build_parser", "PRESETS"]


class ConfigError(MaisenseError):
    """Invalid or inconsistent sweep configuration."""


SPIN_STRATEGIES = ("linear", "nonlocal-mai", "local-mai")

PRESETS = {
    "fig2b": {
        "command": "spin-gain",
        "N": 100,
        "M": "2,4,10,20,100",
        "prep": "me",
        "strategy": "all",
        "mu_min": 0.0,
        "mu_max": 0.5,
        "mu_steps": 51,
    },
    "fig2c": {
        "command": "spin-scaling",
        "N": "64,128,256,512,1024,2048,4096",
        "M": 2,
        "prep": "me",
        "strategy": "all",
    },
    "fig3": {
        "command": "cv-gain",
        "r": 0.5,
        "sweep_axis": "sigma",
        "sigma_min": 0.0,
        "sigma_max": 1.0,
        "sigma_steps": 101,
    },
}

DEFAULTS = {
    "spin-gain": {
        "N": 100,
        "M": "2",
        "prep": "me",
        "strategy": "all",
        "mu_min": 0.0,
        "mu_max": 0.5,
        "mu_steps": 51,
        "mai_range": None,
    },
    "spin-scaling": {
        "N": "64,128,256,512,1024,2048,4096",
        "M": 2,
        "prep": "me",
        "strategy": "all",
    },
    "cv-gain": {
        "r": 0.5,
        "r_mai": None,  # None -> follow r
        "sweep_axis": "sigma",
        "sigma": 0.0,
        "sigma_min": 0.0,
        "sigma_max": 1.0,
        "sigma_steps": 101,
        "r_min": 0.0,
        "r_max": 1.0,
        "r_steps": 101,
    },
    "validate": {
        "N": "4,6,8,12",
        "mu_step": 0.31,
    },
}


def _fmt(x) -> str:
    return format(float(x), ".12g")


def _round12(x) -> float:
    return float(_fmt(x))


def _int_list(text) -> list:
    try:
        vals = [int(tok) for tok in str(text).split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc
    if not vals:
        raise ConfigError(f"empty integer list {text!r}")
    return vals


def _float_pair(text) -> tuple:
    try:
        toks = [float(tok) for tok in str(text).split(",")]
    except ValueError as exc:
        raise ConfigError(f"expected lo,hi floats, got {text!r}") from exc
    if len(toks) != 2:
        raise ConfigError(f"expected exactly two values lo,hi, got {text!r}")
    return toks[0], toks[1]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maisense",
        description="Multiparameter squeezing gains for distributed OAT and TMSV sensors.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--config", help="flat key=value or JSON config file")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (fallback: MAISENSE_THREADS)")
        p.add_argument("--plot", action="store_true",
                       help="also render a figure next to --out (requires --out)")

    p = sub.add_parser("spin-gain", help="gain vs OAT time mu")
    p.add_argument("--N", type=int)
    p.add_argument("--M", help="comma-separated mode counts")
    p.add_argument("--prep", choices=["ms", "me"])
    p.add_argument("--strategy", choices=list(SPIN_STRATEGIES) + ["all"])
    p.add_argument("--mu-min", type=float, dest="mu_min")
    p.add_argument("--mu-max", type=float, dest="mu_max")
    p.add_argument("--mu-steps", type=int, dest="mu_steps")
    p.add_argument("--mai-range", dest="mai_range", help="lo,hi bounds for the MAI time")
    common(p)

    p = sub.add_parser("spin-scaling", help="optimized xi^-2 vs N with slope fit")
    p.add_argument("--N", help="comma-separated atom numbers (>= 3 values)")
    p.add_argument("--M", type=int)
    p.add_argument("--prep", choices=["ms", "me"])
    p.add_argument("--strategy", choices=list(SPIN_STRATEGIES) + ["all"])
    common(p)

    p = sub.add_parser("cv-gain", help="TMSV gain vs detection noise or squeezing")
    p.add_argument("--sweep-axis", dest="sweep_axis", choices=["sigma", "r"])
    p.add_argument("--r", type=float)
    p.add_argument("--r-mai", type=float, dest="r_mai")
    p.add_argument("--sigma", type=float, help="fixed noise when sweeping r")
    p.add_argument("--sigma-min", type=float, dest="sigma_min")
    p.add_argument("--sigma-max", type=float, dest="sigma_max")
    p.add_argument("--sigma-steps", type=int, dest="sigma_steps")
    p.add_argument("--r-min", type=float, dest="r_min")
    p.add_argument("--r-max", type=float, dest="r_max")
    p.add_argument("--r-steps", type=int, dest="r_steps")
    common(p)

    p = sub.add_parser("validate", help="run the oracle-equivalence and property suites")
    p.add_argument("--N", help="comma-separated atom numbers, each <= 12")
    p.add_argument("--mu-step", type=float, dest="mu_step")
    common(p)

    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    text = text.strip()
    if not text:
        return {}
    if text.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def resolve_config(args: argparse.Namespace) -> dict:
    """Merge defaults < preset < config file < explicit flags."""
    command = args.command
    cfg = dict(DEFAULTS[command])
    if args.preset:
        preset = dict(PRESETS[args.preset])
        if preset.pop("command") != command:
            raise ConfigError(f"preset {args.preset!r} belongs to another subcommand")
        cfg.update(preset)
    if args.config:
        file_cfg = _load_config_file(args.config)
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys for {command}: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = command
    cfg["format"] = "json" if command == "validate" else (args.format or "csv")
    cfg["out"] = args.out
    cfg["plot"] = bool(args.plot)
    threads = args.threads
    if threads is None:
        env = os.environ.get("MAISENSE_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ConfigError(f"--threads must be >= 1, got {threads}")
    cfg["threads"] = threads
    if cfg["plot"] and not cfg["out"]:
        raise ConfigError("--plot needs --out to know where to write the figure")
    return cfg


def _linspace(lo, hi, steps, name) -> np.ndarray:
    lo, hi, steps = float(lo), float(hi), int(steps)
    if steps < 2:
        raise ConfigError(f"{name} sweep needs steps >= 2, got {steps}")
    if not lo < hi:
        raise ConfigError(f"{name} sweep needs min < max, got [{lo}, {hi}]")
    return np.linspace(lo, hi, steps)


def _spin_strategies(cfg, prep: Prep) -> list:
    if cfg["strategy"] == "all":
        names = [s for s in SPIN_STRATEGIES
                 if not (prep is Prep.MODE_SEPARABLE and s == "nonlocal-mai")]
    else:
        names = [cfg["strategy"]]
    if prep is Prep.MODE_SEPARABLE and "nonlocal-mai" in names:
        raise ConfigError(
            "nonlocal-mai on a mode-separable state has no closed form; "
            "it is covered by the validate subcommand's oracle only"
        )
    return names


def _pool_map(fn, items, threads: int) -> list:
    if threads == 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_spin_gain(cfg):
    N = int(cfg["N"])
    M_list = _int_list(cfg["M"])
    prep = Prep(cfg["prep"])
    strategies = _spin_strategies(cfg, prep)
    for M in M_list:
        if N % M != 0:
            raise ConfigError(f"N={N} not divisible by M={M}")
    mus = _linspace(cfg["mu_min"], cfg["mu_max"], cfg["mu_steps"], "mu")
    mai_range = _float_pair(cfg["mai_range"]) if cfg["mai_range"] else None

    columns = ["mu"]
    for M in M_list:
        for name in strategies:
            tag = f"{name.replace('-', '_')}_M{M}"
            columns += [f"xi2_{tag}", f"gain_db_{tag}"]

    def row(mu):
        vals = [mu]
        for M in M_list:
            t = EstimationTarget.uniform(M)
            for name in strategies:
                s = SpinScenario(N, M, prep, float(mu), Strategy(name))
                out = optimize_scenario(s, t, mai_range=mai_range)
                vals += [out.xi2_inv, out.gain_db]
        return vals

    rows = _pool_map(row, mus, cfg["threads"])
    return columns, rows, {}


def cmd_spin_scaling(cfg):
    N_list = _int_list(cfg["N"])
    M = int(cfg["M"])
    prep = Prep(cfg["prep"])
    strategies = _spin_strategies(cfg, prep)

    def sweep(name):
        return scaling_sweep(N_list, M, prep, Strategy(name))

    results = dict(zip(strategies, _pool_map(sweep, strategies, cfg["threads"])))

    columns = ["N"]
    for name in strategies:
        tag = name.replace("-", "_")
        columns += [f"xi2_{tag}", f"gain_db_{tag}", f"mu_opt_{tag}", f"mu_mai_opt_{tag}"]
    rows = []
    for i, N in enumerate(N_list):
        vals = [float(N)]
        for name in strategies:
            p = results[name].points[i]
            vals += [p.xi2_inv, 10.0 * np.log10(p.xi2_inv), p.mu_opt, p.mu_mai_opt]
        rows.append(vals)
    fit = {
        name.replace("-", "_"): {
            "slope": _round12(res.slope),
            "intercept": _round12(res.intercept),
            "residual": _round12(res.residual),
        }
        for name, res in results.items()
    }
    return columns, rows, {"fit": fit}


def cmd_cv_gain(cfg):
    axis = cfg["sweep_axis"]
    if axis == "sigma":
        grid = _linspace(cfg["sigma_min"], cfg["sigma_max"], cfg["sigma_steps"], "sigma")
    elif axis == "r":
        grid = _linspace(cfg["r_min"], cfg["r_max"], cfg["r_steps"], "r")
    else:
        raise ConfigError(f"sweep axis must be sigma or r, got {axis!r}")

    columns = [axis]
    for strat in CvStrategy:
        tag = strat.value.replace("-", "_")
        columns += [f"xi2_{tag}", f"gain_db_{tag}"]

    def row(x):
        r = float(cfg["r"]) if axis == "sigma" else float(x)
        sigma = float(x) if axis == "sigma" else float(cfg["sigma"])
        r_mai = r if cfg["r_mai"] is None else float(cfg["r_mai"])
        vals = [float(x)]
        for strat in CvStrategy:
            out = cv_xi2_matrix(GaussianScenario(r, strat, r_mai, sigma))
            vals += [out.xi2_inv, out.gain_db]
        return vals

    rows = _pool_map(row, grid, cfg["threads"])
    return columns, rows, {}


def cmd_validate(cfg):
    N_list = _int_list(cfg["N"])
    bad = [n for n in N_list if n > 12 or n < 2]
    if bad:
        raise ConfigError(f"validate caps N at 12 (and needs N >= 2); got {bad}")
    report = run_validation(N_list=tuple(N_list), mu_step=float(cfg["mu_step"]))
    return report


def _render_csv(columns, rows, extra) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    for section, payload in extra.items():
        for key, stats in payload.items():
            pairs = " ".join(f"{k}={_fmt(v)}" for k, v in stats.items())
            lines.append(f"# {section} {key}: {pairs}")
    return "\n".join(lines) + "\n"


def _render_json(columns, rows, extra, cfg) -> str:
    payload = {
        "config": {k: v for k, v in cfg.items() if k not in ("out", "plot")},
        "columns": columns,
        "rows": [[_round12(v) for v in row] for row in rows],
    }
    payload.update(extra)
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write(text: str, out) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _plot_table(columns, rows, cfg) -> str:
    """Render gain-vs-axis curves next to the tabular output."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    data = np.asarray(rows, dtype=float)
    x = data[:, 0]
    fig, ax = plt.subplots(figsize=(6, 4))
    log_axes = cfg["command"] == "spin-scaling"
    for j, name in enumerate(columns):
        if not name.startswith("gain_db_") and not (log_axes and name.startswith("xi2_")):
            continue
        if log_axes and not name.startswith("xi2_"):
            continue
        ax.plot(x, data[:, j], label=name)
    if log_axes:
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_ylabel("xi^-2")
    else:
        ax.set_ylabel("gain (dB)")
    ax.set_xlabel(columns[0])
    ax.legend(fontsize=8)
    fig.tight_layout()
    base, _ = os.path.splitext(cfg["out"])
    path = base + ".png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


_COMMANDS = {
    "spin-gain": cmd_spin_gain,
    "spin-scaling": cmd_spin_scaling,
    "cv-gain": cmd_cv_gain,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if cfg["command"] == "validate":
            report = cmd_validate(cfg)
            report["config"] = {k: v for k, v in cfg.items() if k not in ("out", "plot")}
            _write(json.dumps(report, indent=2, sort_keys=True) + "\n", cfg["out"])
            if not report["passed"]:
                print("validation failed", file=sys.stderr)
                return 1
            return 0
        columns, rows, extra = _COMMANDS[cfg["command"]](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (MaisenseError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3

    if cfg["format"] == "csv":
        text = _render_csv(columns, rows, extra)
    else:
        text = _render_json(columns, rows, extra, cfg)
    _write(text, cfg["out"])
    if cfg["plot"]:
        path = _plot_table(columns, rows, cfg)
        print(f"figure written to {path}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

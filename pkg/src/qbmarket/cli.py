"""Command-line pipeline: evaluate closed forms, run simulations, analyze
price files, fit estimator output, and generate synthetic data.

Commands: eval, simulate, analyze, fit, synth. Every run resolves its
configuration from flags over an optional flat `key = value` config file
(flags win), records the resolved configuration in a JSON manifest next to the
outputs, and writes files atomically (temp file, rename on success), so a
failed run leaves no partial output. Outputs carry no timestamps: a rerun from
the same manifest is bit-identical.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Unconverged fits exit 0 with converged=false in the report (scriptable).
The environment variable QBM_SEED is the fallback seed source; flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .calibrate import fit_acf, fit_kurtosis_decay
from .dynamics import (
    HarmonicPotential,
    KernelSchedule,
    MomentState,
    PhaseSpaceGrid,
    evolve_moments,
    evolve_wigner_pde,
    simulate_sde_markov,
)
from .dynamics.moments import MOMENT_KEYS
from .errors import DataError, NumericalError
from .market import (
    AcfEstimate,
    PriceSeries,
    drift_vol_scaling,
    empirical_acf,
    empirical_kurtosis,
    load_prices,
    log_returns,
    return_histogram,
    synth_colored,
    synth_gbm,
    SYNTH_START_MINUTE,
)
from .model import (
    BathSpectrum,
    ModelParams,
    NonMarkovParams,
    SecondMomentInit,
    acf_model,
    classical_variance,
    delta_coefficient,
    lambda_coefficient,
    minimal_uncertainty_momentum,
    spectral_density,
    variance_closed_form,
    variance_short_time,
)

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


_PATH_KEYS = ("config", "input", "out", "out_prefix")


def _sha256_config(config: dict) -> str:
    # identifies the run parameters; i/o locations do not affect the data
    payload = {k: v for k, v in config.items() if k not in _PATH_KEYS}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _write_csv(path: Path, digest: str, columns: dict[str, np.ndarray]) -> None:
    names = list(columns)
    rows = len(next(iter(columns.values())))
    lines = [f"# qbmarket {__version__}; input sha256={digest}"]
    lines.append(",".join(names))
    for i in range(rows):
        lines.append(",".join(_fmt(float(columns[name][i])) for name in names))
    _atomic_write(path, "\n".join(lines) + "\n")


def _write_manifest(path: Path, command: str, config: dict, digest: str, outputs: list[str]) -> None:
    manifest = {
        "tool": "qbmarket",
        "version": __version__,
        "command": command,
        "config": config,
        "input_sha256": digest,
        "outputs": outputs,
    }
    _atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _load_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise _UsageError(f"config {path} line {line_no}: expected 'key = value'")
        key, value = line.split("=", 1)
        out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def _resolve(args: argparse.Namespace, spec: dict[str, tuple[object, type]]) -> dict:
    """Merge flag values over config-file values over builtin defaults.

    Flags parse with default None so an unset flag is distinguishable; the
    resolved mapping is what the run uses and what the manifest records.
    """
    config_file = getattr(args, "config", None)
    file_values = _load_config_file(config_file) if config_file else {}
    resolved: dict[str, object] = {}
    for dest, (default, caster) in spec.items():
        flag_value = getattr(args, dest, None)
        if flag_value is not None:
            resolved[dest] = flag_value
        elif dest in file_values:
            try:
                resolved[dest] = caster(file_values[dest])
            except ValueError as exc:
                raise _UsageError(f"config value for {dest}: {exc}") from exc
        else:
            resolved[dest] = default
    for key in file_values:
        if key not in spec:
            raise _UsageError(f"config key {key!r} is not a flag of this command")
    return resolved


def _require(cfg: dict, *names: str) -> None:
    missing = [n for n in names if cfg.get(n) is None]
    if missing:
        raise _UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _seed_from(cfg: dict) -> int | None:
    if cfg.get("seed") is not None:
        return int(cfg["seed"])
    env = os.environ.get("QBM_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise _UsageError(f"QBM_SEED is not an integer: {env!r}") from exc
    return None


def _model_params(cfg: dict) -> ModelParams:
    try:
        return ModelParams(M=cfg["m"], gamma=cfg["gamma"], kT=cfg["kt"], hbar=cfg["hbar"])
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _nm_params(cfg: dict) -> NonMarkovParams:
    _require(cfg, "xi", "eta", "omega")
    try:
        return NonMarkovParams(xi=cfg["xi"], eta=cfg["eta"], omega=cfg["omega"])
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _parse_taus(spec: str) -> list[int]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise _UsageError(f"tau range must be start:end:step, got {spec!r}")
    try:
        start, end, step = (int(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"tau range must be integers, got {spec!r}") from exc
    if step <= 0 or end < start:
        raise _UsageError(f"invalid tau range {spec!r}")
    return list(range(start, end + 1, step))


_MODEL_OPTS = [
    ("--M", "m", float, 1.0, "index inertia M (dimensionless mass)"),
    ("--gamma", "gamma", float, 1.0, "dissipation rate gamma (1/time unit)"),
    ("--kT", "kt", float, 1.0, "fluctuation strength kT (energy units)"),
    ("--hbar", "hbar", float, 1.0, "irrationality scale hbar (action units)"),
]
_NM_OPTS = [
    ("--xi", "xi", float, None, "autocorrelation intensity xi (log-price per minute)"),
    ("--eta", "eta", float, None, "autocorrelation decay rate eta (1/minute)"),
    ("--omega", "omega", float, None, "market periodicity Omega (rad/minute)"),
]


def _add_opts(sub: argparse.ArgumentParser, opts: list[tuple]) -> dict[str, tuple[object, type]]:
    spec: dict[str, tuple[object, type]] = {}
    for flag, dest, typ, default, help_text in opts:
        if typ is str and isinstance(default, tuple):
            choices, default = default
            sub.add_argument(flag, dest=dest, choices=choices, default=None, help=help_text)
            spec[dest] = (default, str)
        else:
            sub.add_argument(flag, dest=dest, type=typ, default=None, help=help_text)
            spec[dest] = (default, typ)
    return spec


def build_parser() -> tuple[_Parser, dict[str, dict[str, tuple[object, type]]]]:
    parser = _Parser(prog="qbm", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"qbmarket {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    registry: dict[str, dict[str, tuple[object, type]]] = {}

    common = [("--config", "config", str, None, "flat key = value config file; flags override")]

    sub = subs.add_parser("eval", parents=[], help="evaluate a closed-form curve to CSV")
    opts = common + [
        (
            "--formula",
            "formula",
            str,
            (("variance", "variance-short", "classical", "delta", "lambda", "acf", "spectral-density"), None),
            "curve to evaluate",
        ),
        *_MODEL_OPTS,
        ("--sx2-0", "sx2_0", float, None, "initial coordinate variance"),
        ("--sp2-0", "sp2_0", float, None, "initial momentum variance (default: minimal uncertainty)"),
        ("--spx-0", "spx_0", float, 0.0, "initial symmetrized cross moment <XP+PX>"),
        *_NM_OPTS,
        ("--kind", "kind", str, (("ohmic", "ohmic-lorentz", "composite"), "ohmic"), "spectral density kind"),
        ("--cutoff", "cutoff", float, None, "spectral cutoff Omega_cut (rad/time unit)"),
        ("--start", "start", float, None, "range start (time units; minutes for acf; rad/time for spectra)"),
        ("--end", "end", float, None, "range end"),
        ("--points", "points", int, 201, "number of evaluation points"),
        ("--out", "out", str, None, "output CSV path"),
    ]
    registry["eval"] = _add_opts(sub, opts)
    sub.set_defaults(func=cmd_eval)

    sub = subs.add_parser("simulate", help="run moment / SDE / phase-space evolution to CSV")
    opts = common + [
        ("--mode", "mode", str, (("moments", "sde", "pde"), None), "simulation mode"),
        *_MODEL_OPTS,
        ("--kernel", "kernel", str, (("markov", "non-markov"), "markov"), "diffusion-coefficient schedule"),
        *_NM_OPTS,
        ("--x2", "x2", float, None, "initial <X^2> (default: none; required)"),
        ("--p2", "p2", float, None, "initial <P^2> (default: minimal uncertainty hbar^2/(4 x2))"),
        ("--xp", "xp", float, 0.0, "initial <XP+PX>"),
        ("--x4", "x4", float, None, "initial <X^4> override (default: Gaussian value 3 <X^2>^2)"),
        ("--t-end", "t_end", float, None, "end time (model time units)"),
        ("--points", "points", int, 101, "number of output times"),
        ("--rtol", "rtol", float, 1e-8, "moment integrator relative tolerance"),
        ("--atol", "atol", float, 1e-12, "moment integrator absolute tolerance"),
        ("--n-paths", "n_paths", int, 100000, "SDE ensemble size"),
        ("--dt", "dt", float, None, "SDE/PDE time step (default for pde: stability bound)"),
        ("--seed", "seed", int, None, "RNG seed (mandatory for sde; QBM_SEED fallback)"),
        ("--nx", "nx", int, 256, "grid cells along x"),
        ("--np", "np", int, 256, "grid cells along p"),
        ("--x-width", "x_width", float, None, "grid half-width in x (default 8 sqrt(<X^2>))"),
        ("--p-width", "p_width", float, None, "grid half-width in p (default 8 sqrt(<P^2>))"),
        ("--potential", "potential", str, (("none", "harmonic"), "none"), "potential for pde mode"),
        ("--omega0", "omega0", float, None, "harmonic potential frequency (1/time unit)"),
        ("--out-prefix", "out_prefix", str, None, "output prefix: writes <prefix>.csv and <prefix>.manifest.json"),
    ]
    registry["simulate"] = _add_opts(sub, opts)
    sub.set_defaults(func=cmd_simulate)

    sub = subs.add_parser("analyze", help="run the empirical pipeline on a prices CSV")
    opts = common + [
        ("--input", "input", str, None, "prices CSV (timestamp,close[,session])"),
        ("--taus", "taus", str, "5:100:5", "horizon range start:end:step in minutes"),
        ("--max-lag", "max_lag", int, 480, "ACF maximum lag (minutes)"),
        ("--return-tau", "return_tau", int, None, "horizon for histogram/ACF returns (default: base resolution)"),
        ("--policy", "policy", str, (("intraday-only", "contiguous"), "intraday-only"), "session pairing policy"),
        ("--bins", "bins", int, None, "histogram bin count (default: Freedman-Diaconis)"),
        ("--out-prefix", "out_prefix", str, None, "output prefix for the statistics CSVs and manifest"),
    ]
    registry["analyze"] = _add_opts(sub, opts)
    sub.set_defaults(func=cmd_analyze)

    sub = subs.add_parser("fit", help="fit calibration models to estimator CSV output")
    opts = common + [
        ("--kind", "kind", str, (("acf", "kurtosis"), None), "which fit to run"),
        ("--input", "input", str, None, "estimator CSV (lag,acf[,count[,stderr]] or tau,kurtosis[,n])"),
        ("--base-minutes", "base_minutes", int, None, "lag resolution in minutes (default: inferred)"),
        ("--weights", "weights", str, (("uniform", "count-weighted"), "uniform"), "ACF residual weighting"),
        ("--out", "out", str, None, "output JSON report path"),
    ]
    registry["fit"] = _add_opts(sub, opts)
    sub.set_defaults(func=cmd_fit)

    sub = subs.add_parser("synth", help="generate seeded synthetic market data")
    opts = common + [
        ("--kind", "kind", str, (("gbm", "colored"), None), "generator"),
        ("--n", "n", int, None, "number of bars / return samples"),
        ("--dt", "dt", int, 1, "bar spacing in minutes"),
        ("--seed", "seed", int, None, "RNG seed (mandatory; QBM_SEED fallback)"),
        ("--mu", "mu", float, 0.0, "gbm price drift rate (1/minute)"),
        ("--sigma", "sigma", float, 0.01, "gbm volatility (1/sqrt(minute))"),
        ("--s0", "s0", float, 100.0, "gbm initial price"),
        *_NM_OPTS,
        ("--base-noise", "base_noise", float, 1e-3, "colored: white-noise level (log-price per minute)"),
        ("--out", "out", str, None, "output prices CSV path"),
    ]
    registry["synth"] = _add_opts(sub, opts)
    sub.set_defaults(func=cmd_synth)

    return parser, registry


def cmd_eval(cfg: dict) -> int:
    _require(cfg, "formula", "start", "end", "out")
    start, end, points = cfg["start"], cfg["end"], int(cfg["points"])
    if not (end > start):
        raise _UsageError("range start must be below end")
    if start < 0:
        raise _UsageError("range must be nonnegative")
    if points < 2:
        raise _UsageError("points must be at least 2")
    grid = np.linspace(start, end, points)
    formula = cfg["formula"]
    digest = _sha256_config(cfg)

    if formula == "acf":
        nm = _nm_params(cfg)
        columns = {"tau_minutes": grid, "acf": np.asarray(acf_model(nm, grid))}
    elif formula == "spectral-density":
        params = _model_params(cfg)
        kind = cfg["kind"]
        nm = _nm_params(cfg) if kind == "composite" else None
        try:
            spec = BathSpectrum(kind=kind, cutoff=cfg.get("cutoff"), nm=nm)
            columns = {"omega": grid, "j_omega": np.asarray(spectral_density(params, spec, grid))}
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
    elif formula in ("variance", "variance-short", "classical"):
        params = _model_params(cfg)
        if formula == "classical":
            values = classical_variance(params, grid)
        else:
            _require(cfg, "sx2_0")
            sx2 = cfg["sx2_0"]
            if formula == "variance-short":
                values = variance_short_time(params, sx2, grid)
            else:
                sp2 = cfg["sp2_0"] if cfg.get("sp2_0") is not None else minimal_uncertainty_momentum(params, sx2)
                init = SecondMomentInit(sx2_0=sx2, sp2_0=sp2, spx_0=cfg["spx_0"])
                values = variance_closed_form(params, init, grid)
        columns = {"t": grid, "sigma_x2": np.asarray(values)}
    else:  # delta / lambda
        params = _model_params(cfg)
        nm = _nm_params(cfg)
        fn = delta_coefficient if formula == "delta" else lambda_coefficient
        columns = {"t": grid, formula: np.asarray(fn(params, nm, grid))}

    out = Path(cfg["out"])
    _write_csv(out, digest, columns)
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"), "eval", cfg, digest, [out.name])
    print(f"wrote {out}")
    return 0


def _moment_columns(times: np.ndarray, states) -> dict[str, np.ndarray]:
    columns: dict[str, np.ndarray] = {"t": times}
    for (j, k) in MOMENT_KEYS:
        columns[f"m{j}{k}"] = np.array([s[(j, k)] for s in states])
    columns["kurtosis_x"] = np.array([s.kurtosis_x() for s in states])
    return columns


def cmd_simulate(cfg: dict) -> int:
    _require(cfg, "mode", "t_end", "out_prefix")
    mode = cfg["mode"]
    params = _model_params(cfg)
    if cfg["kernel"] == "non-markov":
        schedule = KernelSchedule.non_markov(params, _nm_params(cfg))
    else:
        schedule = KernelSchedule.markov(params)

    _require(cfg, "x2")
    x2 = cfg["x2"]
    p2 = cfg["p2"] if cfg.get("p2") is not None else minimal_uncertainty_momentum(params, x2)
    m11 = cfg["xp"] / 2.0
    t_end = cfg["t_end"]
    if not t_end > 0:
        raise _UsageError("t-end must be positive")
    times = np.linspace(0.0, t_end, int(cfg["points"]))
    prefix = Path(cfg["out_prefix"])
    seed = _seed_from(cfg)
    if seed is not None:
        cfg["seed"] = seed
    digest = _sha256_config(cfg)

    if mode == "moments":
        init = MomentState.gaussian(x2, p2, m11)
        if cfg.get("x4") is not None:
            init = init.with_value(4, 0, cfg["x4"])
        traj = evolve_moments(init, schedule, times, rtol=cfg["rtol"], atol=cfg["atol"])
        columns = _moment_columns(traj.times, traj.states)
    elif mode == "sde":
        if seed is None:
            raise _UsageError("sde mode requires --seed (or QBM_SEED)")
        if cfg["kernel"] != "markov":
            raise _UsageError("sde mode supports only the markov kernel (no stochastic representation otherwise)")
        if cfg.get("dt") is None:
            raise _UsageError("sde mode requires --dt")
        init = SecondMomentInit(sx2_0=x2, sp2_0=p2, spx_0=cfg["xp"])
        ens = simulate_sde_markov(params, init, int(cfg["n_paths"]), cfg["dt"], t_end, seed, t_eval=times)
        columns = {"t": ens.times}
        for (j, k) in MOMENT_KEYS:
            if (j, k) == (0, 0):
                continue
            columns[f"m{j}{k}"] = ens.mean[(j, k)]
            columns[f"m{j}{k}_se"] = ens.stderr[(j, k)]
    else:  # pde
        grid = PhaseSpaceGrid.gaussian(
            x2,
            p2,
            m11,
            x_half_width=cfg.get("x_width"),
            p_half_width=cfg.get("p_width"),
            n_x=int(cfg["nx"]),
            n_p=int(cfg["np"]),
        )
        potential = None
        if cfg["potential"] == "harmonic":
            _require(cfg, "omega0")
            potential = HarmonicPotential(cfg["omega0"])
        evo = evolve_wigner_pde(grid, schedule, potential=potential, t_end=t_end, dt=cfg.get("dt"), sample_times=times)
        columns = {"t": evo.times, "mass": evo.masses}
        for (j, k) in [(2, 0), (1, 1), (0, 2), (4, 0), (0, 4)]:
            columns[f"m{j}{k}"] = evo.moment(j, k)
        columns["kurtosis_x"] = np.array([s.kurtosis_x() for s in evo.moments])
        columns["eps_neg"] = np.full(len(evo.times), evo.eps_neg)

    out_csv = Path(str(prefix) + ".csv")
    _write_csv(out_csv, digest, columns)
    _write_manifest(Path(str(prefix) + ".manifest.json"), "simulate", cfg, digest, [out_csv.name])
    print(f"wrote {out_csv}")
    return 0


def cmd_analyze(cfg: dict) -> int:
    _require(cfg, "input", "out_prefix")
    in_path = Path(cfg["input"])
    if not in_path.exists():
        raise DataError(f"input file not found: {in_path}")
    digest = _sha256_file(in_path)
    series = load_prices(in_path)
    policy = cfg["policy"]
    taus = _parse_taus(cfg["taus"])
    taus = [t for t in taus if t % series.base_minutes == 0]
    if len(taus) < 3:
        raise DataError("fewer than 3 usable horizons at this base resolution")

    prefix = Path(cfg["out_prefix"])
    outputs = []

    scaling = drift_vol_scaling(series, taus, policy=policy)
    path = Path(str(prefix) + ".scaling.csv")
    _write_csv(
        path,
        digest,
        {
            "tau": scaling.taus.astype(float),
            "mean_increment": scaling.mean_increment,
            "sigma": scaling.sigma,
            "mu": scaling.mu,
            "count": scaling.counts.astype(float),
        },
    )
    outputs.append(path.name)

    return_tau = int(cfg["return_tau"]) if cfg.get("return_tau") is not None else series.base_minutes
    returns = log_returns(series, return_tau, policy=policy, remove_drift=True)

    hist = return_histogram(returns, bins=cfg.get("bins"))
    path = Path(str(prefix) + ".histogram.csv")
    _write_csv(
        path,
        digest,
        {
            "center": hist.centers,
            "density": hist.density,
            "gaussian_ref": hist.gaussian_ref,
            "count": hist.counts.astype(float),
        },
    )
    outputs.append(path.name)

    acf = empirical_acf(returns, int(cfg["max_lag"]))
    path = Path(str(prefix) + ".acf.csv")
    _write_csv(
        path,
        digest,
        {
            "lag": acf.lags.astype(float),
            "acf": acf.values,
            "count": acf.counts.astype(float),
            "stderr": acf.stderr,
        },
    )
    outputs.append(path.name)

    kurt = empirical_kurtosis(series, taus, policy=policy)
    path = Path(str(prefix) + ".kurtosis.csv")
    _write_csv(
        path,
        digest,
        {
            "tau": kurt.taus.astype(float),
            "kurtosis": kurt.kappa,
            "n": kurt.counts.astype(float),
        },
    )
    outputs.append(path.name)

    _write_manifest(Path(str(prefix) + ".manifest.json"), "analyze", cfg, digest, outputs)
    print(f"wrote {len(outputs)} statistics files with prefix {prefix}")
    return 0


def _read_estimator_csv(path: Path, expected: tuple[str, ...]) -> dict[str, np.ndarray]:
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    rows = []
    header: list[str] | None = None
    for raw in path.read_text(encoding="utf-8").splitlines():
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        if header is None:
            header = [h.strip().lower() for h in raw.split(",")]
            continue
        rows.append(raw.split(","))
    if header is None or not rows:
        raise DataError(f"{path}: no data rows")
    missing = [c for c in expected if c not in header]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}; header is {header}")
    data: dict[str, list[float]] = {c: [] for c in header}
    for i, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        for c, cell in zip(header, row):
            try:
                data[c].append(float(cell))
            except ValueError as exc:
                raise DataError(f"{path}: row {i}: cannot parse {cell!r}") from exc
    return {c: np.asarray(v) for c, v in data.items()}


def cmd_fit(cfg: dict) -> int:
    _require(cfg, "kind", "input", "out")
    in_path = Path(cfg["input"])
    digest = _sha256_file(in_path) if in_path.exists() else None
    if digest is None:
        raise DataError(f"input file not found: {in_path}")

    if cfg["kind"] == "acf":
        data = _read_estimator_csv(in_path, ("lag", "acf"))
        lags = data["lag"].astype(np.int64)
        counts = data.get("count", np.ones(len(lags))).astype(np.int64)
        stderr = data.get("stderr", np.full(len(lags), np.nan))
        base = int(cfg["base_minutes"]) if cfg.get("base_minutes") is not None else int(np.min(np.diff(np.unique(lags[lags > 0])))) if np.sum(lags > 0) > 1 else 1
        est = AcfEstimate(
            lags=lags,
            values=data["acf"],
            counts=np.maximum(counts, 1),
            stderr=stderr,
            base_minutes=base,
            tau_minutes=base,
        )
        fit = fit_acf(est, weights=cfg["weights"])
        report = {
            "kind": "acf",
            "xi": fit.nm.xi,
            "eta": fit.nm.eta,
            "omega": fit.nm.omega,
            "stderr": {"xi": fit.stderr[0], "eta": fit.stderr[1], "omega": fit.stderr[2]} if fit.stderr else None,
            "residual": fit.residual,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "diagnostic": fit.diagnostic,
            "input_sha256": digest,
        }
    else:
        data = _read_estimator_csv(in_path, ("tau", "kurtosis"))
        fit = fit_kurtosis_decay(data["tau"], data["kurtosis"])
        report = {
            "kind": "kurtosis",
            "amplitude": fit.amplitude,
            "rate": fit.rate,
            "residual": fit.residual,
            "converged": fit.converged,
            "n_used": fit.n_used,
            "n_excluded": fit.n_excluded,
            "diagnostic": fit.diagnostic,
            "input_sha256": digest,
        }

    out = Path(cfg["out"])
    _atomic_write(out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_manifest(Path(str(out) + ".manifest.json"), "fit", cfg, digest, [out.name])
    print(f"wrote {out} (converged={report['converged']})")
    return 0


def cmd_synth(cfg: dict) -> int:
    _require(cfg, "kind", "n", "out")
    seed = _seed_from(cfg)
    if seed is None:
        raise _UsageError("synth requires --seed (or QBM_SEED)")
    cfg["seed"] = seed
    n = int(cfg["n"])
    dt = int(cfg["dt"])
    digest = _sha256_config(cfg)
    out = Path(cfg["out"])

    if cfg["kind"] == "gbm":
        series = synth_gbm(mu=cfg["mu"], sigma=cfg["sigma"], n=n, dt_minutes=dt, seed=seed, s0=cfg["s0"])
    else:
        nm = _nm_params(cfg)
        try:
            returns = synth_colored(nm, n=n, dt_minutes=dt, base_noise=cfg["base_noise"], seed=seed)
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
        # integrate tau-normalized returns into a price path so the output is
        # a prices CSV the analyze command can consume directly
        log_price = math.log(cfg["s0"]) + np.concatenate([[0.0], np.cumsum(returns.values * dt)])
        times = SYNTH_START_MINUTE + np.arange(n + 1, dtype=np.int64) * dt
        series = PriceSeries(
            times=times,
            close=np.exp(log_price),
            sessions=((int(times[0]), int(times[-1])),),
            session_idx=np.zeros(n + 1, dtype=np.int64),
            base_minutes=dt,
        )

    lines = [f"# qbmarket {__version__}; input sha256={digest}"]
    lines.append("timestamp,close")
    for minute, price in zip(series.times, series.close):
        stamp = datetime.fromtimestamp(int(minute) * 60, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M")
        lines.append(f"{stamp},{_fmt(float(price))}")
    _atomic_write(out, "\n".join(lines) + "\n")
    _write_manifest(Path(str(out) + ".manifest.json"), "synth", cfg, digest, [out.name])
    print(f"wrote {out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser, registry = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _resolve(args, registry[args.command])
        return args.func(cfg)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

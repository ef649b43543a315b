"""Configuration-driven experiment runs writing CSV tables and a manifest.

Every run is deterministic given its configuration: CSV floats are written
with ``repr`` (shortest round-trip decimal) and sweeps over orders are
collected in input order whatever the thread count.
"""
import csv
import json
import os
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np
from scipy import stats

from . import __version__, _kernels
from .exceptions import BreakdownError, ConfigError, SeriesTruncationWarning
from .linalg import expm, hs_norm, op_norm
from .models import (CentralSpinParams, IsingParams, SpinBosonParams, central_spin_model,
                     ising_chain_model, linear_testbed, simulate_spin_boson)
from .propagation import (build_E_terms, error_curve, exact_reduced, integrate_ltv,
                          taylor_baseline)
from .quantum import (PAULI_X, PAULI_Y, PAULI_Z, classical_generator_checks,
                      classical_lindblad_embedding, is_lindblad_type, liouvillian,
                      positivity_exit_index, trace_norm, unvec, vec)
from .reduction import ProjectorFactorization, build_F_terms, exact_tcl_oracle, norm_study

__all__ = [
    "EXPERIMENTS", "ExperimentConfig", "default_config", "config_from_dict",
    "load_config", "read_config_dict", "run", "RunResult", "SlopeFit", "fit_order_slope",
    "load_model", "write_csv", "read_csv",
]

EXPERIMENTS = ("linear-testbed", "spin-boson", "central-spin", "ising-chain", "reduce")

# slope window for the linear testbed, in units of 1 / ||L||_op = 2
SLOPE_WINDOW = (2e-3, 2e-1)
SLOPE_POINTS = 25
SLOPE_DPS = 60
SLOPE_SERIES_TERMS = 40
SLOPE_FLOOR_DOUBLE = 1e-13
SLOPE_FLOOR_EXTENDED = 1e-40
MANIFEST = "manifest.json"


@dataclass
class ExperimentConfig:
    experiment: str
    orders: list
    series_terms: int = 100
    t_max: float = 1.0
    steps: int = 100
    seed: int = 0
    params: dict = field(default_factory=dict)
    output_dir: str = "out"
    model: Optional[str] = None


_PARAM_KEYS = {
    "linear-testbed": {"n", "m"},
    "spin-boson": {f.name for f in fields(SpinBosonParams)} - {"s"} | {"s_values", "phi"},
    "central-spin": {f.name for f in fields(CentralSpinParams)} - {"Lambda_diss"}
    | {"Lambda_values"},
    "ising-chain": {f.name for f in fields(IsingParams)},
    "reduce": {"oracle_times"},
}


def default_config(experiment):
    """Reference defaults; horizons are chosen where no reference value exists."""
    if experiment == "linear-testbed":
        return ExperimentConfig(experiment, [1, 2, 5, 10, 20], 100, 20.0, 200, 0,
                                {"n": 20, "m": 4}, "out/linear-testbed")
    if experiment == "spin-boson":
        return ExperimentConfig(experiment, [2], 100, 5.0, 500, 0,
                                {"s_values": [0.5, 1.0, 1.5], "phi": "recursion"},
                                "out/spin-boson")
    if experiment == "central-spin":
        return ExperimentConfig(experiment, [1, 2, 3, 4, 10, 20], 100, 8.0, 800, 0,
                                {"Lambda_values": [0.0, 0.8]}, "out/central-spin")
    if experiment == "ising-chain":
        return ExperimentConfig(experiment, [2, 4, 6], 100, 5.0, 500, 0, {},
                                "out/ising-chain")
    if experiment == "reduce":
        return ExperimentConfig(experiment, [2], 100, 1.0, 100, 0, {}, "out/reduce")
    raise ConfigError("experiment", f"unknown experiment {experiment!r}; "
                                    f"choose from {', '.join(EXPERIMENTS)}")


def _is_int(x):
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


def _is_real(x):
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def config_from_dict(data, experiment=None):
    """Merge ``data`` over the experiment defaults and validate every field."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown configuration key")
    exp = data.get("experiment", experiment)
    if exp is None:
        raise ConfigError("experiment", "missing")
    if experiment is not None and exp != experiment:
        raise ConfigError("experiment", f"config is for {exp!r} but {experiment!r} was requested")
    cfg = default_config(exp)
    params = dict(cfg.params)
    user_params = data.get("params", {})
    if not isinstance(user_params, dict):
        raise ConfigError("params", "must be an object")
    for key, value in user_params.items():
        if key not in _PARAM_KEYS[exp]:
            raise ConfigError(f"params.{key}", f"unknown parameter for {exp}")
        params[key] = value
    for key, value in data.items():
        if key not in ("experiment", "params"):
            setattr(cfg, key, value)
    cfg.params = params
    validate_config(cfg)
    return cfg


def validate_config(cfg):
    if cfg.experiment not in EXPERIMENTS:
        raise ConfigError("experiment", f"unknown experiment {cfg.experiment!r}")
    if not isinstance(cfg.orders, list) or not cfg.orders:
        raise ConfigError("orders", "must be a nonempty list")
    if not all(_is_int(n) and n >= 0 for n in cfg.orders):
        raise ConfigError("orders", "entries must be nonnegative integers")
    if len(set(cfg.orders)) != len(cfg.orders):
        raise ConfigError("orders", "entries must be distinct")
    if not _is_int(cfg.series_terms) or cfg.series_terms < 1:
        raise ConfigError("series_terms", "must be an integer >= 1")
    if not _is_real(cfg.t_max) or not cfg.t_max > 0 or not np.isfinite(cfg.t_max):
        raise ConfigError("t_max", "must be a finite number > 0")
    if not _is_int(cfg.steps) or cfg.steps < 1:
        raise ConfigError("steps", "must be an integer >= 1")
    if not _is_int(cfg.seed) or cfg.seed < 0:
        raise ConfigError("seed", "must be a nonnegative integer")
    if not isinstance(cfg.output_dir, str) or not cfg.output_dir:
        raise ConfigError("output_dir", "must be a nonempty path")
    p = cfg.params
    if cfg.experiment == "linear-testbed":
        n, m = p.get("n"), p.get("m")
        if not (_is_int(n) and _is_int(m) and 1 <= m < n):
            raise ConfigError("params", "need integers 1 <= m < n")
    elif cfg.experiment == "spin-boson":
        if cfg.orders != [2]:
            raise ConfigError("orders", "the spin-boson comparison is defined for order 2 only")
        s_values = p.get("s_values")
        if not isinstance(s_values, list) or not s_values or not all(
                _is_real(s) and s > 0 for s in s_values):
            raise ConfigError("params.s_values", "must be a nonempty list of positive numbers")
        phi = p.get("phi")
        if not (phi in ("recursion", "occupation") or _is_real(phi)):
            raise ConfigError("params.phi", "must be 'recursion', 'occupation' or a number")
        _make_params(SpinBosonParams, p, "spin-boson", s=s_values[0])
    elif cfg.experiment == "central-spin":
        lams = p.get("Lambda_values")
        if not isinstance(lams, list) or not lams or not all(_is_real(x) for x in lams):
            raise ConfigError("params.Lambda_values", "must be a nonempty list of numbers")
        _make_params(CentralSpinParams, p, "central-spin", Lambda_diss=float(lams[0]))
    elif cfg.experiment == "ising-chain":
        _make_params(IsingParams, p, "ising-chain")
    elif cfg.experiment == "reduce":
        if cfg.model is None:
            raise ConfigError("model", "reduce needs a model JSON file")
        times = p.get("oracle_times", [])
        if not isinstance(times, list) or not all(_is_real(t) and t >= 0 for t in times):
            raise ConfigError("params.oracle_times", "must be a list of numbers >= 0")


def _make_params(cls, p, exp, **extra):
    own = {f.name for f in fields(cls)}
    kwargs = {k: v for k, v in p.items() if k in own}
    kwargs.update(extra)
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError("params", f"{exp}: {exc}") from exc


def read_config_dict(path):
    """Raw JSON object of a config file, not yet merged or validated."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    return data


def load_config(path, experiment=None):
    return config_from_dict(read_config_dict(path), experiment)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def _fmt(x):
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_csv(path):
    """Header list and a float array of the rows."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        data = [[float(x) for x in row] for row in r if row]
    return header, np.array(data, dtype=float).reshape(-1, len(header))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

class RunResult(NamedTuple):
    output_dir: Path
    files: list
    status: str              # "ok" or "breakdown"
    exit_code: int
    manifest: dict


def _threads():
    raw = os.environ.get("TRED_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError("TRED_THREADS", f"must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError("TRED_THREADS", "must be >= 1")
    return n


def _map_ordered(fn, items):
    items = list(items)
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _bloch(rho):
    return [float(np.real(np.trace(rho @ s))) for s in (PAULI_X, PAULI_Y, PAULI_Z)]


def _label(x):
    """Compact file-name label for a parameter value (0.5 -> '0.5', 1.0 -> '1')."""
    return repr(float(x)).rstrip("0").rstrip(".") if float(x) != int(x) else str(int(x))


def _run_linear_testbed(cfg, out):
    p = cfg.params
    L, proj = linear_testbed(p["n"], p["m"], cfg.seed)
    z0 = np.random.default_rng([cfg.seed, 1]).uniform(0.0, 1.0, p["m"])
    z0 = z0 / np.linalg.norm(z0)
    grid = np.geomspace(SLOPE_WINDOW[0], cfg.t_max, cfg.steps)
    slope_grid = np.geomspace(*SLOPE_WINDOW, SLOPE_POINTS)
    gens = {N: build_F_terms(L, proj, N) for N in cfg.orders}

    def work(N):
        poly = error_curve(L, proj, gens[N], cfg.series_terms, grid, x0=z0)[:, 1]
        taylor = [float(np.linalg.norm((exact_reduced(L, proj, t)
                                        - taylor_baseline(L, proj, N, t)) @ z0))
                  for t in grid]
        slope = error_curve(L, proj, gens[N], SLOPE_SERIES_TERMS, slope_grid, x0=z0,
                            dps=SLOPE_DPS)[:, 1]
        return poly, np.array(taylor), slope

    res = dict(zip(cfg.orders, _map_ordered(work, cfg.orders)))
    header = ["t"] + [f"err_poly_N{N}" for N in cfg.orders] + [f"err_taylor_N{N}" for N in cfg.orders]
    cols = [res[N][0] for N in cfg.orders] + [res[N][1] for N in cfg.orders]
    write_csv(out / "error_curves.csv", header, np.column_stack([grid] + cols))
    write_csv(out / "slope_window.csv", ["t"] + [f"err_poly_N{N}" for N in cfg.orders],
              np.column_stack([slope_grid] + [res[N][2] for N in cfg.orders]))

    top = gens[max(cfg.orders)]
    write_csv(out / "norms_F.csv", ["k", "F_hs", "F_op", "L_hs_bound", "L_op_bound"],
              [tuple(r) for r in norm_study(top, L)])
    E = build_E_terms(top, cfg.series_terms).terms
    lhs, lop = hs_norm(L), op_norm(L)
    rows, hs_pow, op_pow = [], 1.0, 1.0
    for k in range(E.shape[0]):
        if k:
            hs_pow, op_pow = hs_pow * lhs / k, op_pow * lop / k
        rows.append((k, hs_norm(E[k]), op_norm(E[k]), hs_pow, op_pow))
    write_csv(out / "norms_E.csv", ["k", "E_hs", "E_op", "L_hs_bound", "L_op_bound"], rows)
    files = ["error_curves.csv", "slope_window.csv", "norms_F.csv", "norms_E.csv"]
    extra = {"slope_floors": {"error_curves.csv": SLOPE_FLOOR_DOUBLE,
                              "slope_window.csv": SLOPE_FLOOR_EXTENDED},
             "slope_window": list(SLOPE_WINDOW), "slope_dps": SLOPE_DPS}
    return files, extra


def _run_spin_boson(cfg, out):
    p = cfg.params
    base = {k: v for k, v in p.items() if k not in ("s_values", "phi")}
    files = []

    def work(s):
        params = SpinBosonParams(s=float(s), **base)
        return simulate_spin_boson(params, cfg.t_max, cfg.steps, phi=p["phi"])

    sims = _map_ordered(work, p["s_values"])
    names = ("exact", "second_order", "coarse_grained")
    header = ["t"]
    for n in names:
        header += [f"sx_{n}", f"sy_{n}", f"sz_{n}"]
    header += ["err_second_order", "err_coarse_grained", "exit_flag"]
    for s, trajs in zip(p["s_values"], sims):
        rows = []
        ex = trajs["exact"].states
        for i, t in enumerate(trajs["exact"].times):
            row = [t]
            for n in names:
                row += _bloch(trajs[n].states[i])
            row += [trace_norm(trajs["second_order"].states[i] - ex[i]),
                    trace_norm(trajs["coarse_grained"].states[i] - ex[i])]
            bad = positivity_exit_index([trajs[n].states[i] for n in names]) is not None
            row.append(int(bad))
            rows.append(row)
        name = f"spin_boson_s{_label(s)}.csv"
        write_csv(out / name, header, rows)
        files.append(name)
    return files, {}


def _exact_reduced_trajectory(L, proj, x0, t_max, steps):
    U = expm(L * (t_max / steps))
    x = np.asarray(x0, dtype=np.complex128)
    out = [proj.R @ x]
    for _ in range(steps):
        x = U @ x
        out.append(proj.R @ x)
    return np.array(out)


def _safe_states(states):
    """Replace rows that overflowed by NaN so that downstream norms do not fail."""
    states = np.array(states, dtype=np.complex128)
    bad = ~np.all(np.isfinite(states.reshape(states.shape[0], -1)), axis=1)
    states[bad] = np.nan
    return states, bad


def _run_central_spin(cfg, out):
    p = cfg.params
    base = {k: v for k, v in p.items() if k != "Lambda_values"}
    files = []
    for lam in p["Lambda_values"]:
        spec, proj, rho0 = central_spin_model(CentralSpinParams(Lambda_diss=float(lam), **base))
        L = liouvillian(spec)
        exact = _exact_reduced_trajectory(L, proj, vec(rho0), cfg.t_max, cfg.steps)
        z0 = proj.R @ vec(rho0)
        gens = {N: build_F_terms(L, proj, N) for N in cfg.orders}

        def work(N):
            with np.errstate(over="ignore", invalid="ignore"):
                tr = integrate_ltv(gens[N], z0, cfg.t_max, cfg.steps)
            return _safe_states(tr.states)

        runs = dict(zip(cfg.orders, _map_ordered(work, cfg.orders)))
        times = np.linspace(0.0, cfg.t_max, cfg.steps + 1)
        header = ["t", "sx_exact", "sy_exact", "sz_exact"]
        for N in cfg.orders:
            header += [f"err_poly_N{N}", f"sx_N{N}", f"sy_N{N}", f"sz_N{N}", f"exit_flag_N{N}"]
        rows = []
        for i, t in enumerate(times):
            rho_ex = unvec(exact[i])
            row = [t] + _bloch(rho_ex)
            for N in cfg.orders:
                states, bad = runs[N]
                if bad[i]:
                    row += [np.nan] * 4 + [1]
                    continue
                rho = unvec(states[i])
                flag = positivity_exit_index([rho]) is not None
                row += [trace_norm(rho - rho_ex)] + _bloch(rho) + [int(flag)]
            rows.append(row)
        name = f"central_spin_L{_label(lam)}.csv"
        write_csv(out / name, header, rows)
        files.append(name)
    return files, {}


def _run_ising(cfg, out):
    params = IsingParams(**cfg.params)
    spec, proj, p0 = ising_chain_model(params)
    L = liouvillian(spec)
    top = max(max(cfg.orders), 3)
    gen = build_F_terms(L, proj, top)
    d = proj.m
    F2 = gen.term(2)
    verdict = classical_generator_checks(F2)
    embedding = is_lindblad_type(classical_lindblad_embedding(F2))
    write_csv(out / "f2_matrix.csv", ["row"] + [f"c{j}" for j in range(d)],
              [[i] + list(F2.real[i]) for i in range(d)])

    x0 = proj.J @ p0
    exact = _exact_reduced_trajectory(L, proj, x0, cfg.t_max, cfg.steps).real

    def work(N):
        with np.errstate(over="ignore", invalid="ignore"):
            tr = integrate_ltv(gen.truncate(N), p0, cfg.t_max, cfg.steps)
        return _safe_states(tr.states)

    runs = dict(zip(cfg.orders, _map_ordered(work, cfg.orders)))
    times = np.linspace(0.0, cfg.t_max, cfg.steps + 1)
    header = ["t"] + [f"p{j}_exact" for j in range(d)]
    for N in cfg.orders:
        header += [f"p{j}_N{N}" for j in range(d)] + [f"exit_flag_N{N}"]
    rows = []
    exit_times = {}
    for N in cfg.orders:
        states, bad = runs[N]
        idx = positivity_exit_index(
            [s.real if not b else -np.ones(d) for s, b in zip(states, bad)])
        exit_times[f"N{N}"] = None if idx is None else float(times[idx])
    for i, t in enumerate(times):
        row = [t] + list(exact[i])
        for N in cfg.orders:
            states, bad = runs[N]
            pvec = states[i].real
            flag = bool(bad[i]) or np.min(pvec) < -1e-9
            row += list(pvec) + [int(flag)]
        rows.append(row)
    write_csv(out / "ising_populations.csv", header, rows)
    checks = {
        "F1_hs_norm": hs_norm(gen.term(1)),
        "F3_hs_norm": hs_norm(gen.term(3)),
        "F2_metzler": bool(verdict.metzler),
        "F2_zero_column_sums": bool(verdict.zero_column_sums),
        "F2_min_offdiag": float(verdict.min_offdiag),
        "F2_max_abs_column_sum": float(verdict.max_abs_column_sum),
        "F2_embedding_lindblad_type": bool(embedding.ok),
        "exit_times": exit_times,
    }
    with open(out / "checks.json", "w") as fh:
        json.dump(checks, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ["f2_matrix.csv", "ising_populations.csv", "checks.json"], {}


def _parse_complex_matrix(obj, name, shape):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"model.{name}", "entries must be numbers or [re, im] pairs") from exc
    if arr.ndim == 3 and arr.shape[2] == 2:
        arr = arr[..., 0] + 1j * arr[..., 1]
    elif arr.ndim != 2:
        raise ConfigError(f"model.{name}", "must be a row-major matrix")
    if arr.shape != shape:
        raise ConfigError(f"model.{name}", f"expected shape {shape}, got {arr.shape}")
    return arr.astype(np.complex128)


def load_model(path):
    """Read the model-interchange JSON {"n", "m", "L", "R", "J"}."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError("model", f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError("model", f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("model", "must be a JSON object")
    for key in data:
        if key not in ("n", "m", "L", "R", "J"):
            raise ConfigError(f"model.{key}", "unknown key")
    for key in ("n", "m", "L", "R", "J"):
        if key not in data:
            raise ConfigError(f"model.{key}", "missing")
    n, m = data["n"], data["m"]
    if not (_is_int(n) and _is_int(m) and 1 <= m <= n):
        raise ConfigError("model.n", "need integers 1 <= m <= n")
    L = _parse_complex_matrix(data["L"], "L", (n, n))
    R = _parse_complex_matrix(data["R"], "R", (m, n))
    J = _parse_complex_matrix(data["J"], "J", (n, m))
    try:
        proj = ProjectorFactorization(R, J)
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from exc
    return L, proj


def _run_reduce(cfg, out):
    L, proj = load_model(cfg.model)
    N = max(cfg.orders)
    gen = build_F_terms(L, proj, N)
    rows = []
    for k in range(1, N + 2):
        Fk = gen.term(k)
        for i in range(proj.m):
            for j in range(proj.m):
                rows.append((k, i, j, Fk[i, j].real, Fk[i, j].imag))
    write_csv(out / "f_terms.csv", ["k", "i", "j", "re", "im"], rows)
    files = ["f_terms.csv"]
    extra = {}
    times = cfg.params.get("oracle_times", [])
    if times:
        rows = []
        try:
            for t in times:
                Ft = exact_tcl_oracle(L, proj, float(t))
                for i in range(proj.m):
                    for j in range(proj.m):
                        rows.append((t, i, j, Ft[i, j].real, Ft[i, j].imag))
        except BreakdownError as exc:
            extra["breakdown"] = {"t": float(exc.t), "cond": float(exc.cond)}
        write_csv(out / "tcl_oracle.csv", ["t", "i", "j", "re", "im"], rows)
        files.append("tcl_oracle.csv")
    return files, extra


_RUNNERS = {
    "linear-testbed": _run_linear_testbed,
    "spin-boson": _run_spin_boson,
    "central-spin": _run_central_spin,
    "ising-chain": _run_ising,
    "reduce": _run_reduce,
}


def run(cfg):
    """Execute ``cfg``; CSVs first, manifest.json last.

    A breakdown of the exact time-local oracle keeps the partial results and
    is recorded in the manifest with exit code 3.
    """
    validate_config(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SeriesTruncationWarning)
        files, extra = _RUNNERS[cfg.experiment](cfg, out)
    status = "breakdown" if "breakdown" in extra else "ok"
    manifest = {
        "tool": "tred",
        "version": __version__,
        "experiment": cfg.experiment,
        "config": asdict(cfg),
        "files": files,
        "status": status,
        "numba": _kernels.USE_NUMBA,
        "threads": _threads(),
        "wall_clock_seconds": time.perf_counter() - start,
    }
    manifest.update(extra)
    with open(out / MANIFEST, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return RunResult(out, files, status, 3 if status == "breakdown" else 0, manifest)


# ---------------------------------------------------------------------------
# slope fitting
# ---------------------------------------------------------------------------

class SlopeFit(NamedTuple):
    column: str
    order: Optional[int]
    slope: Optional[float]
    stderr: Optional[float]
    lower: Optional[float]        # 95% confidence band
    upper: Optional[float]
    n_points: int
    skipped: Optional[str]        # reason when no fit was made


def _floor_from_manifest(path):
    mpath = Path(path).parent / MANIFEST
    try:
        with open(mpath) as fh:
            floors = json.load(fh).get("slope_floors", {})
    except (OSError, json.JSONDecodeError):
        return None
    return floors.get(Path(path).name)


def fit_order_slope(error_csv, window=SLOPE_WINDOW, floor=None, min_points=5):
    """Least-squares log-log slope of every ``err_poly_N*`` column.

    Points outside ``window``, non-finite, or at/below ``floor`` are dropped;
    the floor defaults to the one recorded for the file in the run manifest,
    else 1e-13.  Columns with fewer than ``min_points`` usable points are
    reported as skipped.
    """
    if floor is None:
        floor = _floor_from_manifest(error_csv)
    if floor is None:
        floor = SLOPE_FLOOR_DOUBLE
    header, data = read_csv(error_csv)
    if not header or header[0] != "t":
        raise ValueError(f"{error_csv}: first column must be 't'")
    t = data[:, 0]
    in_window = (t >= window[0]) & (t <= window[1])
    fits = []
    for c, name in enumerate(header):
        if not name.startswith("err_poly_N"):
            continue
        order = int(name[len("err_poly_N"):])
        y = data[:, c]
        use = in_window & np.isfinite(y) & (y > floor)
        npts = int(use.sum())
        if npts < min_points:
            fits.append(SlopeFit(name, order, None, None, None, None, npts,
                                 f"only {npts} points above floor {floor:g} in window"))
            continue
        res = stats.linregress(np.log(t[use]), np.log(y[use]))
        half = stats.t.ppf(0.975, npts - 2) * res.stderr
        fits.append(SlopeFit(name, order, float(res.slope), float(res.stderr),
                             float(res.slope - half), float(res.slope + half), npts, None))
    return fits

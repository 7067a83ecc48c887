"""Command-line interface.

Four subcommands: ``solve`` writes a trajectory of the physical state on a
uniform grid, ``les`` computes Lyapunov exponents along an attractor,
``sweep`` repeats ``les`` over a parameter range, ``convergence`` tabulates
the dominant-exponent error against a spectrum oracle while varying the
collocation degree or the horizon.  All output is CSV (UTF-8, LF line
endings, 17 significant digits); runs with identical configuration and
seed produce byte-identical files.  Exit codes: 0 success, 1 configuration
error, 2 numerical failure.
"""

import argparse
import math
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import backend, models
from .discretize import (build_coupled_system, build_re_system,
                         initial_state, output_row)
from .dqr import DqrConfig, DqrFailure, dqr_lyapunov
from .linalg import LinalgError, eigenvalues
from .linearize import VariationalSystem, linearize_along, reference_trajectory
from .models import (CoupledModel, quad_re_periodic_solution,
                     QUAD_RE_HOPF_GAMMA, QUAD_RE_PERIOD)
from .odeint import IntegrationError
from .oracle import equilibrium_les, floquet_les
from .discretize import equilibrium_state

MODEL_CHOICES = ("quad_re", "cannibalism_re", "logistic_daphnia", "linear")
SWEEP_PARAMS = ("gamma", "loggamma", "beta")

NUMERICAL_ERRORS = (IntegrationError, DqrFailure, LinalgError,
                    FloatingPointError)


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass
class RunConfig:
    command: str = "les"
    model: str = "quad_re"
    gamma: float = None
    beta: float = None
    growth: float = 1.0        # resource growth rate r
    capacity: float = 1.0      # resource carrying capacity K
    a_mat: float = 3.0
    a_max: float = 4.0
    diag: str = None           # synthetic linear model: comma-separated rates
    mx: int = 15
    my: int = None
    quad_degree: int = None
    t_end: float = 1000.0
    transient: float = 200.0
    margin: float = 50.0
    dqr_tol: float = 1e-6
    rtol: float = 1e-6
    atol: float = 1e-7
    seed: int = 1729
    init: str = "const:0.2"
    init_y: str = "eq:1.1"
    grid_step: float = 0.05
    param: str = None
    start: float = None
    stop: float = None
    step: float = None
    vary: str = None
    values: str = None
    oracle_degree: int = 40
    out: str = None
    backend_name: str = "auto"


def fmt(v):
    """17-significant-digit formatting; integers print exactly."""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.17g}"


def _write_csv(path, lines):
    text = "".join(line + "\n" for line in lines)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def make_model(cfg):
    if cfg.model == "quad_re":
        if cfg.gamma is None:
            raise ConfigError("quad_re requires --gamma")
        return models.quad_re(cfg.gamma)
    if cfg.model == "cannibalism_re":
        if cfg.gamma is None:
            raise ConfigError("cannibalism_re requires --gamma")
        return models.cannibalism_re(cfg.gamma)
    if cfg.model == "logistic_daphnia":
        if cfg.beta is None:
            raise ConfigError("logistic_daphnia requires --beta")
        return models.logistic_daphnia(
            cfg.beta, r=cfg.growth, K=cfg.capacity,
            gamma=cfg.gamma if cfg.gamma is not None else 1.0,
            a_mat=cfg.a_mat, a_max=cfg.a_max)
    raise ConfigError(f"unknown model {cfg.model!r}")


def _parse_init(spec_str, model, gamma):
    if spec_str == "persol":
        if gamma is None or gamma < QUAD_RE_HOPF_GAMMA:
            raise ConfigError(
                "persol initial data needs quad_re with gamma >= 2 + pi/2")
        return lambda th: quad_re_periodic_solution(gamma, th)
    if spec_str.startswith("const:"):
        try:
            return float(spec_str[6:])
        except ValueError as exc:
            raise ConfigError(f"bad init value {spec_str!r}") from exc
    try:
        return float(spec_str)
    except ValueError as exc:
        raise ConfigError(f"bad init spec {spec_str!r}") from exc


def _parse_init_y(spec_str, model):
    if spec_str.startswith("eq:"):
        factor = float(spec_str[3:])
        s_bar = dict((e.label, e.state) for e in model.equilibria)["coexistence"][1]
        return factor * s_bar
    if spec_str.startswith("const:"):
        return float(spec_str[6:])
    try:
        return float(spec_str)
    except ValueError as exc:
        raise ConfigError(f"bad init-y spec {spec_str!r}") from exc


def build_system(cfg, model=None, mx=None):
    model = model if model is not None else make_model(cfg)
    mx = mx if mx is not None else cfg.mx
    if isinstance(model, CoupledModel):
        my = cfg.my if cfg.my is not None else mx
        return model, build_coupled_system(model, mx, my,
                                           quad_degree=cfg.quad_degree)
    return model, build_re_system(model, mx, quad_degree=cfg.quad_degree)


def _initial_vector(cfg, model, system):
    phi = _parse_init(cfg.init, model, cfg.gamma)
    psi = _parse_init_y(cfg.init_y, model) if isinstance(model, CoupledModel) else None
    return initial_state(system, phi, psi)


def _linear_variational(cfg):
    if not cfg.diag:
        raise ConfigError("linear model requires --diag RATES")
    try:
        rates = np.array([float(v) for v in cfg.diag.split(",")])
    except ValueError as exc:
        raise ConfigError(f"bad --diag value {cfg.diag!r}") from exc
    a0 = np.diag(rates)
    return VariationalSystem(len(rates), lambda t: a0)


def run_les(cfg, mx=None, t_end=None):
    """Full pipeline: reference orbit, variational system, QR run."""
    t_end = t_end if t_end is not None else cfg.t_end
    if cfg.model == "linear":
        var = _linear_variational(cfg)
    else:
        model, system = build_system(cfg, mx=mx)
        y0 = _initial_vector(cfg, model, system)
        ref = reference_trajectory(system, y0, span=t_end,
                                   transient=cfg.transient, margin=cfg.margin,
                                   rtol=cfg.rtol, atol=cfg.atol)
        var = linearize_along(system, ref)
    dcfg = DqrConfig(t_end=t_end, le_tol=cfg.dqr_tol, seed=cfg.seed,
                     rtol=cfg.rtol, atol=cfg.atol)
    return dqr_lyapunov(var, dcfg)


def _meta_lines(cfg, extra=()):
    keys = ("model", "gamma", "beta", "growth", "capacity", "a_mat", "a_max",
            "diag", "mx", "my", "quad_degree", "t_end", "transient", "margin",
            "dqr_tol", "rtol", "atol", "seed", "init", "init_y")
    lines = []
    for key in keys:
        val = getattr(cfg, key)
        if val is None:
            continue
        lines.append(f"# {key}={val}")
    lines.append(f"# backend={backend.active_name()}")
    lines.extend(extra)
    return lines


def cmd_solve(cfg):
    if cfg.model == "linear":
        raise ConfigError("solve needs a delay model, not the linear test system")
    model, system = build_system(cfg)
    y0 = _initial_vector(cfg, model, system)
    traj = reference_trajectory(system, y0, span=cfg.t_end,
                                transient=cfg.transient, margin=0.0,
                                rtol=cfg.rtol, atol=cfg.atol)
    npts = int(math.floor(cfg.t_end / cfg.grid_step + 1e-9)) + 1
    grid = cfg.grid_step * np.arange(npts)
    states = traj.eval_many(grid)
    row = output_row(system)
    x = states @ row
    lines = _meta_lines(cfg)
    if isinstance(model, CoupledModel):
        lines.append("t,x,y")
        y = states[:, system.layout.m_x]
        lines.extend(f"{fmt(t)},{fmt(a)},{fmt(b)}" for t, a, b in zip(grid, x, y))
    else:
        lines.append("t,x")
        lines.extend(f"{fmt(t)},{fmt(a)}" for t, a in zip(grid, x))
    _write_csv(cfg.out, lines)


def cmd_les(cfg):
    run = run_les(cfg)
    lines = _meta_lines(cfg, (f"# t_final={fmt(run.t_final)}",
                              f"# steps={len(run.times) - 1}",
                              f"# rejects={run.reject_count}"))
    lines.append("rank,exponent")
    lines.extend(f"{i + 1},{fmt(lam)}" for i, lam in enumerate(run.exponents))
    _write_csv(cfg.out, lines)


def sweep_values(cfg):
    if cfg.param not in SWEEP_PARAMS:
        raise ConfigError(f"--param must be one of {SWEEP_PARAMS}")
    if cfg.start is None or cfg.stop is None or cfg.step is None:
        raise ConfigError("sweep requires --start, --stop and --step")
    if cfg.step <= 0 or cfg.stop < cfg.start:
        raise ConfigError("need step > 0 and stop >= start")
    count = int(math.floor((cfg.stop - cfg.start) / cfg.step + 1e-9)) + 1
    return cfg.start + cfg.step * np.arange(count)


def _config_at(cfg, value):
    if cfg.param == "gamma":
        return replace(cfg, gamma=float(value))
    if cfg.param == "loggamma":
        return replace(cfg, gamma=float(np.exp(value)))
    return replace(cfg, beta=float(value))


def run_sweep(cfg, progress=None):
    """Exponent pairs over the parameter grid; failed points become NaN."""
    vals = sweep_values(cfg)
    rows = []
    for v in vals:
        sub = _config_at(cfg, v)
        try:
            run = run_les(sub)
            lam = run.exponents
            rows.append((float(v), float(lam[0]),
                         float(lam[1]) if len(lam) > 1 else float("nan")))
        except NUMERICAL_ERRORS as exc:
            print(f"warning: {cfg.param}={v:g} failed: {exc}", file=sys.stderr)
            rows.append((float(v), float("nan"), float("nan")))
        if progress is not None:
            progress(rows[-1])
    return rows


def cmd_sweep(cfg):
    rows = run_sweep(cfg)
    lines = _meta_lines(cfg, (f"# param={cfg.param}",))
    lines.append(f"{cfg.param},lambda1,lambda2")
    lines.extend(f"{fmt(v)},{fmt(l1)},{fmt(l2)}" for v, l1, l2 in rows)
    _write_csv(cfg.out, lines)


def _stable_equilibrium_oracle(cfg, model):
    """Dominant exponent of the attracting equilibrium at the oracle degree."""
    _, system = build_system(cfg, model=model, mx=cfg.oracle_degree)
    best = None
    for eq in model.equilibria:
        state = equilibrium_state(system, eq)
        try:
            res = equilibrium_les(system, state)
        except (ValueError, LinalgError):
            continue
        lam1 = float(res.exponents[0])
        if lam1 < 0 and (best is None or lam1 > best):
            best = lam1
    if best is None:
        raise ConfigError(
            "no attracting equilibrium; convergence oracle unavailable here")
    return best


def _floquet_oracle(cfg, model):
    """Dominant exponent of the known periodic orbit (trivially 0, computed
    anyway through the monodromy at the oracle degree)."""
    _, system = build_system(cfg, model=model, mx=cfg.oracle_degree)
    phi = lambda th: quad_re_periodic_solution(cfg.gamma, th)
    y0 = initial_state(system, phi)
    ref = reference_trajectory(system, y0, span=QUAD_RE_PERIOD, transient=0.0,
                               margin=1.0, rtol=1e-9, atol=1e-12)
    var = linearize_along(system, ref)
    res = floquet_les(var, QUAD_RE_PERIOD)
    return float(res.exponents[0])


def run_convergence(cfg):
    if cfg.vary not in ("M", "T"):
        raise ConfigError("--vary must be M or T")
    if not cfg.values:
        raise ConfigError("convergence requires --values")
    try:
        vals = [float(v) for v in cfg.values.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --values list {cfg.values!r}") from exc
    if cfg.model == "linear":
        # no mesh, so varying M only checks that the error has no
        # discretization component; the spectrum is the exact oracle
        var = _linear_variational(cfg)
        oracle = float(np.max(eigenvalues(var.matrix(0.0)).real))
    else:
        model = make_model(cfg)
        periodic = (cfg.model == "quad_re" and cfg.gamma is not None
                    and cfg.gamma > QUAD_RE_HOPF_GAMMA)
        oracle = (_floquet_oracle(cfg, model) if periodic
                  else _stable_equilibrium_oracle(cfg, model))
    rows = []
    for v in vals:
        if cfg.vary == "M":
            run = run_les(cfg, mx=int(v))
        else:
            run = run_les(cfg, t_end=float(v))
        rows.append((v, abs(float(run.exponents[0]) - oracle)))
    return rows, oracle


def cmd_convergence(cfg):
    rows, oracle = run_convergence(cfg)
    lines = _meta_lines(cfg, (f"# vary={cfg.vary}", f"# oracle={fmt(oracle)}"))
    lines.append("value,error")
    for v, err in rows:
        head = str(int(v)) if cfg.vary == "M" else fmt(v)
        lines.append(f"{head},{fmt(err)}")
    _write_csv(cfg.out, lines)


def _add_shared(p):
    p.add_argument("--model", choices=MODEL_CHOICES)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--r", dest="growth", type=float)
    p.add_argument("--K", dest="capacity", type=float)
    p.add_argument("--a-mat", dest="a_mat", type=float)
    p.add_argument("--a-max", dest="a_max", type=float)
    p.add_argument("--diag")
    p.add_argument("--MX", dest="mx", type=int)
    p.add_argument("--MY", dest="my", type=int)
    p.add_argument("--quad-degree", dest="quad_degree", type=int)
    p.add_argument("--T", dest="t_end", type=float)
    p.add_argument("--transient", type=float)
    p.add_argument("--margin", type=float)
    p.add_argument("--dqr-tol", dest="dqr_tol", type=float)
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--init")
    p.add_argument("--init-y", dest="init_y")
    p.add_argument("--out")
    p.add_argument("--config", dest="config_file")
    p.add_argument("--backend", dest="backend_name",
                   choices=("auto", "compiled", "pure"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="delyap",
        description="Lyapunov exponents of renewal and delay equations "
                    "via collocation and the discrete QR method")
    sub = parser.add_subparsers(dest="command", required=True)
    ps = sub.add_parser("solve", help="integrate and write the physical state")
    ps.add_argument("--grid-step", dest="grid_step", type=float)
    pl = sub.add_parser("les", help="Lyapunov exponents of one configuration")
    pw = sub.add_parser("sweep", help="exponents over a parameter range")
    pw.add_argument("--param", choices=SWEEP_PARAMS)
    pw.add_argument("--start", type=float)
    pw.add_argument("--stop", type=float)
    pw.add_argument("--step", type=float)
    pc = sub.add_parser("convergence", help="dominant-exponent error vs oracle")
    pc.add_argument("--vary", choices=("M", "T"))
    pc.add_argument("--values")
    pc.add_argument("--oracle-degree", dest="oracle_degree", type=int)
    for p in (ps, pl, pw, pc):
        _add_shared(p)
    return parser


def _read_config_file(path):
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, _, val = line.partition("=")
                out[key.strip().replace("-", "_")] = val.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return out


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CONFIG_ALIASES = {"T": "t_end", "r": "growth", "K": "capacity",
                   "MX": "mx", "MY": "my",
                   "backend": "backend_name", "config": "config_file"}


def resolve_config(args):
    """Merge defaults, config file and explicit flags (flags win)."""
    cfg = RunConfig(command=args.command)
    if args.command == "solve":
        cfg.transient = 0.0
        cfg.t_end = 500.0
    file_vals = {}
    if getattr(args, "config_file", None):
        file_vals = _read_config_file(args.config_file)
    for key, raw in file_vals.items():
        key = _CONFIG_ALIASES.get(key, key)
        if key in ("command", "config_file"):
            continue
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        ftype = _FIELD_TYPES.get(key, "str")
        try:
            if "int" in str(ftype):
                setattr(cfg, key, int(raw))
            elif "float" in str(ftype):
                setattr(cfg, key, float(raw))
            else:
                setattr(cfg, key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    for key, val in vars(args).items():
        if key in ("command", "config_file") or val is None:
            continue
        setattr(cfg, key, val)
    _validate(cfg)
    return cfg


def _validate(cfg):
    if cfg.model not in MODEL_CHOICES:
        raise ConfigError(f"unknown model {cfg.model!r}")
    for name in ("t_end", "rtol", "atol", "dqr_tol", "grid_step"):
        if getattr(cfg, name) <= 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.transient < 0 or cfg.margin < 0:
        raise ConfigError("transient and margin must be nonnegative")
    if cfg.mx < 2:
        raise ConfigError("MX must be >= 2")
    if cfg.my is not None and cfg.my < 1:
        raise ConfigError("MY must be >= 1")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        cfg = resolve_config(args)
        backend.set_default(cfg.backend_name)
        handler = {"solve": cmd_solve, "les": cmd_les, "sweep": cmd_sweep,
                   "convergence": cmd_convergence}[cfg.command]
        handler(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    return 0


def console_entry():
    sys.exit(main())


if __name__ == "__main__":
    console_entry()

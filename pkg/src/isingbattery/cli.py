"""Command-line front end.

Every output file starts with ``#`` comment lines recording the package
version and the resolved configuration.  Passing such a file back through
``--config`` re-runs the same computation.
"""

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .chain_model import BRANCHES, N_MAX, ChainSpec, Partition, build_h_parts, initial_state, open_chain_hamiltonian
from .closed_form import single_spin_report
from .analytic_correlators import (
    correlators_exact,
    correlators_ground,
    correlators_thermal,
    corr_xz_numeric,
    with_identity_cxz,
)
from .cycle import ergotropy_spectral, phase_coupling, phase_vector
from .exceptions import DomainError, InvariantViolation
from .phases import minimize_reconnect_detailed
from .sweeps_and_scaling import FIT_POINTS, FIT_WINDOW, fit_exponent, fit_window_grid, sweep
from .spin_algebra import partial_trace

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO = 0, 2, 3, 4

CORRELATOR_COLUMNS = ["f", "T", "source", "sx", "sz", "cxx", "cyy", "czz", "cxz", "delta"]
CYCLE_COLUMNS = ["f", "T", "N", "M", "E_d", "ergotropy", "E_c", "E_c_min", "E_th", "eta", "theta_star", "seed", "error"]
FIT_QUANTITIES = ("ergotropy", "eta", "E_d", "E_c", "E_c_min", "cxz")


class ConfigError(Exception):
    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name


@dataclass
class RunConfig:
    command: str = "cycle"
    n: int = 8
    m: int = 1
    start: int = 0
    f: float = 0.3
    f_grid: str = ""
    t_grid: str = ""
    temp: float = 0.0
    branch: str = "plus"
    tilt: float = 0.0
    phases: str = "zero"
    theta: str = "0"
    seed: int = 0
    budget: int = 20000
    precision: int = 12
    source: str = "quadrature"
    quantity: str = "ergotropy"
    route: str = "closed-form"
    window: str = f"{FIT_WINDOW[0]}:{FIT_WINDOW[1]}"
    points: int = FIT_POINTS
    input: str = ""
    dump_coupling: bool = False
    workers: int = 1
    out: str = ""

    def items(self):
        return [(fl.name, getattr(self, fl.name)) for fl in fields(self)]


# keys that only steer where output goes; not echoed into the header
_NOT_ECHOED = {"out", "workers", "command"}


def _parse_value(name, raw):
    kind = {fl.name: fl.type for fl in fields(RunConfig)}[name]
    try:
        if kind is bool or kind == "bool":
            if isinstance(raw, bool):
                return raw
            low = str(raw).strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off", ""):
                return False
            raise ValueError(raw)
        if kind is int or kind == "int":
            return int(raw)
        if kind is float or kind == "float":
            return float(raw)
        return str(raw)
    except ValueError:
        raise ConfigError(name, f"cannot parse {raw!r}") from None


def read_config_file(path):
    """key=value pairs from a plain config file or from a previous output's header."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from None
    from_output = bool(lines) and lines[0].startswith("# isingbattery")
    known = {fl.name for fl in fields(RunConfig)}
    out = {}
    for lineno, line in enumerate(lines, 1):
        text = line.strip()
        if text.startswith("# config:"):
            text = text[len("# config:"):].strip()
        elif from_output or not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError("config", f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in text.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise ConfigError("config", f"{path}:{lineno}: unknown key {key!r}")
        if key != "command":
            out[key] = _parse_value(key, value)
    return out


def parse_grid(name, text):
    """``lo:hi:steps`` (inclusive, evenly spaced) or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, steps = text.split(":")
            lo, hi, steps = float(lo), float(hi), int(steps)
            if steps < 1:
                raise ConfigError(name, "steps must be >= 1")
            if steps == 1:
                return [lo]
            if hi <= lo:
                raise ConfigError(name, "hi must exceed lo")
            return [float(v) for v in np.linspace(lo, hi, steps)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(name, f"cannot parse grid {text!r}; use lo:hi:steps or a comma list") from None


def parse_theta(text):
    try:
        parts = [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise ConfigError("theta", f"cannot parse {text!r}") from None
    if not parts:
        raise ConfigError("theta", "empty phase specification")
    return parts[0] if len(parts) == 1 else np.array(parts)


def validate(cfg):
    if not 2 <= cfg.n <= N_MAX:
        raise ConfigError("n", f"must lie in [2, {N_MAX}], got {cfg.n}")
    if not 1 <= cfg.m <= cfg.n - 1:
        raise ConfigError("m", f"must lie in [1, {cfg.n - 1}] for n={cfg.n}, got {cfg.m}")
    if not 0 <= cfg.start < cfg.n:
        raise ConfigError("start", f"must lie in [0, {cfg.n - 1}], got {cfg.start}")
    if not 0.0 <= cfg.f <= 1.0:
        raise ConfigError("f", f"must lie in [0, 1], got {cfg.f}")
    if not cfg.temp >= 0.0:
        raise ConfigError("temp", f"must be >= 0, got {cfg.temp}")
    if cfg.branch not in BRANCHES:
        raise ConfigError("branch", f"must be one of {', '.join(BRANCHES)}, got {cfg.branch!r}")
    if not cfg.tilt >= 0.0:
        raise ConfigError("tilt", f"must be >= 0, got {cfg.tilt}")
    if cfg.phases not in ("zero", "min", "fixed"):
        raise ConfigError("phases", f"must be zero, min or fixed, got {cfg.phases!r}")
    if cfg.budget < 1:
        raise ConfigError("budget", f"must be positive, got {cfg.budget}")
    if not 0 <= cfg.precision <= 17:
        raise ConfigError("precision", f"must lie in [0, 17], got {cfg.precision}")
    if cfg.source not in ("quadrature", "exact", "both"):
        raise ConfigError("source", f"must be quadrature, exact or both, got {cfg.source!r}")
    if cfg.quantity not in FIT_QUANTITIES:
        raise ConfigError("quantity", f"must be one of {', '.join(FIT_QUANTITIES)}, got {cfg.quantity!r}")
    if cfg.route not in ("closed-form", "chain"):
        raise ConfigError("route", f"must be closed-form or chain, got {cfg.route!r}")
    if cfg.points < 2:
        raise ConfigError("points", f"must be >= 2, got {cfg.points}")
    if cfg.workers < 1:
        raise ConfigError("workers", f"must be >= 1, got {cfg.workers}")
    if cfg.f_grid and cfg.t_grid:
        raise ConfigError("t_grid", "give either f_grid or t_grid, not both")
    for name in ("f_grid", "t_grid"):
        grid = parse_grid(name, getattr(cfg, name)) if getattr(cfg, name) else []
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(name, "values must be strictly increasing")
        if name == "f_grid" and any(not 0.0 <= v <= 1.0 for v in grid):
            raise ConfigError(name, "values must lie in [0, 1]")
        if name == "t_grid" and any(v < 0.0 for v in grid):
            raise ConfigError(name, "values must be >= 0")
    if cfg.phases == "fixed":
        theta = parse_theta(cfg.theta)
        if np.ndim(theta) and len(theta) != 1 << cfg.m:
            raise ConfigError("theta", f"needs 1 or {1 << cfg.m} angles for m={cfg.m}, got {len(theta)}")
        if not np.ndim(theta) and cfg.m != 1 and theta != 0.0:
            raise ConfigError("theta", f"a single angle only applies to m=1; give {1 << cfg.m} angles")
    window_bounds(cfg)
    return cfg


def window_bounds(cfg):
    try:
        lo, hi = (float(v) for v in cfg.window.split(":"))
    except ValueError:
        raise ConfigError("window", f"expected lo:hi, got {cfg.window!r}") from None
    if not 0.0 < lo < hi < 0.5:
        raise ConfigError("window", f"must satisfy 0 < lo < hi < 0.5, got {cfg.window!r}")
    return lo, hi


def fmt(value, precision):
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, np.ndarray):
        return ";".join(fmt(float(v), precision) for v in value)
    v = float(value)
    if math.isnan(v):
        return ""
    out = f"{v:.{precision}f}"
    # avoid "-0.000" in fixed notation
    if out.lstrip("-").strip("0.") == "" and out.startswith("-"):
        out = out[1:]
    return out


def render(cfg, columns, rows, extra_header=()):
    buf = io.StringIO()
    buf.write(f"# isingbattery {__version__}\n")
    buf.write(f"# command: {cfg.command}\n")
    for key, value in cfg.items():
        if key not in _NOT_ECHOED:
            buf.write(f"# config: {key}={fmt(value, 17) if isinstance(value, bool) else value}\n")
    for line in extra_header:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row.get(c), cfg.precision) for c in columns])
    return buf.getvalue()


def emit(cfg, text):
    if not cfg.out or cfg.out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {cfg.out}: {exc.strerror}") from None


def _spec(cfg, f=None, T=None):
    return ChainSpec(
        N=cfg.n, f=cfg.f if f is None else f, T=cfg.temp if T is None else T,
        tilt_h=cfg.tilt, ground_branch=cfg.branch,
    )


def _f_values(cfg):
    return parse_grid("f_grid", cfg.f_grid) if cfg.f_grid else [cfg.f]


def _policy(cfg):
    if cfg.phases == "zero":
        return "zero"
    if cfg.phases == "min":
        return "minimize"
    theta = parse_theta(cfg.theta)
    return phase_vector(theta, 1 << cfg.m)


def cmd_correlators(cfg):
    rows = []
    for f in _f_values(cfg):
        if cfg.source in ("quadrature", "both"):
            cs = correlators_ground(f) if cfg.temp == 0.0 else correlators_thermal(f, cfg.temp)
            rows.append(cs.as_row())
        if cfg.source in ("exact", "both"):
            rows.append(correlators_exact(_spec(cfg, f=f)).as_row())
    return render(cfg, CORRELATOR_COLUMNS, rows)


def _cycle_row(report, error=None, f=None, T=None, cfg=None):
    if report is None:
        return {"f": f, "T": T, "N": cfg.n, "M": cfg.m, "error": error}
    row = report.as_row()
    row["error"] = error
    return row


def cmd_cycle(cfg):
    part = Partition(cfg.start, cfg.m)
    template = _spec(cfg)
    if cfg.t_grid:
        axis, grid = "T", parse_grid("t_grid", cfg.t_grid)
    else:
        axis, grid = "f", _f_values(cfg)
    result = sweep(template, part, axis, grid, policy=_policy(cfg), seed=cfg.seed, budget=cfg.budget, workers=cfg.workers)
    rows = []
    for p in result.points:
        f = p.value if axis == "f" else cfg.f
        T = p.value if axis == "T" else cfg.temp
        rows.append(_cycle_row(p.report, p.error, f, T, cfg))
    failures = sum(1 for p in result.points if p.error)
    text = render(cfg, CYCLE_COLUMNS, rows)
    if failures and failures == len(result.points):
        first = next(p.error for p in result.points if p.error)
        if first.startswith("InvariantViolation"):
            raise InvariantViolation(first)
        raise DomainError(first)
    return text


def cmd_optimize(cfg):
    spec = _spec(cfg)
    part = Partition(cfg.start, cfg.m).validate(spec.N)
    varrho = initial_state(spec)
    _, _, h_int = build_h_parts(spec, part)
    rho = partial_trace(varrho, part.sites(spec.N), spec.N)
    erg = ergotropy_spectral(0.5 * (rho + rho.conj().T), open_chain_hamiltonian(part.M, spec.f))
    coupling = phase_coupling(varrho, h_int, erg, part)
    opt = minimize_reconnect_detailed(coupling, seed=cfg.seed, budget=cfg.budget)
    p = cfg.precision
    summary = [
        f"ergotropy {fmt(erg.ergotropy, p)}",
        f"E_c(theta=0) {fmt(opt.zero_value, p)}",
        f"E_c_min {fmt(opt.value, p)}",
        f"differential_evolution {fmt(opt.de_value, p)} ({opt.evaluations} evaluations)",
        f"coordinate_descent_restarts {fmt(opt.descent_value, p)}",
        f"lower_bound {fmt(opt.lower_bound, p)}",
        f"theta_star {fmt(opt.theta, p)}",
    ]
    if cfg.dump_coupling:
        d = coupling.dim
        columns = ["alpha", "gamma", "A", "phi"]
        rows = [
            {"alpha": a, "gamma": g, "A": coupling.A[a, g], "phi": coupling.phi[a, g]}
            for a in range(d)
            for g in range(d)
        ]
    else:
        columns = ["alpha", "theta_star"]
        rows = [{"alpha": a, "theta_star": float(t)} for a, t in enumerate(opt.theta)]
    return render(cfg, columns, rows, extra_header=summary), summary


def _fit_series(cfg):
    lo, hi = window_bounds(cfg)
    grid = fit_window_grid((lo, hi), cfg.points)
    if cfg.input:
        return _read_series(cfg.input, cfg.quantity)
    q = cfg.quantity
    if q == "cxz":
        return [(float(f), abs(corr_xz_numeric(_spec(cfg, f=float(f), T=0.0)))) for f in grid]
    if cfg.route == "closed-form":
        if cfg.m != 1 or cfg.temp != 0.0:
            raise ConfigError("route", "the closed-form route covers m=1 at temp=0 only")
        theta = float(parse_theta(cfg.theta)) if np.ndim(parse_theta(cfg.theta)) == 0 else None
        if theta is None:
            raise ConfigError("theta", "the closed-form route takes a single angle")
        out = []
        for f in grid:
            rep = single_spin_report(float(f), theta, with_identity_cxz(correlators_ground(float(f))))
            out.append((float(f), getattr(rep, q)))
        return out
    res = sweep(_spec(cfg), Partition(cfg.start, cfg.m), "f", sorted(float(f) for f in grid),
                policy=_policy(cfg), seed=cfg.seed, budget=cfg.budget, workers=cfg.workers)
    return res.series(q)


def _read_series(path, quantity):
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln and not ln.startswith("#")]
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror}") from None
    reader = csv.DictReader(lines)
    if reader.fieldnames is None or "f" not in reader.fieldnames or quantity not in reader.fieldnames:
        raise ConfigError("input", f"{path} lacks an 'f' or '{quantity}' column")
    out = []
    for lineno, row in enumerate(reader, 2):
        if row[quantity] == "":
            continue
        try:
            out.append((float(row["f"]), float(row[quantity])))
        except (TypeError, ValueError):
            raise ConfigError("input", f"{path}: data row {lineno} is not numeric") from None
    return out


def cmd_fit(cfg):
    series = _fit_series(cfg)
    fit = fit_exponent(series, window_bounds(cfg), quantity=cfg.quantity)
    p = min(cfg.precision, 6)
    line = (
        f"{cfg.quantity}: exponent {fit.exponent:.{p}f} +/- {fit.stderr:.{p}f}  "
        f"window [{fit.window[0]}, {fit.window[1]}]  r2 {fit.r_squared:.{p}f}  points {fit.points}"
    )
    summary = [line]
    rows = [{"f": f, cfg.quantity: v} for f, v in series]
    return render(cfg, ["f", cfg.quantity], rows, extra_header=summary), summary


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=None, help="key=value file (or a previous output); flags override it")
    common.add_argument("--n", type=int, default=S, help="ring size N")
    common.add_argument("--m", type=int, default=S, help="battery size M")
    common.add_argument("--start", type=int, default=S, help="first battery site")
    common.add_argument("--f", type=float, default=S, help="mixing parameter f")
    common.add_argument("--f-grid", dest="f_grid", default=S, help="lo:hi:steps or comma list")
    common.add_argument("--t-grid", dest="t_grid", default=S, help="temperature grid, lo:hi:steps or comma list")
    common.add_argument("--temp", type=float, default=S, help="temperature (0: ground state)")
    common.add_argument("--branch", default=S, help=f"ground-state branch: {', '.join(BRANCHES)}")
    common.add_argument("--tilt", type=float, default=S, help="longitudinal tilt field selecting the ground state")
    common.add_argument("--phases", default=S, help="zero | min | fixed")
    common.add_argument("--theta", default=S, help="phase(s) for --phases fixed; one angle for m=1 or 2^m angles")
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--budget", type=int, default=S, help="differential-evolution evaluation budget")
    common.add_argument("--precision", type=int, default=S, help="decimal places in CSV output")
    common.add_argument("--workers", type=int, default=S, help="processes for sweeps")
    common.add_argument("--out", default=S, help="output path (default: stdout)")

    parser = argparse.ArgumentParser(prog="isingbattery", description="Quantum battery cycle on a transverse-field Ising ring.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("correlators", parents=[common], help="magnetisations and nearest-neighbour correlators")
    p.add_argument("--source", default=S, help="quadrature | exact | both")
    sub.add_parser("cycle", parents=[common], help="run the cycle at one f or over a grid")
    sub.add_parser("sweep", parents=[common], help="alias of cycle, intended with --f-grid or --t-grid")
    p = sub.add_parser("optimize-phases", parents=[common], help="phase-coupling diagnostics and E_c minimisation")
    p.add_argument("--dump-coupling", dest="dump_coupling", action="store_const", const=True, default=S)
    p = sub.add_parser("fit-exponent", parents=[common], help="power-law exponent near the critical point")
    p.add_argument("--quantity", default=S, help=f"one of {', '.join(FIT_QUANTITIES)}")
    p.add_argument("--route", default=S, help="closed-form (m=1 infinite chain) | chain (finite ring)")
    p.add_argument("--window", default=S, help="lo:hi in f")
    p.add_argument("--points", type=int, default=S, help="points in the window, log-spaced in f_c - f")
    p.add_argument("--input", default=S, help="CSV from a previous run to fit instead of computing")
    return parser


def resolve(argv):
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    merged = {}
    if config_path:
        merged.update(read_config_file(config_path))
    merged.update({k: _parse_value(k, v) for k, v in args.items()})
    cfg = RunConfig(command="cycle" if command == "sweep" else command, **merged)
    return validate(cfg)


COMMANDS = {
    "correlators": cmd_correlators,
    "cycle": cmd_cycle,
    "optimize-phases": cmd_optimize,
    "fit-exponent": cmd_fit,
}


def main(argv=None):
    try:
        cfg = resolve(sys.argv[1:] if argv is None else argv)
        result = COMMANDS[cfg.command](cfg)
        if isinstance(result, tuple):
            text, summary = result
            if cfg.out and cfg.out != "-":
                for line in summary:
                    print(line)
        else:
            text = result
        emit(cfg, text)
    except (ConfigError, DomainError) as exc:
        print(f"isingbattery: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"isingbattery: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"isingbattery: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

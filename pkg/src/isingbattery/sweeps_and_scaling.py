"""Parameter sweeps, maxima and power-law fits near the critical point."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .chain_model import F_CRITICAL
from .cycle import run_cycle
from .exceptions import DomainError, InvariantViolation

AXES = ("f", "T")
FIT_WINDOW = (0.45, 0.4999)
FIT_POINTS = 30
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class SweepPoint:
    value: float
    report: Optional[object]
    error: Optional[str] = None


@dataclass(frozen=True)
class SweepResult:
    axis: str
    points: list
    metadata: dict = field(default_factory=dict)

    def values(self):
        return np.array([p.value for p in self.points])

    def series(self, quantity):
        """(parameter, value) pairs for points that ran; failed points are skipped."""
        return [(p.value, getattr(p.report, quantity)) for p in self.points if p.report is not None]


def point_seed(seed, index):
    """Seed for one grid point, independent of evaluation order."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def _run_point(args):
    spec, part, policy, seed, budget = args
    if isinstance(spec, DomainError):
        return None, f"DomainError: {spec}"
    try:
        return run_cycle(spec, part, phase_policy=policy, seed=seed, budget=budget), None
    except (DomainError, InvariantViolation) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def sweep(template, part, axis, grid, policy="zero", seed=0, budget=20000, workers=1):
    """Run one cycle per grid value of ``axis`` ("f" or "T").

    Failing points keep their row with the error message instead of aborting.
    """
    if axis not in AXES:
        raise DomainError(f"axis must be one of {AXES}, got {axis!r}")
    grid = [float(v) for v in grid]
    if not grid:
        raise DomainError("grid is empty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("grid must be strictly increasing")
    jobs = []
    for k, v in enumerate(grid):
        try:
            spec = replace(template, **{axis: v})
        except DomainError as exc:
            spec = exc
        jobs.append((spec, part, policy, point_seed(seed, k), budget))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_point, jobs))
    else:
        outcomes = [_run_point(j) for j in jobs]
    points = [SweepPoint(v, rep, err) for v, (rep, err) in zip(grid, outcomes)]
    meta = {"spec": template, "partition": part, "policy": policy, "seed": seed, "budget": budget}
    return SweepResult(axis=axis, points=points, metadata=meta)


@dataclass(frozen=True)
class ExponentFit:
    exponent: float
    stderr: float
    window: tuple
    r_squared: float
    quantity: str
    points: int
    prefactor: float


def fit_window_grid(window=FIT_WINDOW, points=FIT_POINTS):
    """``points`` values of f in ``window``, log-spaced in the distance f_c - f."""
    lo, hi = window
    d = np.logspace(np.log10(F_CRITICAL - lo), np.log10(F_CRITICAL - hi), points)
    return F_CRITICAL - d


def fit_exponent(series, window=FIT_WINDOW, quantity="value"):
    """Least-squares slope of log(value) against log(f_c - f) inside ``window``."""
    lo, hi = window
    if not 0.0 < lo < hi < F_CRITICAL:
        raise DomainError(f"fit window {window} must lie strictly inside (0, {F_CRITICAL})")
    pts = [(float(f), v) for f, v in series if lo - 1e-12 <= f <= hi + 1e-12]
    if len(pts) < MIN_FIT_POINTS:
        raise DomainError(f"{len(pts)} points in window {window}; at least {MIN_FIT_POINTS} are needed")
    f = np.array([p[0] for p in pts])
    y = np.array([np.nan if p[1] is None else float(p[1]) for p in pts])
    if not np.all(y > 0.0):
        raise DomainError(f"{quantity} must be positive throughout the fit window")
    x = np.log(F_CRITICAL - f)
    ly = np.log(y)
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ np.array([slope, icpt])
    n = len(x)
    sxx = np.sum((x - x.mean()) ** 2)
    stderr = float(np.sqrt(np.sum(resid**2) / (n - 2) / sxx)) if n > 2 else float("nan")
    sst = np.sum((ly - ly.mean()) ** 2)
    r2 = 1.0 - float(np.sum(resid**2) / sst) if sst > 0 else 1.0
    return ExponentFit(float(slope), stderr, (lo, hi), r2, quantity, n, float(np.exp(icpt)))


def locate_max(series):
    """Grid argmax of (parameter, value) pairs; ties go to the smaller parameter."""
    pts = [(float(f), float(v)) for f, v in series if v is not None]
    if not pts:
        raise DomainError("series is empty")
    pts.sort()
    best = pts[0]
    for p in pts[1:]:
        if p[1] > best[1]:
            best = p
    return best

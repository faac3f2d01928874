"""Derivative-free violation search and parameter scans.

Multi-start coordinate pattern search over measurement angles (and,
for the moment-inequality case, over diagonal state weights).  The
objective is always oriented so that positive values mean violation;
binned-probability objectives are only piecewise smooth, which is why
no gradients are used.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ValidationError
from .spin import SpinQuantum, UnitVector, build_spin_rep
from .states import (
    BipartiteState,
    SymmetricState,
    rm_weighted,
    spin_correlation_matrix,
)
from .functionals import (
    ViolationReport,
    VIOLATION_TOL,
    cfrd_margin,
    chsh_value,
    mermin_check,
    reid_ratio,
    tura_value,
)


@dataclass(frozen=True)
class SearchConfig:
    """Multi-start pattern-search parameters.  The seed is mandatory:
    every reported number must be reproducible."""

    seed: int
    restarts: int = 32
    max_evals_per_restart: int = 2000
    tolerance: float = 1e-8
    initial_step: float = 0.5
    coplanar: bool = False

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise ValidationError("tolerance must be positive")


def pattern_search_max(objective, x0: np.ndarray, step: float,
                       tolerance: float, max_evals: int):
    """Coordinate-wise pattern search (step halving) maximizing
    `objective`; returns (best x, best value, evaluation count)."""
    x = np.array(x0, dtype=float)
    fx = objective(x)
    evals = 1
    while step > tolerance and evals < max_evals:
        improved = False
        for i in range(len(x)):
            for sgn in (1.0, -1.0):
                trial = x.copy()
                trial[i] += sgn * step
                ft = objective(trial)
                evals += 1
                if ft > fx:
                    x, fx = trial, ft
                    improved = True
                if evals >= max_evals:
                    break
            if evals >= max_evals:
                break
        if not improved:
            step /= 2.0
    return x, fx, evals


def multi_start_max(objective, ranges, config: SearchConfig):
    """Best-of pattern search over seed-derived random starts.  The
    per-restart substream is keyed (seed, restart index), so the result
    does not depend on evaluation scheduling."""
    best_x, best_f = None, -math.inf
    for k in range(config.restarts):
        rng = np.random.default_rng([config.seed, k])
        x0 = np.array([rng.uniform(lo, hi) for lo, hi in ranges])
        x, f, _ = pattern_search_max(objective, x0, config.initial_step,
                                     config.tolerance, config.max_evals_per_restart)
        if f > best_f:
            best_x, best_f = x, f
    return best_x, best_f


def _unit_from_params(params, coplanar: bool):
    """Decode one unit vector from one (coplanar) or two angles."""
    if coplanar:
        (alpha,) = params
        return UnitVector(math.sin(alpha), 0.0, math.cos(alpha))
    theta, phi = params
    return UnitVector.from_angles(theta, phi)


def _vectors_from_x(x, count, coplanar):
    per = 1 if coplanar else 2
    return [_unit_from_params(x[i * per:(i + 1) * per], coplanar) for i in range(count)]


def _angle_ranges(count, coplanar):
    if coplanar:
        return [(0.0, 2 * math.pi)] * count
    return [(0.0, math.pi), (0.0, 2 * math.pi)] * count


def optimize_settings(state, functional: str, config: SearchConfig) -> ViolationReport:
    """Search measurement settings maximizing the violation of the named
    functional ("chsh", "mermin", "reid", "tura") on the given state.
    Non-violation (non-positive best margin) is a valid result."""
    t0 = time.perf_counter()
    if functional == "chsh":
        report = _optimize_chsh(state, config)
    elif functional == "mermin":
        report = _optimize_mermin(state, config)
    elif functional == "reid":
        report = _optimize_reid(state, config)
    elif functional == "tura":
        report = _optimize_tura(state, config)
    else:
        raise ValidationError(f"no settings search for functional {functional!r}")
    report.seed = config.seed
    report.wall_time_s = time.perf_counter() - t0
    return report


def _optimize_chsh(state: BipartiteState, config: SearchConfig) -> ViolationReport:
    # correlators are bilinear in the directions, so precompute the 3x3
    # spin correlation matrix once and evaluate S as u^T T v sums
    t = spin_correlation_matrix(state)
    bound = 0.5 * state.s_a.two_s * state.s_b.two_s

    def objective(x):
        u1, u2, v1, v2 = (v.as_array() for v in _vectors_from_x(x, 4, config.coplanar))
        s = u1 @ t @ v1 + u1 @ t @ v2 + u2 @ t @ v1 - u2 @ t @ v2
        return abs(s) - bound

    x, _ = multi_start_max(objective, _angle_ranges(4, config.coplanar), config)
    u1, u2, v1, v2 = _vectors_from_x(x, 4, config.coplanar)
    return chsh_value(state, u1, u2, v1, v2)


def _optimize_mermin(state: BipartiteState, config: SearchConfig) -> ViolationReport:
    def objective(x):
        a, b, c = _vectors_from_x(x, 3, config.coplanar)
        rep = mermin_check(state, a, b, c)
        return -rep.margin  # violation when LHS - RHS < 0

    x, _ = multi_start_max(objective, _angle_ranges(3, config.coplanar), config)
    a, b, c = _vectors_from_x(x, 3, config.coplanar)
    return mermin_check(state, a, b, c)


def _optimize_reid(state: BipartiteState, config: SearchConfig) -> ViolationReport:
    def objective(x):
        try:
            return reid_ratio(state, *x).margin
        except Exception:
            return -math.inf

    ranges = [(0.0, math.pi)] * 4
    x, _ = multi_start_max(objective, ranges, config)
    return reid_ratio(state, *x)


def _optimize_tura(state: SymmetricState, config: SearchConfig) -> ViolationReport:
    def objective(x):
        n0, n1 = _vectors_from_x(x, 2, config.coplanar)
        return -tura_value(state, n0, n1).value  # violation when W < 0

    x, _ = multi_start_max(objective, _angle_ranges(2, config.coplanar), config)
    n0, n1 = _vectors_from_x(x, 2, config.coplanar)
    return tura_value(state, n0, n1)


def optimize_weights_cfrd(s: SpinQuantum, config: SearchConfig) -> ViolationReport:
    """Search unit-norm weights r_m for the pair state
    sum_m r_m |s,m>|s,-m> minimizing the moment-inequality margin with
    the spin observables (S_x, S_y) on each side.

    The two sites carry opposite magnetic quantum numbers; with an
    equal-m pairing the cross moment <S+ S-> is identically zero and
    the weights drop out of the margin altogether.
    """
    if s.two_s > 20:
        raise ValidationError("weight search supports s <= 10")
    rep = build_spin_rep(s)
    d = s.dim

    def state_of(r):
        psi = np.zeros((d, d), dtype=complex)
        psi[np.arange(d), np.arange(d - 1, -1, -1)] = r
        psi = psi / np.linalg.norm(psi)
        return BipartiteState("pure", s, s, psi=psi)

    def margin_of(r):
        state = state_of(r)
        return cfrd_margin(state, rep.sx, rep.sy, rep.sx, rep.sy).margin

    def objective(x):
        if np.linalg.norm(x) < 1e-9:
            return -math.inf
        return -margin_of(x)

    t0 = time.perf_counter()
    best_x, best_f = None, -math.inf
    for k in range(config.restarts):
        rng = np.random.default_rng([config.seed, k])
        x0 = rng.uniform(-1.0, 1.0, size=d)
        x, f, _ = pattern_search_max(objective, x0, config.initial_step,
                                     config.tolerance, config.max_evals_per_restart)
        if f > best_f:
            best_x, best_f = x, f
    r = best_x / np.linalg.norm(best_x)
    report = cfrd_margin(state_of(r), rep.sx, rep.sy, rep.sx, rep.sy)
    report.settings = [float(v) for v in r]
    report.seed = config.seed
    report.wall_time_s = time.perf_counter() - t0
    return report


@dataclass(frozen=True)
class ScanSpec:
    """One-parameter scan: sweep a state parameter (or the Mermin
    geometry angle) over a grid, evaluating or re-optimizing the
    functional at each point."""

    parameter: str
    grid: tuple
    functional: str
    state_family: str
    state_params: dict = field(default_factory=dict)
    settings: dict | str | None = None  # explicit settings or "optimize"
    search: SearchConfig | None = None

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        if len(g) == 0:
            raise ValidationError("grid must be nonempty")
        if len(g) > 1 and not (np.all(np.diff(g) > 0) or np.all(np.diff(g) < 0)):
            raise ValidationError("grid must be strictly monotone")


def mermin_coplanar_vectors(theta: float):
    """a, b at angle pi/2 + theta from c = z (and pi - 2 theta from
    each other), all in the x-z plane."""
    polar = math.pi / 2 + theta
    a = UnitVector(math.sin(polar), 0.0, math.cos(polar))
    b = UnitVector(-math.sin(polar), 0.0, math.cos(polar))
    c = UnitVector(0.0, 0.0, 1.0)
    return a, b, c


def scan_parameter(spec: ScanSpec):
    """Run the scan; returns one row dict per grid point."""
    from .cli import build_state  # state-family registry lives with the CLI

    rows = []
    for x in spec.grid:
        params = dict(spec.state_params)
        if spec.parameter not in ("theta_geometry", "sin_theta_geometry"):
            params[spec.parameter] = x
        state = build_state(spec.state_family, params)
        if spec.functional == "mermin":
            theta = math.asin(x) if spec.parameter == "sin_theta_geometry" else x
            a, b, c = mermin_coplanar_vectors(theta)
            rep = mermin_check(state, a, b, c)
        elif spec.functional == "chsh":
            if spec.settings == "optimize":
                if spec.search is None:
                    raise ValidationError("per-point optimization needs a SearchConfig")
                rep = optimize_settings(state, "chsh", spec.search)
            else:
                vs = [UnitVector(*spec.settings[k]) for k in ("u1", "u2", "v1", "v2")]
                rep = chsh_value(state, *vs)
        else:
            raise ValidationError(f"scan does not support functional {spec.functional!r}")
        rows.append({
            "parameter": float(x),
            "value": rep.value,
            "bound": rep.bound,
            "margin": rep.margin,
            "violation": rep.violation,
            "settings": rep.settings,
        })
    return rows

"""Parameter sweeps over (gamma t, k0 r) and the critical-distance search."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AtomEnvError, NoInteriorMaximum
from .measures import (
    DEFAULT_OPTIMIZER,
    CorrelationRecord,
    OptimizerSettings,
    conditional_entropy,
    correlation_record,
    eof,
)
from .model import GeometryConfig, InitialState, build_liouvillian, initial_state, propagate

MEASURES = ("E_AE", "delta_AE")
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0  # 0.618...
GOLDEN_C = 1.0 - INV_PHI


class NotUnimodal(AtomEnvError, RuntimeError):
    """The measure has more than one local maximum inside the search bracket."""


@dataclass(frozen=True)
class SweepPlan:
    """Grid of distances and times for one initial state.

    ``geometry_template`` supplies dipole angle, gamma and omega0; its own
    ``k0r`` is ignored.
    """

    initial: InitialState
    r_values: tuple
    t_values: tuple
    geometry_template: GeometryConfig = field(default_factory=lambda: GeometryConfig(1.0))

    def __post_init__(self):
        r = np.asarray(self.r_values, dtype=float)
        t = np.asarray(self.t_values, dtype=float)
        if r.ndim != 1 or r.size == 0 or t.ndim != 1 or t.size == 0:
            raise ValueError("r_values and t_values must be non-empty 1-d sequences")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise ValueError("r_values must be positive and strictly increasing")
        if np.any(t < 0) or np.any(np.diff(t) <= 0):
            raise ValueError("t_values must be non-negative and strictly increasing")
        object.__setattr__(self, "r_values", tuple(float(x) for x in r))
        object.__setattr__(self, "t_values", tuple(float(x) for x in t))


def _annotate(exc: AtomEnvError, gamma_t, k0r) -> AtomEnvError:
    new = type(exc)(f"{exc} (at gamma_t={gamma_t:g}, k0r={k0r:g})")
    new.gamma_t, new.k0r = gamma_t, k0r
    return new


def evaluate_point(
    initial: InitialState,
    geometry: GeometryConfig,
    gamma_t: float,
    settings: OptimizerSettings = DEFAULT_OPTIMIZER,
) -> CorrelationRecord:
    try:
        rho = propagate(initial_state(initial), build_liouvillian(geometry), gamma_t)
        return correlation_record(rho, gamma_t, geometry.k0r, settings)
    except AtomEnvError as exc:
        raise _annotate(exc, gamma_t, geometry.k0r) from exc


def _column(initial, geometry, t_values, settings):
    # one Liouvillian per distance, shared by every time point
    rho0 = initial_state(initial)
    L = build_liouvillian(geometry)
    out = []
    for t in t_values:
        try:
            rho = propagate(rho0, L, t)
            out.append(correlation_record(rho, t, geometry.k0r, settings))
        except AtomEnvError as exc:
            raise _annotate(exc, t, geometry.k0r) from exc
    return out


def run_sweep(
    plan: SweepPlan, workers: int = 1, settings: OptimizerSettings = DEFAULT_OPTIMIZER
) -> list[CorrelationRecord]:
    """One record per grid point, ordered by time first and then distance.

    With ``workers > 1`` distances are farmed out to a process pool; the
    result order depends only on grid indices.
    """
    geoms = [plan.geometry_template.with_k0r(r) for r in plan.r_values]
    if workers > 1 and len(geoms) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_column, plan.initial, g, plan.t_values, settings) for g in geoms]
            columns = [f.result() for f in futures]
    else:
        columns = [_column(plan.initial, g, plan.t_values, settings) for g in geoms]
    return [columns[ir][it] for it in range(len(plan.t_values)) for ir in range(len(geoms))]


def measure_value(
    initial: InitialState,
    geometry: GeometryConfig,
    gamma_t: float,
    measure: str,
    settings: OptimizerSettings = DEFAULT_OPTIMIZER,
) -> float:
    """A single atom-environment measure; skips the discord search for delta_AE."""
    if measure == "E_AE":
        return evaluate_point(initial, geometry, gamma_t, settings).E_AE
    if measure == "delta_AE":
        try:
            rho = propagate(initial_state(initial), build_liouvillian(geometry), gamma_t)
            return max(0.0, eof(rho) + conditional_entropy(rho))
        except AtomEnvError as exc:
            raise _annotate(exc, gamma_t, geometry.k0r) from exc
    raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")


@dataclass(frozen=True)
class CriticalDistanceResult:
    gamma_t: float
    r_critical: float
    peak_value: float
    measure: str
    bracket: tuple
    scan_r: tuple = field(default=(), repr=False)
    scan_values: tuple = field(default=(), repr=False)


def _golden_max(f, a, b, c, fb, tol):
    """Shrink a bracketing triplet a < b < c with f(b) >= f(a), f(c)."""
    while c - a >= tol:
        if c - b > b - a:
            x = b + GOLDEN_C * (c - b)
            fx = f(x)
            if fx >= fb:
                a, b, fb = b, x, fx
            else:
                c = x
        else:
            x = b - GOLDEN_C * (b - a)
            fx = f(x)
            if fx >= fb:
                c, b, fb = b, x, fx
            else:
                a = x
    return a, b, c, fb


def find_critical_distance(
    initial: InitialState,
    g_template: GeometryConfig,
    gamma_t: float,
    measure: str = "E_AE",
    r_range: tuple = (0.3, 3.0),
    n_scan: int = 64,
    tol: float = 1e-4,
    settings: OptimizerSettings = DEFAULT_OPTIMIZER,
) -> CriticalDistanceResult:
    """Distance (in k0 r) that maximizes an atom-environment measure at fixed time.

    A coarse scan of `n_scan` points picks the best interior point; its two
    neighbours bracket the maximum, which is then refined by golden-section
    search until the bracket is narrower than `tol`.

    Raises
    ------
    NoInteriorMaximum
        If the best coarse point is an endpoint of `r_range`.
    NotUnimodal
        If a finer look inside the bracket finds more than one local maximum.
    """
    if measure not in MEASURES:
        raise ValueError(f"measure must be one of {MEASURES}, got {measure!r}")
    lo, hi = map(float, r_range)
    if not (0 < lo < hi):
        raise ValueError(f"need 0 < lo < hi, got {r_range}")

    def f(r):
        return measure_value(initial, g_template.with_k0r(r), gamma_t, measure, settings)

    rs = np.linspace(lo, hi, n_scan)
    vals = np.array([f(r) for r in rs])
    i = int(np.argmax(vals))
    if i == 0 or i == n_scan - 1:
        raise NoInteriorMaximum(
            f"{measure} at gamma_t={gamma_t:g} peaks at the range endpoint k0r={rs[i]:g}"
        )

    a, b, c = rs[i - 1], rs[i], rs[i + 1]
    fine = np.linspace(a, c, 9)
    fine_vals = [vals[i - 1]] + [f(r) for r in fine[1:-1]] + [vals[i + 1]]
    steps = np.sign(np.diff(fine_vals))
    steps = steps[steps != 0]
    if np.count_nonzero(np.diff(steps)) > 1:
        raise NotUnimodal(f"{measure} at gamma_t={gamma_t:g} is not unimodal on [{a:g}, {c:g}]")
    j = int(np.argmax(fine_vals))
    if 0 < j < 8:
        a, b, c, fb = fine[j - 1], fine[j], fine[j + 1], fine_vals[j]
    else:
        fb = vals[i]

    a, b, c, fb = _golden_max(f, a, b, c, fb, tol)
    return CriticalDistanceResult(
        gamma_t=float(gamma_t),
        r_critical=float(b),
        peak_value=float(fb),
        measure=measure,
        bracket=(float(a), float(c)),
        scan_r=tuple(float(r) for r in rs),
        scan_values=tuple(float(v) for v in vals),
    )

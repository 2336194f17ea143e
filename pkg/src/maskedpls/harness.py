"""Monte Carlo sweep harness.

A sweep varies one or two axes of the generative model, runs repeated
trials at every grid point with seeds derived deterministically from the
base seed, and aggregates recovery quality against the asymptotic
predictions.  Results are reproducible bit-for-bit regardless of thread
count because every trial's seed depends only on its (point, trial)
coordinates.
"""

from __future__ import annotations

import dataclasses
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from hashlib import blake2b
from typing import Callable, Mapping, Sequence

import numpy as np

from .estimators import EstimatorKind, estimate, split_half_stability
from .streams import derive_seed
from .synth import MaskedPair, MaskSpec, ModelConfig, generate_pair
from .theory import critical_threshold, predict

AXIS_NAMES = ("theta", "theta_over_crit", "m_x", "m_y", "m_joint", "rho",
              "n_samples")
# axes that reshape the model (and with it the critical point) resolve
# before the spike axes, so that relative spike strengths are measured
# against the point's own threshold
_STRUCTURAL_ORDER = ("m_x", "m_y", "m_joint", "rho", "n_samples")

PairFactory = Callable[[ModelConfig], MaskedPair]


@dataclass(frozen=True)
class Axis:
    """One swept quantity and its grid values."""

    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ValueError(f"unknown axis {self.name!r}, expected one of {AXIS_NAMES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("axis needs at least one value")
        if not all(np.isfinite(vals)):
            raise ValueError("axis values must be finite")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class Diagnostics:
    """Optional per-trial diagnostics computed alongside the estimate."""

    split_half: bool = False


@dataclass(frozen=True)
class SweepSpec:
    base: ModelConfig
    axis: Axis
    axis2: Axis | None = None
    trials: int = 30
    estimator: EstimatorKind = field(default_factory=EstimatorKind)
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        names = [self.axis.name]
        if self.axis2 is not None:
            names.append(self.axis2.name)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate axis {names[0]!r}")
        if "theta" in names and "theta_over_crit" in names:
            raise ValueError("theta and theta_over_crit axes are mutually exclusive")


@dataclass(frozen=True)
class TrialResult:
    r2_x: float
    r2_y: float
    stability: float
    estimator: str
    runtime: float
    seed: int
    error: str | None = None


@dataclass(frozen=True)
class PointSummary:
    axis1: float
    axis2: float | None
    mean_r2x: float
    std_r2x: float
    mean_r2y: float
    std_r2y: float
    mean_stability: float
    std_stability: float
    theory_r2x: float
    theory_r2y: float
    theta_crit: float
    trials_requested: int
    trials_effective: int
    seeds_digest: str
    valid: bool
    theta: float
    rho: float
    n_samples: int
    dx: int
    dy: int
    mean_runtime: float
    errors: tuple[str, ...] = ()


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    points: tuple[PointSummary, ...]
    correlation: float
    correlation_supercritical: float
    total_runtime: float
    digest: str


def _resolved_config(base: ModelConfig, assignments: Mapping[str, float],
                     seed: int) -> ModelConfig:
    mask_x, mask_y = base.mask_x, base.mask_y
    n, dx, dy = base.n_samples, base.dx, base.dy
    for name in _STRUCTURAL_ORDER:
        if name not in assignments:
            continue
        value = float(assignments[name])
        if name == "m_x":
            mask_x = dataclasses.replace(mask_x, target_rate=value)
        elif name == "m_y":
            mask_y = dataclasses.replace(mask_y, target_rate=value)
        elif name == "m_joint":
            mask_x = dataclasses.replace(mask_x, target_rate=value)
            mask_y = dataclasses.replace(mask_y, target_rate=value)
        elif name == "rho":
            if not 0.0 < value <= 1.0:
                raise ValueError(f"rho axis value must be in (0, 1], got {value}")
            rate = 1.0 - np.sqrt(value)
            mask_x = dataclasses.replace(mask_x, target_rate=rate)
            mask_y = dataclasses.replace(mask_y, target_rate=rate)
        else:  # n_samples, keeping the base aspect ratios
            n = int(round(value))
            dx = max(1, round(n / base.alpha_x))
            dy = max(1, round(n / base.alpha_y))
    theta = float(assignments.get("theta", base.theta))
    if "theta_over_crit" in assignments:
        rho = (1.0 - mask_x.target_rate) * (1.0 - mask_y.target_rate)
        crit = critical_threshold(n / dx, n / dy, rho)
        theta = float(assignments["theta_over_crit"]) * crit
    return dataclasses.replace(base, n_samples=n, dx=dx, dy=dy, theta=theta,
                               mask_x=mask_x, mask_y=mask_y, seed=seed)


def grid_assignments(spec: SweepSpec) -> list[dict[str, float]]:
    """Row-major grid over the one or two axes."""
    if spec.axis2 is None:
        return [{spec.axis.name: v} for v in spec.axis.values]
    return [{spec.axis.name: v1, spec.axis2.name: v2}
            for v1 in spec.axis.values for v2 in spec.axis2.values]


def run_trial(config: ModelConfig, estimator: EstimatorKind,
              diagnostics: Diagnostics, trial_index: int,
              pair_factory: PairFactory | None = None) -> TrialResult:
    """One independent draw and fit.  Failures are tagged, not raised."""
    trial_seed = derive_seed(config.seed, "trial", trial_index)
    trial_config = dataclasses.replace(config, seed=trial_seed)
    t0 = time.perf_counter()
    try:
        factory = pair_factory if pair_factory is not None else generate_pair
        pair = factory(trial_config)
        fit = estimate(pair, estimator)
        if diagnostics.split_half:
            stability = split_half_stability(pair, trial_seed)
        else:
            stability = float("nan")
        return TrialResult(r2_x=fit.r2_x, r2_y=fit.r2_y, stability=stability,
                           estimator=estimator.name,
                           runtime=time.perf_counter() - t0, seed=trial_seed)
    except Exception as err:  # noqa: BLE001 - trial isolation is the contract
        return TrialResult(r2_x=float("nan"), r2_y=float("nan"),
                           stability=float("nan"), estimator=estimator.name,
                           runtime=time.perf_counter() - t0, seed=trial_seed,
                           error=f"{type(err).__name__}: {err}")


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    arr = arr[np.isfinite(arr)]
    if arr.size == 0:
        return float("nan"), float("nan")
    mean = float(arr.mean())
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, std


def _seeds_digest(seeds: Sequence[int]) -> str:
    h = blake2b(digest_size=8)
    for s in seeds:
        h.update(int(s).to_bytes(8, "little"))
    return h.hexdigest()


def _summarize_point(assignment: Mapping[str, float], spec: SweepSpec,
                     config: ModelConfig,
                     trials: Sequence[TrialResult]) -> PointSummary:
    good = [t for t in trials if t.error is None]
    mean_r2x, std_r2x = _mean_std([t.r2_x for t in good])
    mean_r2y, std_r2y = _mean_std([t.r2_y for t in good])
    mean_st, std_st = _mean_std([t.stability for t in good])
    pred = predict(config.alpha_x, config.alpha_y, config.rho, config.theta)
    axis1 = float(assignment[spec.axis.name])
    axis2 = float(assignment[spec.axis2.name]) if spec.axis2 is not None else None
    errors = tuple(sorted({t.error for t in trials if t.error is not None}))
    return PointSummary(
        axis1=axis1, axis2=axis2,
        mean_r2x=mean_r2x, std_r2x=std_r2x,
        mean_r2y=mean_r2y, std_r2y=std_r2y,
        mean_stability=mean_st, std_stability=std_st,
        theory_r2x=pred.r2_x, theory_r2y=pred.r2_y,
        theta_crit=pred.theta_crit,
        trials_requested=len(trials), trials_effective=len(good),
        seeds_digest=_seeds_digest([t.seed for t in trials]),
        valid=2 * len(good) >= len(trials) and len(good) > 0,
        theta=config.theta, rho=config.rho, n_samples=config.n_samples,
        dx=config.dx, dy=config.dy,
        mean_runtime=_mean_std([t.runtime for t in trials])[0],
        errors=errors)


def correlation_with_theory(points: Sequence[PointSummary]) -> float:
    """Pearson correlation between per-point mean design-view overlap and
    its prediction, across the given points.

    Raises when fewer than three points carry finite values or when
    either series is constant (the correlation is undefined there).
    """
    pairs = [(p.mean_r2x, p.theory_r2x) for p in points
             if p.valid and np.isfinite(p.mean_r2x) and np.isfinite(p.theory_r2x)]
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 finite points, got {len(pairs)}")
    sim, theory = (np.asarray(v) for v in zip(*pairs))
    if sim.std() < 1e-15 or theory.std() < 1e-15:
        raise ValueError("correlation undefined: constant series")
    return float(np.corrcoef(sim, theory)[0, 1])


def _safe_correlation(points: Sequence[PointSummary]) -> float:
    try:
        return correlation_with_theory(points)
    except ValueError:
        return float("nan")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.12g" % value
    return str(value)


def result_digest(points: Sequence[PointSummary]) -> str:
    """Digest of the scientific content, excluding runtimes."""
    h = blake2b(digest_size=16)
    for p in points:
        line = "|".join(_fmt(v) for v in (
            p.axis1, p.axis2, p.mean_r2x, p.std_r2x, p.mean_r2y, p.std_r2y,
            p.mean_stability, p.std_stability, p.theory_r2x, p.theory_r2y,
            p.theta_crit, p.trials_effective, p.seeds_digest, p.theta,
            p.rho, p.n_samples, p.dx, p.dy))
        h.update(line.encode())
        h.update(b";")
    return h.hexdigest()


def run_sweep(spec: SweepSpec, threads: int = 1,
              pair_factory: PairFactory | None = None) -> SweepResult:
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    t_start = time.perf_counter()
    assignments = grid_assignments(spec)
    configs = [
        _resolved_config(spec.base, a, derive_seed(spec.base.seed, "point", i))
        for i, a in enumerate(assignments)
    ]
    jobs = [(i, t) for i in range(len(configs)) for t in range(spec.trials)]

    def _job(key):
        i, t = key
        return key, run_trial(configs[i], spec.estimator, spec.diagnostics, t,
                              pair_factory=pair_factory)

    results: dict[tuple[int, int], TrialResult] = {}
    if threads == 1:
        for key in jobs:
            results[key] = _job(key)[1]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for key, trial in pool.map(_job, jobs):
                results[key] = trial

    points = tuple(
        _summarize_point(assignments[i], spec, configs[i],
                         [results[(i, t)] for t in range(spec.trials)])
        for i in range(len(configs)))
    supercritical = [p for p in points if p.theta > p.theta_crit]
    return SweepResult(
        spec=spec, points=points,
        correlation=_safe_correlation(points),
        correlation_supercritical=_safe_correlation(supercritical),
        total_runtime=time.perf_counter() - t_start,
        digest=result_digest(points))


def _sorted_theta_points(points: Sequence[PointSummary]) -> list[PointSummary]:
    pts = [p for p in points if p.valid and np.isfinite(p.mean_r2x)]
    pts.sort(key=lambda p: p.theta)
    return pts


def _isotonic_fit(values: Sequence[float]) -> list[float]:
    """Nondecreasing least-squares fit via pool-adjacent-violators.

    The mean overlap is nondecreasing in theta through the transition, so
    crossings are read off this fit instead of the raw means; a single
    noisy point can otherwise fake a crossing far from the true one.
    """
    blocks: list[list[float]] = []  # [mean, count]
    for v in values:
        mean, count = float(v), 1.0
        while blocks and blocks[-1][0] > mean:
            prev_mean, prev_count = blocks.pop()
            total = count + prev_count
            mean = (mean * count + prev_mean * prev_count) / total
            count = total
        blocks.append([mean, count])
    fit: list[float] = []
    for mean, count in blocks:
        fit.extend([mean] * int(round(count)))
    return fit


def _crossing_theta(thetas: Sequence[float], fitted: Sequence[float],
                    level: float, strict: bool) -> float:
    for i, value in enumerate(fitted):
        hit = value > level if strict else value >= level
        if hit:
            if i == 0:
                return thetas[0]
            denom = value - fitted[i - 1]
            if denom <= 0:
                return thetas[i]
            frac = (level - fitted[i - 1]) / denom
            return thetas[i - 1] + frac * (thetas[i] - thetas[i - 1])
    return float("nan")


def empirical_boundary(points: Sequence[PointSummary],
                       threshold: float | None = None) -> float:
    """Smallest spike strength along a theta-ordered sweep whose mean
    design-side overlap rises above the noise floor (3 / dx by default).

    The crossing is located on an isotonic fit of the means with linear
    interpolation between grid points, so boundaries finer than the grid
    spacing remain distinguishable.  NaN when the fit never crosses.
    """
    pts = _sorted_theta_points(points)
    if not pts:
        return float("nan")
    thr = threshold if threshold is not None else 3.0 / pts[0].dx
    fitted = _isotonic_fit([p.mean_r2x for p in pts])
    return _crossing_theta([p.theta for p in pts], fitted, thr, strict=True)


def transition_width(points: Sequence[PointSummary],
                     quantiles: tuple[float, float] = (0.25, 0.75)) -> float:
    """Theta distance between the lower- and upper-quantile crossings of
    the window's peak overlap.

    Crossings are read off an isotonic fit of the means, interpolated
    between grid points.  When the curve enters the window already above
    the lower level the lower crossing clips to the window edge, so the
    result is then a lower bound on the true width.
    """
    lo_q, hi_q = quantiles
    if not 0.0 < lo_q < hi_q < 1.0:
        raise ValueError(f"quantiles must satisfy 0 < lo < hi < 1, got {quantiles}")
    pts = _sorted_theta_points(points)
    if len(pts) < 2:
        return float("nan")
    fitted = _isotonic_fit([p.mean_r2x for p in pts])
    peak = fitted[-1]
    if peak <= 0:
        return float("nan")
    thetas = [p.theta for p in pts]
    t_lo = _crossing_theta(thetas, fitted, lo_q * peak, strict=False)
    t_hi = _crossing_theta(thetas, fitted, hi_q * peak, strict=False)
    return max(0.0, t_hi - t_lo)


@dataclass(frozen=True)
class FiniteSizeResult:
    sweeps: dict[int, SweepResult]
    widths: dict[int, float]


def finite_size_study(alpha_x: float, alpha_y: float, mask_rate: float,
                      n_list: Sequence[int],
                      theta_window: tuple[float, float, int] = (0.85, 1.15, 11),
                      trials: int = 30, seed: int = 0,
                      estimator: EstimatorKind | None = None,
                      threads: int = 1) -> FiniteSizeResult:
    """Sharpening of the recovery transition with sample size.

    Sweeps a relative spike window around the critical point at several
    sample counts (dimensions scale to keep the aspect ratios fixed) and
    measures each window's transition width.
    """
    lo, hi, count = theta_window
    if not lo < 1.0 < hi:
        raise ValueError(f"theta window must straddle the critical point, got {theta_window}")
    if count < 3:
        raise ValueError(f"theta window needs at least 3 points, got {count}")
    if estimator is None:
        estimator = EstimatorKind()
    sweeps: dict[int, SweepResult] = {}
    widths: dict[int, float] = {}
    for n in n_list:
        n = int(n)
        dx = max(1, round(n / alpha_x))
        dy = max(1, round(n / alpha_y))
        base = ModelConfig(n_samples=n, dx=dx, dy=dy, theta=1.0,
                           mask_x=MaskSpec(target_rate=mask_rate),
                           mask_y=MaskSpec(target_rate=mask_rate),
                           seed=derive_seed(seed, "finite-size", n))
        spec = SweepSpec(base=base,
                         axis=Axis("theta_over_crit",
                                   tuple(np.linspace(lo, hi, count))),
                         trials=trials, estimator=estimator)
        result = run_sweep(spec, threads=threads)
        sweeps[n] = result
        widths[n] = transition_width(result.points)
    return FiniteSizeResult(sweeps=sweeps, widths=widths)

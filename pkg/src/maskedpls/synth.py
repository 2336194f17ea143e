"""Synthetic two-view data: whitened designs, planted rank-1 cross signal,
noise families, and observation masks (MCAR and data-dependent).

Draw layout: every pair is generated from named substreams of one seed
(design, directions, noise, mask_x, mask_y), so changing any one
ingredient (e.g. mask rates) never perturbs the others.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import pca_reduce, top_singular_pair, whiten, ConvergenceError
from .streams import derive_seed, substream

NOISE_KINDS = ("gaussian", "student_t", "laplace", "heteroskedastic")
MASK_MECHANISMS = ("mcar", "signal_dependent", "magnitude_dependent",
                   "thresholded", "correlated")

# fraction of entries above the per-column cutoff in the thresholded
# missingness link (cutoff = 70th percentile)
_THRESHOLD_QUANTILE = 0.7


@dataclass(frozen=True)
class NoiseSpec:
    """Response-noise family; every kind has unit variance per entry."""

    kind: str = "gaussian"
    df: float = 5.0          # student_t only; must exceed 2
    low: float = 0.5         # heteroskedastic per-column variance range
    high: float = 1.5

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}, expected one of {NOISE_KINDS}")
        if self.kind == "student_t" and not self.df > 2:
            raise ValueError(f"student_t needs df > 2 for finite variance, got {self.df}")
        if self.kind == "heteroskedastic":
            if not 0 < self.low <= self.high:
                raise ValueError(f"need 0 < low <= high, got [{self.low}, {self.high}]")
            if abs((self.low + self.high) / 2 - 1.0) > 1e-9:
                raise ValueError(
                    "heteroskedastic variance range must average to 1 "
                    f"(unit variance in expectation), got [{self.low}, {self.high}]")


@dataclass(frozen=True)
class MaskSpec:
    """Observation-mask mechanism with target missing rate and MAR strength.

    strength is the coupling of the missingness probability to the data
    score; 0 reduces every mechanism to MCAR at target_rate.
    """

    mechanism: str = "mcar"
    target_rate: float = 0.0
    strength: float = 0.0

    def __post_init__(self):
        if self.mechanism not in MASK_MECHANISMS:
            raise ValueError(
                f"unknown mask mechanism {self.mechanism!r}, expected one of {MASK_MECHANISMS}")
        if not 0.0 <= self.target_rate < 1.0:
            raise ValueError(f"target_rate must be in [0, 1), got {self.target_rate}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"strength must be in [0, 1], got {self.strength}")


@dataclass(frozen=True)
class ModelConfig:
    """Full description of one synthetic data-generation setting."""

    n_samples: int
    dx: int
    dy: int
    theta: float
    mask_x: MaskSpec = field(default_factory=MaskSpec)
    mask_y: MaskSpec = field(default_factory=MaskSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0

    def __post_init__(self):
        for name in ("n_samples", "dx", "dy"):
            v = getattr(self, name)
            if not (isinstance(v, (int, np.integer)) and v >= 1):
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.n_samples < self.dx:
            raise ValueError(
                f"whitening needs n_samples >= dx, got {self.n_samples} < {self.dx}")
        if not self.theta >= 0:
            raise ValueError(f"theta must be non-negative, got {self.theta}")
        if not isinstance(self.seed, (int, np.integer)):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")

    @property
    def alpha_x(self) -> float:
        return self.n_samples / self.dx

    @property
    def alpha_y(self) -> float:
        return self.n_samples / self.dy

    @property
    def rho(self) -> float:
        return (1.0 - self.mask_x.target_rate) * (1.0 - self.mask_y.target_rate)


@dataclass(frozen=True)
class MaskedPair:
    """One generated two-view dataset.

    x_obs / y_obs are missing-as-zero observed matrices; mask_x / mask_y
    are True where observed.  The latent complete matrices are retained
    so oracle estimators and diagnostics can access them.
    """

    x_obs: np.ndarray
    y_obs: np.ndarray
    mask_x: np.ndarray
    mask_y: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    rho: float
    x_latent: np.ndarray
    y_latent: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.x_obs.shape[0]


def sample_noise(spec: NoiseSpec, rows: int, cols: int, seed: int) -> np.ndarray:
    """Unit-variance noise matrix of the requested family, deterministic in seed."""
    if rows < 1 or cols < 1:
        raise ValueError(f"noise shape must be positive, got {rows} x {cols}")
    rng = substream(seed, "noise")
    if spec.kind == "gaussian":
        return rng.standard_normal((rows, cols))
    if spec.kind == "student_t":
        scale = np.sqrt(spec.df / (spec.df - 2.0))
        return rng.standard_t(spec.df, size=(rows, cols)) / scale
    if spec.kind == "laplace":
        return rng.laplace(0.0, 1.0 / np.sqrt(2.0), size=(rows, cols))
    # heteroskedastic: one variance per column, Gaussian within column
    variances = rng.uniform(spec.low, spec.high, size=cols)
    return rng.standard_normal((rows, cols)) * np.sqrt(variances)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _standardize(scores: np.ndarray) -> np.ndarray:
    mu = scores.mean()
    sd = scores.std()
    if sd < 1e-12:
        # constant score carries no information; degenerate to MCAR
        return np.zeros_like(scores)
    return (scores - mu) / sd


def _solve_intercept(scores: np.ndarray, strength: float, target: float) -> float:
    """Bisect the link intercept so the mean missing probability hits target."""
    shift = strength * scores
    span = float(np.abs(shift).max()) if shift.size else 0.0
    lo, hi = -span - 40.0, span + 40.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(_sigmoid(mid + shift).mean()) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _mar_scores(spec: MaskSpec, data_context, rows: int, cols: int) -> np.ndarray:
    """Per-entry standardized scores for the data-dependent mechanisms."""
    if data_context is None:
        raise ValueError(
            f"mask mechanism {spec.mechanism!r} requires a data context")
    ctx = np.asarray(data_context, dtype=np.float64)
    if spec.mechanism == "signal_dependent":
        # context: per-row signal values; higher magnitude => more missing
        if ctx.ndim != 1 or ctx.shape[0] != rows:
            raise ValueError(
                f"signal_dependent context must be a length-{rows} row-score vector")
        s = _standardize(np.abs(ctx))
        return np.broadcast_to(s[:, None], (rows, cols))
    if spec.mechanism == "magnitude_dependent":
        if ctx.shape != (rows, cols):
            raise ValueError(
                f"magnitude_dependent context must match the view shape {(rows, cols)}")
        return _standardize(np.abs(ctx))
    if spec.mechanism == "thresholded":
        if ctx.shape != (rows, cols):
            raise ValueError(
                f"thresholded context must match the view shape {(rows, cols)}")
        cut = np.quantile(ctx, _THRESHOLD_QUANTILE, axis=0)
        ind = (ctx > cut).astype(np.float64)
        p = 1.0 - _THRESHOLD_QUANTILE
        return (ind - p) / np.sqrt(p * (1.0 - p))
    # correlated: row score from the other view's mean entry magnitude
    if ctx.ndim != 2 or ctx.shape[0] != rows:
        raise ValueError(
            f"correlated context must be the other view's matrix with {rows} rows")
    s = _standardize(np.abs(ctx).mean(axis=1))
    return np.broadcast_to(s[:, None], (rows, cols))


def sample_mask(spec: MaskSpec, data_context, rows: int, cols: int,
                seed: int) -> np.ndarray:
    """Boolean observation mask (True = observed).

    MCAR ignores the context.  The data-dependent mechanisms pass a
    standardized score through a logistic link whose intercept is solved
    so the expected missing rate equals target_rate; strength 0 makes
    the probabilities constant, reproducing MCAR draw for draw.
    """
    if rows < 1 or cols < 1:
        raise ValueError(f"mask shape must be positive, got {rows} x {cols}")
    rng = substream(seed, "mask")
    uniforms = rng.random((rows, cols))
    if spec.target_rate == 0.0:
        return np.ones((rows, cols), dtype=bool)
    if spec.mechanism == "mcar" or spec.strength == 0.0:
        if spec.mechanism != "mcar":
            # context is still required so callers cannot silently treat a
            # data-dependent spec as context-free
            _mar_scores(spec, data_context, rows, cols)
        return uniforms >= spec.target_rate
    scores = _mar_scores(spec, data_context, rows, cols)
    intercept = _solve_intercept(scores, spec.strength, spec.target_rate)
    p_missing = _sigmoid(intercept + spec.strength * scores)
    return uniforms >= p_missing


def _view_context(spec: MaskSpec, own_latent: np.ndarray,
                  other_latent: np.ndarray, signal_scores: np.ndarray | None):
    if spec.mechanism in ("magnitude_dependent", "thresholded"):
        return own_latent
    if spec.mechanism == "correlated":
        return other_latent
    if spec.mechanism == "signal_dependent":
        return signal_scores
    return None


def _assemble_pair(x_star: np.ndarray, u0: np.ndarray, v0: np.ndarray,
                   theta: float, noise: NoiseSpec, mask_x: MaskSpec,
                   mask_y: MaskSpec, seed: int) -> MaskedPair:
    n, dx = x_star.shape
    dy = v0.shape[0]
    signal_scores = x_star @ u0
    y_star = theta * np.outer(signal_scores, v0) + sample_noise(noise, n, dy, seed)

    # Convention: the signal-linked mechanism censors the response view
    # only; a signal_dependent request on the design view falls back to
    # MCAR at its own rate.
    spec_x = mask_x
    if spec_x.mechanism == "signal_dependent":
        spec_x = MaskSpec("mcar", spec_x.target_rate, 0.0)
    ctx_x = _view_context(spec_x, x_star, y_star, None)
    ctx_y = _view_context(mask_y, y_star, x_star, signal_scores)
    sx = sample_mask(spec_x, ctx_x, n, dx, derive_seed(seed, "mask_x"))
    sy = sample_mask(mask_y, ctx_y, n, dy, derive_seed(seed, "mask_y"))

    rho = (1.0 - mask_x.target_rate) * (1.0 - mask_y.target_rate)
    return MaskedPair(
        x_obs=np.where(sx, x_star, 0.0),
        y_obs=np.where(sy, y_star, 0.0),
        mask_x=sx,
        mask_y=sy,
        u0=u0,
        v0=v0,
        rho=rho,
        x_latent=x_star,
        y_latent=y_star,
    )


def _unit_directions(config: ModelConfig, directions):
    if directions is None:
        rng = substream(config.seed, "directions")
        u0 = rng.standard_normal(config.dx)
        v0 = rng.standard_normal(config.dy)
        return u0 / np.linalg.norm(u0), v0 / np.linalg.norm(v0)
    u0 = np.asarray(directions[0], dtype=np.float64)
    v0 = np.asarray(directions[1], dtype=np.float64)
    if u0.shape != (config.dx,) or v0.shape != (config.dy,):
        raise ValueError(
            f"directions must have shapes ({config.dx},) and ({config.dy},)")
    for name, vec in (("u0", u0), ("v0", v0)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
            raise ValueError(f"planted direction {name} must have unit norm")
    return u0, v0


def generate_pair(config: ModelConfig, directions=None) -> MaskedPair:
    """Draw one masked two-view dataset from the generative model.

    An exactly whitened Gaussian design, unit planted directions (drawn
    on the sphere unless supplied), rank-1 cross signal of strength
    theta plus unit-variance noise, and independent observation masks.
    """
    rng_design = substream(config.seed, "design")
    x_star = whiten(rng_design.standard_normal((config.n_samples, config.dx)))
    u0, v0 = _unit_directions(config, directions)
    return _assemble_pair(x_star, u0, v0, config.theta, config.noise,
                          config.mask_x, config.mask_y, config.seed)


def prepare_semi_synthetic(x_real, y_real, target_dims: int):
    """Reduce paired real matrices and extract empirical signal directions.

    Standardizes columns, projects each view onto its top principal
    directions, whitens the design view exactly, and returns
    (whitened design, u_dir, v_dir) where the directions are the leading
    singular pair of the complete-data cross-covariance.
    """
    x = np.asarray(x_real, dtype=np.float64)
    y = np.asarray(y_real, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2:
        raise ValueError("real views must be 2-D matrices")
    if x.shape[0] != y.shape[0]:
        raise ValueError(
            f"views must share rows, got {x.shape[0]} vs {y.shape[0]}")
    n = x.shape[0]
    if n < target_dims:
        raise ValueError(
            f"need at least target_dims={target_dims} rows, got {n}")

    def _standardize_cols(m):
        mu = m.mean(axis=0)
        sd = m.std(axis=0)
        sd = np.where(sd < 1e-12, 1.0, sd)
        return (m - mu) / sd

    x_red = pca_reduce(_standardize_cols(x), target_dims)
    y_red = pca_reduce(_standardize_cols(y), target_dims)
    x_w = whiten(x_red)
    cross = x_w.T @ y_red / n
    try:
        triple = top_singular_pair(cross)
    except ConvergenceError as err:
        triple = err.partial
    return x_w, triple.left, triple.right


def semi_synthetic_pair(x_real, y_real, target_dims: int, theta: float,
                        mask_x: MaskSpec, mask_y: MaskSpec, seed: int,
                        noise: NoiseSpec | None = None) -> MaskedPair:
    """Plant a synthetic rank-1 signal along empirical directions.

    The design is the whitened PCA reduction of the real design view;
    the response is regenerated as theta * (design @ u) v^T plus fresh
    noise, then both views are masked.
    """
    if not theta >= 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    x_w, u_dir, v_dir = prepare_semi_synthetic(x_real, y_real, target_dims)
    return _assemble_pair(x_w, u_dir, v_dir, theta, noise or NoiseSpec(),
                          mask_x, mask_y, seed)


def planted_pair(design, u0, v0, theta: float, noise: NoiseSpec,
                 mask_x: MaskSpec, mask_y: MaskSpec, seed: int) -> MaskedPair:
    """Assemble a masked pair from a precomputed design and directions.

    Lets callers that reuse one whitened design across many trials (the
    semi-synthetic protocol) skip redoing the reduction every draw.
    """
    x_star = np.asarray(design, dtype=np.float64)
    if x_star.ndim != 2:
        raise ValueError(f"design must be 2-D, got shape {x_star.shape}")
    if not theta >= 0:
        raise ValueError(f"theta must be non-negative, got {theta}")
    u = np.asarray(u0, dtype=np.float64)
    v = np.asarray(v0, dtype=np.float64)
    if u.shape != (x_star.shape[1],):
        raise ValueError(f"u0 must have length {x_star.shape[1]}, got {u.shape}")
    for name, vec in (("u0", u), ("v0", v)):
        if abs(np.linalg.norm(vec) - 1.0) > 1e-8:
            raise ValueError(f"{name} must have unit norm")
    return _assemble_pair(x_star, u, v, theta, noise, mask_x, mask_y, seed)

"""Estimators of the planted cross-view directions from masked data.

The primary estimator takes the leading singular pair of the rescaled
missing-as-zero cross-covariance.  Baselines cover column-mean
imputation, an EM-style rank-1 refit loop, per-view iterative SVD
completion, and an oracle that sees the unmasked data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .linalg import ConvergenceError, SingularTriple, top_singular_pair, vector_correlation
from .streams import substream
from .synth import MaskedPair

ESTIMATOR_NAMES = ("pls_svd_zero", "mean_impute", "em_pls", "iterative_svd", "oracle")


@dataclass(frozen=True)
class EstimatorKind:
    """Which estimator to run, with loop controls for the iterative ones."""

    name: str = "pls_svd_zero"
    rank: int = 1            # iterative_svd completion rank
    max_iter: int = 50
    tol: float = 1e-6

    def __post_init__(self):
        if self.name not in ESTIMATOR_NAMES:
            raise ValueError(
                f"unknown estimator {self.name!r}, expected one of {ESTIMATOR_NAMES}")
        if self.rank < 1:
            raise ValueError(f"rank must be at least 1, got {self.rank}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass(frozen=True)
class EstimateResult:
    u_hat: np.ndarray
    v_hat: np.ndarray
    r2_x: float
    r2_y: float
    iterations: int
    runtime: float


def rescaled_cross_covariance(pair: MaskedPair,
                              estimate_rho: bool = False) -> np.ndarray:
    """x_obs.T @ y_obs / (N * sqrt(rho)), the masking-corrected cross-covariance.

    By default rho is the pair's configured joint retention probability.
    With estimate_rho the product of the two views' observed mask
    densities is used instead, for data whose rates are unknown.
    """
    if estimate_rho:
        rho = float(pair.mask_x.mean()) * float(pair.mask_y.mean())
    else:
        rho = pair.rho
    if not rho > 0:
        raise ValueError(f"joint retention must be positive, got {rho}")
    n = pair.n_samples
    return pair.x_obs.T @ pair.y_obs / (n * np.sqrt(rho))


def squared_overlaps(u_hat, v_hat, u0, v0) -> tuple[float, float]:
    """Squared cosines of the estimates with the planted directions."""
    return (vector_correlation(u_hat, u0) ** 2,
            vector_correlation(v_hat, v0) ** 2)


def _top_pair_lenient(c: np.ndarray) -> SingularTriple:
    # subcritical cross-covariances have a quasi-degenerate top of the
    # spectrum; an unconverged direction there is statistically
    # indistinguishable from the converged one, so keep the partial
    try:
        return top_singular_pair(c)
    except ConvergenceError as err:
        return err.partial


def _column_mean_impute(obs: np.ndarray, mask: np.ndarray) -> np.ndarray:
    counts = mask.sum(axis=0)
    sums = np.where(mask, obs, 0.0).sum(axis=0)
    means = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return np.where(mask, obs, means[None, :])


def _em_pls(pair: MaskedPair, kind: EstimatorKind):
    n = pair.n_samples
    x_imp = _column_mean_impute(pair.x_obs, pair.mask_x)
    y_imp = _column_mean_impute(pair.y_obs, pair.mask_y)
    y_missing = ~pair.mask_y
    sigma_prev = None
    triple = None
    iterations = kind.max_iter
    for it in range(1, kind.max_iter + 1):
        c = x_imp.T @ y_imp / n
        triple = _top_pair_lenient(c)
        sigma = triple.value
        if sigma_prev is not None and abs(sigma - sigma_prev) <= kind.tol * max(
                sigma_prev, np.finfo(float).tiny):
            iterations = it
            break
        sigma_prev = sigma
        # refit the response's missing entries from the rank-1 cross fit;
        # the design is not constrained by the rank-1 model, so its
        # missing entries keep their column means
        recon = sigma * np.outer(x_imp @ triple.left, triple.right)
        y_imp = np.where(y_missing, recon, y_imp)
    return triple, iterations


def _hard_impute(obs: np.ndarray, mask: np.ndarray, rank: int, max_iter: int,
                 tol: float):
    completed = _column_mean_impute(obs, mask)
    missing = ~mask
    prev = completed[missing]
    iterations = max_iter
    for it in range(1, max_iter + 1):
        u, s, vt = np.linalg.svd(completed, full_matrices=False)
        recon = (u[:, :rank] * s[:rank]) @ vt[:rank]
        completed = np.where(missing, recon, obs)
        cur = completed[missing]
        denom = np.linalg.norm(prev) + np.finfo(float).tiny
        if np.linalg.norm(cur - prev) <= tol * denom:
            iterations = it
            break
        prev = cur
    return completed, iterations


def estimate(pair: MaskedPair, kind: EstimatorKind) -> EstimateResult:
    """Run one estimator on one masked pair.

    Non-convergence of the iterative refinements is reported through the
    iteration count rather than raised; a cross-covariance with no
    leading direction at all (e.g. an all-missing view) is an error.
    """
    t0 = time.perf_counter()
    n = pair.n_samples
    iterations = 1
    if kind.name == "pls_svd_zero":
        triple = _top_pair_lenient(rescaled_cross_covariance(pair))
    elif kind.name == "mean_impute":
        x_imp = _column_mean_impute(pair.x_obs, pair.mask_x)
        y_imp = _column_mean_impute(pair.y_obs, pair.mask_y)
        triple = _top_pair_lenient(x_imp.T @ y_imp / n)
    elif kind.name == "em_pls":
        triple, iterations = _em_pls(pair, kind)
    elif kind.name == "iterative_svd":
        x_comp, it_x = _hard_impute(pair.x_obs, pair.mask_x, kind.rank,
                                    kind.max_iter, kind.tol)
        y_comp, it_y = _hard_impute(pair.y_obs, pair.mask_y, kind.rank,
                                    kind.max_iter, kind.tol)
        triple = _top_pair_lenient(x_comp.T @ y_comp / n)
        iterations = it_x + it_y
    else:  # oracle
        if pair.x_latent is None or pair.y_latent is None:
            raise ValueError("oracle estimator needs the latent complete matrices")
        triple = _top_pair_lenient(pair.x_latent.T @ pair.y_latent / n)
    runtime = time.perf_counter() - t0
    r2_x, r2_y = squared_overlaps(triple.left, triple.right, pair.u0, pair.v0)
    return EstimateResult(u_hat=triple.left, v_hat=triple.right, r2_x=r2_x,
                          r2_y=r2_y, iterations=iterations, runtime=runtime)


def split_half_stability(pair: MaskedPair, seed: int) -> float:
    """Agreement between singular pairs estimated on two random halves.

    Rows are partitioned uniformly at random; each half is analyzed with
    its own sample count in the normalization.  Returns the mean of the
    absolute correlations of the two u estimates and the two v
    estimates, in [0, 1].
    """
    n = pair.n_samples
    if n < 4:
        raise ValueError(f"split-half needs at least 4 samples, got {n}")
    if not pair.rho > 0:
        raise ValueError(f"joint retention must be positive, got {pair.rho}")
    perm = substream(seed, "split").permutation(n)
    halves = (perm[: n // 2], perm[n // 2:])
    pairs = []
    for idx in halves:
        c = pair.x_obs[idx].T @ pair.y_obs[idx] / (len(idx) * np.sqrt(pair.rho))
        if not c.any():
            raise ValueError("degenerate half: empty cross-covariance")
        triple = _top_pair_lenient(c)
        pairs.append(triple)
    s_u = abs(vector_correlation(pairs[0].left, pairs[1].left))
    s_v = abs(vector_correlation(pairs[0].right, pairs[1].right))
    return 0.5 * (s_u + s_v)

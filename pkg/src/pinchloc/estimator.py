"""Maximum-likelihood RSS position estimation and the anchors-vs-noise sweep.

The log-distance noise is Gaussian, so the MLE is the nonlinear
least-squares minimiser of the log-residuals. The objective is nonconvex
(each anchor contributes a ring of near-optima), so estimation runs in two
stages: a coarse grid over the deployment disk picks the basin, then damped
Gauss-Newton polishes to gradient norm below 1e-8.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import mc_expected_sinr
from .channel import ChannelParams, RssSample, sigma_p_sq
from .crlb import crlb_exact, fim_rss
from .errors import UnlocalizableError
from .geometry import NetworkConfig, rng_stream, sample_nearest_batch

__all__ = [
    "EstimationProblem",
    "MleReport",
    "MseRow",
    "mle_locate",
    "mse_vs_k",
]

logger = logging.getLogger(__name__)

_GRID_DIVISIONS = 60
_MAX_ITERATIONS = 100
_GRAD_TOL = 1e-8


@dataclass(frozen=True)
class EstimationProblem:
    """RSS samples, their anchors, and the noise model they share."""

    samples: tuple[RssSample, ...]
    anchors: np.ndarray
    alpha: float
    sigma_p_sq: float

    def __post_init__(self) -> None:
        anchors = np.atleast_2d(np.asarray(self.anchors, dtype=float))
        object.__setattr__(self, "anchors", anchors)
        if len(self.samples) < 3:
            raise ValueError("unambiguous RSS localization needs at least 3 samples")
        if anchors.shape[0] != len(self.samples):
            raise ValueError("one anchor per sample required")
        if len(np.unique(anchors, axis=0)) != anchors.shape[0]:
            raise ValueError("anchors must be distinct")
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if self.sigma_p_sq < 0:
            raise ValueError(f"sigma_p_sq must be >= 0, got {self.sigma_p_sq}")

    @property
    def values(self) -> np.ndarray:
        return np.array([s.value for s in self.samples])


@dataclass(frozen=True)
class MleReport:
    """Convergence diagnostics of one estimation run."""

    converged: bool
    iterations: int
    grad_norm: float
    residual: float
    used_grid_fallback: bool


def _objective(p: np.ndarray, anchors: np.ndarray, r: np.ndarray, alpha: float) -> float:
    d2 = ((p[None, :] - anchors) ** 2).sum(axis=1)
    f = r + 0.5 * alpha * np.log(d2)
    return float(f @ f)


def mle_objective_grad(
    p: np.ndarray, anchors: np.ndarray, r: np.ndarray, alpha: float
) -> np.ndarray:
    """Gradient of the squared log-residual objective at ``p``."""
    diff = p[None, :] - anchors
    d2 = (diff**2).sum(axis=1)
    f = r + 0.5 * alpha * np.log(d2)
    jac = alpha * diff / d2[:, None]
    return 2.0 * jac.T @ f


def mle_locate(
    problem: EstimationProblem, search_radius: float | None = None
) -> tuple[np.ndarray, MleReport]:
    """Two-stage maximum-likelihood position estimate.

    The coarse stage evaluates the objective on a square grid of step
    ``search_radius / 60`` masked to the disk of that radius (default:
    1.2x the largest anchor distance from the centroid, which always covers
    the basin). The refine stage is Levenberg-damped Gauss-Newton; if it
    fails to reach the gradient tolerance within 100 iterations the best
    grid point is returned with a warning flag.
    """
    anchors = problem.anchors
    r = problem.values
    alpha = problem.alpha
    centered = anchors - anchors.mean(axis=0)
    spread = np.linalg.svd(centered, compute_uv=False)
    if spread[-1] <= 1e-9 * spread[0]:
        raise UnlocalizableError("anchors are collinear: position is unobservable")

    if search_radius is None:
        search_radius = 1.2 * float(
            np.linalg.norm(anchors - anchors.mean(axis=0), axis=1).max()
        )
        center = anchors.mean(axis=0)
    else:
        center = np.zeros(2)
    grid = _disk_grid(center, search_radius)
    d2 = ((grid[:, None, :] - anchors[None, :, :]) ** 2).sum(axis=2)
    # A grid node can sit exactly on an anchor; clamp so its objective is
    # merely huge instead of a warning-generating log(0).
    d2 = np.maximum(d2, 1e-300)
    obj = ((r[None, :] + 0.5 * alpha * np.log(d2)) ** 2).sum(axis=1)
    p_grid = grid[int(np.argmin(obj))]

    p, report = _gauss_newton(p_grid, anchors, r, alpha)
    if not report.converged and _objective(p_grid, anchors, r, alpha) < report.residual:
        logger.warning("Gauss-Newton failed to converge; returning best grid point")
        report = MleReport(False, report.iterations,
                           float(np.linalg.norm(mle_objective_grad(p_grid, anchors, r, alpha))),
                           _objective(p_grid, anchors, r, alpha), True)
        return p_grid, report
    return p, report


def _disk_grid(center: np.ndarray, radius: float) -> np.ndarray:
    step = radius / _GRID_DIVISIONS
    ax = np.arange(-radius, radius + step / 2.0, step)
    gx, gy = np.meshgrid(ax, ax)
    mask = gx**2 + gy**2 <= radius**2
    return np.stack([gx[mask] + center[0], gy[mask] + center[1]], axis=1)


def _gauss_newton(
    p0: np.ndarray, anchors: np.ndarray, r: np.ndarray, alpha: float
) -> tuple[np.ndarray, MleReport]:
    p = p0.astype(float).copy()
    damping = 1e-3
    iterations = 0
    for iterations in range(1, _MAX_ITERATIONS + 1):
        diff = p[None, :] - anchors
        d2 = (diff**2).sum(axis=1)
        f = r + 0.5 * alpha * np.log(d2)
        jac = alpha * diff / d2[:, None]
        grad = 2.0 * jac.T @ f
        grad_norm = float(np.linalg.norm(grad))
        if grad_norm < _GRAD_TOL:
            return p, MleReport(True, iterations, grad_norm, float(f @ f), False)
        hess = jac.T @ jac
        improved = False
        for _ in range(40):
            try:
                step = np.linalg.solve(hess + damping * np.eye(2), -jac.T @ f)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            cand = p + step
            d2c = ((cand[None, :] - anchors) ** 2).sum(axis=1)
            if np.any(d2c <= 0.0):
                damping *= 10.0
                continue
            fc = r + 0.5 * alpha * np.log(d2c)
            if fc @ fc < f @ f:
                p = cand
                damping = max(damping / 3.0, 1e-12)
                improved = True
                break
            damping *= 10.0
        if not improved:
            # Damping saturated: the iterate is a numerical stationary point.
            return p, MleReport(grad_norm < 1e-4, iterations, grad_norm,
                                float(f @ f), False)
    diff = p[None, :] - anchors
    d2 = (diff**2).sum(axis=1)
    f = r + 0.5 * alpha * np.log(d2)
    grad_norm = float(np.linalg.norm(mle_objective_grad(p, anchors, r, alpha)))
    return p, MleReport(False, _MAX_ITERATIONS, grad_norm, float(f @ f), False)


@dataclass(frozen=True)
class MseRow:
    """One row of the anchors-vs-noise sweep."""

    K: int
    mse: float
    crlb_mean: float
    sigma_p_sq: float
    expected_sinr: float
    n_runs: int
    n_conditioned: int
    n_degenerate: int


def mse_vs_k(
    config: NetworkConfig,
    params: ChannelParams,
    k_range: list[int],
    n_runs: int,
    rng: np.random.Generator | None = None,
    sinr_runs: int = 200_000,
    sigma_p_source: str = "mc",
) -> list[MseRow]:
    """Mean-squared estimation error for each anchor count.

    For each ``K``: the noise variance follows from the expected SINR of
    the K-th link (``sigma_p_source`` picks the Monte Carlo estimator,
    default, or the closed-form tail integral), deployments are drawn
    conditioned on holding K waveguides, RSS samples are generated from the
    activated anchors, and the two-stage MLE squared error is averaged.
    Deployments rejected for having fewer than K waveguides are counted in
    ``n_conditioned``; degenerate anchor geometries are resampled and
    counted in ``n_degenerate``.
    """
    if any(k < 3 or k > 12 for k in k_range):
        raise ValueError("k_range must lie within [3, 12]")
    rng = rng_stream(config.seed, 0) if rng is None else rng
    rows: list[MseRow] = []
    for K in k_range:
        esinr = _expected_sinr_for(K, config, params, sinr_runs, sigma_p_source)
        sp2 = sigma_p_sq(params.alpha, esinr)
        sp = math.sqrt(sp2)
        sigma_rss_sq = sp2 / params.alpha**2
        sq_err = np.empty(n_runs)
        crlb_vals = np.empty(n_runs)
        done = 0
        n_conditioned = 0
        n_degenerate = 0
        while done < n_runs:
            want = n_runs - done
            batch = sample_nearest_batch(config, max(2 * want + 16, 64), rng)
            ok = np.flatnonzero(batch.counts >= K)[:want]
            n_conditioned += int((batch.counts < K).sum())
            for i in ok:
                sl = batch.run_slice(int(i))
                anchors = batch.anchor[sl][:K]
                d = batch.distance[sl][:K]
                values = -params.alpha * np.log(d) + rng.normal(0.0, sp, size=K)
                samples = tuple(
                    RssSample(j + 1, 1, float(values[j]), float(d[j])) for j in range(K)
                )
                problem = EstimationProblem(samples, anchors, params.alpha, sp2)
                try:
                    crlb_vals[done] = crlb_exact(fim_rss(anchors, np.zeros(2), sigma_rss_sq))
                    est, _ = mle_locate(problem, search_radius=config.R_a)
                except UnlocalizableError:
                    n_degenerate += 1
                    continue
                sq_err[done] = float(est @ est)
                done += 1
        rows.append(
            MseRow(K, float(sq_err.mean()), float(crlb_vals.mean()), sp2, esinr,
                   n_runs, n_conditioned, n_degenerate)
        )
        logger.info("K=%d: mse=%.3f crlb=%.3f sigma_p_sq=%.3f", K, rows[-1].mse,
                    rows[-1].crlb_mean, sp2)
    return rows


def _expected_sinr_for(
    K: int,
    config: NetworkConfig,
    params: ChannelParams,
    sinr_runs: int,
    source: str,
) -> float:
    if source == "mc":
        return mc_expected_sinr(K, config, params, sinr_runs,
                                rng_stream(config.seed, 1_000_000 + K))
    if source == "analytic":
        from .analysis import expected_sinr

        return expected_sinr(K, config, params)
    raise ValueError(f"unknown sigma_p_source {source!r}; use 'mc' or 'analytic'")

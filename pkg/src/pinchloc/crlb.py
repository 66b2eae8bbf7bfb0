"""Position-error bounds: exact Fisher information, tractable approximation,
bound distribution, anchor selection, and baseline bounds.

For the Gaussian log-distance RSS model the Fisher information of the target
coordinates is a 2x2 matrix assembled from anchor offsets scaled by
``1 / d**4``; the position bound is the trace of its inverse. A tractable
approximation collapses the anchor set onto a single representative distance
``d_*``, giving ``sigma_rss**2 * 4 * d_***2 / (M * (K - 1))``, whose
distribution follows directly from the law of ``d_*``. The representative
anchor defaults to the nearest antenna on the nearest waveguide; a
mutual-information selector over simulated deployments is provided to pick
it empirically.

The off-diagonal information entry is the plain sum
``sum (x - x_t)(y - y_t) / d**4``. Squaring that sum inside the matrix would
break positive semidefiniteness; the square belongs in the determinant
``A*B - C**2`` of the inverse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.constants import c as C_LIGHT

from .errors import UnlocalizableError
from .geometry import Deployment

__all__ = [
    "Fim2x2",
    "CrlbReport",
    "MiSelection",
    "fim_rss",
    "crlb_exact",
    "crlb_approx",
    "crlb_cdf",
    "select_d_star",
    "crlb_tdoa",
    "crlb_ula_baseline",
    "default_sigma_tau_sq",
]

_SINGULAR_REL_TOL = 1e-12


@dataclass(frozen=True)
class Fim2x2:
    """Symmetric 2x2 Fisher information matrix ``[[a, c], [c, b]]``.

    Entries carry the ``1 / sigma_rss**2`` scaling already.
    """

    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        if self.a < 0 or self.b < 0:
            raise ValueError("diagonal information entries must be >= 0")
        det = self.a * self.b - self.c * self.c
        if det < -_SINGULAR_REL_TOL * max(self.a * self.b, 1.0):
            raise ValueError("information matrix must be positive semidefinite")

    @property
    def det(self) -> float:
        return self.a * self.b - self.c * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.c], [self.c, self.b]])


@dataclass(frozen=True)
class CrlbReport:
    """Exact and approximate position bounds with the inputs that made them."""

    exact: float
    approx: float
    d_star: float
    K: int
    M: int
    sigma_rss_sq: float

    def __post_init__(self) -> None:
        if self.exact < 0 or self.approx < 0:
            raise ValueError("bounds must be >= 0")


def fim_rss(anchors, target, sigma_rss_sq: float) -> Fim2x2:
    """Fisher information of the target position from log-distance RSS.

    ``anchors`` is an ``(n, 2)`` array of activated antenna positions; with
    multiple activations per waveguide simply pass all of them. Requires at
    least two anchors, none coincident with the target.
    """
    anchors = np.atleast_2d(np.asarray(anchors, dtype=float))
    target = np.asarray(target, dtype=float)
    if anchors.shape[0] < 2:
        raise UnlocalizableError(
            f"need at least 2 anchors for a rank-2 information matrix, got {anchors.shape[0]}"
        )
    if sigma_rss_sq <= 0:
        raise ValueError(f"sigma_rss_sq must be positive, got {sigma_rss_sq}")
    off = anchors - target
    d2 = (off**2).sum(axis=1)
    if np.any(d2 == 0.0):
        raise ValueError("anchor coincides with the target (singular path loss)")
    d4 = d2 * d2
    a = float((off[:, 0] ** 2 / d4).sum() / sigma_rss_sq)
    b = float((off[:, 1] ** 2 / d4).sum() / sigma_rss_sq)
    c = float((off[:, 0] * off[:, 1] / d4).sum() / sigma_rss_sq)
    return Fim2x2(a, b, c)


def crlb_exact(fim: Fim2x2) -> float:
    """Trace of the inverse information matrix: ``(a + b) / (a*b - c**2)``."""
    det = fim.det
    scale = max(fim.a, fim.b, abs(fim.c), 1e-300)
    if det <= _SINGULAR_REL_TOL * scale * scale:
        raise UnlocalizableError("singular information matrix: anchors are collinear "
                                 "with the target (unobservable direction)")
    return float((fim.a + fim.b) / det)


def crlb_approx(M: int, K: int, sigma_rss_sq: float, d_star: float) -> float:
    """Single-distance approximation ``sigma_rss**2 * 4 * d_*^2 / (M(K-1))``."""
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if d_star <= 0:
        raise ValueError(f"d_star must be positive, got {d_star}")
    if sigma_rss_sq <= 0:
        raise ValueError(f"sigma_rss_sq must be positive, got {sigma_rss_sq}")
    return sigma_rss_sq * 4.0 * d_star**2 / (M * (K - 1))


def crlb_cdf(
    s: float,
    M: int,
    K: int,
    sigma_p_sq: float,
    alpha: float,
    lambda_l: float,
    lambda_s: float,
) -> float:
    """Distribution of the approximate bound over network realizations.

    ``P(bound <= s) = P(d_* <= sqrt(s * M * (K-1)) / (2 * sigma_rss))``
    with ``sigma_rss = sigma_p / alpha`` (consistent with the approximation
    it inverts) and ``d_*`` the nearest antenna on the nearest waveguide:
    its offset follows the nearest-line law and its along-line position the
    conditional nearest-site law.
    """
    if s <= 0:
        raise ValueError(f"s must be positive, got {s}")
    if sigma_p_sq <= 0:
        raise ValueError(f"sigma_p_sq must be positive, got {sigma_p_sq}")
    sigma_rss = math.sqrt(sigma_p_sq) / alpha
    q = math.sqrt(s * M * (K - 1)) / (2.0 * sigma_rss)
    return d_star_cdf(q, lambda_l, lambda_s)


def d_star_cdf(q: float, lambda_l: float, lambda_s: float) -> float:
    """Law of the nearest-antenna-on-nearest-waveguide distance.

    Marginalises the conditional nearest-site law over the nearest-line
    offset on ``(0, q)``; the substitution ``rho = q * sin(phi)`` removes
    the square-root kink at the upper limit.
    """
    if q <= 0.0:
        return 0.0
    two_pi_l = 2.0 * math.pi * lambda_l

    def integrand(phi: float) -> float:
        rho = q * math.sin(phi)
        window = 2.0 * lambda_s * q * math.cos(phi)
        return (two_pi_l * math.exp(-two_pi_l * rho) * -math.expm1(-window)
                * q * math.cos(phi))

    val, _ = integrate.quad(integrand, 0.0, math.pi / 2.0, epsabs=1e-12, epsrel=1e-10)
    return float(min(max(val, 0.0), 1.0))


@dataclass(frozen=True)
class MiSelection:
    """Outcome of the mutual-information anchor selection.

    ``choice`` is the selected (waveguide, position) pair, 1-based by
    waveguide proximity order and 1-based by per-waveguide proximity to the
    target. ``mi`` maps every candidate pair to its estimated mutual
    information with the information-matrix determinant.
    """

    choice: tuple[int, int]
    mi: dict[tuple[int, int], float]


def select_d_star(
    deployments: list[Deployment], M: int, K: int, bins: int = 24
) -> MiSelection:
    """Pick the candidate distance most informative about the bound.

    For each candidate position ``(k, m)`` the mutual information between
    the deployment-level determinant ``A*B - C**2`` (all ``K*M`` activated
    anchors, unit noise) and the candidate's distance is estimated from
    equal-mass 2-D histograms over the sample; the candidate with the
    largest estimate wins, ties broken towards the smallest ``(k, m)``.
    """
    n = len(deployments)
    if n < 1000:
        raise ValueError(f"need at least 1000 deployments, got {n}")
    dist = np.empty((n, K, M))
    dets = np.empty(n)
    for i, dep in enumerate(deployments):
        if len(dep) < K:
            raise ValueError("every deployment must hold at least K waveguides")
        pts = dep.nearest_positions(M, K)
        all_pts = np.concatenate(pts, axis=0)
        fim = fim_rss(all_pts, dep.target, 1.0)
        dets[i] = fim.det
        for k in range(K):
            dist[i, k, :] = np.linalg.norm(pts[k] - dep.target, axis=1)
    if np.ptp(dets) == 0.0:
        raise ValueError("degenerate sample: the information determinant is constant")
    # Heavy-tailed determinant: bin on the log scale.
    log_det = np.log(np.maximum(dets, np.finfo(float).tiny))
    mi: dict[tuple[int, int], float] = {}
    for k in range(K):
        for m in range(M):
            mi[(k + 1, m + 1)] = _histogram_mi(dist[:, k, m], log_det, bins)
    choice = max(sorted(mi), key=lambda km: (mi[km], (-km[0], -km[1])))
    return MiSelection(choice, mi)


def _histogram_mi(x: np.ndarray, y: np.ndarray, bins: int) -> float:
    """Plug-in mutual information from an equal-mass 2-D histogram."""
    edges_x = np.quantile(x, np.linspace(0.0, 1.0, bins + 1))
    edges_y = np.quantile(y, np.linspace(0.0, 1.0, bins + 1))
    ix = np.clip(np.searchsorted(edges_x, x, side="right") - 1, 0, bins - 1)
    iy = np.clip(np.searchsorted(edges_y, y, side="right") - 1, 0, bins - 1)
    joint = np.zeros((bins, bins))
    np.add.at(joint, (ix, iy), 1.0)
    joint /= len(x)
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    mask = joint > 0.0
    ratio = joint[mask] / (px @ py)[mask]
    return float((joint[mask] * np.log2(ratio)).sum())


def crlb_tdoa(angles, sigma_tau_sq: float, K: int) -> float:
    """Time-difference position bound from anchor bearings.

    ``sigma_tau**2 * 2 * (K - 1) / sum_{k=2..K} (1 + cos(theta_k)**2 -
    2*cos(theta_k))`` with ``theta_k`` the bearing of the k-th anchor seen
    from the target. Needs a reference anchor plus two differences.
    """
    angles = np.asarray(angles, dtype=float)
    if K < 3:
        raise ValueError(f"K must be >= 3 for time-difference localization, got {K}")
    if angles.shape[0] != K:
        raise ValueError(f"expected {K} bearings, got {angles.shape[0]}")
    if sigma_tau_sq <= 0:
        raise ValueError(f"sigma_tau_sq must be positive, got {sigma_tau_sq}")
    cos = np.cos(angles[1:])
    denom = float((1.0 + cos**2 - 2.0 * cos).sum())
    if denom == 0.0:
        raise UnlocalizableError("all bearings coincide with the reference direction")
    return float(sigma_tau_sq * 2.0 * (K - 1) / denom)


def default_sigma_tau_sq(expected_sinr: float, bandwidth: float = 1e8) -> float:
    """Placeholder range variance for the time-difference baseline.

    Classical matched-filter scaling ``c**2 / (8 * pi**2 * B**2 * SINR)``
    at a nominal 100 MHz bandwidth; replace with a calibrated value when
    hardware numbers exist.
    """
    if expected_sinr <= 0:
        raise ValueError(f"expected SINR must be positive, got {expected_sinr}")
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    return C_LIGHT**2 / (8.0 * math.pi**2 * bandwidth**2 * expected_sinr)


def crlb_ula_baseline(
    n_elements: int,
    element_spacing: float,
    array_center,
    target,
    sigma_rss_sq: float,
    orientation=None,
) -> float:
    """RSS position bound of a fixed uniform linear array.

    Elements are spaced evenly along ``orientation`` (default: broadside,
    perpendicular to the centre-to-target direction) and evaluated with the
    exact information matrix, so a target collinear with the array raises
    the same unlocalizable error as any rank-deficient geometry.
    """
    if n_elements < 2:
        raise ValueError(f"need at least 2 elements, got {n_elements}")
    if element_spacing <= 0:
        raise ValueError(f"element_spacing must be positive, got {element_spacing}")
    center = np.asarray(array_center, dtype=float)
    target = np.asarray(target, dtype=float)
    if orientation is None:
        boresight = target - center
        norm = np.linalg.norm(boresight)
        if norm == 0.0:
            raise ValueError("array centre coincides with the target")
        axis = np.array([-boresight[1], boresight[0]]) / norm
    else:
        axis = np.asarray(orientation, dtype=float)
        norm = np.linalg.norm(axis)
        if norm == 0.0:
            raise ValueError("orientation must be a nonzero vector")
        axis = axis / norm
    idx = np.arange(n_elements) - (n_elements - 1) / 2.0
    elements = center[None, :] + (idx * element_spacing)[:, None] * axis[None, :]
    return crlb_exact(fim_rss(elements, target, sigma_rss_sq))

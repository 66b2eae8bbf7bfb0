"""Physical-layer model: complex gain, SINR and log-power RSS measurements.

The link between the target and an activated antenna is line-of-sight with
free-space-like magnitude ``sqrt(eta) / d**(alpha/2)`` and a phase advanced
both over the air (carrier wavelength) and inside the dielectric waveguide
from the feed to the antenna (guided wavelength). RSS localization only
consumes the magnitude; the phase is retained so the SINR can be
cross-checked from first principles.

Every waveguide activates one antenna and all activated antennas transmit
distinct pilots at equal power, so the antenna serving waveguide ``k`` sees
the other waveguides' antennas as interference plus thermal noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT

from .geometry import Deployment

__all__ = [
    "ChannelParams",
    "RssSample",
    "channel_gain",
    "sinr",
    "rss_sample",
    "sigma_p_sq",
]

# Thermal noise for ~100 MHz bandwidth at 290 K with a ~9 dB noise figure.
# The regime is interference-limited, so results are insensitive to this.
DEFAULT_NOISE_W = 3.2e-12

_ETA_REL_TOL = 1e-9


@dataclass(frozen=True)
class ChannelParams:
    """Carrier, power and noise parameters of the downlink.

    The guided wavelength defaults to ``lambda_c / 1.4`` (effective
    refractive index 1.4 of the dielectric waveguide) and ``eta`` to
    ``c**2 / (16 * pi**2 * f_c**2)``; both can be overridden but ``eta``
    must stay consistent with ``f_c``.
    """

    f_c: float = 28e9
    alpha: float = 2.1
    P_t: float = 1.0
    sigma2: float = DEFAULT_NOISE_W
    lambda_g: float | None = None
    eta: float | None = None

    def __post_init__(self) -> None:
        if self.f_c <= 0:
            raise ValueError(f"f_c must be positive, got {self.f_c}")
        if self.alpha < 2.0:
            raise ValueError(f"alpha must be >= 2 (line-of-sight regime), got {self.alpha}")
        if self.P_t <= 0:
            raise ValueError(f"P_t must be positive, got {self.P_t}")
        if self.sigma2 < 0:
            raise ValueError(f"sigma2 must be >= 0, got {self.sigma2}")
        eta_ref = C_LIGHT**2 / (16.0 * math.pi**2 * self.f_c**2)
        if self.eta is None:
            object.__setattr__(self, "eta", eta_ref)
        elif abs(self.eta - eta_ref) > _ETA_REL_TOL * eta_ref:
            raise ValueError(f"eta={self.eta} inconsistent with f_c={self.f_c}")
        if self.lambda_g is None:
            object.__setattr__(self, "lambda_g", self.lambda_c / 1.4)
        elif self.lambda_g <= 0:
            raise ValueError(f"lambda_g must be positive, got {self.lambda_g}")

    @property
    def lambda_c(self) -> float:
        """Carrier wavelength (m)."""
        return C_LIGHT / self.f_c

    @property
    def sigma_n_sq(self) -> float:
        """Noise power normalised by transmit power and eta."""
        return self.sigma2 / (self.P_t * self.eta)


@dataclass(frozen=True)
class RssSample:
    """One log-power RSS measurement tied to its anchor.

    ``value`` is the received log-power with the constant gains removed,
    i.e. ``-alpha * ln(d) + noise``.
    """

    waveguide_index: int
    pa_index: int
    value: float
    true_distance: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.value):
            raise ValueError(f"RSS value must be finite, got {self.value}")
        if not self.true_distance > 0:
            raise ValueError(f"true_distance must be positive, got {self.true_distance}")


def channel_gain(target, pa, feed, params: ChannelParams) -> complex:
    """Complex gain between ``target`` and an activated antenna at ``pa``.

    Magnitude ``sqrt(eta) / d**(alpha/2)``; phase accumulated over the air
    path ``target -> pa`` at the carrier wavelength and over the in-guide
    path ``feed -> pa`` at the guided wavelength.
    """
    target = np.asarray(target, dtype=float)
    pa = np.asarray(pa, dtype=float)
    feed = np.asarray(feed, dtype=float)
    d = float(np.linalg.norm(target - pa))
    if d == 0.0:
        raise ValueError("target coincides with the antenna (singular path loss)")
    d_guide = float(np.linalg.norm(feed - pa))
    phase = -2.0 * math.pi * (d / params.lambda_c + d_guide / params.lambda_g)
    return math.sqrt(params.eta) / d ** (params.alpha / 2.0) * complex(
        math.cos(phase), math.sin(phase)
    )


def sinr(deployment: Deployment, k: int, params: ChannelParams) -> float:
    """SINR of the activated antenna on the k-th nearest waveguide (1-based).

    ``d_k**-alpha / (sum_{i != k} d_i**-alpha + sigma2 / (P_t * eta))``
    where ``d_i`` is each waveguide's activated-antenna distance and every
    deployed waveguide transmits.
    """
    n = len(deployment)
    if not 1 <= k <= n:
        raise ValueError(f"waveguide index k={k} out of range 1..{n}")
    d = deployment.anchor_distances()
    powers = d ** (-params.alpha)
    serving = powers[k - 1]
    interference = float(powers.sum() - serving)
    return float(serving / (interference + params.sigma_n_sq))


def rss_sample(
    d: float,
    alpha: float,
    sigma_p: float,
    rng: np.random.Generator,
    waveguide_index: int = 1,
    pa_index: int = 1,
) -> RssSample:
    """Draw one RSS measurement ``-alpha * ln(d) + N(0, sigma_p**2)``."""
    if d <= 0:
        raise ValueError(f"distance must be positive, got {d}")
    if sigma_p < 0:
        raise ValueError(f"sigma_p must be >= 0, got {sigma_p}")
    noise = rng.normal(0.0, sigma_p) if sigma_p > 0 else 0.0
    return RssSample(waveguide_index, pa_index, -alpha * math.log(d) + noise, d)


def sigma_p_sq(alpha: float, expected_sinr: float) -> float:
    """Log-power noise variance implied by the expected SINR.

    ``ln(10) / (10 * alpha * E[SINR])``: better average link quality means
    less disturbance on each RSS sample.
    """
    if expected_sinr <= 0:
        raise ValueError(f"expected SINR must be positive, got {expected_sinr}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return math.log(10.0) / (10.0 * alpha * expected_sinr)

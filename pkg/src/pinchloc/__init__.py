"""Stochastic-geometry toolkit for antenna-on-waveguide RSS localization.

Submodules:

- :mod:`pinchloc.geometry` -- line-process waveguides, antenna sites, and
  their closed-form distance laws with vectorized samplers.
- :mod:`pinchloc.channel` -- complex gain, SINR and log-power RSS model.
- :mod:`pinchloc.analysis` -- localizability and expected SINR, closed form
  and Monte Carlo.
- :mod:`pinchloc.crlb` -- Fisher information, exact and approximate position
  bounds, bound distribution, anchor selection, baselines.
- :mod:`pinchloc.estimator` -- two-stage maximum-likelihood localization.
- :mod:`pinchloc.experiments` -- seeded experiments emitting CSV + sidecar.
"""
from .analysis import (
    LocalizabilityQuery,
    McEstimate,
    QuadratureSpec,
    expected_interference,
    expected_sinr,
    localizability,
    mc_expected_sinr,
    mc_localizability,
)
from .channel import ChannelParams, RssSample, channel_gain, rss_sample, sigma_p_sq, sinr
from .crlb import (
    CrlbReport,
    Fim2x2,
    crlb_approx,
    crlb_cdf,
    crlb_exact,
    crlb_tdoa,
    crlb_ula_baseline,
    fim_rss,
    select_d_star,
)
from .errors import QuadratureError, UnlocalizableError
from .estimator import EstimationProblem, MleReport, mle_locate, mse_vs_k
from .experiments import ExperimentSpec, SweepSpec, default_paper_config, run_experiment
from .geometry import (
    Deployment,
    Line,
    NetworkConfig,
    d_cond_cdf,
    d_cond_pdf,
    rho_k_cdf,
    rho_k_pdf,
    rng_stream,
    sample_deployment,
    sample_nearest_batch,
    sample_pa_positions,
    sample_plp,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelParams",
    "CrlbReport",
    "Deployment",
    "EstimationProblem",
    "ExperimentSpec",
    "Fim2x2",
    "Line",
    "LocalizabilityQuery",
    "McEstimate",
    "MleReport",
    "NetworkConfig",
    "QuadratureError",
    "QuadratureSpec",
    "RssSample",
    "SweepSpec",
    "UnlocalizableError",
    "channel_gain",
    "crlb_approx",
    "crlb_cdf",
    "crlb_exact",
    "crlb_tdoa",
    "crlb_ula_baseline",
    "d_cond_cdf",
    "d_cond_pdf",
    "default_paper_config",
    "expected_interference",
    "expected_sinr",
    "fim_rss",
    "localizability",
    "mc_expected_sinr",
    "mc_localizability",
    "mle_locate",
    "mse_vs_k",
    "rho_k_cdf",
    "rho_k_pdf",
    "rng_stream",
    "rss_sample",
    "run_experiment",
    "sample_deployment",
    "sample_nearest_batch",
    "sample_pa_positions",
    "sample_plp",
    "select_d_star",
    "sigma_p_sq",
    "sinr",
]

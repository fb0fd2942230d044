"""HMC with swappable gradient oracles: exact analytic gradients, a trained
neural-network gradient field, minibatch stochastic gradients, or a GP
surrogate. The Metropolis correction always uses the exact potential, so every
oracle yields an asymptotically exact chain."""

from ._kernels import NUMBA_ENABLED
from .mlp import AdamState, MlpGradientNet, PriorSwapOracle, train
from .samplers import (
    Chain,
    ExactGradientOracle,
    HmcConfig,
    HmcSampler,
    NetGradientOracle,
    PerturbedGradientOracle,
    SghmcConfig,
    ZeroGradientOracle,
    leapfrog,
    run_chain,
    sghmc_run,
)
from .schedule import NetSpec, TrainingSchedule, run_nng_chain, run_training_schedule
from .targets import (
    BananaTarget,
    GarchTarget,
    GpRegressionTarget,
    IllConditionedGaussianTarget,
    LogisticRegressionTarget,
    TargetModel,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState",
    "BananaTarget",
    "Chain",
    "ExactGradientOracle",
    "GarchTarget",
    "GpRegressionTarget",
    "HmcConfig",
    "HmcSampler",
    "IllConditionedGaussianTarget",
    "LogisticRegressionTarget",
    "MlpGradientNet",
    "NetGradientOracle",
    "NetSpec",
    "NUMBA_ENABLED",
    "PerturbedGradientOracle",
    "PriorSwapOracle",
    "SghmcConfig",
    "TargetModel",
    "TrainingSchedule",
    "ZeroGradientOracle",
    "leapfrog",
    "run_chain",
    "run_nng_chain",
    "run_training_schedule",
    "sghmc_run",
    "train",
]

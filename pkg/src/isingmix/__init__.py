"""Mixtures of Ising and Potts models learned by pseudolikelihood EM."""
from .errors import *  # noqa: F401,F403
from .spin_models import (FREE, INFINITE_RANGE, ComponentParams, Dataset,
                          SpinConfiguration, component_log_pl, log_potential,
                          site_conditionals, weighted_log_pl_and_grad)
from .mixture import (FitOptions, FitReport, MixtureModel, fit, m_step,
                      mixture_log_pl, responsibilities_pl, update_mixing)
from .sampler import SamplerConfig, gibbs_sample, sample_mixture
from .initialization import codeword_init, hamming_distance, random_init
from .optimizer import OptimizeOptions, maximize

__version__ = "0.1.0"

"""Sum-of-squares online bin packing, the waste LP classifier and experiment tools."""

from .distribution import DiscreteDistribution, DistributionError, load_distribution, load_family
from .harness import ExperimentConfig, RunRecord, emit, fit_growth, fit_records, run_experiment
from .kernels import BACKEND
from .model import IllegalPlacement, Packing, Profile, dead_end_levels, place, ss_change, ss_value, waste
from .oracle import SizeLimitExceeded, cone_membership, exact_opt, perfect_configs, perfectly_packable
from .packers import OnlinePacker, PolicyError, make_packer
from .wastelp import DistributionClass, build_waste_lp, classify, solve_lp, waste_constant

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DiscreteDistribution",
    "DistributionClass",
    "DistributionError",
    "ExperimentConfig",
    "IllegalPlacement",
    "OnlinePacker",
    "Packing",
    "PolicyError",
    "Profile",
    "RunRecord",
    "SizeLimitExceeded",
    "build_waste_lp",
    "classify",
    "cone_membership",
    "dead_end_levels",
    "emit",
    "exact_opt",
    "fit_growth",
    "fit_records",
    "load_distribution",
    "load_family",
    "make_packer",
    "perfect_configs",
    "perfectly_packable",
    "place",
    "run_experiment",
    "solve_lp",
    "ss_change",
    "ss_value",
    "waste",
    "waste_constant",
]

"""Differentially private MDP policy synthesis with certified cost-of-privacy bounds."""

__version__ = "0.1.0"

from .mdp import (
    InvalidModelError,
    Mdp,
    Policy,
    ProbVector,
    ValueFunction,
    evaluate_policy_finite,
    evaluate_policy_infinite,
    make_mdp,
    prob_vector,
    validate_mdp,
)
from .privacy import (
    PrivacyParams,
    RngStream,
    adjacent_pair,
    alpha_bound,
    dirichlet_sample,
    privatize_kernel,
    smooth,
)
from .lp import LinearProgram, LpSolution, build_inner_lp, solve_lp
from .robust import (
    BoundPair,
    CopReport,
    UncertaintySet,
    bounds_finite,
    bounds_infinite,
    cost_of_privacy,
    inner_extremum,
    is_member,
)
from .synthesis import SynthesisResult, run_pipeline, synthesize_finite, synthesize_infinite
from .examples import build_example1, build_example2
from .mdp_io import load_mdp, save_mdp
from .sweep import SweepConfig, SweepRow, run_sweep, runtime_probe

__all__ = [
    "InvalidModelError",
    "Mdp",
    "Policy",
    "ProbVector",
    "ValueFunction",
    "evaluate_policy_finite",
    "evaluate_policy_infinite",
    "make_mdp",
    "prob_vector",
    "validate_mdp",
    "PrivacyParams",
    "RngStream",
    "adjacent_pair",
    "alpha_bound",
    "dirichlet_sample",
    "privatize_kernel",
    "smooth",
    "LinearProgram",
    "LpSolution",
    "build_inner_lp",
    "solve_lp",
    "BoundPair",
    "CopReport",
    "UncertaintySet",
    "bounds_finite",
    "bounds_infinite",
    "cost_of_privacy",
    "inner_extremum",
    "is_member",
    "SynthesisResult",
    "run_pipeline",
    "synthesize_finite",
    "synthesize_infinite",
    "build_example1",
    "build_example2",
    "load_mdp",
    "save_mdp",
    "SweepConfig",
    "SweepRow",
    "run_sweep",
    "runtime_probe",
]

"""Delay-perturbed ODEs on embedded manifolds: degree, fixed point index and branch certificates."""
from .branch import (
    Branch,
    Certificate,
    ContinuationControls,
    PeriodicPair,
    StartingPair,
    Termination,
    branch_certificate,
    continue_branch,
    solve_periodic,
    trivial_starting_pairs,
)
from .degree import check_poincare_hopf, degree, find_zeros, winding_degree_planar
from .errors import ComputationError, ConfigError
from .fields import PerturbationField, TangentField, tangentize, tangentize_perturbation
from .index import index_P_at, index_P_region, index_Q_region, verify_fix_correspondence
from .integrate import History, Trajectory, flow_dde, flow_ode, variational_flow
from .manifold import EmbeddedManifold, Euclidean, Sphere, Torus2
from .poincare import map_h, map_k, poincare_P, translation_Q, translation_Q_lambda
from .systems import EXAMPLES, get_system

__version__ = "0.1.0"

"""Integral valuations on piecewise-linear coercive convex functions.

``mu(u) = int V_k(cl{u < t}) dnu(t)`` evaluated three ways, with the
geometry, partition and verification tools around it.
"""
from .convex_fn import ConvexFn, Hyperplane, coercivity_check, join, lift_undergraph, min_info, restrict_to
from .exceptions import (BadConfig, ConvexValError, DimensionMismatch, EmptyInput, EuclideanNormNotPL,
                         IllConditioned, NonConvexUnion, NonPositiveLambda, NotCoercive, NotComplete,
                         SampleBudgetTooSmall, Unbounded)
from .geom import Polytope, RigidMotion, hausdorff_distance, intrinsic_volumes, steiner_fit
from .harness import GenConfig, gen_convex_fn, run_suite, undergraph_lambda_sweep, undergraph_valuation
from .measures import DensityFn, RadonMeasure, mollify, tail
from .partitions import (InductiveCertificate, PolytopalPartition, complete, inductive_certificate,
                         is_complete, refine_by_hyperplane, riemann_sandwich, verify_decomposition)
from .sublevel import beta_integral, profile, sublevel_strict_closure
from .valuation import (IntegralValuation, ValuationOracle, eval_beta, eval_layercake, eval_sublevel,
                        eval_zero_homogeneous, mollified_valuation, recover_densities)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

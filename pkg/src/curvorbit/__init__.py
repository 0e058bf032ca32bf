"""Curvature operators, Cartan involutions and orbit flows for indefinite metrics."""

__version__ = "0.1.0"

from .cartan import CartanInvolution, canonical_theta, em_split_operator, em_split_tensor, pe_defect
from .catalog import builtin, curvature_oracle
from .classify import Classification, classify, orbit_invariants, wick_pair_check
from .flow import FlowConfig, run_flow
from .tensors import (CurvatureInputError, CurvatureOperator, RiemannTensor, Signature,
                      riemann_to_operator, validate_riemann, weyl)

__all__ = [
    "CartanInvolution", "Classification", "CurvatureInputError", "CurvatureOperator",
    "FlowConfig", "RiemannTensor", "Signature", "builtin", "canonical_theta", "classify",
    "curvature_oracle", "em_split_operator", "em_split_tensor", "orbit_invariants",
    "pe_defect", "riemann_to_operator", "run_flow", "validate_riemann", "weyl",
    "wick_pair_check",
]

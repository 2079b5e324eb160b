"""Wardrop equilibria and Braess paradox regions for generalised four-node networks."""

from braess.core import DerivedQuantities, FourNodeConfig, derive_quantities, ext_div
from braess.equilibrium import (
    EquilibriumSolution,
    PiecewiseLinearFn,
    equilibrium_N,
    equilibrium_Nplus,
    piecewise_equilibrium,
)
from braess.oracle import beckmann_solve, scan_paradox, verify_wardrop
from braess.paradox import (
    EMPTY,
    Interval,
    classify,
    paradox_region,
    pseudo_paradox_region,
    symmetric_analysis,
    theorem1_interval,
    theorem2_interval,
    theorem3_interval,
    theorem4_interval,
)
from braess.reduction import (
    GeneralNetwork,
    Link,
    absorb_external_flow,
    contract_path,
    reduce_network,
)

__all__ = [
    "DerivedQuantities",
    "EMPTY",
    "EquilibriumSolution",
    "FourNodeConfig",
    "GeneralNetwork",
    "Interval",
    "Link",
    "PiecewiseLinearFn",
    "absorb_external_flow",
    "beckmann_solve",
    "classify",
    "contract_path",
    "derive_quantities",
    "equilibrium_N",
    "equilibrium_Nplus",
    "ext_div",
    "paradox_region",
    "piecewise_equilibrium",
    "pseudo_paradox_region",
    "reduce_network",
    "scan_paradox",
    "symmetric_analysis",
    "theorem1_interval",
    "theorem2_interval",
    "theorem3_interval",
    "theorem4_interval",
    "verify_wardrop",
]

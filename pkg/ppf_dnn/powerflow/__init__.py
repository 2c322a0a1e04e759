# powerflow subpackage
from .flows import (
    BranchArrays,
    BranchFlows,
    BranchSensitivities,
    branch_flows,
    branch_sensitivities,
    bus_injections_from_flows,
    incidence,
)
from .solver import PowerFlowSolution, power_injection_derivatives, solve_power_flow

__all__ = [
    "BranchArrays",
    "BranchFlows",
    "BranchSensitivities",
    "PowerFlowSolution",
    "branch_flows",
    "branch_sensitivities",
    "bus_injections_from_flows",
    "incidence",
    "power_injection_derivatives",
    "solve_power_flow",
]

"""Deployment planning for TVWS rural access backhauled over 5G.

Topology (village clustering, relay chains), CAPEX cost-per-user
minimization and OPEX grid/solar/battery scheduling.
"""
__version__ = "0.1.0"

from .capex import (
    CapexInputs, CapexResult, backhaul_comparison, brute_force_capex, cost_per_user_analytic,
    infra_cost, optimize_capex, relay_sweep, total_vcc_count,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .lp import LinearProgram, LpSolution, LpStatus, check_feasibility, solve
from .opex import EnergyPlan, apply_power_saving, build_energy_lp, optimize_opex, verify_plan
from .scenario import (
    CostCatalog, EnergyScenario, Scenario, ScenarioError, derive_unit_costs, effective_area,
    load_scenario,
)
from .topology import (
    DeploymentPlan, assign_uplinks, build_plan, classify_roles, cluster_villages, min_relay_count,
)

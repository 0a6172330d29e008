"""Reliable two-echelon supply chain design with expedited shipments.

Joint supplier location, backup assignment, expedited sourcing and base-stock
optimisation under independent supplier disruptions, solved by Lagrangian
relaxation with subgradient multiplier updates.
"""
from .costs import (CostBreakdown, Solution, Violation, check_feasible, evaluate, level_weight,
                    stockout_probability)
from .feasibility import make_feasible, naive_repair, refined_feasible
from .instance import (GeneratorParams, Instance, InstanceError, Site, bundled_sites,
                       generate_synthetic, load_instance, save_instance, validate)
from .relaxation import (AssignmentTuple, Multipliers, RelaxedSolution, bisect_stock,
                         solve_location_subproblem, solve_relaxed, solve_terminal_subproblem)
from .subgradient import SolverConfig, SolveResult, solve, step_size, update_multipliers

__version__ = "0.1.0"

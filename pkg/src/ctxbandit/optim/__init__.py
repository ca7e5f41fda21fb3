"""Ellipsoid method, policy-hull geometry and the per-round program solver."""

from .ellipsoid import INSIDE, Hyperplane, ellipsoid_budget, ellipsoid_feasibility, separating_hyperplane_from_convex
from .hull import HullEmbedding, InHull, hull_membership, linopt_over_hull, project_onto_vertices
from .program import (NO_VIOLATION, Certificate, Infeasible, ProgramA, Violation, rucb_opt,
                      solve_program_A, violation_search)

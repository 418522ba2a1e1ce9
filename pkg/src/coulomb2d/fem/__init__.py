"""Finite-element contact on a bounded plane-strain body."""

from .assembly import SingularElement, assemble_full_stiffness, assemble_stiffness, load_vector
from .contact import (
    ContactData,
    ContactNotConverged,
    ContactProblem,
    InvalidThreshold,
    StepResult,
    TrescaResult,
    dual_norm,
    solve_contact_step,
    solve_tresca,
)
from .evolve import EvolveStep, evolve_quasistatic, step_dissipation
from .laws import (
    FrictionConditionViolated,
    contact_states,
    friction_condition_check,
    friction_law_check,
    kkt_residuals,
    oblique_components,
)
from .mesh import ContactChain, DomainMesh, MeshError, load_mesh, mesh_from_json, read_gmsh22, rectangle_mesh
from .probes import holder_probe, operator_probe, probe_problem, trace_norm

__all__ = [
    "ContactChain", "ContactData", "ContactNotConverged", "ContactProblem", "DomainMesh",
    "EvolveStep", "FrictionConditionViolated", "InvalidThreshold", "MeshError", "SingularElement",
    "StepResult", "TrescaResult", "assemble_full_stiffness", "assemble_stiffness", "contact_states",
    "dual_norm", "evolve_quasistatic", "friction_condition_check", "friction_law_check",
    "holder_probe", "kkt_residuals", "load_mesh", "load_vector", "mesh_from_json",
    "oblique_components", "operator_probe", "probe_problem", "read_gmsh22", "rectangle_mesh",
    "solve_contact_step", "solve_tresca", "step_dissipation", "trace_norm",
]

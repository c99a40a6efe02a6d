"""Sparse recovery over unitary transforms with certified error bounds."""
from compsense._backend import BACKEND
from compsense.bounds import (
    BoundReport,
    bp_l0_bound,
    bp_l2_bounds,
    ds_bounds,
    iht_bound_v1,
    iht_bound_v2,
    min_iterations_v1,
    min_iterations_v2,
)
from compsense.harness import ExperimentConfig, MetricsRow, image_pipeline, make_compressible, run_experiment, run_trial
from compsense.iht import IhtConfig, RecoveryResult, iht
from compsense.l1solve import SolverConfig, basis_pursuit, bp_l0, dantzig_selector
from compsense.measurement import StackedOperator
from compsense.noise import NoiseSpec, gen_dense, gen_l0
from compsense.rip import RipCertificate, gershgorin_bound, rip_exact, rip_theory_bound
from compsense.sparsity import SparsityPattern, head_k, head_kt, tail_k
from compsense.transform import UnitaryTransform, make_transform

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundReport", "ExperimentConfig", "IhtConfig", "MetricsRow", "NoiseSpec",
    "RecoveryResult", "RipCertificate", "SolverConfig", "SparsityPattern", "StackedOperator",
    "UnitaryTransform", "basis_pursuit", "bp_l0", "bp_l0_bound", "bp_l2_bounds", "dantzig_selector",
    "ds_bounds", "gen_dense", "gen_l0", "gershgorin_bound", "head_k", "head_kt", "iht", "iht_bound_v1",
    "iht_bound_v2", "image_pipeline", "make_compressible", "make_transform", "min_iterations_v1",
    "min_iterations_v2", "rip_exact", "rip_theory_bound", "run_experiment", "run_trial", "tail_k",
]

"""Informational correlations between subsystems of spin-1/2 chains."""
from .chain_model import Partition, build_xy_hamiltonian, evolution_operator
from .correlation import CorrelationReport, E_AA, E_AB, E_AB_samples, jacobian_A, jacobian_A_exact
from .matkernel import DEFAULT_POLICY, RankPolicy, numerical_rank, partial_trace
from .nonreducible import E_AB_min, h_matrix, h_matrix_exact, removable
from .scenario import ChainModel, Scenario, load_scenario, one_node, parse_scenario, two_node
from .transfer_map import assemble_affine, compute_T, devectorize, vectorize

__version__ = "0.1.0"

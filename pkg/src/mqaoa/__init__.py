"""Multiscale QAOA on Ising cost Hamiltonians.

Statevector QAOA is alternated with a matching-based real-space
renormalization step: matched vertex pairs are truncated to two retained
states, the Hamiltonian is projected onto them, the smaller problem is solved
and its solution seeds the next QAOA round as a product state.
"""
from .driver import MqaoaConfig, MqaoaResult, approximation_ratio, count_qaoa_runs, matchable, mqaoa_level, run_mqaoa, solve_ground
from .ising import (
    Graph,
    IsingHamiltonian,
    brute_force_ground,
    cut_value,
    energy_of,
    make_cycle,
    make_erdos_renyi,
    make_random_regular,
    max_cut,
    maximal_matching,
    maxcut_to_ising,
    partition_from_matching,
)
from .qaoa import OptimizerConfig, QaoaParams, objective, optimize_qaoa, prepare_ansatz
from .rg import CoarseMap, build_basis_form_a, build_basis_form_b, choose_basis, coarse_grain_hamiltonian, lift_bitstring
from .statevector import StateVector, estimate_paulis, init_plus, init_product

__version__ = "0.1.0"

"""Dense-matrix cross-checks on random small instances.

Each check compares a fast path of the package against an explicit
construction that shares none of its code: Kronecker-product Hamiltonians,
an explicit isometry matrix, and partial traces taken by summation.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .ising import IsingHamiltonian, energy_of, index_to_bits, partition_from_matching, Matching
from .rg import CoarseMap, build_basis_form_a, build_basis_form_b, coarse_grain_hamiltonian, dense_isometry, isometry_matrix
from .statevector import PAULI_PAIRS, StateVector, pauli_expectation, rdm_exact, rdm_from_paulis

__all__ = [
    "OracleResult",
    "dense_ising_matrix",
    "random_ising",
    "random_state",
    "random_density",
    "random_partition",
    "random_coarse_map",
    "partial_trace_pair",
    "check_isometries",
    "check_rdm_reconstruction",
    "check_effective_hamiltonian",
    "run_all",
]

_Z = np.diag([1.0, -1.0])
_I = np.eye(2)


@dataclass
class OracleResult:
    name: str
    passed: bool
    trials: int
    worst: float
    tolerance: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.trials} trials, worst error {self.worst:.3e} (tol {self.tolerance:.0e})"


def _z_on(n: int, qubits) -> np.ndarray:
    # qubit 0 is the least significant bit, i.e. the last Kronecker factor
    return reduce(np.kron, [(_Z if q in qubits else _I) for q in reversed(range(n))])


def dense_ising_matrix(H: IsingHamiltonian) -> np.ndarray:
    n = H.num_vertices
    M = H.offset * np.eye(1 << n)
    for (i, j), w in H.couplings.items():
        M = M + w * _z_on(n, {i, j})
    for i, h in enumerate(H.fields):
        M = M + h * _z_on(n, {i})
    return M


def random_ising(rng: np.random.Generator, n: int, density: float = 0.6) -> IsingHamiltonian:
    couplings = {}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                couplings[(i, j)] = rng.uniform(-1, 1)
    return IsingHamiltonian(n, couplings, rng.uniform(-1, 1, n), rng.uniform(-1, 1))


def random_state(rng: np.random.Generator, n: int) -> StateVector:
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return StateVector(n, amps / np.linalg.norm(amps))


def random_density(rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    rank = rank or int(rng.integers(1, 5))
    G = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_partition(rng: np.random.Generator, n: int):
    perm = rng.permutation(n)
    n_blocks = int(rng.integers(0, n // 2 + 1))
    pairs = [(int(perm[2 * k]), int(perm[2 * k + 1])) for k in range(n_blocks)]
    return partition_from_matching(n, Matching(frozenset(pairs)))


def random_coarse_map(rng: np.random.Generator, n: int) -> CoarseMap:
    part = random_partition(rng, n)
    bases = []
    for blk in part.blocks:
        build = build_basis_form_a if rng.random() < 0.5 else build_basis_form_b
        bases.append(build(random_density(rng), blk))
    return CoarseMap(part, tuple(bases))


def partial_trace_pair(state: StateVector, i: int, j: int) -> np.ndarray:
    """``rho_ij`` by explicit summation over the basis of the other qubits."""
    n = state.n_qubits
    rho = np.zeros((4, 4), dtype=complex)
    amps = state.amplitudes
    for k in range(1 << n):
        for kp in range(1 << n):
            rest = ~((1 << i) | (1 << j))
            if (k & rest) != (kp & rest):
                continue
            r = 2 * ((k >> i) & 1) + ((k >> j) & 1)
            c = 2 * ((kp >> i) & 1) + ((kp >> j) & 1)
            rho[r, c] += amps[k] * np.conj(amps[kp])
    return rho


def check_isometries(trials: int = 1000, seed: int = 0, tol: float = 1e-12) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        rho = random_density(rng)
        for build in (build_basis_form_a, build_basis_form_b):
            om = isometry_matrix(build(rho))
            P = om @ om.conj().T
            worst = max(worst, np.abs(om.conj().T @ om - np.eye(2)).max(), np.abs(P @ P - P).max())
    return OracleResult("isometry algebra", worst <= tol, trials, worst, tol)


def check_rdm_reconstruction(trials: int = 200, seed: int = 0, tol: float = 1e-10) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(4, 7))
        i, j = (int(q) for q in rng.choice(n, 2, replace=False))
        psi = random_state(rng, n)
        vals = [pauli_expectation(psi, i, a, j, b) for a, b in PAULI_PAIRS]
        worst = max(worst, float(np.linalg.norm(rdm_from_paulis(vals) - rdm_exact(psi, i, j))))
    return OracleResult("RDM reconstruction", worst <= tol, trials, worst, tol)


def check_effective_hamiltonian(trials: int = 100, seed: int = 0, tol: float = 1e-10) -> OracleResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        n = int(rng.integers(2, 9))
        H = random_ising(rng, n)
        cmap = random_coarse_map(rng, n)
        Hc = coarse_grain_hamiltonian(H, cmap)
        W = dense_isometry(cmap)
        M = W.conj().T @ dense_ising_matrix(H) @ W
        expected = np.diag([energy_of(Hc, index_to_bits(k, cmap.n_coarse)) for k in range(1 << cmap.n_coarse)])
        worst = max(worst, float(np.abs(M - expected).max()))
    return OracleResult("effective Hamiltonian", worst <= tol, trials, worst, tol)


def run_all(seed: int = 0) -> list[OracleResult]:
    return [
        check_isometries(seed=seed),
        check_rdm_reconstruction(seed=seed),
        check_effective_hamiltonian(seed=seed),
    ]

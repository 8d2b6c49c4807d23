"""Dense statevector kernels for the QAOA circuit family.

Amplitude index ``k`` encodes the computational basis state whose bit ``q``
is ``(k >> q) & 1``. Reshaping a state to ``(2,) * n`` therefore puts qubit
``q`` on axis ``n - 1 - q``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ising import ENUMERATION_CAP, CapacityExceeded, IsingHamiltonian

__all__ = [
    "StateVector",
    "EnergyDiagonal",
    "ZERO",
    "ONE",
    "PLUS",
    "PAULIS",
    "PAULI_PAIRS",
    "init_plus",
    "init_basis",
    "init_product",
    "apply_phase_separator",
    "apply_mixer",
    "expectation_energy",
    "pauli_expectation",
    "pauli_expectations",
    "rdm_exact",
    "rdm_from_paulis",
    "estimate_paulis",
    "rdm_from_shots",
    "project_density",
    "sample_bitstrings",
    "dump_amplitudes",
]

ZERO = np.array([1.0, 0.0], dtype=complex)
ONE = np.array([0.0, 1.0], dtype=complex)
PLUS = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)

PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
# the 15 non-trivial two-qubit Pauli products, in a fixed order
PAULI_PAIRS = tuple((a, b) for a in "IXYZ" for b in "IXYZ" if (a, b) != ("I", "I"))


@dataclass
class StateVector:
    """Mutable ``2**n_qubits`` amplitude buffer."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError("amplitude buffer does not match qubit count")

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n_qubits)


def _check_size(n: int) -> None:
    if n < 1:
        raise ValueError("need at least one qubit")
    if n > ENUMERATION_CAP:
        raise CapacityExceeded(f"{n} qubits exceed the dense-simulation cap {ENUMERATION_CAP}")


def init_plus(n: int) -> StateVector:
    _check_size(n)
    return StateVector(n, np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


def init_basis(bits) -> StateVector:
    bits = np.asarray(bits)
    n = bits.size
    _check_size(n)
    amps = np.zeros(1 << n, dtype=complex)
    amps[int(sum(int(b) << q for q, b in enumerate(bits)))] = 1.0
    return StateVector(n, amps)


def init_product(states) -> StateVector:
    """Tensor product of single-qubit states, ``states[q]`` on qubit ``q``."""
    states = [np.asarray(s, dtype=complex) for s in states]
    if not states:
        raise ValueError("need at least one single-qubit state")
    _check_size(len(states))
    amps = np.ones(1, dtype=complex)
    for s in states:
        if s.shape != (2,) or abs(np.vdot(s, s).real - 1.0) > 1e-12:
            raise ValueError(f"not a normalised single-qubit state: {s}")
        # later qubits are more significant
        amps = np.kron(s, amps)
    return StateVector(len(states), amps)


class EnergyDiagonal:
    """Cached diagonal of an Ising Hamiltonian, without the offset.

    MaxCut-like instances have few distinct energy levels; the phase
    exponentials are then evaluated once per level and gathered.
    """

    def __init__(self, H: IsingHamiltonian):
        self.n_qubits = H.num_vertices
        self.offset = H.offset
        self.values = H.diagonal(include_offset=False)
        levels, inverse = np.unique(self.values, return_inverse=True)
        if levels.size <= self.values.size // 4:
            self.levels, self._inverse = levels, inverse
        else:
            self.levels, self._inverse = None, None

    def phases(self, gamma: float) -> np.ndarray:
        if self.levels is None:
            return np.exp(-1j * gamma * self.values)
        return np.exp(-1j * gamma * self.levels)[self._inverse]


def _diag_for(H: IsingHamiltonian, diagonal) -> EnergyDiagonal:
    if diagonal is None:
        diagonal = EnergyDiagonal(H)
    if diagonal.n_qubits != H.num_vertices:
        raise ValueError("diagonal does not match the Hamiltonian")
    return diagonal


def apply_phase_separator(state: StateVector, H: IsingHamiltonian, gamma: float, diagonal=None) -> StateVector:
    """Multiply by ``exp(-i gamma H)`` in place, dropping the offset's global phase.

    ``diagonal`` may carry a precomputed :class:`EnergyDiagonal` of ``H``.
    """
    if H.num_vertices != state.n_qubits:
        raise ValueError("Hamiltonian and state sizes differ")
    state.amplitudes *= _diag_for(H, diagonal).phases(gamma)
    return state


# qubits rotated together by one Kronecker-product matmul in apply_mixer
_MIXER_GROUP = 4


def apply_mixer(state: StateVector, beta: float) -> StateVector:
    """Apply ``exp(-i beta sum_q X_q)``, i.e. ``[[cos, -i sin], [-i sin, cos]]`` on every qubit."""
    c, s = np.cos(beta), -1j * np.sin(beta)
    u = np.array([[c, s], [s, c]])
    n = state.n_qubits
    amps = state.amplitudes
    q = 0
    while q < n:
        k = min(_MIXER_GROUP, n - q)
        m = u
        for _ in range(k - 1):
            m = np.kron(m, u)
        amps = np.matmul(m, amps.reshape(1 << (n - q - k), 1 << k, 1 << q)).reshape(-1)
        q += k
    state.amplitudes = amps
    return state


def expectation_energy(state: StateVector, H: IsingHamiltonian, diagonal=None) -> float:
    """``<psi|H|psi>`` including the offset."""
    if H.num_vertices != state.n_qubits:
        raise ValueError("Hamiltonian and state sizes differ")
    return float(state.probabilities() @ _diag_for(H, diagonal).values) + H.offset


def _apply_pauli(t: np.ndarray, n: int, q: int, p: str) -> np.ndarray:
    if p == "I":
        return t
    return np.moveaxis(np.tensordot(PAULIS[p], t, axes=([1], [n - 1 - q])), 0, n - 1 - q)


def pauli_expectation(state: StateVector, i: int, a: str, j: int, b: str) -> float:
    """``<sigma_i^a sigma_j^b>`` for Paulis ``a, b`` in ``"IXYZ"``."""
    if i == j:
        raise ValueError("pauli_expectation needs two distinct qubits")
    n = state.n_qubits
    t = state.tensor()
    out = _apply_pauli(_apply_pauli(t, n, i, a), n, j, b)
    val = np.vdot(t, out)
    assert abs(val.imag) < 1e-10, "Hermitian observable with complex expectation"
    return float(val.real)


def pauli_expectations(state: StateVector, i: int, j: int) -> dict[tuple[str, str], float]:
    return {ab: pauli_expectation(state, i, ab[0], j, ab[1]) for ab in PAULI_PAIRS}


def rdm_exact(state: StateVector, i: int, j: int) -> np.ndarray:
    """Two-qubit reduced density matrix, ordered ``|q_i q_j>`` with ``q_i`` outer."""
    if i == j:
        raise ValueError("rdm_exact needs two distinct qubits")
    n = state.n_qubits
    t = np.moveaxis(state.tensor(), [n - 1 - i, n - 1 - j], [0, 1]).reshape(4, -1)
    return t @ t.conj().T


def rdm_from_paulis(expvals) -> np.ndarray:
    """Rebuild ``rho = 1/4 sum_ab <s^a s^b> s^a (x) s^b`` from the 15 expectations.

    ``expvals`` is a mapping keyed by Pauli-letter pairs or a length-15
    sequence in :data:`PAULI_PAIRS` order; ``<II> = 1`` is implied.
    """
    if not isinstance(expvals, dict):
        vals = list(expvals)
        if len(vals) != 15:
            raise ValueError("need exactly 15 expectation values")
        expvals = dict(zip(PAULI_PAIRS, vals))
    rho = np.eye(4, dtype=complex)
    for (a, b), v in expvals.items():
        rho += v * np.kron(PAULIS[a], PAULIS[b])
    return rho / 4.0


def project_density(rho: np.ndarray) -> np.ndarray:
    """Clip negative eigenvalues and renormalise to unit trace."""
    rho = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    w /= w.sum()
    return (v * w) @ v.conj().T


def estimate_paulis(state: StateVector, i: int, j: int, shots: int, seed) -> dict[tuple[str, str], float]:
    """Shot-noise estimates of the 15 two-qubit Pauli expectations.

    Each product is measured in its own experiment of ``shots`` projective
    measurements. The product of two ``+-1`` outcomes is ``+1`` with
    probability ``(1 + <s^a s^b>)/2``, so the outcome count is drawn from that
    binomial directly.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    streams = np.random.SeedSequence(seed).spawn(len(PAULI_PAIRS))
    est = {}
    for ab, ss in zip(PAULI_PAIRS, streams):
        mean = pauli_expectation(state, i, ab[0], j, ab[1])
        p_plus = min(1.0, max(0.0, 0.5 * (1.0 + mean)))
        k = np.random.default_rng(ss).binomial(shots, p_plus)
        est[ab] = (2.0 * k - shots) / shots
    return est


def rdm_from_shots(state: StateVector, i: int, j: int, shots: int, seed) -> np.ndarray:
    """Shot-noise estimate of the block density matrix, projected to a valid state."""
    return project_density(rdm_from_paulis(estimate_paulis(state, i, j, shots, seed)))


def sample_bitstrings(state: StateVector, shots: int, seed) -> np.ndarray:
    """``shots`` i.i.d. measurement outcomes, one row of bits per shot."""
    if shots < 1:
        raise ValueError("shots must be positive")
    p = state.probabilities()
    p = p / p.sum()
    idx = np.random.default_rng(seed).choice(p.size, size=shots, p=p)
    return ((idx[:, None] >> np.arange(state.n_qubits)) & 1).astype(np.int8)


def dump_amplitudes(state: StateVector) -> str:
    """Text dump ``index real imag`` per line, for small debugging states."""
    if state.n_qubits > 10:
        raise CapacityExceeded("amplitude dumps are limited to 10 qubits")
    return "".join(f"{k} {a.real:.17g} {a.imag:.17g}\n" for k, a in enumerate(state.amplitudes))

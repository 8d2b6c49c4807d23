"""Real-space renormalization of an Ising Hamiltonian on a matched graph.

Every matched pair ``(i, j)`` is replaced by one effective qubit whose two
states are

* form ``"a"``: ``|0>_i |psi_0>_j`` and ``|1>_i |psi_1>_j`` (qubit ``i`` pinned),
* form ``"b"``: ``|psi_0>_i |0>_j`` and ``|psi_1>_i |1>_j`` (qubit ``j`` pinned).

Both forms keep ``Z_i``, ``Z_j`` and ``Z_i Z_j`` diagonal on the retained
subspace, so the projected Hamiltonian is again of Ising form. Under the
truncation each fine ``Z_q`` becomes ``a_q + b_q Z'_{k(q)}``; the effective
Hamiltonian is assembled from that affine table without ever forming the
isometry explicitly.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .ising import BlockPartition, IsingHamiltonian
from .statevector import ONE, ZERO

__all__ = [
    "BlockBasis",
    "CoarseMap",
    "eigh2",
    "build_basis_form_a",
    "build_basis_form_b",
    "choose_basis",
    "projection_error",
    "isometry_matrix",
    "coarse_grain_hamiltonian",
    "lift_bitstring",
    "lift_to_bits",
    "dense_isometry",
]

_TINY = 1e-12
_SWAP = np.eye(4)[[0, 2, 1, 3]]
_A0 = np.array([0.0, 1.0], dtype=complex)


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the leading non-negligible entry is real and >= 0."""
    lead = v[0] if abs(v[0]) >= _TINY else v[1]
    if abs(lead) == 0.0:
        return v
    return v * (abs(lead) / lead)


def eigh2(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a 2x2 Hermitian matrix.

    Returns ascending eigenvalues and the matching eigenvectors as columns,
    each phase-fixed by :func:`_fix_phase`. For a diagonal input with equal
    entries the columns are the computational basis in index order.
    """
    a, d = float(A[0, 0].real), float(A[1, 1].real)
    c = complex(A[0, 1])
    mean, half = 0.5 * (a + d), 0.5 * (a - d)
    r = float(np.hypot(half, abs(c)))
    vals = np.array([mean - r, mean + r])
    if abs(c) < _TINY * max(1.0, r):
        if a <= d:
            return np.array([a, d]), np.eye(2, dtype=complex)
        return np.array([d, a]), np.eye(2, dtype=complex)[:, ::-1].copy()
    lo = vals[0]
    # two equivalent null vectors of (A - lo); take the better conditioned one
    u = np.array([c, lo - a])
    w = np.array([lo - d, np.conj(c)])
    v0 = u if np.linalg.norm(u) >= np.linalg.norm(w) else w
    v0 = _fix_phase(v0 / np.linalg.norm(v0))
    v1 = _fix_phase(np.array([-np.conj(v0[1]), np.conj(v0[0])]))
    return vals, np.column_stack([v0, v1])


@dataclass(frozen=True)
class BlockBasis:
    """Two retained states of a block ``(i, j)``.

    ``psi0`` and ``psi1`` are the states of the free qubit conditioned on the
    pinned qubit being 0 and 1. ``score`` is ``||rho - P rho P||_F``.
    """

    form: str
    block: tuple[int, int]
    psi0: np.ndarray
    psi1: np.ndarray
    score: float

    @property
    def pinned(self) -> int:
        return self.block[0] if self.form == "a" else self.block[1]

    @property
    def free(self) -> int:
        return self.block[1] if self.form == "a" else self.block[0]

    @property
    def m(self) -> tuple[float, float]:
        """``<psi_c|Z|psi_c>`` for ``c = 0, 1``."""
        return tuple(float(abs(p[0]) ** 2 - abs(p[1]) ** 2) for p in (self.psi0, self.psi1))

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """``v0, v1`` as 4-vectors ordered ``|q_i q_j>``."""
        if self.form == "a":
            return np.kron(ZERO, self.psi0), np.kron(ONE, self.psi1)
        return np.kron(self.psi0, ZERO), np.kron(self.psi1, ONE)


def isometry_matrix(basis: BlockBasis) -> np.ndarray:
    """The 4x2 isometry with columns ``v0, v1``."""
    return np.column_stack(basis.vectors())


def projection_error(rho: np.ndarray, omega: np.ndarray) -> float:
    P = omega @ omega.conj().T
    return float(np.linalg.norm(rho - P @ rho @ P))


def _conditional_states(rho: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A00, A01, A11 = rho[:2, :2], rho[:2, 2:], rho[2:, 2:]
    d0, U0 = eigh2(A00)
    d1, U1 = eigh2(A11)
    U, s, Vh = np.linalg.svd(U0.conj().T @ A01 @ U1)
    b0 = _fix_phase(U[:, 0])
    b1 = _fix_phase(Vh[0, :].conj())
    gap = s[0] - s[1]
    out = []
    for d, b, Uc in ((d0, b0, U0), (d1, b1, U1)):
        t = (d[1] - d[0]) * _A0 + gap * b
        nrm = np.linalg.norm(t)
        # fully degenerate block: keep the larger diagonal eigenvector
        t = _A0 if nrm < _TINY else t / nrm
        out.append(Uc @ t)
    return out[0], out[1]


def build_basis_form_a(rho: np.ndarray, block: tuple[int, int] = (0, 1)) -> BlockBasis:
    """Form (a) basis from a block density matrix ordered ``|q_i q_j>``.

    The diagonal 2x2 blocks of ``rho`` (conditioned on qubit ``i``) are
    diagonalised, the off-diagonal block is rotated into those eigenbases and
    decomposed by SVD, and each conditional state is the normalised
    combination ``(d_hi - d_lo) a0 + (s0 - s1) b`` rotated back, where ``a0``
    selects the larger conditional eigenvalue and ``b`` is the leading
    singular vector on that side.
    """
    rho = np.asarray(rho, dtype=complex)
    psi0, psi1 = _conditional_states(rho)
    basis = BlockBasis("a", tuple(block), psi0, psi1, 0.0)
    return _with_score(basis, rho)


def build_basis_form_b(rho: np.ndarray, block: tuple[int, int] = (0, 1)) -> BlockBasis:
    """Form (b): form (a) on the swapped block, with qubit ``j`` pinned."""
    rho = np.asarray(rho, dtype=complex)
    psi0, psi1 = _conditional_states(_SWAP @ rho @ _SWAP)
    basis = BlockBasis("b", tuple(block), psi0, psi1, 0.0)
    return _with_score(basis, rho)


def _with_score(basis: BlockBasis, rho: np.ndarray) -> BlockBasis:
    score = projection_error(rho, isometry_matrix(basis))
    return BlockBasis(basis.form, basis.block, basis.psi0, basis.psi1, score)


def choose_basis(rho, round_index: int, prev_form: str | None = None, block=(0, 1)) -> BlockBasis:
    """Smaller-error form in round 0 (ties go to ``"a"``), then alternate."""
    if round_index == 0 or prev_form is None:
        a = build_basis_form_a(rho, block)
        b = build_basis_form_b(rho, block)
        return b if b.score < a.score - _TINY else a
    if prev_form == "a":
        return build_basis_form_b(rho, block)
    return build_basis_form_a(rho, block)


@dataclass(frozen=True)
class CoarseMap:
    """A partition together with one basis per block.

    ``offsets[q]`` and ``scales[q]`` give ``Z_q -> offsets[q] + scales[q] Z'_{relabel[q]}``.
    """

    partition: BlockPartition
    bases: tuple[BlockBasis, ...]

    def __post_init__(self):
        if len(self.bases) != len(self.partition.blocks):
            raise ValueError("need exactly one basis per block")
        for blk, basis in zip(self.partition.blocks, self.bases):
            if tuple(blk) != tuple(basis.block):
                raise ValueError(f"basis for {basis.block} given for block {blk}")

    @property
    def n_fine(self) -> int:
        return self.partition.n

    @property
    def n_coarse(self) -> int:
        return self.partition.n_coarse

    def affine_table(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.zeros(self.n_fine)
        b = np.ones(self.n_fine)
        for basis in self.bases:
            m0, m1 = basis.m
            a[basis.free] = 0.5 * (m0 + m1)
            b[basis.free] = 0.5 * (m0 - m1)
        return a, b

    def to_dict(self) -> dict:
        a, b = self.affine_table()
        cplx = lambda v: [[float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")] for z in v]
        return {
            "n": self.n_fine,
            "blocks": [list(blk) for blk in self.partition.blocks],
            "unmatched": list(self.partition.unmatched),
            "bases": [
                {"form": bs.form, "psi0": cplx(bs.psi0), "psi1": cplx(bs.psi1), "score": float(f"{bs.score:.17g}")}
                for bs in self.bases
            ],
            "affine": [[float(f"{x:.17g}"), float(f"{y:.17g}")] for x, y in zip(a, b)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "CoarseMap":
        d = json.loads(text)
        part = BlockPartition(int(d["n"]), tuple(tuple(b) for b in d["blocks"]), tuple(d["unmatched"]))
        vec = lambda v: np.array([complex(re, im) for re, im in v])
        bases = tuple(
            BlockBasis(bd["form"], tuple(blk), vec(bd["psi0"]), vec(bd["psi1"]), float(bd["score"]))
            for blk, bd in zip(part.blocks, d["bases"])
        )
        return cls(part, bases)


def coarse_grain_hamiltonian(H: IsingHamiltonian, cmap: CoarseMap) -> IsingHamiltonian:
    """Effective Hamiltonian ``W^dag H W`` in closed form."""
    if H.num_vertices != cmap.n_fine:
        raise ValueError("coarse map does not cover the Hamiltonian")
    label = cmap.partition.relabel
    a, b = cmap.affine_table()
    blocks_of = {tuple(bs.block): bs for bs in cmap.bases}
    nc = cmap.n_coarse
    offset = H.offset
    fields = np.zeros(nc)
    couplings: dict[tuple[int, int], float] = {}
    for (p, q), J in H.couplings.items():
        k, l = label[p], label[q]
        if k == l:
            # <v_c| Z_pinned Z_free |v_c> = (+1, -1)[c] * m_c
            m0, m1 = blocks_of[(p, q)].m
            g0, g1 = m0, -m1
            offset += J * 0.5 * (g0 + g1)
            fields[k] += J * 0.5 * (g0 - g1)
            continue
        offset += J * a[p] * a[q]
        fields[l] += J * a[p] * b[q]
        fields[k] += J * b[p] * a[q]
        key = (k, l) if k < l else (l, k)
        couplings[key] = couplings.get(key, 0.0) + J * b[p] * b[q]
    for q, h in enumerate(H.fields):
        if h != 0.0:
            offset += h * a[q]
            fields[label[q]] += h * b[q]
    return IsingHamiltonian(nc, couplings, fields, offset)


def lift_bitstring(coarse_bits, cmap: CoarseMap) -> list[np.ndarray]:
    """Per-qubit states of ``W |coarse_bits>``."""
    coarse_bits = np.asarray(coarse_bits)
    if coarse_bits.shape != (cmap.n_coarse,):
        raise ValueError(f"need {cmap.n_coarse} coarse bits")
    states: list[np.ndarray | None] = [None] * cmap.n_fine
    for k, bs in enumerate(cmap.bases):
        c = int(coarse_bits[k])
        states[bs.pinned] = (ZERO if c == 0 else ONE).copy()
        states[bs.free] = (bs.psi0 if c == 0 else bs.psi1).copy()
    nb = len(cmap.bases)
    for k, u in enumerate(cmap.partition.unmatched, start=nb):
        states[u] = (ZERO if coarse_bits[k] == 0 else ONE).copy()
    return states


def lift_to_bits(states) -> np.ndarray:
    """Most probable computational bit of each qubit (ties resolve to 0)."""
    return np.array([0 if abs(s[0]) ** 2 >= abs(s[1]) ** 2 else 1 for s in states], dtype=np.int8)


def dense_isometry(cmap: CoarseMap) -> np.ndarray:
    """Explicit ``2**n_fine x 2**n_coarse`` matrix of ``W``; for small oracle checks only."""
    n, nc = cmap.n_fine, cmap.n_coarse
    if n > 12:
        raise ValueError("dense isometry limited to 12 fine qubits")
    omegas = [isometry_matrix(bs) for bs in cmap.bases]
    W = np.zeros((1 << n, 1 << nc), dtype=complex)
    fine = (np.arange(1 << n)[:, None] >> np.arange(n)) & 1
    for col in range(1 << nc):
        cb = (col >> np.arange(nc)) & 1
        amp = np.ones(1 << n, dtype=complex)
        for k, ((i, j), om) in enumerate(zip(cmap.partition.blocks, omegas)):
            amp *= om[2 * fine[:, i] + fine[:, j], cb[k]]
        for k, u in enumerate(cmap.partition.unmatched, start=len(omegas)):
            amp *= fine[:, u] == cb[k]
        W[:, col] = amp
    return W

"""
Two-state bases for a pair of qubits
====================================

A matched pair (i, j) keeps two states. In form (a) qubit i is pinned to
|0> or |1> and qubit j carries a conditional state; form (b) swaps the roles.
Both keep Z_i, Z_j and Z_i Z_j diagonal, so coarse-graining an Ising
Hamiltonian gives another Ising Hamiltonian.
"""
import numpy as np

from mqaoa import build_basis_form_a, build_basis_form_b, choose_basis
from mqaoa.oracles import random_density
from mqaoa.rg import isometry_matrix

np.set_printoptions(precision=3, suppress=True)

bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
for name, rho in [("|00>", np.diag([1.0, 0, 0, 0])), ("Bell", np.outer(bell, bell)), ("I/4", np.eye(4) / 4)]:
    a, b = build_basis_form_a(rho), build_basis_form_b(rho)
    print(f"{name:5s} score a = {a.score:.4f}, score b = {b.score:.4f}")

# a noisy mixed state: the first round keeps the better form
rho = random_density(np.random.default_rng(3), rank=3)
basis = choose_basis(rho, round_index=0)
print("chosen form", basis.form, "pinned qubit", basis.pinned, "score", round(basis.score, 4))
print("psi0 =", basis.psi0, " psi1 =", basis.psi1)
print("<Z> of the free qubit given the pinned bit:", np.round(basis.m, 4))

# the retained states form an isometry
om = isometry_matrix(basis)
print("omega^dag omega =\n", om.conj().T @ om)

# later rounds alternate the form of each block
print("round 1 after form a:", choose_basis(rho, 1, "a").form)

"""A short walk through (max,+) matrix arithmetic.

    python demos/algebra_tour.py
"""

import numpy as np

from maxplus_fj.algebra import EPS, diag, identity, madd, mp_power, norm, oplus, otimes, phi, psi
from maxplus_fj.network import compile_network, diamond
from maxplus_fj.service import Deterministic

np.set_printoptions(precision=2)

A = np.array([[0.0, 3.0], [EPS, 1.0]])
B = np.array([[2.0, EPS], [1.0, 0.0]])

print("A ⊕ B (entrywise max)\n", oplus(A, B))
print("A ⊗ B (max over k of a_ik + b_kj)\n", otimes(A, B))
print("A + B (ordinary sum, ε absorbs)\n", madd(A, B))
print("identity is neutral for ⊗:", np.array_equal(otimes(A, identity(2)), A))
print("norm of A is its largest entry:", norm(A))

# The support matrix of an acyclic network is nilpotent: powers past the longest path vanish.
net = compile_network(diamond([Deterministic(1.0)] * 4))
G = net.support
print(f"\ndiamond network, longest path p = {net.p}")
for q in range(net.p + 2):
    finite = np.isfinite(mp_power(G, q)).sum()
    print(f"  G^{q}: {finite} finite entries")

D = diag([1.0, 2.0, 0.5, 1.5])
print("\nD ⊗ (G ⊗ D)^1\n", phi(D, G, 1))
print("G^1 ⊗ D ⊗ G^1\n", psi(G, D, 1, 1))

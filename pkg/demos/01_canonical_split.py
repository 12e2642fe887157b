"""Split a single contraction into its unitary and c.n.u. parts."""

import numpy as np

from twistwold import canonical_decompose, chain_unitary_part, principal_angles
from twistwold.zoo import planted_contraction

# a diagonal contraction: two unimodular entries, two strictly inside the disk
T = np.diag([np.exp(0.3j), -1, 0.5, 0.2j])
split = canonical_decompose(T)
print("unitary part dim:", split.unitary_space.dim)
print("c.n.u. part dim: ", split.cnu_space.dim)

# a Jordan block at eigenvalue 1 has norm > 1; scale it into a contraction
J = 0.5 * (np.eye(3) + np.eye(3, k=-1))
print("Jordan block unitary part dim:", canonical_decompose(J).unitary_space.dim)

# planted instance: a Haar-rotated unitary block next to c.n.u. blocks
p = planted_contraction(seed=3)
split = canonical_decompose(p.T)
print(f"planted dim {p.T.shape[0]}, blocks {list(p.blocks)}")
print("angles to planted unitary part:", principal_angles(split.unitary_space, p.unitary_space))

# the intersection-of-kernels formula, truncated, agrees with the fixed point
chain = chain_unitary_part(p.T, m_cap=2 * p.T.shape[0])
print("chain formula dim:", chain.dim, "max angle:", principal_angles(chain, split.unitary_space).max(initial=0))

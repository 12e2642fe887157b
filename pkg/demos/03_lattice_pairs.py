"""Isometric pairs on the index lattice: exact classification, then a
cross-check against dense decomposition of a truncated window."""

import math

from twistwold import classify_index, slice_dimensions, verify_lattice_relations
from twistwold.lattice import dense_oracle_agreement
from twistwold.zoo import hardy_pair_DU

# T1 = M_z1 and T2 = M_z2 times a phase exp(i theta m1); twist exp(-i theta)
t = hardy_pair_DU(1, 1, "phase", theta=2 * math.pi / 5)
print("relations hold on window 8:", verify_lattice_relations(t, 8).passed)

c = classify_index(t, (2, 3))
print("e_(2,3):", c.label, "path", c.path, "residue", c.residue)
print("slice counts on window 8:", slice_dimensions(t, 8).counts)

# bilateral mode: extra Z coordinate, the twist shifts it
b = hardy_pair_DU(1, 1, "bilateral")
print("bilateral counts on window 4:", slice_dimensions(b, 4).counts)

# dense decomposition of the truncated window, read only on interior indices
a = dense_oracle_agreement(t, 8, 3)
print(f"dense oracle agreement: {a.agreed}/{a.checked}")

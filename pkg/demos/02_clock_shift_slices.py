"""Decompose twisted pairs built from clock and shift matrices."""

from twistwold import decompose
from twistwold.zoo import PlantedSpec, clock_shift_tuple, direct_sum, planted_tuple

# C S = w S C with w = exp(2 pi i / d); the twist is w times the identity
pure = clock_shift_tuple(3, scales=(0.5, 0.7))
unit = clock_shift_tuple(3, scales=(1, 1))
print("scaled pair:  ", decompose(pure).dims)
print("unitary pair: ", decompose(unit).dims)
print("direct sum:   ", decompose(direct_sum(unit, pure)).dims)

# planted pair with block dims in binary-counter order {}, {1}, {2}, {1,2}
t, truth = planted_tuple(PlantedSpec(2, (2, 3, 1, 2), seed=8))
r = decompose(t)
for s in r.slices:
    print(f"slice {s.label}: dim {s.dim}")
print("diagnostics:", {k: r.diagnostics[k] for k in ("dim_sum", "orthogonality", "completeness")})

"""A pair that satisfies the forward relation but not the adjoint one."""

from twistwold.lattice import dense_tuple, lattice_lemma_check, verify_lattice_relations
from twistwold.twisted import lemma_commutation_report
from twistwold.zoo import counterexample_Br

t = counterexample_Br(1)
rep = verify_lattice_relations(t, 6)
for name in ("forward", "adjoint"):
    chk = rep.get(name, 1, 2)
    print(f"{name}: {chk.failures} failures of {chk.checked}, first at {chk.first_counterexample}")

# the commutators that the relations would force are nonzero here
print("exact lattice residuals:", {k: v for k, v in lattice_lemma_check(t, 6, 1, 1).items() if v})
dense = dense_tuple(t, 8, strict=False)[0]
print("dense max residual:", max(r.residual for r in lemma_commutation_report(dense, 1, 1)))

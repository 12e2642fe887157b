"""Twisted tuples of contractions: canonical and ``2^n`` decompositions,
with an exact lattice backend for monomial isometries."""

__version__ = "0.1.0"

from .canonical import (
    CanonicalSplit,
    WoldSplit,
    canonical_decompose,
    chain_unitary_part,
    ppi_unitary_part,
    unitary_part,
    wold_split_isometry,
)
from .errors import (
    ContainmentError,
    DimensionError,
    InadmissibleIndexError,
    NotAContractionError,
    NotAnIsometryError,
    ParseError,
    PreconditionError,
    ReductionError,
    TwistWoldError,
    VerificationError,
    WindowError,
)
from .lattice import (
    LatticeShape,
    LatticeTuple,
    MonomialOperator,
    SliceClassification,
    Weight,
    apply,
    apply_adjoint,
    classify_index,
    dense_tuple,
    densify,
    pair_isometry_labels,
    slice_dimensions,
    verify_lattice_relations,
    wandering_set,
)
from .multi import (
    DecompositionResult,
    classify_restrictions,
    decompose,
    pair_formula_subspaces,
    permuted_decompose_check,
)
from .operators import classify, defect_operator, off_residual, opnorm
from .subspace import (
    DEFAULT_TOL,
    SubspaceBasis,
    ToleranceProfile,
    complement_in,
    intersect,
    kernel_of,
    principal_angles,
    range_of,
)
from .twisted import (
    TwistedTuple,
    TwistFamily,
    lemma_commutation_report,
    reduction_check,
    twisted_tuple,
    verify_tuple,
)

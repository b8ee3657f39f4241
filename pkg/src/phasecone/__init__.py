"""Functions of positive type on phase space: Weyl quantization on a truncated
Fock space, twisted convolution, finite-sample Bochner testers and Gaussian
classical-noise semigroups."""

from .algebra import classical_convolve, involution_classical, involution_quantum, pairing, twisted_convolve
from .errors import (
    BadCovariance,
    CertificationError,
    DecayWarning,
    DimensionMismatch,
    GridMismatch,
    GridTooCoarse,
    InvalidDimension,
    NegativeTime,
    NotHermitian,
    OutOfGrid,
    PhaseconeError,
    TruncationError,
    TruncationWarning,
)
from .fock import (
    DensityState,
    FockOperator,
    certify,
    displacement,
    hs_inner,
    min_eigenvalue_hermitian,
    op_adjoint,
    op_product,
    op_trace,
    purity,
    state_cat,
    state_coherent,
    state_fock,
    state_maximally_mixed,
    state_thermal,
    state_vacuum,
)
from .phase import ComplexField, PhaseGrid, PhasePoint, grid_integral, l2_norm, symplectic_form, weyl_multiplier
from .positivity import (
    PSDReport,
    SampleSet,
    bochner_roundtrip_classical,
    bochner_roundtrip_empirical,
    classical_gram,
    hadamard_product,
    integral_form_test_classical,
    integral_form_test_quantum,
    pd_test_classical,
    pd_test_quantum,
    quantum_gram,
    standard_sample_sets,
)
from .semigroups import (
    GaussianSemigroupParams,
    TwirlingQuadrature,
    cq_apply,
    gaussian_char,
    intertwine_verify,
    purity_from_char,
    twirl_apply,
)
from .transforms import (
    CharFunction,
    WignerField,
    char_function,
    dequantize,
    expectation,
    quantize,
    symplectic_fourier,
    weyl_symbol,
    wigner_from_state,
)

__version__ = "0.1.0"

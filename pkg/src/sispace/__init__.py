"""Numerical toolkit for finitely generated shift-invariant spaces.

Lattices and their duals, generator families given by their Fourier
transforms, Gramian fields periodized over dual lattices, frame and Riesz
classification from the sampled spectrum, extra-invariance tests, and
divergence diagnostics for fractional Sobolev seminorms.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigInvalid,
    EmptyField,
    InsufficientData,
    IoFailure,
    ModeUnsupported,
    NonHermitianInput,
    NonIntegerIndex,
    NotNested,
    PreconditionUnmet,
    SingularBasis,
    SispaceError,
    TailBoundUnattainable,
    UnknownExample,
    ZeroFrequency,
)
from .generators import (  # noqa: E402
    BSpline,
    BumpFourier,
    BumpTime,
    Gaussian,
    GeneratorSet,
    IndicatorBox,
    Tabulated,
)
from .lattice import Lattice, coset_reps, index, integer_lattice  # noqa: E402
from .periodization import GramianField, bracket_product, gramian_field  # noqa: E402
from .spectral import classify, gamma_frame_check, invariance_test, min_generators  # noqa: E402

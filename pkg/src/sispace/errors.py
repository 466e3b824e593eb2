"""Exception hierarchy.

Every error carries a short machine-readable ``code`` so reports can record
per-task failures without string matching.
"""

from __future__ import annotations


class SispaceError(Exception):
    code = "error"


class SingularBasis(SispaceError, ValueError):
    code = "singular_basis"


class NotNested(SispaceError, ValueError):
    code = "not_nested"


class NonIntegerIndex(SispaceError, ValueError):
    code = "non_integer_index"


class TailBoundUnattainable(SispaceError, ValueError):
    code = "tail_bound_unattainable"


class NonHermitianInput(SispaceError, ValueError):
    code = "non_hermitian_input"


class EmptyField(SispaceError, ValueError):
    code = "empty_field"


class PreconditionUnmet(SispaceError, RuntimeError):
    code = "precondition_unmet"


class ModeUnsupported(SispaceError, ValueError):
    code = "mode_unsupported"


class InsufficientData(SispaceError, ValueError):
    code = "insufficient_data"


class ZeroFrequency(SispaceError, ValueError):
    code = "zero_frequency"


class ConfigInvalid(SispaceError, ValueError):
    code = "config_invalid"

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnknownExample(SispaceError, KeyError):
    code = "unknown_example"


class IoFailure(SispaceError, OSError):
    code = "io_failure"

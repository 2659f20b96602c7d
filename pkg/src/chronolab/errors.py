"""Exception hierarchy shared by every chronolab module."""

from __future__ import annotations


class ChronolabError(Exception):
    """Base class; ``failure_id`` is the machine-parseable tag the CLI prints."""

    failure_id = "chronolab.error"


class InvalidParameter(ChronolabError, ValueError):
    failure_id = "spectra.invalid_parameter"


class NotStrictlyIncreasing(ChronolabError, ValueError):
    failure_id = "spectra.not_strictly_increasing"

    def __init__(self, index: int):
        super().__init__(f"eigenvalue at index {index} does not exceed its predecessor")
        self.index = index


class ZeroEigenvalue(ChronolabError, ValueError):
    failure_id = "spectra.zero_eigenvalue"

    def __init__(self, index: int):
        super().__init__(f"zero eigenvalue at index {index} (enable zero_mode to allow it)")
        self.index = index


class IndexOutOfRange(ChronolabError, IndexError):
    failure_id = "spectra.index_out_of_range"


class PreconditionViolation(ChronolabError, ValueError):
    failure_id = "precondition"


class BoundScanMismatch(ChronolabError, ArithmeticError):
    """Raised when a finite scan beats the analytic argmax of a bound constant."""

    failure_id = "conditions.bound_scan_mismatch"


class WrongBuilder(ChronolabError, ValueError):
    failure_id = "timeop.wrong_builder"


class NoTailBound(ChronolabError):
    """No rigorous tail bound exists; the finite image is still attached."""

    failure_id = "timeop.no_tail_bound"

    def __init__(self, message: str, image=None):
        super().__init__(message)
        self.image = image


class EmptySubspace(ChronolabError, ValueError):
    failure_id = "ccr.empty_subspace"


class InvalidGenerator(ChronolabError, ValueError):
    failure_id = "ccr.invalid_generator"


class NotInCommutatorDomain(ChronolabError, ValueError):
    failure_id = "ccr.not_in_commutator_domain"


class NumericalFailure(ChronolabError, ArithmeticError):
    failure_id = "sa.numerical_failure"


class InvalidProbeShape(ChronolabError, ValueError):
    failure_id = "sa.invalid_probe_shape"


class QuadratureUnderResolved(ChronolabError, ArithmeticError):
    failure_id = "kernel.quadrature_under_resolved"


class ConfigError(ChronolabError, ValueError):
    """Config parse/validation failure; ``location`` names the offending key."""

    failure_id = "config.invalid"

    def __init__(self, location: str, message: str):
        super().__init__(f"{location} {message}" if location else message)
        self.location = location

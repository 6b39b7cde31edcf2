"""Exception hierarchy shared by the library and the command layer."""

from typing import Optional, Tuple


class HarmonicLatticeError(Exception):
    """Base class for every error raised by this package."""


class SpecError(HarmonicLatticeError, ValueError):
    """The coupling specification or its partition is not usable."""


class NotSymmetric(SpecError):
    def __init__(self, lag: Tuple[int, ...], value: float, mirrored: float):
        self.lag = lag
        super().__init__(
            f"Coupling is not symmetric: V{list(lag)} = {value} but "
            f"V{[-k for k in lag]} = {mirrored}"
        )


class NotPositive(SpecError):
    """Some circulant eigenvalue is at or below the positivity tolerance.

    The Hamiltonian has no normalizable ground state at this size; callers
    sweeping sizes should perturb N.
    """

    def __init__(self, mode: Tuple[int, ...], value: float, threshold: float):
        self.mode = mode
        self.value = value
        super().__init__(
            f"Eigenvalue lambda_{list(mode)} = {value:.3e} is not above the "
            f"positivity threshold {threshold:.3e}"
        )


class RangeTooLarge(SpecError):
    """Coupling range does not fit the lattice (2R - 1 > N on some axis)."""


class TooLarge(SpecError):
    """A dense representation was requested above the configured cap."""


class BadPartition(SpecError):
    """Empty, full or malformed block."""


class UnsupportedDimension(SpecError):
    """Operation is only defined for a different lattice dimension."""


class SpecSourceError(SpecError):
    """A spec document or command line did not describe exactly one valid spec."""


class NumericalIntegrityError(HarmonicLatticeError):
    """A computed quantity violated an identity it must satisfy."""


class IllConditionedRoots(NumericalIntegrityError):
    """Unit-circle roots could not be clustered unambiguously."""


class SpectrumBelowOne(NumericalIntegrityError):
    def __init__(self, smallest: float, floor: float):
        self.smallest = smallest
        super().__init__(
            f"mu-spectrum reaches {smallest:.12f} < 1 - {floor:.1e}; the kernel is broken"
        )


class FactorizationError(NumericalIntegrityError):
    """Cholesky factorization of a block that must be positive definite failed."""


class InsufficientDecayData(NumericalIntegrityError):
    def __init__(self, usable: int, required: int, window: Optional[Tuple[int, int]] = None):
        self.usable = usable
        super().__init__(
            f"Only {usable} usable lags above the noise floor (need {required})"
            + (f" in window {window}" if window else "")
        )

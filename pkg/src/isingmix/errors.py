"""Exception hierarchy shared by all isingmix modules."""


class IsingMixError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(IsingMixError, ValueError):
    """Shapes, ranges or indices that do not fit together."""


class InvalidModelError(IsingMixError, ValueError):
    """Mixing coefficients or component parameters that violate model invariants."""


class CapacityError(IsingMixError):
    """Exhaustive enumeration requested for a state space that is too large."""


class DegenerateWeightsError(IsingMixError, ValueError):
    """All sample weights are zero."""


class DegenerateSampleError(IsingMixError):
    """A sample has zero probability under every mixture component."""


class InvalidStartError(IsingMixError, ValueError):
    """Optimizer objective is not finite at the starting point."""


class FormatError(IsingMixError, ValueError):
    """Malformed input file (FASTA, dataset, model, CSV)."""


class NumericOverflowError(IsingMixError, ArithmeticError):
    """A potential ratio overflowed; carries the offending (sample, site, component)."""

    def __init__(self, b, n, k, message=None):
        self.b, self.n, self.k = int(b), int(n), int(k)
        if message is None:
            message = f"non-finite flip ratio at sample {self.b}, site {self.n}, component {self.k}"
        super().__init__(message)

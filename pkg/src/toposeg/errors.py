"""Exception types shared across the toolkit.

The CLI maps these onto exit codes, so the split matters: file/container
problems are FormatError subclasses, operand incompatibilities are
ShapeError, and gradient-probe rejections are ProbeTieError.
"""


class ToposegError(Exception):
    """Base class for all toolkit errors."""


class FormatError(ToposegError):
    """Malformed file container: bad magic, bad header, bad dimensions."""


class TruncationError(FormatError):
    """Payload shorter than the header declares."""


class ValueRangeError(FormatError):
    """Likelihood value outside [0, 1] or non-finite."""


class LabelRangeError(FormatError):
    """Mask label exceeds the declared category count."""


class CorpusError(ToposegError):
    """Evaluation corpus is empty or has unpaired files."""


class ShapeError(ToposegError):
    """Operands have incompatible shapes."""


class CategoryError(ToposegError):
    """Category index outside 1..L."""


class ProbeTieError(ToposegError):
    """Finite-difference probe sits next to a subgradient tie."""

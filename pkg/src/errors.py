"""Exception types raised by the codecs, the vector engine and the kernels."""


class DcsrError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(DcsrError, ValueError):
    """A file or encoded container is malformed or internally inconsistent."""


class FormatLimitError(DcsrError, ValueError):
    """A matrix does not fit the field widths of the requested format."""


class ConstraintViolationError(DcsrError, ValueError):
    """An encoding violates the delta, offset or intercept bounds."""


class EngineFault(DcsrError, RuntimeError):
    """The vector engine hit an illegal access or an arithmetic overflow."""


class OracleMismatchError(DcsrError, AssertionError):
    """A kernel produced output that differs from the dense oracle."""

    def __init__(self, kernel: str, index: tuple, expected: int, actual: int):
        self.kernel = kernel
        self.index = index
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"{kernel}: output {index} is {actual}, oracle says {expected}"
        )

"""Exception types shared by every module."""


class ShiftconvError(Exception):
    """Base class."""


class PoleError(ShiftconvError, ArithmeticError):
    pass


class DomainError(ShiftconvError, ValueError):
    pass


class BranchError(DomainError):
    pass


class ConvergenceError(ShiftconvError, ArithmeticError):
    pass


class ContourError(ShiftconvError, ValueError):
    pass


class MeshError(ConvergenceError):
    pass


class TruncationError(ConvergenceError):
    pass


class ParseError(ShiftconvError, ValueError):
    def __init__(self, msg, lineno=None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {msg}" if lineno is not None else msg)


class GapError(ShiftconvError, LookupError):
    pass


class ResourceError(ShiftconvError, MemoryError):
    pass


class NoDataError(ShiftconvError, LookupError):
    pass


class UnsupportedError(ShiftconvError, NotImplementedError):
    pass


class InsufficientDataError(ShiftconvError, ValueError):
    pass

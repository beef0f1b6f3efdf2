"""Exception hierarchy shared by every twirlsim module."""


class TwirlSimError(Exception):
    """Base class for all errors raised by twirlsim."""


# linear algebra
class NotHermitian(TwirlSimError, ValueError):
    pass


class SingularInput(TwirlSimError, ValueError):
    pass


# models
class InvalidParams(TwirlSimError, ValueError):
    pass


class TooManyQubits(TwirlSimError, ValueError):
    pass


class InvalidLabel(TwirlSimError, ValueError):
    """A Pauli label contains a character outside ``IXYZ``."""

    def __init__(self, label: str, token: str):
        super().__init__(f"invalid Pauli label {label!r}: unknown token {token!r}")
        self.label = label
        self.token = token


# statevector simulation
class DimensionMismatch(TwirlSimError, ValueError):
    pass


class NotUnitary(TwirlSimError, ValueError):
    pass


class BadTargets(TwirlSimError, ValueError):
    pass


class ControlOverlap(BadTargets):
    pass


class ZeroProbability(TwirlSimError, ArithmeticError):
    """A post-selected outcome has (numerically) zero probability."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"step {step}: {message}")
        self.step = step


class EmptyBin(TwirlSimError, ArithmeticError):
    """A conditional-measurement bin received no shots."""

    def __init__(self, message: str, bin_value: int):
        super().__init__(message)
        self.bin_value = bin_value


# twirling and estimation
class ConvergenceFailure(TwirlSimError, RuntimeError):
    def __init__(self, message: str, variance: float):
        super().__init__(f"{message} (achieved variance {variance:.3e})")
        self.variance = variance


class RankDeficient(TwirlSimError, ValueError):
    pass


class NotOrthogonal(TwirlSimError, ValueError):
    pass


class MissingStates(TwirlSimError, ValueError):
    pass


class BadIndex(TwirlSimError, IndexError):
    pass


# command line
class ConfigError(TwirlSimError, ValueError):
    pass


class PipelineError(TwirlSimError, RuntimeError):
    """Wraps a pipeline failure with the stage where it happened."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause

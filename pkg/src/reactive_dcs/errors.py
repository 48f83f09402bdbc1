"""Exception hierarchy shared by every subsystem."""


class ReactiveError(Exception):
    """Base class for all errors raised by the package."""


class ValidationError(ReactiveError):
    pass


class UnboundFlow(ReactiveError):
    def __init__(self, name, message=None):
        self.name = name
        super().__init__(message or f"unbound flow {name!r}")


class TypeMismatch(ReactiveError):
    pass


class InstantaneousCycle(ValidationError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("instantaneous dependency cycle: " + " -> ".join(self.cycle))


class WiringError(ValidationError):
    pass


class StateBudgetExceeded(ReactiveError):
    pass


class NonFiniteDomain(ReactiveError):
    pass


class Unsynthesizable(ReactiveError):
    """No controller can keep the contract; `witness` lists uncontrollable inputs."""

    def __init__(self, message, witness=()):
        self.witness = list(witness)
        super().__init__(message)


class OutsideWinningSet(ReactiveError):
    pass


class ConfigError(ReactiveError):
    pass


class UnknownEvent(ReactiveError):
    pass


class UnknownCommand(ReactiveError):
    pass


class DslError(ReactiveError):
    """Parse-time error carrying a 1-based source position."""

    kind = "error"

    def __init__(self, message, line=1, col=1):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"{line}:{col}: {message}")


class DslSyntaxError(DslError):
    kind = "syntax"


class UnknownFlow(DslError):
    kind = "unknown-flow"


class DslTypeError(DslError):
    kind = "type"

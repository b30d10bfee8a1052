"""
Exception hierarchy for the attack lab.

Library code raises these; the entrypoints (main.py, api.py) translate them
into exit codes or JSON error bodies.
"""


class AttackLabError(Exception):
    """Base class for every error raised by the attack lab."""


class NotSPD(AttackLabError):
    """A matrix expected to be symmetric positive-definite is not."""


class ZeroVector(AttackLabError):
    """A vector that must be non-zero has zero norm."""


class IndexOutOfRange(AttackLabError):
    """An arm index falls outside the arm set."""


class ExhaustedTries(AttackLabError):
    """Rejection sampling gave up before finding an acceptable environment."""

    def __init__(self, tries):
        super().__init__(f"no attackable environment found after {tries} tries")
        self.tries = tries


class ParseError(AttackLabError):
    """An instance or config file could not be parsed."""

    def __init__(self, message, path=None, line=None, field=None):
        location = []
        if path is not None:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = ", ".join(location) + ": " if location else ""
        super().__init__(f"{prefix}{message}")
        self.path = path
        self.line = line
        self.field = field


class InvalidEnvironment(AttackLabError):
    """An environment violates one of its structural invariants."""


class ZeroTarget(AttackLabError):
    """The target arm's context vector is zero, so no projection exists."""


class InfeasibleNorm(AttackLabError):
    """The parallel component already lies outside the unit ball."""


class WrongDimension(AttackLabError):
    """A solver was handed a problem of the wrong reduced dimension."""


class CertificateError(AttackLabError):
    """A solver returned a certificate that fails the feasibility check."""


class AdversaryStateCorrupt(AttackLabError):
    """The two-stage adversary cannot form its estimate at the stage boundary."""


class ConfigError(AttackLabError):
    """An experiment configuration is invalid."""

    def __init__(self, message, field=None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field

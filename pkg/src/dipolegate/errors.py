"""Exception hierarchy.

The CLI maps these onto exit codes: ``ConfigError`` -> 1, ``PhysicsError``
-> 2, ``DegenerateGate`` -> 3.
"""


class DipoleGateError(Exception):
    """Base class for all package errors."""


class ConfigError(DipoleGateError, ValueError):
    """Invalid input data: unknown keys, bad units, broken invariants."""


class UnknownLabel(ConfigError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its message otherwise
        return str(self.args[0]) if self.args else ""


class BasisMismatch(ConfigError):
    pass


class ZeroVector(DipoleGateError, ValueError):
    pass


class InvalidTime(DipoleGateError, ValueError):
    pass


class EmptyTrajectory(DipoleGateError, ValueError):
    pass


class InvalidSigma(ConfigError):
    pass


class PhysicsError(DipoleGateError):
    """The requested physical configuration cannot produce a gate."""


class ZeroRate(PhysicsError, ZeroDivisionError):
    """Dipole-dipole rate vanishes (magic angle, zero dipole, zero field)."""


class RestrictionViolation(PhysicsError, ValueError):
    """Level structure violates a rotational-scheme requirement."""

    def __init__(self, clause: int, message: str):
        super().__init__(f"restriction ({clause}) violated: {message}")
        self.clause = clause


class NonFiniteAmplitude(PhysicsError, FloatingPointError):
    pass


class DegenerateGate(DipoleGateError, RuntimeError):
    """A computational basis state did not return to itself."""


class BlockadeRegimeWarning(UserWarning):
    """Interaction shift is not large compared to the Rabi frequency."""

from __future__ import annotations

from typing import Tuple


class PileupError(Exception):
    """Base class for every error raised by pileupdens."""


class DomainError(PileupError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class NumericError(PileupError, ArithmeticError):
    """A numerical procedure failed (no convergence, vanishing transform)."""


class ConfigError(PileupError, ValueError):
    """Malformed simulation, benchmark or command-line configuration."""


class InputError(PileupError, ValueError):
    """Unreadable or malformed user data."""


class ReplicateError(PileupError):
    """A simulation replicate failed; carries its index and seed so it can be rerun."""

    def __init__(self, index: int, entropy: Tuple[int, ...], cause: str):
        # positional args keep the exception picklable across worker processes
        super().__init__(index, tuple(entropy), cause)
        self.index = index
        self.entropy = tuple(entropy)
        self.cause = cause

    def __str__(self) -> str:
        return f"replicate {self.index} (seed {list(self.entropy)}) failed: {self.cause}"

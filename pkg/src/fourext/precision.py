"""Precision backend selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import _mp
from .core import NP
from .errors import DomainError

DEFAULT_DIGITS = 100


@dataclass(frozen=True)
class PrecisionContext:
    """Either IEEE double or extended precision with a fixed digit count.

    Extended contexts hand out a fresh ``mpmath.MPContext`` on every call to
    :meth:`context`, so concurrent tasks never share precision state.
    """

    mode: str = "double"
    digits: Optional[int] = None

    def __post_init__(self):
        if self.mode not in ("double", "extended"):
            raise DomainError(f"unknown precision mode {self.mode!r}")
        if self.mode == "extended":
            digits = DEFAULT_DIGITS if self.digits is None else int(self.digits)
            if digits < 30:
                raise DomainError("extended precision needs at least 30 digits")
            object.__setattr__(self, "digits", digits)
        elif self.digits is not None:
            raise DomainError("digits only apply to extended precision")

    @classmethod
    def double(cls) -> "PrecisionContext":
        return cls("double")

    @classmethod
    def extended(cls, digits: int = DEFAULT_DIGITS) -> "PrecisionContext":
        return cls("extended", digits)

    @property
    def is_extended(self) -> bool:
        return self.mode == "extended"

    def context(self):
        return _mp.new_context(self.digits) if self.is_extended else None

    def namespace(self, ctx=None):
        if not self.is_extended:
            return NP
        return _mp.Namespace(ctx if ctx is not None else self.context())

    def __str__(self) -> str:
        return "double" if not self.is_extended else f"extended({self.digits})"


DOUBLE = PrecisionContext.double()

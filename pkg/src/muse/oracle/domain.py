"""Bounded integer domains for exhaustive evaluation."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from ..core import BOOL, INT, Sort

DEFAULT_CAP = 64


class OracleError(ValueError):
    pass


class Policy(str, enum.Enum):
    """What arithmetic does at the edge of the interval.

    ``STUCK`` computes exactly; a relation argument outside the interval
    makes a least-fixed-point atom false (and a greatest-fixed-point atom
    true, keeping complements exact). ``CLAMP`` saturates every arithmetic
    result at the interval bounds.
    """

    STUCK = "stuck"
    CLAMP = "clamp"


@dataclass(frozen=True)
class FiniteDomain:
    lo: int
    hi: int
    policy: Policy = Policy.STUCK
    cap: int = DEFAULT_CAP

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise OracleError(f"empty interval {self.lo}..{self.hi}")
        if self.hi - self.lo + 1 > self.cap:
            raise OracleError(
                f"interval {self.lo}..{self.hi} has {self.hi - self.lo + 1} values, "
                f"more than the cap of {self.cap}; choose a smaller interval"
            )
        object.__setattr__(self, "policy", Policy(self.policy))

    @classmethod
    def parse(cls, text: str, policy: str | Policy = Policy.STUCK, cap: int = DEFAULT_CAP) -> FiniteDomain:
        """``"LO..HI"``, e.g. ``"-4..4"``."""
        lo, sep, hi = text.partition("..")
        if not sep:
            raise OracleError(f"expected LO..HI, got {text!r}")
        try:
            return cls(int(lo), int(hi), Policy(policy), cap)
        except ValueError as e:
            if isinstance(e, OracleError):
                raise
            raise OracleError(f"expected LO..HI, got {text!r}") from None

    @property
    def ints(self) -> range:
        return range(self.lo, self.hi + 1)

    def values(self, sort: Sort) -> Sequence:
        if sort == INT:
            return self.ints
        if sort == BOOL:
            return (False, True)
        raise OracleError(f"cannot range over {sort}")

    def contains(self, value) -> bool:
        return type(value) is not int or self.lo <= value <= self.hi

    def clamp(self, value: int) -> int:
        return min(self.hi, max(self.lo, value))

    def tuples(self, sorts: Sequence[Sort]) -> Iterator[tuple]:
        return itertools.product(*(self.values(s) for s in sorts))

    def __str__(self) -> str:
        return f"{self.lo}..{self.hi}"

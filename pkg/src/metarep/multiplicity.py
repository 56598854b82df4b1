"""Multiplicity adjustment of r-values across outcome families.

A review typically reports several endpoints, each with its own u=2
r-value. Because r-values are valid p-values, standard multiple-testing
corrections apply directly: Bonferroni controls the chance of any false
replicability claim, Benjamini-Hochberg controls their expected fraction.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from math import isfinite
from typing import Sequence

from .errors import InvalidInputError, PreconditionError

__all__ = [
    "AdjustMethod",
    "EndpointFamily",
    "AdjustedEndpoint",
    "AdjustmentResult",
    "bonferroni_adjust",
    "bh_adjust",
    "declare",
]


class AdjustMethod(str, Enum):
    BONFERRONI = "bonferroni"
    BH = "bh"


@dataclass(frozen=True)
class EndpointFamily:
    """Labelled r-values for the endpoints reported together."""

    labels: tuple[str, ...]
    rvalues: tuple[float, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.labels, tuple):
            object.__setattr__(self, "labels", tuple(self.labels))
        if not isinstance(self.rvalues, tuple):
            object.__setattr__(self, "rvalues", tuple(self.rvalues))
        if len(self.labels) == 0:
            raise InvalidInputError("endpoint family is empty")
        if len(self.labels) != len(self.rvalues):
            raise InvalidInputError(
                f"{len(self.labels)} labels but {len(self.rvalues)} r-values"
            )
        if len(set(self.labels)) != len(self.labels):
            raise InvalidInputError("duplicate endpoint labels")
        _check_rvalues(self.rvalues)

    @property
    def m(self) -> int:
        return len(self.labels)


@dataclass(frozen=True)
class AdjustedEndpoint:
    label: str
    rvalue: float
    adjusted: float


@dataclass(frozen=True)
class AdjustmentResult:
    """Adjusted r-values in input order plus the declared labels."""

    method: AdjustMethod
    alpha: float
    endpoints: tuple[AdjustedEndpoint, ...]
    declared: tuple[str, ...]


def _check_rvalues(rvalues: Sequence[float]) -> None:
    for i, r in enumerate(rvalues):
        if not (isfinite(r) and 0.0 <= r <= 1.0):
            raise InvalidInputError(f"r-value at position {i} must lie in [0, 1], got {r!r}")


def bonferroni_adjust(rvalues: Sequence[float]) -> list[float]:
    """min(1, M * r) for each of the M r-values."""
    _check_rvalues(rvalues)
    m = len(rvalues)
    return [min(1.0, m * r) for r in rvalues]


def bh_adjust(rvalues: Sequence[float]) -> list[float]:
    """Benjamini-Hochberg adjusted r-values, in input order.

    With r_(1) <= ... <= r_(M) the adjusted value of the j-th smallest is
    min_{i >= j} M * r_(i) / i, capped at 1. Ties keep input order, which
    makes the mapping back to positions deterministic.
    """
    _check_rvalues(rvalues)
    m = len(rvalues)
    order = sorted(range(m), key=lambda i: rvalues[i])
    adjusted = [1.0] * m
    running = 1.0
    for rank in range(m, 0, -1):
        idx = order[rank - 1]
        running = min(running, m * rvalues[idx] / rank)
        adjusted[idx] = running
    return adjusted


def declare(
    family: EndpointFamily,
    method: AdjustMethod = AdjustMethod.BH,
    alpha: float = 0.05,
) -> AdjustmentResult:
    """Adjust a family of r-values and declare endpoints with adjusted <= alpha."""
    if not (0.0 < alpha < 1.0):
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha!r}")
    if method is AdjustMethod.BONFERRONI:
        adjusted = bonferroni_adjust(family.rvalues)
    else:
        adjusted = bh_adjust(family.rvalues)
    endpoints = tuple(
        AdjustedEndpoint(label=lab, rvalue=r, adjusted=a)
        for lab, r, a in zip(family.labels, family.rvalues, adjusted)
    )
    declared = tuple(e.label for e in endpoints if e.adjusted <= alpha)
    return AdjustmentResult(
        method=method, alpha=alpha, endpoints=endpoints, declared=declared
    )

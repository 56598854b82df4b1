"""Reading study tables and normalizing them to the analysis scale.

Input is a CSV with header columns drawn from

    label, measure, effect, se, ci_low, ci_high, ci_level

`label`, `measure` and `effect` are required. Each row must carry either
a standard error or a full confidence interval (`ci_low` and `ci_high`);
`ci_level` defaults to 0.95. Ratio measures (HR, RR, OR) are reported on
their natural scale and are log-transformed here, so downstream code only
ever sees an additive scale with null value 0. Mean differences (MD) pass
through unchanged.

When a row has both a standard error and an interval, the standard error
wins, but a disagreement above 5 percent triggers a warning since it
usually indicates a transcription problem.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

from .distributions import normal_quantile
from .errors import InvalidInputError
from .meta import Measure, Study, StudySet

__all__ = [
    "ReportedMeasure",
    "InputRecord",
    "parse_csv",
    "normalize",
    "load_study_set",
]

COLUMNS = ("label", "measure", "effect", "se", "ci_low", "ci_high", "ci_level")
REQUIRED_COLUMNS = ("label", "measure", "effect")

SE_MISMATCH_TOLERANCE = 0.05


class ReportedMeasure(str, Enum):
    """Effect measure as reported by the review."""

    HR = "HR"
    RR = "RR"
    OR = "OR"
    MD = "MD"

    @property
    def is_ratio(self) -> bool:
        return self is not ReportedMeasure.MD


@dataclass(frozen=True)
class InputRecord:
    """One study row on the reporting scale, before transformation.

    The standard error, when given, is understood on the analysis scale
    (the log scale for ratio measures), matching how inverse-variance
    weights are reported in review software.
    """

    label: str
    measure: ReportedMeasure
    effect: float
    se: Optional[float] = None
    ci_low: Optional[float] = None
    ci_high: Optional[float] = None
    ci_level: float = 0.95

    def __post_init__(self) -> None:
        if not self.label:
            raise InvalidInputError("label must be nonempty")
        if not math.isfinite(self.effect):
            raise InvalidInputError("effect must be finite")
        if self.measure.is_ratio and self.effect <= 0.0:
            raise InvalidInputError(
                f"{self.measure.value} effect must be positive, got {self.effect!r}"
            )
        if self.se is None and (self.ci_low is None or self.ci_high is None):
            raise InvalidInputError("need se or both ci_low and ci_high")
        if self.se is not None and not (math.isfinite(self.se) and self.se > 0.0):
            raise InvalidInputError(f"se must be positive and finite, got {self.se!r}")
        if (self.ci_low is None) != (self.ci_high is None):
            raise InvalidInputError("ci_low and ci_high must be given together")
        if self.ci_low is not None and self.ci_high is not None:
            if not (math.isfinite(self.ci_low) and math.isfinite(self.ci_high)):
                raise InvalidInputError("confidence limits must be finite")
            if self.measure.is_ratio and self.ci_low <= 0.0:
                raise InvalidInputError(
                    f"{self.measure.value} ci_low must be positive, got {self.ci_low!r}"
                )
            if not (self.ci_low < self.effect < self.ci_high):
                raise InvalidInputError(
                    f"interval [{self.ci_low!r}, {self.ci_high!r}] must bracket "
                    f"the effect {self.effect!r}"
                )
        if not (0.0 < self.ci_level < 1.0):
            raise InvalidInputError(f"ci_level must lie in (0, 1), got {self.ci_level!r}")


def _parse_float(text: str, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise InvalidInputError(f"column {column!r}: not a number: {text!r}") from None


def parse_csv(path: Union[str, Path]) -> list[InputRecord]:
    """Read study rows from a CSV file, validating each row in turn.

    Errors mention the offending data row (1-based, header excluded).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8-sig") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames
        if header is None:
            raise InvalidInputError(f"{path}: empty file")
        unknown = [c for c in header if c not in COLUMNS]
        if unknown:
            raise InvalidInputError(
                f"{path}: unknown columns: {', '.join(map(repr, unknown))}"
            )
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise InvalidInputError(
                f"{path}: missing required columns: {', '.join(missing)}"
            )
        records: list[InputRecord] = []
        seen: set[str] = set()
        for rownum, row in enumerate(reader, start=1):
            records.append(_parse_row(row, rownum, seen))
    if not records:
        raise InvalidInputError(f"{path}: no study rows")
    return records


def _parse_row(row: dict, rownum: int, seen: set[str]) -> InputRecord:
    def cell(column: str) -> Optional[str]:
        value = row.get(column)
        if value is None:
            return None
        value = value.strip()
        return value or None

    def number(column: str) -> Optional[float]:
        text = cell(column)
        return None if text is None else _parse_float(text, column)

    try:
        label = cell("label")
        if label is None:
            raise InvalidInputError("label must be nonempty")
        if label in seen:
            raise InvalidInputError(f"duplicate label {label!r}")
        measure_text = cell("measure")
        if measure_text is None:
            raise InvalidInputError("measure must be nonempty")
        try:
            measure = ReportedMeasure(measure_text.upper())
        except ValueError:
            raise InvalidInputError(
                f"unknown measure {measure_text!r}; expected one of "
                f"{', '.join(m.value for m in ReportedMeasure)}"
            ) from None
        effect_text = cell("effect")
        if effect_text is None:
            raise InvalidInputError("effect must be nonempty")
        level = number("ci_level")
        record = InputRecord(
            label=label,
            measure=measure,
            effect=_parse_float(effect_text, "effect"),
            se=number("se"),
            ci_low=number("ci_low"),
            ci_high=number("ci_high"),
            ci_level=0.95 if level is None else level,
        )
    except InvalidInputError as exc:
        raise InvalidInputError(f"row {rownum}: {exc}") from None
    seen.add(label)
    return record


def normalize(records: Sequence[InputRecord]) -> StudySet:
    """Turn reporting-scale records into a StudySet on the analysis scale.

    Ratio effects and their confidence limits are log-transformed. A
    standard error missing from a row is recovered from the interval as
    (upper - lower) / (2 * z), with the limits already on the analysis
    scale and z the two-sided normal quantile for the row's ci_level.
    """
    if not records:
        raise InvalidInputError("no studies")
    measures = {r.measure for r in records}
    if len(measures) > 1:
        names = ", ".join(sorted(m.value for m in measures))
        raise InvalidInputError(f"rows mix different measures: {names}")
    measure = next(iter(measures))
    scale = Measure.RATIO if measure.is_ratio else Measure.DIFFERENCE
    studies = []
    for record in records:
        transform = math.log if measure.is_ratio else (lambda x: x)
        effect = transform(record.effect)
        se_ci = None
        if record.ci_low is not None and record.ci_high is not None:
            z = normal_quantile(0.5 + record.ci_level / 2.0)
            se_ci = (transform(record.ci_high) - transform(record.ci_low)) / (2.0 * z)
        if record.se is not None:
            se = record.se
            if se_ci is not None and abs(se_ci - se) / se > SE_MISMATCH_TOLERANCE:
                warnings.warn(
                    f"study {record.label!r}: reported se {se:.6g} disagrees with "
                    f"the interval-derived value {se_ci:.6g} by more than "
                    f"{SE_MISMATCH_TOLERANCE:.0%}",
                    UserWarning,
                    stacklevel=2,
                )
        else:
            se = se_ci
        studies.append(Study(label=record.label, effect=effect, se=se))
    return StudySet(studies=tuple(studies), measure=scale)


def load_study_set(path: Union[str, Path]) -> StudySet:
    """parse_csv followed by normalize."""
    return normalize(parse_csv(path))

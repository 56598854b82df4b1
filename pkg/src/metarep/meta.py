"""Inverse-variance meta-analysis on an additive analysis scale.

Three synthesis rules are supported:

* ``fixed_z``  -- common-effect inverse-variance pooling with a z-test,
* ``random_z`` -- DerSimonian-Laird between-study variance, pooled with
  1/(se^2 + tau^2) weights and a z-test,
* ``random_t`` -- the same weights with a Hartung-Knapp variance estimate
  and a t-test on N-1 degrees of freedom.

Ratio measures (HR/RR/OR) are expected to arrive already log-transformed
(see `metarep.ingest`), so the null value is always 0 here.

All reductions use ``math.fsum``, which makes every result invariant under
permutations of the study list, bit for bit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .distributions import (
    normal_cdf,
    normal_quantile,
    normal_sf,
    t_cdf,
    t_quantile,
    t_sf,
)
from .errors import InvalidInputError, PreconditionError

__all__ = [
    "Study",
    "StudySet",
    "Measure",
    "MetaModel",
    "MetaResult",
    "fixed_effect_meta",
    "dersimonian_laird_tau2",
    "random_effects_meta",
    "meta_analysis",
]


class Measure(str, Enum):
    """Original reporting scale of a study set."""

    RATIO = "ratio"
    DIFFERENCE = "difference"


class MetaModel(str, Enum):
    """Which synthesis rule to apply."""

    FIXED_Z = "fixed_z"
    RANDOM_Z = "random_z"
    RANDOM_T = "random_t"

    @property
    def description(self) -> str:
        return _MODEL_DESCRIPTIONS[self]

    @property
    def is_random(self) -> bool:
        return self is not MetaModel.FIXED_Z


_MODEL_DESCRIPTIONS = {
    MetaModel.FIXED_Z: "common-effect inverse-variance z-test",
    MetaModel.RANDOM_Z: "DerSimonian-Laird random effects with z-test",
    MetaModel.RANDOM_T: "DerSimonian-Laird random effects with "
                        "Hartung-Knapp variance and t-test (N-1 df)",
}


@dataclass(frozen=True)
class Study:
    """One study: point estimate and standard error on the analysis scale.

    For ratio measures `effect` is the log of the reported ratio; for mean
    differences it is the raw difference. `se` is on the same scale.
    """

    label: str
    effect: float
    se: float

    def __post_init__(self) -> None:
        if not self.label:
            raise InvalidInputError("study label must be nonempty")
        if not math.isfinite(self.effect):
            raise InvalidInputError(f"invalid study {self.label!r}: effect must be finite")
        if not (math.isfinite(self.se) and self.se > 0.0):
            raise InvalidInputError(
                f"invalid study {self.label!r}: se must be positive and finite"
            )

    @property
    def variance(self) -> float:
        return self.se * self.se


@dataclass(frozen=True)
class StudySet:
    """Ordered collection of studies sharing one reporting scale."""

    studies: tuple[Study, ...]
    measure: Measure = Measure.DIFFERENCE

    def __post_init__(self) -> None:
        if not isinstance(self.studies, tuple):
            object.__setattr__(self, "studies", tuple(self.studies))
        if len(self.studies) == 0:
            raise InvalidInputError("no studies")
        labels = [s.label for s in self.studies]
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise InvalidInputError(f"duplicate study labels: {', '.join(dupes)}")

    def __len__(self) -> int:
        return len(self.studies)

    def __iter__(self):
        return iter(self.studies)

    @property
    def n(self) -> int:
        return len(self.studies)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.studies)

    def effects(self) -> list[float]:
        return [s.effect for s in self.studies]

    def variances(self) -> list[float]:
        return [s.variance for s in self.studies]

    def subset(self, indices: Iterable[int]) -> "StudySet":
        """New StudySet restricted to the given study indices (kept in order)."""
        picked = tuple(self.studies[i] for i in indices)
        return StudySet(studies=picked, measure=self.measure)


@dataclass(frozen=True)
class MetaResult:
    """Summary effect with p-values and confidence interval.

    `p_left`/`p_right` are the one-sided p-values against the null of no
    effect (0 on the analysis scale); `p_two` is twice the smaller one,
    capped at 1. The CI and the p-values use the same reference
    distribution, so `p_two <= alpha` iff 0 lies outside the interval.
    """

    summary: float
    se_summary: float
    tau2: float
    p_left: float
    p_right: float
    p_two: float
    ci_low: float
    ci_high: float
    alpha: float
    df: float

    @property
    def excludes_null(self) -> bool:
        return self.ci_low > 0.0 or self.ci_high < 0.0


# --- numeric kernels -------------------------------------------------------
#
# These operate on plain sequences of floats so the simulation module can run
# the same code path without building Study objects per iteration.

def pooled_estimate(effects: Sequence[float], variances: Sequence[float]) -> tuple[float, float]:
    """Inverse-variance pooled effect and its standard error."""
    weights = [1.0 / v for v in variances]
    sum_w = math.fsum(weights)
    summary = math.fsum(w * e for w, e in zip(weights, effects)) / sum_w
    return summary, math.sqrt(1.0 / sum_w)


def cochran_q(effects: Sequence[float], variances: Sequence[float]) -> float:
    """Heterogeneity statistic Q around the fixed-effect pooled value."""
    weights = [1.0 / v for v in variances]
    sum_w = math.fsum(weights)
    summary = math.fsum(w * e for w, e in zip(weights, effects)) / sum_w
    return math.fsum(w * (e - summary) ** 2 for w, e in zip(weights, effects))


def dl_tau2(effects: Sequence[float], variances: Sequence[float]) -> float:
    """DerSimonian-Laird moment estimate of the between-study variance.

    tau2 = max(0, (Q - (N-1)) / (sum w - sum w^2 / sum w)) with fixed-effect
    weights w = 1/variance.
    """
    n = len(effects)
    weights = [1.0 / v for v in variances]
    sum_w = math.fsum(weights)
    summary = math.fsum(w * e for w, e in zip(weights, effects)) / sum_w
    q = math.fsum(w * (e - summary) ** 2 for w, e in zip(weights, effects))
    c = sum_w - math.fsum(w * w for w in weights) / sum_w
    return max(0.0, (q - (n - 1)) / c)


def random_z_stat(effects: Sequence[float], variances: Sequence[float]) -> tuple[float, float, float]:
    """Random-effects pooled effect, its standard error, and tau2 (z path)."""
    tau2 = dl_tau2(effects, variances)
    star = [v + tau2 for v in variances]
    summary, se = pooled_estimate(effects, star)
    return summary, se, tau2


def hartung_knapp_se(
    effects: Sequence[float], variances: Sequence[float], tau2: float, summary: float
) -> float:
    """Hartung-Knapp standard error of the random-effects summary."""
    n = len(effects)
    weights = [1.0 / (v + tau2) for v in variances]
    sum_w = math.fsum(weights)
    ssq = math.fsum(w * (e - summary) ** 2 for w, e in zip(weights, effects))
    return math.sqrt(ssq / ((n - 1) * sum_w))


def _z_result(summary: float, se: float, tau2: float, alpha: float) -> MetaResult:
    stat = summary / se
    p_left = normal_cdf(stat)
    p_right = normal_sf(stat)
    half_width = normal_quantile(1.0 - alpha / 2.0) * se
    return MetaResult(
        summary=summary,
        se_summary=se,
        tau2=tau2,
        p_left=p_left,
        p_right=p_right,
        p_two=min(1.0, 2.0 * min(p_left, p_right)),
        ci_low=summary - half_width,
        ci_high=summary + half_width,
        alpha=alpha,
        df=math.inf,
    )


def _t_result(summary: float, se: float, tau2: float, alpha: float, df: float) -> MetaResult:
    if se == 0.0:
        # Degenerate Hartung-Knapp variance (all effects identical): the
        # statistic diverges, so take the continuous limit.
        if summary > 0.0:
            p_left, p_right = 1.0, 0.0
        elif summary < 0.0:
            p_left, p_right = 0.0, 1.0
        else:
            p_left = p_right = 0.5
        ci_low = ci_high = summary
    else:
        stat = summary / se
        p_left = t_cdf(stat, df)
        p_right = t_sf(stat, df)
        half_width = t_quantile(1.0 - alpha / 2.0, df) * se
        ci_low = summary - half_width
        ci_high = summary + half_width
    return MetaResult(
        summary=summary,
        se_summary=se,
        tau2=tau2,
        p_left=p_left,
        p_right=p_right,
        p_two=min(1.0, 2.0 * min(p_left, p_right)),
        ci_low=ci_low,
        ci_high=ci_high,
        alpha=alpha,
        df=df,
    )


# --- public operations ------------------------------------------------------

def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha!r}")


def fixed_effect_meta(studies: StudySet, alpha: float = 0.05) -> MetaResult:
    """Common-effect meta-analysis: z-test on the inverse-variance pool."""
    _check_alpha(alpha)
    summary, se = pooled_estimate(studies.effects(), studies.variances())
    return _z_result(summary, se, 0.0, alpha)


def dersimonian_laird_tau2(studies: StudySet) -> float:
    """Between-study variance estimate; requires at least 2 studies."""
    if studies.n < 2:
        raise PreconditionError("tau2 undefined for fewer than 2 studies")
    return dl_tau2(studies.effects(), studies.variances())


def random_effects_meta(studies: StudySet, model: MetaModel, alpha: float = 0.05) -> MetaResult:
    """Random-effects meta-analysis under ``random_z`` or ``random_t``."""
    _check_alpha(alpha)
    if model is MetaModel.FIXED_Z:
        raise PreconditionError("random_effects_meta requires a random-effects model")
    if studies.n < 2:
        raise PreconditionError("random-effects meta-analysis requires at least 2 studies")
    effects, variances = studies.effects(), studies.variances()
    summary, se_z, tau2 = random_z_stat(effects, variances)
    if model is MetaModel.RANDOM_Z:
        return _z_result(summary, se_z, tau2, alpha)
    if studies.n == 2:
        warnings.warn(
            "random_t with 2 studies runs on a single degree of freedom",
            UserWarning,
            stacklevel=2,
        )
    se_hk = hartung_knapp_se(effects, variances, tau2, summary)
    return _t_result(summary, se_hk, tau2, alpha, df=studies.n - 1)


def meta_analysis(
    studies: StudySet, model: MetaModel = MetaModel.FIXED_Z, alpha: float = 0.05
) -> MetaResult:
    """Dispatch to the synthesis rule named by `model`."""
    if model is MetaModel.FIXED_Z:
        return fixed_effect_meta(studies, alpha)
    return random_effects_meta(studies, model, alpha)

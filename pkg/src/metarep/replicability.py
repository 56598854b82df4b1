"""Replicability analysis of a meta-analytic finding.

The central quantity is the r-value: the largest one-sided meta-analytic
p-value over all subsets obtained by removing u-1 of the N studies. It is
a valid p-value for the null hypothesis "fewer than u studies have a true
effect in the given direction", so a small r-value at u=2 certifies that
the finding does not hinge on any single study.

Built on top of the r-value are

* `sensitivity_interval` -- a confidence interval that stays valid no
  matter which u-1 studies are discounted,
* `leave_one_out_report` -- the u=2 special case with per-study rows,
* `replicability_bound` -- the largest u whose r-value still clears the
  significance level, i.e. a lower confidence bound on the number of
  studies with an effect.

Subset enumeration is exhaustive. The number of subsets to score is
C(N, u-1); calls that would exceed `max_evaluations` raise
`EnumerationCapError` instead of silently approximating.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

from .distributions import (
    normal_cdf,
    normal_quantile,
    normal_sf,
    t_cdf,
    t_quantile,
    t_sf,
)
from .errors import EnumerationCapError, InvalidInputError, PreconditionError
from .meta import (
    MetaModel,
    MetaResult,
    StudySet,
    hartung_knapp_se,
    meta_analysis,
    pooled_estimate,
    random_z_stat,
)

__all__ = [
    "RValueResult",
    "SensitivityInterval",
    "LeaveOneOutRow",
    "LeaveOneOutReport",
    "BoundTraceRow",
    "ReplicabilityBound",
    "enumerate_subsets",
    "r_value",
    "sensitivity_interval",
    "leave_one_out_report",
    "replicability_bound",
]

DEFAULT_MAX_EVALUATIONS = 10**6


def enumerate_subsets(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All k-element index subsets of range(n), in lexicographic order."""
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    if k < 1 or k > n:
        raise InvalidInputError(f"k must lie in [1, {n}], got {k}")
    return itertools.combinations(range(n), k)


@dataclass(frozen=True)
class RValueResult:
    """Worst-case one-sided p-values over all subsets of N-u+1 studies.

    `argmax_left`/`argmax_right` give the retained study labels of the
    subsets attaining `r_left`/`r_right`; `dropped_left`/`dropped_right`
    are their complements (the u-1 studies discounted by the worst case).
    Ties go to the lexicographically first subset.
    """

    u: int
    r_left: float
    r_right: float
    r_two: float
    argmax_left: tuple[str, ...]
    argmax_right: tuple[str, ...]
    dropped_left: tuple[str, ...]
    dropped_right: tuple[str, ...]
    model: MetaModel


@dataclass(frozen=True)
class SensitivityInterval:
    """Confidence interval robust to discounting any u-1 studies.

    On the analysis scale. `source_low` and `source_high` name the retained
    subsets whose interval endpoints were taken. The interval excludes 0
    exactly when the two-sided r-value at the same u is at most `alpha`.
    """

    low: float
    high: float
    alpha: float
    u: int
    source_low: tuple[str, ...]
    source_high: tuple[str, ...]
    strict: bool = False

    @property
    def excludes_null(self) -> bool:
        return self.low > 0.0 or self.high < 0.0


@dataclass(frozen=True)
class LeaveOneOutRow:
    """Re-analysis with one study removed."""

    excluded_label: str
    summary: float
    ci_low: float
    ci_high: float
    p_two: float


@dataclass(frozen=True)
class LeaveOneOutReport:
    """Leave-one-out table plus the u=2 replicability summary."""

    rows: tuple[LeaveOneOutRow, ...]
    full: MetaResult
    rvalue: RValueResult
    interval: SensitivityInterval
    alpha: float

    @property
    def replicated(self) -> bool:
        """True when the finding survives removal of any single study."""
        return self.rvalue.r_two <= self.alpha


@dataclass(frozen=True)
class BoundTraceRow:
    """One step of the replicability-bound scan.

    `excluded` lists the u-1 studies discounted by the worst-case subset in
    the claimed direction; `effect_bound` is that subset's confidence limit
    nearest the null (a lower limit when the direction is "right", an upper
    limit when it is "left").
    """

    u: int
    r_value: float
    excluded: tuple[str, ...]
    effect_bound: float


@dataclass(frozen=True)
class ReplicabilityBound:
    """Lower confidence bound on the number of studies with an effect.

    `bound` is the largest u whose two-sided r-value is at most `alpha`;
    1 means the scan failed already at u=2, so a single influential study
    cannot be ruled out. `trace` holds every u evaluated, including the
    first failure when there is one.
    """

    alpha: float
    direction: str
    bound: int
    trace: tuple[BoundTraceRow, ...]


# --- internals ---------------------------------------------------------------

def _check_alpha(alpha: float) -> None:
    if not (0.0 < alpha < 1.0):
        raise PreconditionError(f"alpha must lie in (0, 1), got {alpha!r}")


def _max_u(n: int, model: MetaModel) -> int:
    # Random-effects fits need at least 2 studies per subset.
    return n if model is MetaModel.FIXED_Z else n - 1


def _check_u(u: int, n: int, model: MetaModel) -> None:
    _check_n(n)
    if u < 2:
        raise PreconditionError(f"u must be at least 2, got {u}")
    top = _max_u(n, model)
    if u > top:
        raise PreconditionError(
            f"u must be at most {top} for model {model.value} with {n} studies, got {u}"
        )


def _check_n(n: int) -> None:
    if n < 3:
        raise PreconditionError(
            f"replicability analysis requires at least 3 studies, got {n}"
        )


def _check_cap(n: int, k: int, max_evaluations: int) -> None:
    count = math.comb(n, k)
    if count > max_evaluations:
        raise EnumerationCapError(
            f"enumeration of {count} subsets exceeds the cap of {max_evaluations}; "
            "raise max_evaluations to force the computation"
        )


def _subset_p(
    effects: Sequence[float], variances: Sequence[float], model: MetaModel
) -> tuple[float, float]:
    """One-sided (p_left, p_right) of a subset meta-analysis, no CI work."""
    if model is MetaModel.FIXED_Z:
        summary, se = pooled_estimate(effects, variances)
        stat = summary / se
        return normal_cdf(stat), normal_sf(stat)
    summary, se, tau2 = random_z_stat(effects, variances)
    if model is MetaModel.RANDOM_Z:
        stat = summary / se
        return normal_cdf(stat), normal_sf(stat)
    se_hk = hartung_knapp_se(effects, variances, tau2, summary)
    if se_hk == 0.0:
        if summary > 0.0:
            return 1.0, 0.0
        if summary < 0.0:
            return 0.0, 1.0
        return 0.5, 0.5
    stat = summary / se_hk
    df = len(effects) - 1
    return t_cdf(stat, df), t_sf(stat, df)


def _subset_ci(
    effects: Sequence[float],
    variances: Sequence[float],
    model: MetaModel,
    quantile: float,
) -> tuple[float, float]:
    """Two-sided CI of a subset meta-analysis with a precomputed quantile."""
    if model is MetaModel.FIXED_Z:
        summary, se = pooled_estimate(effects, variances)
    else:
        summary, se, tau2 = random_z_stat(effects, variances)
        if model is MetaModel.RANDOM_T:
            se = hartung_knapp_se(effects, variances, tau2, summary)
            if se == 0.0:
                return summary, summary
    half = quantile * se
    return summary - half, summary + half


def _r_value_core(
    studies: StudySet, u: int, model: MetaModel, max_evaluations: int
) -> tuple[float, float, tuple[int, ...], tuple[int, ...]]:
    """(r_left, r_right, argmax_left indices, argmax_right indices)."""
    n = studies.n
    _check_u(u, n, model)
    k = n - u + 1
    _check_cap(n, k, max_evaluations)
    effects = studies.effects()
    variances = studies.variances()
    best_left = best_right = -1.0
    arg_left: tuple[int, ...] = ()
    arg_right: tuple[int, ...] = ()
    for subset in itertools.combinations(range(n), k):
        es = [effects[i] for i in subset]
        vs = [variances[i] for i in subset]
        p_left, p_right = _subset_p(es, vs, model)
        if p_left > best_left:
            best_left, arg_left = p_left, subset
        if p_right > best_right:
            best_right, arg_right = p_right, subset
    return best_left, best_right, arg_left, arg_right


def _complement(n: int, kept: tuple[int, ...]) -> tuple[int, ...]:
    inside = set(kept)
    return tuple(i for i in range(n) if i not in inside)


# --- public operations --------------------------------------------------------

def r_value(
    studies: StudySet,
    u: int,
    model: MetaModel,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> RValueResult:
    """Compute the u-out-of-N r-value under the given synthesis rule.

    Scores the meta-analytic p-values of all C(N, u-1) subsets that retain
    N-u+1 studies and takes the maximum separately for each direction:

        r_left  = max_S p_left(S)      r_right = max_S p_right(S)
        r_two   = min(1, 2 * min(r_left, r_right))

    Raises `PreconditionError` for u outside [2, N] ([2, N-1] for the
    random-effects models) and `EnumerationCapError` when C(N, u-1)
    exceeds `max_evaluations`.
    """
    best_left, best_right, arg_left, arg_right = _r_value_core(
        studies, u, model, max_evaluations
    )
    labels = studies.labels
    n = studies.n
    return RValueResult(
        u=u,
        r_left=best_left,
        r_right=best_right,
        r_two=min(1.0, 2.0 * min(best_left, best_right)),
        argmax_left=tuple(labels[i] for i in arg_left),
        argmax_right=tuple(labels[i] for i in arg_right),
        dropped_left=tuple(labels[i] for i in _complement(n, arg_left)),
        dropped_right=tuple(labels[i] for i in _complement(n, arg_right)),
        model=model,
    )


def _interval_quantile(model: MetaModel, alpha: float, subset_size: int) -> float:
    if model is MetaModel.RANDOM_T:
        return t_quantile(1.0 - alpha / 2.0, subset_size - 1)
    return normal_quantile(1.0 - alpha / 2.0)


def sensitivity_interval(
    studies: StudySet,
    u: int,
    model: MetaModel,
    alpha: float = 0.05,
    strict_union: bool = False,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> SensitivityInterval:
    """Confidence interval immune to removal of any u-1 studies.

    Default mode takes the upper limit from the subset attaining r_left and
    the lower limit from the subset attaining r_right, which makes the
    interval exclude 0 exactly when r_two <= alpha. With `strict_union`
    the endpoints are instead the extremes over every subset's interval,
    which is wider (it is the union of all subset intervals) but covers
    under arbitrary endpoint questions, not just the null at 0.
    """
    _check_alpha(alpha)
    n = studies.n
    if strict_union:
        _check_u(u, n, model)
        k = n - u + 1
        _check_cap(n, k, max_evaluations)
        effects = studies.effects()
        variances = studies.variances()
        quantile = _interval_quantile(model, alpha, k)
        low = math.inf
        high = -math.inf
        src_low: tuple[int, ...] = ()
        src_high: tuple[int, ...] = ()
        for subset in itertools.combinations(range(n), k):
            es = [effects[i] for i in subset]
            vs = [variances[i] for i in subset]
            ci_low, ci_high = _subset_ci(es, vs, model, quantile)
            if ci_low < low:
                low, src_low = ci_low, subset
            if ci_high > high:
                high, src_high = ci_high, subset
        labels = studies.labels
        return SensitivityInterval(
            low=low,
            high=high,
            alpha=alpha,
            u=u,
            source_low=tuple(labels[i] for i in src_low),
            source_high=tuple(labels[i] for i in src_high),
            strict=True,
        )
    _, _, arg_left, arg_right = _r_value_core(studies, u, model, max_evaluations)
    left_res = meta_analysis(studies.subset(arg_left), model, alpha)
    right_res = meta_analysis(studies.subset(arg_right), model, alpha)
    labels = studies.labels
    return SensitivityInterval(
        low=right_res.ci_low,
        high=left_res.ci_high,
        alpha=alpha,
        u=u,
        source_low=tuple(labels[i] for i in arg_right),
        source_high=tuple(labels[i] for i in arg_left),
        strict=False,
    )


def leave_one_out_report(
    studies: StudySet,
    model: MetaModel,
    alpha: float = 0.05,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> LeaveOneOutReport:
    """Per-study leave-one-out table with the u=2 r-value and interval."""
    _check_alpha(alpha)
    n = studies.n
    _check_n(n)
    rows = []
    for i in range(n):
        kept = tuple(j for j in range(n) if j != i)
        res = meta_analysis(studies.subset(kept), model, alpha)
        rows.append(
            LeaveOneOutRow(
                excluded_label=studies.labels[i],
                summary=res.summary,
                ci_low=res.ci_low,
                ci_high=res.ci_high,
                p_two=res.p_two,
            )
        )
    return LeaveOneOutReport(
        rows=tuple(rows),
        full=meta_analysis(studies, model, alpha),
        rvalue=r_value(studies, 2, model, max_evaluations),
        interval=sensitivity_interval(
            studies, 2, model, alpha, max_evaluations=max_evaluations
        ),
        alpha=alpha,
    )


def replicability_bound(
    studies: StudySet,
    model: MetaModel,
    alpha: float = 0.05,
    max_evaluations: int = DEFAULT_MAX_EVALUATIONS,
) -> ReplicabilityBound:
    """Largest u whose r-value stays within alpha, with the full scan trace.

    Scans u = 2, 3, ... and stops at the first u with r_two > alpha; that
    failing row is still recorded in the trace. Requires the full-set
    summary to be significant at alpha, which fixes the claimed direction.
    """
    _check_alpha(alpha)
    _check_n(studies.n)
    full = meta_analysis(studies, model, alpha)
    if full.p_two > alpha:
        raise PreconditionError(
            f"summary effect is not significant at alpha={alpha:g} "
            f"(p={full.p_two:.4g}); there is no replicability bound to quantify"
        )
    direction = "right" if full.summary > 0.0 else "left"
    n = studies.n
    labels = studies.labels
    bound = 1
    rows: list[BoundTraceRow] = []
    for u in range(2, _max_u(n, model) + 1):
        best_left, best_right, arg_left, arg_right = _r_value_core(
            studies, u, model, max_evaluations
        )
        r_two = min(1.0, 2.0 * min(best_left, best_right))
        side = arg_right if direction == "right" else arg_left
        side_res = meta_analysis(studies.subset(side), model, alpha)
        effect_bound = side_res.ci_low if direction == "right" else side_res.ci_high
        rows.append(
            BoundTraceRow(
                u=u,
                r_value=r_two,
                excluded=tuple(labels[i] for i in _complement(n, side)),
                effect_bound=effect_bound,
            )
        )
        if r_two > alpha:
            break
        bound = u
    return ReplicabilityBound(
        alpha=alpha, direction=direction, bound=bound, trace=tuple(rows)
    )

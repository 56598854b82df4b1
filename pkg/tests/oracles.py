"""Independent reference implementations used only by the test suite.

Everything here recomputes results through scipy / statsmodels / plain
numpy so that agreement with the package is evidence, not tautology.
The brute-force subset scans deliberately avoid the package's
enumeration and bookkeeping code paths.
"""

from __future__ import annotations

import itertools
import math
import warnings

import numpy as np
from scipy import stats

from metarep.meta import MetaModel, Study, StudySet
from metarep.ingest import ReportedMeasure


def oracle_meta(effects, ses, model, alpha=0.05):
    """Summary, one-sided p-values and CI recomputed with scipy.

    Returns dict with keys summary, se, tau2, p_left, p_right, p_two,
    ci_low, ci_high.  Mirrors the documented estimators but shares no
    code with the package.
    """
    e = np.asarray(effects, dtype=float)
    v = np.asarray(ses, dtype=float) ** 2
    n = e.size
    w = 1.0 / v
    fixed = float((w * e).sum() / w.sum())
    tau2 = 0.0
    if model == MetaModel.FIXED_Z:
        mu = fixed
        se = float(w.sum() ** -0.5)
    else:
        q = float((w * (e - fixed) ** 2).sum())
        c = float(w.sum() - (w**2).sum() / w.sum())
        tau2 = max(0.0, (q - (n - 1)) / c)
        ws = 1.0 / (v + tau2)
        mu = float((ws * e).sum() / ws.sum())
        if model == MetaModel.RANDOM_Z:
            se = float(ws.sum() ** -0.5)
        else:
            se = math.sqrt(float((ws * (e - mu) ** 2).sum()) / ((n - 1) * float(ws.sum())))
    if model == MetaModel.RANDOM_T:
        dist = stats.t(df=n - 1)
    else:
        dist = stats.norm
    if se == 0.0:
        p_left = 1.0 if mu > 0 else 0.0 if mu < 0 else 0.5
        lo = hi = mu
    else:
        p_left = float(dist.cdf(mu / se))
        crit = float(dist.ppf(1.0 - alpha / 2.0))
        lo, hi = mu - crit * se, mu + crit * se
    p_right = 1.0 - p_left
    return {
        "summary": mu,
        "se": se,
        "tau2": tau2,
        "p_left": p_left,
        "p_right": p_right,
        "p_two": min(1.0, 2.0 * min(p_left, p_right)),
        "ci_low": lo,
        "ci_high": hi,
    }


def brute_force_r_value(studies: StudySet, u: int, model, alpha=0.05):
    """Worst-case subset p-values by exhaustive enumeration.

    Returns (r_left, r_right, r_two, ci_low_of_right_argmax,
    ci_high_of_left_argmax): the last two feed the sensitivity-interval
    cross-check.
    """
    n = studies.n
    effects = studies.effects()
    ses = [math.sqrt(v) for v in studies.variances()]
    best_left = best_right = -1.0
    hi = lo = None
    for keep in itertools.combinations(range(n), n - u + 1):
        e = [effects[i] for i in keep]
        s = [ses[i] for i in keep]
        res = oracle_meta(e, s, model, alpha=alpha)
        if res["p_left"] > best_left:
            best_left = res["p_left"]
            hi = res["ci_high"]
        if res["p_right"] > best_right:
            best_right = res["p_right"]
            lo = res["ci_low"]
    r_two = min(1.0, 2.0 * min(best_left, best_right))
    return best_left, best_right, r_two, lo, hi


def statsmodels_random_z(effects, ses):
    """(summary, se, tau2) from statsmodels' DL random-effects combine.

    statsmodels leaves a negative moment estimate unclipped; the
    conventional estimator truncates at zero, where the random-effects
    combine collapses onto the fixed-effect one.
    """
    from statsmodels.stats.meta_analysis import combine_effects

    e = np.asarray(effects, dtype=float)
    v = np.asarray(ses, dtype=float) ** 2
    with warnings.catch_warnings():
        # statsmodels takes sqrt of its unclipped HKSJ variance
        warnings.simplefilter("ignore", RuntimeWarning)
        res = combine_effects(e, v, method_re="dl")
    if res.tau2 <= 0.0:
        return float(res.mean_effect_fe), float(res.sd_eff_w_fe), 0.0
    return (
        float(res.mean_effect_re),
        float(res.sd_eff_w_re),
        float(res.tau2),
    )


def statsmodels_bh(rvalues):
    """BH-adjusted values via statsmodels multipletests."""
    from statsmodels.stats.multitest import multipletests

    _, adjusted, _, _ = multipletests(np.asarray(rvalues, dtype=float), method="fdr_bh")
    return [float(x) for x in adjusted]


def random_study_set(rng: np.random.Generator, n=None, measure=None) -> StudySet:
    """A seeded random study set for property and corpus tests."""
    if n is None:
        n = int(rng.integers(3, 9))
    effects = rng.normal(0.3, 0.6, size=n)
    ses = rng.uniform(0.05, 0.8, size=n)
    studies = tuple(
        Study(label=f"s{i + 1}", effect=float(effects[i]), se=float(ses[i]))
        for i in range(n)
    )
    from metarep.meta import Measure

    return StudySet(studies=studies, measure=measure or Measure.DIFFERENCE)


def write_csv(path, rows, header="label,measure,effect,se,ci_low,ci_high,ci_level"):
    """Write a study CSV fixture; rows are comma-joined strings."""
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


RATIO_FIXTURE_ROWS = (
    "alpha,HR,0.79,,0.62,0.99,0.95",
    "bravo,HR,0.94,0.12,,,",
    "charlie,HR,0.70,,0.52,0.95,0.95",
    "delta,HR,1.05,0.20,,,",
    "echo,HR,0.85,,0.66,1.10,0.95",
)


def ratio_fixture(path):
    """A 5-study hazard-ratio CSV used across CLI and report tests."""
    return write_csv(path, RATIO_FIXTURE_ROWS)

"""Human-facing output: forest plots, summary sentences, JSON payloads.

The forest plot is emitted as a self-contained SVG string built from fixed
geometry, so the same inputs always yield the identical document (no font
metrics or library state involved). Effects are drawn on the analysis
scale; for ratio measures the axis ticks are labelled on the ratio scale.
"""

from __future__ import annotations

import dataclasses
import json
import math
from enum import Enum
from typing import Optional, Sequence
from xml.sax.saxutils import escape

from .errors import PreconditionError
from .meta import Measure, MetaResult, StudySet
from .replicability import RValueResult

__all__ = [
    "format_rvalue",
    "rvalue_clause",
    "report_sentence",
    "render_forest_plot",
    "to_jsonable",
    "serialize_results",
]

REPLICATED_SENTENCE = (
    "This result was replicated in more than one study ({clause})."
)
NOT_REPLICATED_SENTENCE = (
    "We cannot rule out the possibility that this result is based on "
    "a single study ({clause})."
)


def format_rvalue(r: float) -> str:
    """Display form of an r-value: 4 decimal places, floored at 0.0001.

    Trailing zeros are dropped, so 0.2400 renders as "0.24" and 1.0000
    as "1". Values below 0.0001 render as "<0.0001".
    """
    if not (0.0 <= r <= 1.0):
        raise PreconditionError(f"r-value must lie in [0, 1], got {r!r}")
    if r < 1e-4:
        return "<0.0001"
    return f"{r:.4f}".rstrip("0").rstrip(".")


def rvalue_clause(r: float) -> str:
    """The parenthetical, e.g. "r-value = 0.0355" or "r-value < 0.0001"."""
    text = format_rvalue(r)
    if text == "<0.0001":
        return "r-value < 0.0001"
    return f"r-value = {text}"


def report_sentence(rvalue: RValueResult, alpha: float = 0.05) -> str:
    """Plain-language replicability statement for a u=2 r-value."""
    template = REPLICATED_SENTENCE if rvalue.r_two <= alpha else NOT_REPLICATED_SENTENCE
    return template.format(clause=rvalue_clause(rvalue.r_two))


# --- JSON ---------------------------------------------------------------------

def to_jsonable(obj):
    """Recursively convert results (dataclasses, enums, tuples) to JSON types.

    Non-finite floats become null; JSON has no representation for them and
    the only one we produce is the infinite df of the z-based models.
    """
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            field.name: to_jsonable(getattr(obj, field.name))
            for field in dataclasses.fields(obj)
        }
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(item) for item in obj]
    if isinstance(obj, dict):
        return {str(key): to_jsonable(value) for key, value in obj.items()}
    return obj


def serialize_results(payload) -> str:
    """Canonical JSON text: sorted keys, two-space indent, full precision."""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2) + "\n"


# --- forest plot --------------------------------------------------------------

FONT_SIZE = 12
CHAR_W = 7.2  # monospace advance at FONT_SIZE
ROW_H = 24
PLOT_W = 420.0
MARKER_MAX_SIDE = 12.0

AXIS_COLOR = "#333333"
MARKER_COLOR = "#2b5d8a"
DIAMOND_COLOR = "#8a2b2b"


def _fmt(x: float) -> str:
    """Stable coordinate formatting for SVG attributes."""
    return f"{x:.2f}"


def _display(value: float, measure: Measure) -> float:
    return math.exp(value) if measure is Measure.RATIO else value


def _nice_step(span: float, target: int) -> float:
    raw = span / target
    power = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * power >= raw:
            return mult * power
    return 10.0 * power


def _difference_ticks(lo: float, hi: float) -> list[tuple[float, str]]:
    step = _nice_step(hi - lo, 5)
    first = math.ceil(lo / step) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * step:
        shown = 0.0 if abs(value) < 1e-12 else value
        ticks.append((shown, f"{shown:g}"))
        value += step
    return ticks


def _ratio_ticks(lo: float, hi: float) -> list[tuple[float, str]]:
    # Candidate ratios at powers of two and ten; positions live on the
    # log scale, labels on the ratio scale.
    candidates = sorted({2.0**k for k in range(-6, 7)} | {10.0**k for k in range(-3, 4)})
    ticks = [
        (math.log(c), f"{c:g}") for c in candidates if lo <= math.log(c) <= hi
    ]
    if len(ticks) >= 2:
        return ticks
    return [(lo, f"{math.exp(lo):.2g}"), (hi, f"{math.exp(hi):.2g}")]


def render_forest_plot(
    studies: StudySet,
    result: MetaResult,
    rvalue: Optional[RValueResult] = None,
    title: str = "",
) -> str:
    """Forest plot of the study set with its summary, as an SVG string.

    Study markers are squares whose area is proportional to the synthesis
    weight 1/(se^2 + tau2); whiskers show per-study intervals at the
    summary's confidence level. The summary is the diamond spanning its
    interval. When `rvalue` is given, the studies discounted by the
    worst-case subsets are starred and the r-value is printed above the
    plot.
    """
    from .distributions import normal_quantile

    alpha = result.alpha
    z = normal_quantile(1.0 - alpha / 2.0)
    effects = studies.effects()
    ses = [s.se for s in studies.studies]
    ci_lows = [e - z * se for e, se in zip(effects, ses)]
    ci_highs = [e + z * se for e, se in zip(effects, ses)]

    lo = min(min(ci_lows), result.ci_low, 0.0)
    hi = max(max(ci_highs), result.ci_high, 0.0)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise PreconditionError("forest plot coordinates are not finite")
    span = hi - lo
    if span <= 0.0:
        raise PreconditionError("forest plot axis has zero width")
    lo -= 0.05 * span
    hi += 0.05 * span

    starred = set()
    if rvalue is not None:
        starred = set(rvalue.dropped_left) | set(rvalue.dropped_right)

    display_labels = [
        s.label + (" *" if s.label in starred else "") for s in studies.studies
    ]
    value_texts = [
        f"{_display(e, studies.measure):.2f} "
        f"[{_display(l, studies.measure):.2f}, {_display(h, studies.measure):.2f}]"
        for e, l, h in zip(effects, ci_lows, ci_highs)
    ]
    summary_text = (
        f"{_display(result.summary, studies.measure):.2f} "
        f"[{_display(result.ci_low, studies.measure):.2f}, "
        f"{_display(result.ci_high, studies.measure):.2f}]"
    )

    label_w = max(len(t) for t in display_labels + ["Summary"]) * CHAR_W + 16
    value_w = max(len(t) for t in value_texts + [summary_text]) * CHAR_W + 16
    plot_left = label_w
    plot_right = plot_left + PLOT_W
    top = 44 if (title or rvalue is not None) else 16
    n = studies.n
    axis_y = top + (n + 1) * ROW_H + 12
    footer = 18 if starred else 0
    height = axis_y + 34 + footer
    width = plot_right + value_w

    def x(v: float) -> float:
        return plot_left + (v - lo) / (hi - lo) * PLOT_W

    weights = [1.0 / (se * se + result.tau2) for se in ses]
    w_max = max(weights)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}" '
        f'font-family="monospace" font-size="{FONT_SIZE}">',
        f'<rect x="0" y="0" width="{_fmt(width)}" height="{_fmt(height)}" fill="white"/>',
    ]
    if title:
        out.append(
            f'<text x="{_fmt(plot_left)}" y="18" font-weight="bold">{escape(title)}</text>'
        )
    if rvalue is not None:
        text = format_rvalue(rvalue.r_two)
        op, shown = ("<", "0.0001") if text == "<0.0001" else ("=", text)
        note = f"r-value (u={rvalue.u}) {op} {shown}"
        out.append(
            f'<text x="{_fmt(plot_right)}" y="18" text-anchor="end">{escape(note)}</text>'
        )

    # null effect reference line
    x_null = x(0.0)
    out.append(
        f'<line x1="{_fmt(x_null)}" y1="{_fmt(top - 6)}" x2="{_fmt(x_null)}" '
        f'y2="{_fmt(axis_y)}" stroke="{AXIS_COLOR}" stroke-dasharray="4 3"/>'
    )

    for i, study in enumerate(studies.studies):
        y = top + i * ROW_H + ROW_H / 2.0
        side = MARKER_MAX_SIDE * math.sqrt(weights[i] / w_max)
        out.append(
            f'<text x="8" y="{_fmt(y + 4)}">{escape(display_labels[i])}</text>'
        )
        out.append(
            f'<line x1="{_fmt(x(ci_lows[i]))}" y1="{_fmt(y)}" '
            f'x2="{_fmt(x(ci_highs[i]))}" y2="{_fmt(y)}" stroke="{AXIS_COLOR}"/>'
        )
        out.append(
            f'<rect x="{_fmt(x(effects[i]) - side / 2.0)}" y="{_fmt(y - side / 2.0)}" '
            f'width="{_fmt(side)}" height="{_fmt(side)}" fill="{MARKER_COLOR}"/>'
        )
        out.append(
            f'<text x="{_fmt(plot_right + 8)}" y="{_fmt(y + 4)}">'
            f"{escape(value_texts[i])}</text>"
        )

    # summary diamond
    y = top + n * ROW_H + ROW_H / 2.0
    half_h = 7.0
    points = " ".join(
        f"{_fmt(px)},{_fmt(py)}"
        for px, py in (
            (x(result.ci_low), y),
            (x(result.summary), y - half_h),
            (x(result.ci_high), y),
            (x(result.summary), y + half_h),
        )
    )
    out.append(f'<text x="8" y="{_fmt(y + 4)}">Summary</text>')
    out.append(f'<polygon points="{points}" fill="{DIAMOND_COLOR}"/>')
    out.append(
        f'<text x="{_fmt(plot_right + 8)}" y="{_fmt(y + 4)}">{escape(summary_text)}</text>'
    )

    # axis with scale-appropriate ticks
    out.append(
        f'<line x1="{_fmt(plot_left)}" y1="{_fmt(axis_y)}" '
        f'x2="{_fmt(plot_right)}" y2="{_fmt(axis_y)}" stroke="{AXIS_COLOR}"/>'
    )
    if studies.measure is Measure.RATIO:
        ticks = _ratio_ticks(lo, hi)
    else:
        ticks = _difference_ticks(lo, hi)
    for pos, label in ticks:
        tx = x(pos)
        out.append(
            f'<line x1="{_fmt(tx)}" y1="{_fmt(axis_y)}" x2="{_fmt(tx)}" '
            f'y2="{_fmt(axis_y + 5)}" stroke="{AXIS_COLOR}"/>'
        )
        out.append(
            f'<text x="{_fmt(tx)}" y="{_fmt(axis_y + 18)}" text-anchor="middle">'
            f"{escape(label)}</text>"
        )
    if starred:
        out.append(
            f'<text x="8" y="{_fmt(axis_y + 32 + 14)}" font-style="italic">'
            "* discounted by the worst-case subset at this u</text>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"

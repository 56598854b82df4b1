"""Monte-Carlo study of type-I error when one study drives the effect.

Each cell of the grid fixes (N, tau2, mu_N). Per iteration, N-1 study
means are drawn from Normal(0, tau2); the last study is the potential
single driver. In the null cell (mu_N = 0) its mean is drawn from the
same Normal(0, tau2), so the no-effect world is exchangeable and the
t-test below is an exact 0.05-level test. In alternative cells
(mu_N > 0) the last mean is pinned at mu_N exactly: one study with a
fixed nonzero effect among N-1 studies that average to nothing.
Observed effects add Normal(0, within_sd^2) noise either way.

Two one-sided tests of "no positive effect" are applied to each sample:

* ``z_higgins`` -- the production DerSimonian-Laird random-effects z path
  with every within-study se equal to `within_sd`,
* ``t_plain``   -- a one-sample t-test on the observed effects, N-1 df.

At mu_N = 0 the z-test over-rejects for small N while the t-test sits at
the nominal level; for moderate mu_N > 0 both reject well above 0.05
even though only a single study carries the effect. That contrast is
the point of the study.

Every cell has its own RNG stream derived from (seed, N, tau2, mu_N), so
results are reproducible cell by cell and independent of execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .distributions import normal_sf, t_sf
from .errors import InvalidInputError
from .meta import random_z_stat

__all__ = [
    "TestKind",
    "SimConfig",
    "GridCell",
    "SimulationGrid",
    "desk_config",
    "full_config",
    "run_simulation",
    "emit_grid",
]

DEFAULT_SEED = 1729

FULL_N = (3, 5, 7, 9, 20)
FULL_TAU2 = (0.01, 0.04, 0.09, 0.25, 0.49, 1.0)
FULL_MU_GRID = tuple(i / 20.0 for i in range(101))

DESK_N = (3, 9)
DESK_TAU2 = (0.01, 0.25)
DESK_MU_GRID = (0.0, 0.1, 0.3, 1.0)


class TestKind(str, Enum):
    __test__ = False  # keep pytest collection away from the name

    Z_HIGGINS = "z_higgins"
    T_PLAIN = "t_plain"


@dataclass(frozen=True)
class SimConfig:
    """Grid and sampling parameters of the rejection-rate study."""

    n_values: tuple[int, ...] = FULL_N
    tau2_values: tuple[float, ...] = FULL_TAU2
    mu_n_grid: tuple[float, ...] = FULL_MU_GRID
    within_sd: float = 0.01
    iterations: int = 10_000
    alpha: float = 0.05
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        for name in ("n_values", "tau2_values", "mu_n_grid"):
            if not isinstance(getattr(self, name), tuple):
                object.__setattr__(self, name, tuple(getattr(self, name)))
        if not self.n_values or not self.tau2_values or not self.mu_n_grid:
            raise InvalidInputError("simulation grid must be nonempty")
        if any(n < 2 for n in self.n_values):
            raise InvalidInputError("each N must be at least 2")
        if any(not (math.isfinite(t) and t >= 0.0) for t in self.tau2_values):
            raise InvalidInputError("tau2 values must be nonnegative and finite")
        if any(not math.isfinite(m) for m in self.mu_n_grid):
            raise InvalidInputError("mu_N values must be finite")
        if not (math.isfinite(self.within_sd) and self.within_sd > 0.0):
            raise InvalidInputError("within_sd must be positive")
        if self.iterations < 1:
            raise InvalidInputError("iterations must be at least 1")
        if not (0.0 < self.alpha < 1.0):
            raise InvalidInputError("alpha must lie in (0, 1)")


def desk_config(seed: int = DEFAULT_SEED, iterations: int = 10_000) -> SimConfig:
    """Small grid that finishes in seconds; used by the test suite."""
    return SimConfig(
        n_values=DESK_N,
        tau2_values=DESK_TAU2,
        mu_n_grid=DESK_MU_GRID,
        iterations=iterations,
        seed=seed,
    )


def full_config(seed: int = DEFAULT_SEED) -> SimConfig:
    """The complete grid; takes minutes rather than seconds."""
    return SimConfig(seed=seed)


@dataclass(frozen=True)
class GridCell:
    test: TestKind
    n: int
    tau2: float
    mu_n: float
    fraction: float
    mc_se: float


@dataclass(frozen=True)
class SimulationGrid:
    """Rejection-rate estimates for every (test, N, tau2, mu_N) cell."""

    config: SimConfig
    cells: tuple[GridCell, ...]

    def fraction(self, test: TestKind, n: int, tau2: float, mu_n: float) -> float:
        for cell in self.cells:
            if (
                cell.test is test
                and cell.n == n
                and cell.tau2 == tau2
                and cell.mu_n == mu_n
            ):
                return cell.fraction
        raise KeyError(f"no cell ({test.value}, N={n}, tau2={tau2}, mu_N={mu_n})")

    def to_csv(self) -> str:
        lines = ["test,N,tau2,mu_n,fraction,mc_se"]
        for cell in self.cells:
            lines.append(
                f"{cell.test.value},{cell.n},{cell.tau2!r},{cell.mu_n!r},"
                f"{cell.fraction!r},{cell.mc_se!r}"
            )
        return "\n".join(lines) + "\n"


def _cell_rng(seed: int, n: int, tau2: float, mu_n: float) -> np.random.Generator:
    # Stream identity is the cell coordinates, so any subset of the grid
    # reproduces the same numbers as a full run.
    entries = [
        seed & (2**64 - 1),
        n,
        int(round(tau2 * 1e6)),
        int(round(mu_n * 1e6)),
    ]
    return np.random.default_rng(np.random.SeedSequence(entries))


def _simulate_cell(
    config: SimConfig, n: int, tau2: float, mu_n: float
) -> tuple[float, float, float, float]:
    """(z fraction, z mc se, t fraction, t mc se) for one grid cell."""
    rng = _cell_rng(config.seed, n, tau2, mu_n)
    iters = config.iterations
    sd = config.within_sd
    variances = [sd * sd] * n
    df = n - 1
    alpha = config.alpha

    means = np.empty((iters, n))
    means[:, : n - 1] = rng.normal(0.0, math.sqrt(tau2), size=(iters, n - 1))
    if mu_n == 0.0:
        # Exchangeable null: the would-be driver is a study like any other.
        means[:, n - 1] = rng.normal(0.0, math.sqrt(tau2), size=iters)
    else:
        means[:, n - 1] = mu_n
    observed = means + rng.normal(0.0, sd, size=(iters, n))
    rows = observed.tolist()

    z_reject = 0
    t_reject = 0
    for row in rows:
        summary, se, _ = random_z_stat(row, variances)
        if normal_sf(summary / se) <= alpha:
            z_reject += 1
        mean = math.fsum(row) / n
        s2 = math.fsum((x - mean) ** 2 for x in row) / df
        if s2 == 0.0:
            if mean > 0.0:
                t_reject += 1
            continue
        stat = mean / math.sqrt(s2 / n)
        if t_sf(stat, df) <= alpha:
            t_reject += 1

    def with_se(count: int) -> tuple[float, float]:
        p = count / iters
        return p, math.sqrt(p * (1.0 - p) / iters)

    zf, zs = with_se(z_reject)
    tf, ts = with_se(t_reject)
    return zf, zs, tf, ts


def run_simulation(config: SimConfig) -> SimulationGrid:
    """Run every grid cell; deterministic given the config (incl. seed)."""
    cells: list[GridCell] = []
    for n in config.n_values:
        for tau2 in config.tau2_values:
            for mu_n in config.mu_n_grid:
                zf, zs, tf, ts = _simulate_cell(config, n, tau2, mu_n)
                cells.append(
                    GridCell(TestKind.Z_HIGGINS, n, tau2, mu_n, zf, zs)
                )
                cells.append(GridCell(TestKind.T_PLAIN, n, tau2, mu_n, tf, ts))
    return SimulationGrid(config=config, cells=tuple(cells))


# --- output -------------------------------------------------------------------

_LINE_COLORS = ("#2b5d8a", "#8a2b2b", "#2b8a5d", "#8a7a2b", "#5d2b8a", "#555555")

_CHART_W = 480.0
_CHART_H = 300.0
_MARGIN_L = 52.0
_MARGIN_R = 110.0
_MARGIN_T = 30.0
_MARGIN_B = 40.0


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _render_chart(
    test: TestKind, tau2: float, series: dict[int, list[tuple[float, float]]]
) -> str:
    """Line chart of rejection fraction vs mu_N, one polyline per N."""
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x_lo, x_hi = min(xs), max(xs)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    y_hi = max(0.2, max(ys) * 1.05)

    plot_w = _CHART_W - _MARGIN_L - _MARGIN_R
    plot_h = _CHART_H - _MARGIN_T - _MARGIN_B

    def px(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def py(y: float) -> float:
        return _MARGIN_T + (1.0 - y / y_hi) * plot_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(_CHART_W)}" '
        f'height="{_fmt(_CHART_H)}" viewBox="0 0 {_fmt(_CHART_W)} {_fmt(_CHART_H)}" '
        'font-family="monospace" font-size="11">',
        f'<rect x="0" y="0" width="{_fmt(_CHART_W)}" height="{_fmt(_CHART_H)}" fill="white"/>',
        f'<text x="{_fmt(_MARGIN_L)}" y="18">{test.value}, tau2 = {tau2:g}</text>',
        f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(py(0.0))}" x2="{_fmt(_MARGIN_L + plot_w)}" '
        f'y2="{_fmt(py(0.0))}" stroke="#333333"/>',
        f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(py(0.0))}" x2="{_fmt(_MARGIN_L)}" '
        f'y2="{_fmt(_MARGIN_T)}" stroke="#333333"/>',
    ]
    # nominal level reference
    out.append(
        f'<line x1="{_fmt(_MARGIN_L)}" y1="{_fmt(py(0.05))}" '
        f'x2="{_fmt(_MARGIN_L + plot_w)}" y2="{_fmt(py(0.05))}" '
        'stroke="#999999" stroke-dasharray="4 3"/>'
    )
    for frac in (0.0, 0.05, 0.1, 0.15, 0.2):
        if frac > y_hi:
            continue
        out.append(
            f'<text x="{_fmt(_MARGIN_L - 6)}" y="{_fmt(py(frac) + 4)}" '
            f'text-anchor="end">{frac:g}</text>'
        )
    n_x_ticks = min(6, len({x for x in xs}))
    for i in range(n_x_ticks):
        x = x_lo + (x_hi - x_lo) * i / max(1, n_x_ticks - 1)
        out.append(
            f'<text x="{_fmt(px(x))}" y="{_fmt(py(0.0) + 16)}" '
            f'text-anchor="middle">{x:g}</text>'
        )
    out.append(
        f'<text x="{_fmt(_MARGIN_L + plot_w / 2)}" y="{_fmt(_CHART_H - 8)}" '
        'text-anchor="middle">mu_N</text>'
    )
    for idx, (n, pts) in enumerate(sorted(series.items())):
        color = _LINE_COLORS[idx % len(_LINE_COLORS)]
        coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in pts)
        out.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        legend_y = _MARGIN_T + 14 * idx + 10
        out.append(
            f'<line x1="{_fmt(_CHART_W - _MARGIN_R + 8)}" y1="{_fmt(legend_y - 4)}" '
            f'x2="{_fmt(_CHART_W - _MARGIN_R + 28)}" y2="{_fmt(legend_y - 4)}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{_fmt(_CHART_W - _MARGIN_R + 34)}" y="{_fmt(legend_y)}">N = {n}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_grid(grid: SimulationGrid, out_dir: Union[str, Path]) -> list[Path]:
    """Write grid.csv plus one rejection chart per (tau2, test) pair.

    Returns the written paths, CSV first, charts in grid order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    csv_path = out_dir / "grid.csv"
    csv_path.write_text(grid.to_csv(), encoding="utf-8")
    paths.append(csv_path)
    for tau2 in grid.config.tau2_values:
        for test in (TestKind.Z_HIGGINS, TestKind.T_PLAIN):
            series: dict[int, list[tuple[float, float]]] = {}
            for cell in grid.cells:
                if cell.test is test and cell.tau2 == tau2:
                    series.setdefault(cell.n, []).append((cell.mu_n, cell.fraction))
            chart_path = out_dir / f"rejections_{test.value}_tau2_{tau2:g}.svg"
            chart_path.write_text(_render_chart(test, tau2, series), encoding="utf-8")
            paths.append(chart_path)
    return paths

"""The generalized metric space of maps vanishing at 0, on a dyadic sample grid.

The grid is ``{2^k b : b in base points, -N <= k <= N} U {0}``. Doubling and
halving a grid point is an index shift, so the contraction operators

    (J g)(x) = g(2x) / 2     (doubling)
    (J g)(x) = 2 g(x/2)      (halving)

act on tabulated maps by relabeling and a single exact multiplication. A
tabulated map only covers a window ``lo <= k <= hi`` of scales; each
application of J shrinks the window by one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .control import DOUBLING, HALVING
from .cstar_core import INFINITY, StabilityError
from .module_space import ModuleSpace

NORM_CYCLE = (0.25, 1.0, 4.0)


class GridMismatch(StabilityError):
    pass


class DepthExhausted(StabilityError):
    pass


@dataclass(frozen=True, eq=False)
class SampleGrid:
    space: ModuleSpace
    base_points: np.ndarray
    scale_depth: int
    seed: int = 0

    def __post_init__(self):
        if self.scale_depth < 1:
            raise ValueError("scale_depth must be >= 1")
        base = np.asarray(self.base_points, dtype=complex)
        self.space.check(base)
        if np.any(self.space.norm(base) == 0):
            raise ValueError("base points must be nonzero")
        object.__setattr__(self, "base_points", base)
        scales = 2.0 ** np.arange(-self.scale_depth, self.scale_depth + 1)
        pad = (None, slice(None)) + (None,) * len(self.space.shape)
        points = base[:, None] * scales[pad]
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "norms", np.asarray(self.space.norm(points), dtype=float))

    @classmethod
    def generate(cls, space: ModuleSpace, count: int = 8, scale_depth: int = 12, seed: int = 0):
        """Seeded base points with norms cycling through 0.25, 1, 4."""
        rng = np.random.default_rng(seed)
        raw = space.random_element(rng, count)
        target = np.array([NORM_CYCLE[i % len(NORM_CYCLE)] for i in range(count)])
        scale = target / np.asarray(space.norm(raw), dtype=float)
        pad = (slice(None),) + (None,) * len(space.shape)
        return cls(space, raw * scale[pad], scale_depth, seed)

    @property
    def width(self) -> int:
        return 2 * self.scale_depth + 1

    def labels(self) -> list:
        """Canonical order: zero first, then base-major, scale-minor."""
        n = self.scale_depth
        return [None] + [(b, k) for b in range(len(self.base_points)) for k in range(-n, n + 1)]

    def point(self, label) -> np.ndarray:
        if label is None:
            return self.space.zero()
        b, k = label
        return self.points[b, k + self.scale_depth]

    def norm_at(self, label) -> float:
        if label is None:
            return 0.0
        b, k = label
        return float(self.norms[b, k + self.scale_depth])

    def all_norms(self) -> np.ndarray:
        return self.norms.reshape(-1)

    def base_norms(self) -> np.ndarray:
        return self.norms[:, self.scale_depth]

    def window(self, lo: int, hi: int) -> slice:
        return slice(lo + self.scale_depth, hi + self.scale_depth + 1)


@dataclass(frozen=True, eq=False)
class TabulatedMap:
    """Values of a map g with g(0) = 0 on the grid scales lo..hi."""

    grid: SampleGrid
    values: np.ndarray
    lo: int
    hi: int

    @classmethod
    def tabulate(cls, f, grid: SampleGrid) -> "TabulatedMap":
        vals = np.asarray(f(grid.points), dtype=complex)
        return cls(grid, vals, -grid.scale_depth, grid.scale_depth)

    def at(self, b: int, k: int) -> np.ndarray:
        return self.values[b, k - self.lo]


def _psi_table(psi, grid: SampleGrid, lo: int, hi: int) -> np.ndarray:
    if isinstance(psi, np.ndarray):
        return psi[:, grid.window(lo, hi)]
    if hasattr(psi, "of_norm"):
        return np.asarray(psi.of_norm(grid.norms[:, grid.window(lo, hi)]), dtype=float)
    pts = grid.points[:, grid.window(lo, hi)]
    return np.array([[psi(x) for x in row] for row in pts], dtype=float)


def gen_distance(g: TabulatedMap, h: TabulatedMap, psi) -> float:
    """inf{c : ||g(x) - h(x)|| <= c psi(x) on the grid}, possibly INFINITY.

    Computed on the scales both maps cover, plus the origin where both vanish.
    ``psi`` is a callable, an object with ``of_norm``, or a table over the
    full grid.
    """
    if g.grid is not h.grid:
        raise GridMismatch("maps are tabulated on different grids")
    lo, hi = max(g.lo, h.lo), min(g.hi, h.hi)
    if lo > hi:
        raise GridMismatch("maps share no grid scales")
    grid = g.grid
    diff = g.values[:, lo - g.lo : hi - g.lo + 1] - h.values[:, lo - h.lo : hi - h.lo + 1]
    gap = np.asarray(grid.space.norm(diff), dtype=float)
    weight = _psi_table(psi, grid, lo, hi)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(gap == 0.0, 0.0, np.where(weight > 0, gap / weight, INFINITY))
    return float(np.max(ratio, initial=0.0))


def apply_J(g: TabulatedMap, regime: str) -> TabulatedMap:
    if g.hi <= g.lo:
        raise DepthExhausted("grid depth exhausted: no scales left to shift")
    if regime == DOUBLING:
        return TabulatedMap(g.grid, 0.5 * g.values[:, 1:], g.lo, g.hi - 1)
    if regime == HALVING:
        return TabulatedMap(g.grid, 2.0 * g.values[:, :-1], g.lo + 1, g.hi)
    raise ValueError(f"unknown regime {regime!r}")


def random_tabulated(grid: SampleGrid, rng: np.random.Generator, psi, spread: float = 2.0) -> TabulatedMap:
    """A random element of S whose distance from 0 is finite and O(spread)."""
    n = grid.scale_depth
    weight = _psi_table(psi, grid, -n, n)
    raw = grid.space.random_element(rng, weight.shape)
    factor = spread * rng.uniform(size=weight.shape) * weight
    pad = (...,) + (None,) * len(grid.space.shape)
    return TabulatedMap(grid, raw * factor[pad], -n, n)


@dataclass
class ContractionReport:
    L: float
    pairs: int
    max_violation: float
    violations: int
    ratios: list[float]

    @property
    def passed(self) -> bool:
        return self.violations == 0


def contraction_check(pairs, psi, regime: str, L: float, slack: float = 1e-12) -> ContractionReport:
    """Check d(Jg, Jh) <= L d(g, h) + slack for every pair."""
    worst, bad, ratios = -INFINITY, 0, []
    for g, h in pairs:
        before = gen_distance(g, h, psi)
        after = gen_distance(apply_J(g, regime), apply_J(h, regime), psi)
        bound = L * before
        excess = after - bound if math.isfinite(bound) else -INFINITY
        worst = max(worst, excess)
        bad += excess > slack
        ratios.append(after / before if 0 < before < INFINITY else 0.0)
    return ContractionReport(L, len(ratios), worst, bad, ratios)


@dataclass
class OrbitReport:
    distances: list[float]
    branch: str  # "A1": every distance infinite; "A2": finite from n0 on
    n0: int | None
    contraction_ok: bool


def orbit_distances(f: TabulatedMap, psi, regime: str, steps: int, L: float | None = None) -> OrbitReport:
    """d_n = d(J^n f, J^(n+1) f) for n < steps, with the alternative classified."""
    if steps > f.hi - f.lo:
        raise DepthExhausted(f"{steps} steps need {steps + 1} scales, grid window has {f.hi - f.lo + 1}")
    dists = []
    cur = f
    for _ in range(steps):
        nxt = apply_J(cur, regime)
        dists.append(gen_distance(cur, nxt, psi))
        cur = nxt
    n0 = None
    for i in range(len(dists) - 1, -1, -1):
        if math.isinf(dists[i]):
            break
        n0 = i
    branch = "A2" if n0 is not None else "A1"
    ok = True
    if L is not None:
        ok = all(
            b <= L * a + 1e-12 for a, b in zip(dists, dists[1:]) if math.isfinite(a)
        )
    return OrbitReport(dists, branch, n0, ok)

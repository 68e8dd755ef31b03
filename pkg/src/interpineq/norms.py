"""Norm functionals of piecewise-constant fields.

All integrals are finite sums over cells.  Suprema over cubes run over a
finite :class:`CubeFamily` inside the field's box, so BMO and Morrey values
are lower bounds for the corresponding sup over every cube of R^n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .lattice import PiecewiseConstantField, Region

DEFAULT_MAX_CELL_VISITS = 10**8
_CHUNK_ELEMENTS = 1 << 22


class FamilyBudgetError(RuntimeError):
    """Enumerating the cube family would exceed its cell-visit budget."""


@dataclass(frozen=True)
class CubeFamily:
    """Finite family of cubes standing in for "all cubes".

    ``dyadic_only`` takes every dyadic cube of the grid; ``grid_aligned``
    takes every cube whose corners are grid nodes.  ``max_cell_visits``
    bounds the work of cell-by-cell functionals (BMO, weak Morrey).
    """

    strategy: str = "grid_aligned"
    max_cell_visits: int = DEFAULT_MAX_CELL_VISITS

    def __post_init__(self):
        if self.strategy not in ("dyadic_only", "grid_aligned"):
            raise ValueError(f"unknown cube family strategy {self.strategy!r}")

    def widths(self, grid_level: int) -> list[int]:
        n = 1 << grid_level
        if self.strategy == "dyadic_only":
            return [n >> k for k in range(grid_level + 1)]
        return list(range(1, n + 1))

    def positions(self, grid_level: int, width: int) -> int:
        """Number of cube positions per axis for cubes of ``width`` cells."""
        n = 1 << grid_level
        if self.strategy == "dyadic_only":
            return n // width
        return n - width + 1

    def cell_visits(self, grid_level: int, dim: int) -> int:
        return sum(
            (self.positions(grid_level, w) * w) ** dim for w in self.widths(grid_level)
        )

    def check_budget(self, f: PiecewiseConstantField) -> None:
        visits = self.cell_visits(f.grid_level, f.dim)
        if visits > self.max_cell_visits:
            raise FamilyBudgetError(
                f"{self.strategy} family on a level-{f.grid_level} grid in dim {f.dim} "
                f"needs {visits} cell visits (cap {self.max_cell_visits})"
            )


DYADIC = CubeFamily("dyadic_only")
GRID_ALIGNED = CubeFamily("grid_aligned")


def _check_p(p: float) -> None:
    if not p >= 1:
        raise ValueError(f"exponent must satisfy p >= 1, got {p}")


def _check_kappa(kappa: float) -> None:
    if not 0 <= kappa <= 1:
        raise ValueError(f"kappa must lie in [0, 1], got {kappa}")


# -- distribution-based norms -------------------------------------------------


@dataclass(frozen=True)
class DistributionBreakpoints:
    """Distinct positive values of ``|f|`` with their tail measures.

    ``values`` is strictly decreasing; ``tail[i] = |{|f| >= values[i]}|``.
    """

    values: np.ndarray
    tail: np.ndarray

    @property
    def entries(self) -> list[tuple[float, float]]:
        return [(float(v), float(m)) for v, m in zip(self.values, self.tail)]

    def __len__(self):
        return len(self.values)

    def d(self, lam: float) -> float:
        """Distribution function ``|{|f| > lam}|``."""
        above = self.values > lam
        if not above.any():
            return 0.0
        # values decrease, so the last True is the smallest value above lam
        return float(self.tail[np.flatnonzero(above)[-1]])


def _abs_region(f: PiecewiseConstantField, region: Region | None) -> np.ndarray:
    vals = f.values if region is None else f.region_values(region)
    return np.abs(vals).reshape(-1)


def distribution(f: PiecewiseConstantField, region: Region | None = None) -> DistributionBreakpoints:
    if region is None:
        s = f.sorted_abs()
    else:
        a = _abs_region(f, region)
        s = np.sort(a[a > 0])[::-1]
    if s.size == 0:
        return DistributionBreakpoints(np.empty(0), np.empty(0))
    # last position of each distinct value in the decreasing order
    last = np.flatnonzero(np.r_[s[1:] != s[:-1], True])
    return DistributionBreakpoints(s[last], (last + 1) * f.cell_measure)


def lp_norm(f: PiecewiseConstantField, p: float) -> float:
    _check_p(p)
    a = np.abs(f.flat)
    top = a.max(initial=0.0)
    if top == 0.0:
        return 0.0
    # scaled by the max so that large p cannot overflow
    s = float(np.sum((a / top) ** p)) * f.cell_measure
    return top * s ** (1.0 / p)


def linf_norm(f: PiecewiseConstantField) -> float:
    return float(np.abs(f.flat).max(initial=0.0))


def weak_lp_norm(f: PiecewiseConstantField, p: float) -> float:
    """``sup_lam lam * d_f(lam)**(1/p)``.

    For a simple function the supremum is ``max_v v * |{|f| >= v}|**(1/p)``
    over its distinct values ``v`` (approached as ``lam`` rises to ``v``).
    """
    _check_p(p)
    dist = distribution(f)
    if len(dist) == 0:
        return 0.0
    return float(np.max(dist.values * dist.tail ** (1.0 / p)))


def layer_cake_lq(f: PiecewiseConstantField, q: float) -> float:
    """L^q norm evaluated through the distribution function.

    ``||f||_q^q = int_0^inf q lam^(q-1) d_f(lam) dlam``; between consecutive
    breakpoints ``d_f`` is constant, so the integral is
    ``sum_j m_j (v_j^q - v_{j-1}^q)`` with ``v_0 = 0``.
    """
    _check_p(q)
    dist = distribution(f)
    if len(dist) == 0:
        return 0.0
    top = dist.values[0]
    m = dist.tail
    # log of v_j / top, decreasing from 0
    lu = np.log(dist.values / top)
    below = np.append(lu[1:], -np.inf)
    # u_j^q - u_{j+1}^q = u_j^q (1 - (u_{j+1}/u_j)^q), without cancellation
    incr = -np.expm1(q * (below - lu)) * np.exp(q * lu)
    # non-negative terms: pairwise summation loses nothing to cancellation
    return float(top * float(np.sum(m * incr)) ** (1.0 / q))


# -- cube-family functionals -------------------------------------------------


def mean_oscillation(f: PiecewiseConstantField, cube: Region) -> float:
    """``(1/|Q|) int_Q |f - f_Q|``."""
    vals = f.region_values(cube)
    return float(np.mean(np.abs(vals - vals.mean())))


def _dyadic_blocks(values: np.ndarray, width: int) -> np.ndarray:
    """Reshape to ``(num_blocks, width**n)`` with one row per dyadic cube."""
    n = values.ndim
    k = values.shape[0] // width
    shaped = values.reshape(sum(((k, width) for _ in range(n)), ()))
    order = tuple(range(0, 2 * n, 2)) + tuple(range(1, 2 * n, 2))
    return shaped.transpose(order).reshape(k**n, width**n)


def _window_chunks(values: np.ndarray, width: int) -> Iterator[np.ndarray]:
    """Yield ``(num_windows, width**n)`` arrays covering every grid-aligned cube of ``width``."""
    n = values.ndim
    view = sliding_window_view(values, (width,) * n)
    pos = view.shape[0]
    per_row = pos ** (n - 1) * width**n
    rows = max(1, _CHUNK_ELEMENTS // max(per_row, 1))
    for start in range(0, pos, rows):
        block = view[start : start + rows]
        yield block.reshape(-1, width**n)


def _cube_rows(values: np.ndarray, family: CubeFamily, width: int) -> Iterator[np.ndarray]:
    if family.strategy == "dyadic_only":
        yield _dyadic_blocks(values, width)
    else:
        yield from _window_chunks(values, width)


def bmo_norm(f: PiecewiseConstantField, family: CubeFamily = GRID_ALIGNED) -> float:
    """Largest mean oscillation over the cubes of ``family``."""
    family.check_budget(f)
    best = 0.0
    for w in family.widths(f.grid_level):
        if w == 1:
            continue
        for rows in _cube_rows(f.values, family, w):
            osc = np.mean(np.abs(rows - rows.mean(axis=1, keepdims=True)), axis=1)
            best = max(best, float(osc.max()))
    return best


def _max_window_sums(a: np.ndarray, family: CubeFamily, grid_level: int) -> dict[int, float]:
    """Largest sum of ``a`` over cubes of each width in the family."""
    n = a.ndim
    out = {}
    if family.strategy == "dyadic_only":
        for w in family.widths(grid_level):
            out[w] = float(_dyadic_blocks(a, w).sum(axis=1).max())
        return out
    # summed-area table in extended precision; window sums by inclusion-exclusion
    sat = np.zeros(tuple(s + 1 for s in a.shape), dtype=np.longdouble)
    inner = a.astype(np.longdouble)
    for ax in range(n):
        inner = np.cumsum(inner, axis=ax)
    sat[(slice(1, None),) * n] = inner
    size = a.shape[0]
    for w in family.widths(grid_level):
        pos = size - w + 1
        total = np.zeros((pos,) * n, dtype=np.longdouble)
        for corner in np.ndindex(*(2,) * n):
            sl = tuple(slice(w * c, w * c + pos) for c in corner)
            sign = -1 if (n - sum(corner)) % 2 else 1
            total += sign * sat[sl]
        out[w] = float(total.max())
    return out


def morrey_maxima(
    f: PiecewiseConstantField, p: float, family: CubeFamily = GRID_ALIGNED
) -> tuple[float, dict[int, float]]:
    """``(top, sums)`` with ``top**p * sums[w]`` the largest ``int_Q |f|^p`` over cubes of width ``w``.

    Sums are kept in units of ``top = max |f|`` so that large ``p`` cannot overflow.
    """
    _check_p(p)
    a = np.abs(f.values)
    top = float(a.max(initial=0.0))
    if top == 0.0:
        return 0.0, {}
    sums = _max_window_sums((a / top) ** p, family, f.grid_level)
    return top, {w: s * f.cell_measure for w, s in sums.items()}


def morrey_from_maxima(maxima, f: PiecewiseConstantField, p: float, kappa: float) -> float:
    _check_kappa(kappa)
    top, sums = maxima
    if not sums:
        return 0.0
    w = np.fromiter(sums.keys(), float)
    s = np.fromiter(sums.values(), float)
    best = float(np.max(s / (w**f.dim * f.cell_measure) ** kappa))
    return top * best ** (1.0 / p)


def morrey_norm(
    f: PiecewiseConstantField, p: float, kappa: float, family: CubeFamily = GRID_ALIGNED
) -> float:
    """``sup_Q (|Q|^-kappa int_Q |f|^p)^(1/p)`` over the family."""
    _check_kappa(kappa)
    return morrey_from_maxima(morrey_maxima(f, p, family), f, p, kappa)


def weak_morrey_maxima(f: PiecewiseConstantField, p: float, family: CubeFamily = GRID_ALIGNED) -> dict[int, float]:
    """``max_Q sup_lam lam |{y in Q: |f| > lam}|^(1/p)`` for each cube width."""
    _check_p(p)
    family.check_budget(f)
    a = np.abs(f.values)
    cm = f.cell_measure
    out = {}
    for w in family.widths(f.grid_level):
        k = w**f.dim
        # k-th largest value v has |{>= v}| >= k cells; ties only lower the max
        weight = (np.arange(1, k + 1) * cm) ** (1.0 / p)
        best = 0.0
        for rows in _cube_rows(a, family, w):
            desc = -np.sort(-rows, axis=1)
            best = max(best, float((desc * weight).max()))
        out[w] = best
    return out


def weak_morrey_from_maxima(maxima, f: PiecewiseConstantField, p: float, kappa: float) -> float:
    _check_kappa(kappa)
    if not maxima:
        return 0.0
    w = np.fromiter(maxima.keys(), float)
    m = np.fromiter(maxima.values(), float)
    return float(np.max(m * (w**f.dim * f.cell_measure) ** (-kappa / p)))


def weak_morrey_norm(
    f: PiecewiseConstantField, p: float, kappa: float, family: CubeFamily = GRID_ALIGNED
) -> float:
    """``sup_Q sup_lam |Q|^(-kappa/p) lam |{y in Q: |f| > lam}|^(1/p)`` over the family."""
    _check_kappa(kappa)
    return weak_morrey_from_maxima(weak_morrey_maxima(f, p, family), f, p, kappa)

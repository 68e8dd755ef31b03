"""Calderón–Zygmund stopping-time decomposition of ``|f|^p`` at a height.

Starting from a cube whose average of ``|f|^p`` is at most ``sigma``, every
dyadic child is selected the first time its average exceeds ``sigma``;
unselected cubes are split further down to the grid cells, and unselected
cells form the good set.  When the box itself averages above ``sigma`` the
field is treated as zero outside its box and the box is doubled (it stays
the lower-corner dyadic child) until the average drops to ``sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Box, DyadicCube, PiecewiseConstantField, integrate_abs_pow

MAX_DOUBLINGS = 20


class CzHeightError(ValueError):
    """The height stays below the box average even after maximal padding."""


@dataclass(frozen=True)
class CzDecomposition:
    """Selected cubes and good cells of one decomposition.

    ``selected`` are dyadic cubes of ``domain`` (the box doubled ``padding``
    times), sorted by level then index.  A field cell at index ``i`` is the
    domain cube of level ``grid_level + padding`` with the same index.
    ``good`` flags the field cells covered by no selected cube.
    """

    box: Box
    domain: Box
    padding: int
    grid_level: int
    selected: tuple[DyadicCube, ...]
    good: np.ndarray
    sigma: float
    p: float

    @property
    def good_set_cells(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.good)]

    @property
    def selected_measure(self) -> float:
        return sum(q.measure for q in self.selected)

    @property
    def good_measure(self) -> float:
        """Measure of the good set, including uncovered padding."""
        cm = float(self.box.exact_volume / (1 << (self.box.dim * self.grid_level)))
        inside = int(self.good.sum()) * cm
        covered_outside = sum(
            q.measure - self.box.volume for q in self.selected if q.level <= self.padding
        )
        return inside + self.domain.volume - self.box.volume - covered_outside

    def in_box_range(self, cube: DyadicCube) -> tuple[tuple[int, int], ...]:
        """Field-cell index ranges covered by a selected cube."""
        if cube.level <= self.padding:
            n = 1 << self.grid_level
            return ((0, n),) * self.box.dim
        local = DyadicCube(cube.level - self.padding, cube.index, self.box)
        return local.cell_range(self.grid_level)


def _pyramid(a: np.ndarray, grid_level: int) -> list[np.ndarray]:
    """``sums[L]`` holds the integral of ``a`` over each level-``L`` dyadic cube."""
    n = a.ndim
    sums = [None] * (grid_level + 1)
    sums[grid_level] = a
    cur = a
    for level in range(grid_level - 1, -1, -1):
        k = 1 << level
        cur = cur.reshape(sum(((k, 2) for _ in range(n)), ())).sum(axis=tuple(range(1, 2 * n, 2)))
        sums[level] = cur
    return sums


def _upsample(mask: np.ndarray) -> np.ndarray:
    for ax in range(mask.ndim):
        mask = np.repeat(mask, 2, axis=ax)
    return mask


def cz_decompose(
    f: PiecewiseConstantField, p: float, sigma: float, max_doublings: int = MAX_DOUBLINGS
) -> CzDecomposition:
    if not p >= 1:
        raise ValueError(f"exponent must satisfy p >= 1, got {p}")
    if not sigma > 0:
        raise ValueError(f"height must be positive, got {sigma}")
    n, M = f.dim, f.grid_level
    cm = f.cell_measure
    sums = _pyramid(np.abs(f.values) ** p * cm, M)
    total = float(sums[0].reshape(()))
    box_vol = f.box.volume

    padding = 0
    while total / (box_vol * 2.0 ** (n * padding)) > sigma:
        padding += 1
        if padding > max_doublings:
            raise CzHeightError(
                f"box average {total / box_vol:g} of |f|^{p} exceeds height {sigma:g} "
                f"even after {max_doublings} doublings"
            )
    domain = f.box
    for _ in range(padding):
        domain = domain.doubled()

    selected: list[DyadicCube] = []
    # ancestors of the box inside the padded domain: only the lower-corner child carries mass
    for level in range(1, padding + 1):
        avg = total / (box_vol * 2.0 ** (n * (padding - level)))
        if avg > sigma:
            selected.append(DyadicCube(level, (0,) * n, domain))
            return CzDecomposition(
                f.box, domain, padding, M, tuple(selected), np.zeros(f.values.shape, bool), sigma, p
            )

    active = np.ones((1,) * n, dtype=bool)
    for level in range(1, M + 1):
        cand = _upsample(active)
        measure = box_vol / 2.0 ** (n * level)
        hit = cand & (sums[level] / measure > sigma)
        for idx in np.argwhere(hit):
            selected.append(DyadicCube(level + padding, tuple(int(i) for i in idx), domain))
        active = cand & ~hit
    selected.sort(key=lambda q: (q.level, q.index))
    return CzDecomposition(f.box, domain, padding, M, tuple(selected), active, sigma, p)


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str
    cube: DyadicCube | None = None


def validate_cz(f: PiecewiseConstantField, p: float, d: CzDecomposition) -> list[Violation]:
    """Re-check every defining property of ``d`` from scratch; empty list iff valid."""
    out: list[Violation] = []
    n = f.dim
    if d.grid_level != f.grid_level or d.box != f.box or d.good.shape != f.values.shape:
        return [Violation("grid", "decomposition does not match the field grid")]
    cover = np.zeros(f.values.shape, dtype=np.int64)
    box_cube_count = 0
    for q in d.selected:
        if q.box != d.domain:
            out.append(Violation("cube", f"cube {q.level}/{q.index} not in the domain box", q))
            continue
        if q.level <= d.padding:
            if any(q.index):
                out.append(Violation("cube", f"padding cube {q.level}/{q.index} misses the box", q))
                continue
            box_cube_count += 1
            mass = integrate_abs_pow(f, p)
        else:
            shift = q.level - d.padding
            if any(i >> shift for i in q.index):
                # lies in the zero padding: average 0 can never exceed sigma
                out.append(Violation("bracket", f"cube {q.level}/{q.index} has average 0", q))
                continue
            if shift > f.grid_level:
                out.append(Violation("cube", f"cube {q.level}/{q.index} finer than the grid", q))
                continue
            mass = integrate_abs_pow(f, p, DyadicCube(shift, q.index, f.box))
        sl = tuple(slice(a, b) for a, b in d.in_box_range(q))
        cover[sl] += 1
        avg = mass / q.measure
        if not (d.sigma < avg <= 2**n * d.sigma):
            out.append(
                Violation(
                    "bracket",
                    f"cube {q.level}/{q.index}: average {avg!r} outside ({d.sigma!r}, {2**n * d.sigma!r}]",
                    q,
                )
            )
    if box_cube_count > 1:
        out.append(Violation("overlap", f"{box_cube_count} nested padding cubes selected"))

    bad_good = d.good & (np.abs(f.values) ** p > d.sigma)
    if bad_good.any():
        first = tuple(int(i) for i in np.argwhere(bad_good)[0])
        out.append(
            Violation("good", f"{int(bad_good.sum())} good cells exceed the height, first at {first}")
        )
    count = cover + d.good.astype(np.int64)
    if (count > 1).any():
        first = tuple(int(i) for i in np.argwhere(count > 1)[0])
        out.append(Violation("overlap", f"{int((count > 1).sum())} cells covered twice, first at {first}"))
    if (count == 0).any():
        first = tuple(int(i) for i in np.argwhere(count == 0)[0])
        out.append(Violation("tiling", f"{int((count == 0).sum())} cells uncovered, first at {first}"))
    return out


def cz_mass_bound(f: PiecewiseConstantField, p: float, d: CzDecomposition) -> float:
    """Total measure of the selected cubes, checked against ``int |f|^p / sigma``.

    With ``sigma = ||f||_BMO^p`` the bound reads ``(||f||_p / ||f||_BMO)^p``.
    """
    mass = d.selected_measure
    bound = integrate_abs_pow(f, p) / d.sigma
    if d.selected and not mass < bound:
        raise ValueError(f"selected measure {mass!r} not below {bound!r}")
    return mass

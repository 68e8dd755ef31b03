"""Dyadic grids over boxes, cubes on those grids, and piecewise-constant fields.

A field of grid level ``M`` on an ``n``-dimensional box stores one value per
level-``M`` cell in a numpy array of shape ``(2**M,) * n``.  Flattening that
array in C order gives the lexicographic cell order used by the field file
format (first index varies slowest).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Sequence, Union

import numpy as np

FIELD_MAGIC = "# interpineq-field v1"


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x)  # exact binary value
    return Fraction(x)


@dataclass(frozen=True)
class Box:
    """Axis-aligned cube ``lower + [0, side)^dim``."""

    dim: int
    lower: tuple[Fraction, ...]
    side: Fraction

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        lower = tuple(_frac(c) for c in self.lower)
        if len(lower) != self.dim:
            raise ValueError(f"lower has {len(lower)} coordinates, dim is {self.dim}")
        side = _frac(self.side)
        if side <= 0:
            raise ValueError(f"side must be positive, got {side}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "side", side)

    @classmethod
    def unit(cls, dim: int = 1) -> "Box":
        return cls(dim, (0,) * dim, 1)

    @classmethod
    def centered(cls, dim: int, half_side) -> "Box":
        """Box ``[-h, h)^dim``."""
        h = _frac(half_side)
        return cls(dim, (-h,) * dim, 2 * h)

    @property
    def exact_volume(self) -> Fraction:
        return self.side**self.dim

    @property
    def volume(self) -> float:
        return float(self.exact_volume)

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple(c + self.side / 2 for c in self.lower)

    def doubled(self) -> "Box":
        """Box of twice the side sharing this box's lower corner.

        This box is then the dyadic child with index ``(0, ..., 0)``.
        """
        return Box(self.dim, self.lower, 2 * self.side)


@dataclass(frozen=True)
class DyadicCube:
    level: int
    index: tuple[int, ...]
    box: Box

    def __post_init__(self):
        index = tuple(int(i) for i in self.index)
        object.__setattr__(self, "index", index)
        if self.level < 0:
            raise ValueError(f"negative level {self.level}")
        if len(index) != self.box.dim:
            raise ValueError(f"index {index} does not match dim {self.box.dim}")
        n = 1 << self.level
        if any(i < 0 or i >= n for i in index):
            raise ValueError(f"index {index} out of range for level {self.level}")

    @classmethod
    def root(cls, box: Box) -> "DyadicCube":
        return cls(0, (0,) * box.dim, box)

    @property
    def side(self) -> Fraction:
        return self.box.side / (1 << self.level)

    @property
    def exact_measure(self) -> Fraction:
        return self.side**self.box.dim

    @property
    def measure(self) -> float:
        return float(self.exact_measure)

    @property
    def lower(self) -> tuple[Fraction, ...]:
        return tuple(lo + i * self.side for lo, i in zip(self.box.lower, self.index))

    def children(self) -> list["DyadicCube"]:
        return children(self)

    def contains(self, other: "DyadicCube") -> bool:
        """True when ``other`` (same box) lies inside this cube."""
        if other.box != self.box or other.level < self.level:
            return False
        shift = other.level - self.level
        return all((j >> shift) == i for i, j in zip(self.index, other.index))

    def cell_range(self, grid_level: int) -> tuple[tuple[int, int], ...]:
        """Half-open index ranges, per axis, of the level-``grid_level`` cells inside."""
        if self.level > grid_level:
            raise ValueError(f"cube level {self.level} finer than grid level {grid_level}")
        k = grid_level - self.level
        return tuple((i << k, (i + 1) << k) for i in self.index)

    def to_grid_cube(self, grid_level: int) -> "GridCube":
        rng = self.cell_range(grid_level)
        return GridCube(tuple(a for a, _ in rng), rng[0][1] - rng[0][0])


@dataclass(frozen=True)
class GridCube:
    """Cube made of ``width**n`` grid cells starting at cell index ``start``.

    Covers every axis-aligned cube whose corners are grid nodes, dyadic or not.
    """

    start: tuple[int, ...]
    width: int

    def slices(self) -> tuple[slice, ...]:
        return tuple(slice(s, s + self.width) for s in self.start)


Region = Union[DyadicCube, GridCube]


def cell_measure(cube: DyadicCube) -> float:
    """Lebesgue measure of a dyadic cube, ``(side / 2**level) ** n``."""
    return cube.measure


def children(cube: DyadicCube) -> list[DyadicCube]:
    """The ``2**n`` next-level cubes tiling ``cube``, in lexicographic index order."""
    base = tuple(2 * i for i in cube.index)
    return [
        DyadicCube(cube.level + 1, tuple(b + o for b, o in zip(base, offs)), cube.box)
        for offs in itertools.product((0, 1), repeat=cube.box.dim)
    ]


class PiecewiseConstantField:
    """Function constant on every level-``grid_level`` cell of ``box``.

    ``values`` may be given flat (lexicographic order) or already shaped.
    The stored array is read-only.
    """

    __slots__ = ("grid_level", "box", "values", "_cell_measure", "_sorted_abs")

    def __init__(self, grid_level: int, box: Box, values):
        if grid_level < 0:
            raise ValueError(f"negative grid level {grid_level}")
        shape = (1 << grid_level,) * box.dim
        arr = np.array(values, dtype=np.float64)
        if arr.size != 2 ** (box.dim * grid_level):
            raise ValueError(
                f"expected {2 ** (box.dim * grid_level)} values for level {grid_level} "
                f"in dim {box.dim}, got {arr.size}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("field values must be finite")
        arr = arr.reshape(shape)
        arr.setflags(write=False)
        self.grid_level = grid_level
        self.box = box
        self.values = arr
        self._cell_measure = float(box.exact_volume / (1 << (box.dim * grid_level)))
        self._sorted_abs = None

    @property
    def dim(self) -> int:
        return self.box.dim

    @property
    def cells_per_axis(self) -> int:
        return 1 << self.grid_level

    @property
    def cell_measure(self) -> float:
        return self._cell_measure

    @property
    def cell_side(self) -> Fraction:
        return self.box.side / (1 << self.grid_level)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def sorted_abs(self) -> np.ndarray:
        """Non-zero ``|values|`` in decreasing order, computed once."""
        if self._sorted_abs is None:
            a = np.abs(self.flat)
            s = np.sort(a[a > 0])[::-1]
            s.setflags(write=False)
            self._sorted_abs = s
        return self._sorted_abs

    def with_values(self, values) -> "PiecewiseConstantField":
        return PiecewiseConstantField(self.grid_level, self.box, values)

    def scaled(self, c: float) -> "PiecewiseConstantField":
        return self.with_values(c * self.values)

    def __add__(self, c: float) -> "PiecewiseConstantField":
        return self.with_values(self.values + c)

    def __mul__(self, other):
        if isinstance(other, PiecewiseConstantField):
            same_grid(self, other)
            return self.with_values(self.values * other.values)
        return self.scaled(float(other))

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, PiecewiseConstantField):
            return NotImplemented
        return (
            self.grid_level == other.grid_level
            and self.box == other.box
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"PiecewiseConstantField(level={self.grid_level}, box={self.box})"

    def cell_centers(self) -> list[np.ndarray]:
        """Per-axis coordinates of cell midpoints (float)."""
        h = float(self.cell_side)
        k = np.arange(self.cells_per_axis)
        return [float(lo) + (k + 0.5) * h for lo in self.box.lower]

    def region_values(self, region: Region) -> np.ndarray:
        """View of the cell values inside ``region``."""
        if isinstance(region, DyadicCube):
            if region.box != self.box:
                raise ValueError(f"cube {region} does not belong to box {self.box}")
            rng = region.cell_range(self.grid_level)
            sl = tuple(slice(a, b) for a, b in rng)
        else:
            n = self.cells_per_axis
            if (
                len(region.start) != self.dim
                or region.width < 1
                or any(s < 0 or s + region.width > n for s in region.start)
            ):
                raise ValueError(f"grid cube {region} outside the {n}-cell grid")
            sl = region.slices()
        return self.values[sl]

    def region_measure(self, region: Region) -> float:
        if isinstance(region, DyadicCube):
            return region.measure
        return region.width**self.dim * self.cell_measure


def same_grid(f: PiecewiseConstantField, g: PiecewiseConstantField) -> None:
    if f.grid_level != g.grid_level or f.box != g.box:
        raise ValueError(f"grid mismatch: {f!r} vs {g!r}")


def integrate_abs_pow(f: PiecewiseConstantField, p: float, region: Region | None = None) -> float:
    """Exact finite sum of ``|f|**p`` over the cells of ``region`` (default: whole box)."""
    vals = f.values if region is None else f.region_values(region)
    return float(np.sum(np.abs(vals) ** p)) * f.cell_measure


def cube_average(f: PiecewiseConstantField, cube: Region) -> float:
    """Signed mean of ``f`` over ``cube``."""
    return float(np.mean(f.region_values(cube)))


# -- field files -------------------------------------------------------------


class FieldFileError(ValueError):
    """Malformed or unreadable field file; ``path`` names the file."""

    def __init__(self, path, msg):
        self.path = str(path)
        super().__init__(f"{path}: {msg}")


def write_field(path, f: PiecewiseConstantField) -> None:
    """Write ``f`` in the text field format.

    Layout::

        # interpineq-field v1
        dim <n>
        level <M>
        lower <c_1> ... <c_n>     (exact rationals, e.g. -1 or 1/2)
        side <s>
        values <2**(n*M)>
        <one float per line, lexicographic cell order, repr round-trip>
    """
    lines = [
        FIELD_MAGIC,
        f"dim {f.dim}",
        f"level {f.grid_level}",
        "lower " + " ".join(str(c) for c in f.box.lower),
        f"side {f.box.side}",
        f"values {f.flat.size}",
    ]
    lines.extend(repr(float(v)) for v in f.flat)
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> PiecewiseConstantField:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FieldFileError(path, exc.strerror or str(exc)) from exc
    lines = text.splitlines()
    if not lines or lines[0].strip() != FIELD_MAGIC:
        raise FieldFileError(path, "missing field header")
    header = {}
    for want, line in zip(("dim", "level", "lower", "side", "values"), lines[1:6]):
        key, _, rest = line.partition(" ")
        if key != want:
            raise FieldFileError(path, f"expected '{want}' line, got {line!r}")
        header[key] = rest.split()
    try:
        dim = int(header["dim"][0])
        level = int(header["level"][0])
        lower = tuple(Fraction(c) for c in header["lower"])
        side = Fraction(header["side"][0])
        count = int(header["values"][0])
        values = [float(v) for v in lines[6 : 6 + count]]
    except (ValueError, IndexError, ZeroDivisionError) as exc:
        raise FieldFileError(path, f"bad header or value: {exc}") from exc
    if len(values) != count or len(lines[6:]) != count:
        raise FieldFileError(path, f"expected {count} values, found {len(lines[6:])}")
    try:
        return PiecewiseConstantField(level, Box(dim, lower, side), values)
    except ValueError as exc:
        raise FieldFileError(path, str(exc)) from exc


def grid_cubes(cells_per_axis: int, dim: int, widths: Sequence[int] | None = None):
    """Yield every grid-aligned cube of the given widths (default: all widths)."""
    if widths is None:
        widths = range(1, cells_per_axis + 1)
    for w in widths:
        for start in itertools.product(range(cells_per_axis - w + 1), repeat=dim):
            yield GridCube(start, w)

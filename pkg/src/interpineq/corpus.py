"""Test-function generators: radial extremals, indicators and seeded random fields.

Radial generators (power, log, truncated power) need a box centred at the
origin.  By default each cell is sampled at its point farthest from the
origin, which makes the discrete field the lower envelope of a decreasing
radial profile; the discrete weak norms then never overshoot the continuum
ones and converge to them as the grid is refined.  ``sampling="midpoint"``
gives plain midpoint sampling instead; a cell whose midpoint is the origin
is then sampled at three quarters of its half-side from the origin.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from .lattice import Box, DyadicCube, PiecewiseConstantField, read_field

SAMPLING_RULES = ("outer", "midpoint")

# random field value distribution
SPIKE_FRACTION = 0.05
SPIKE_FACTOR = 100.0


def _radii(box: Box, level: int, sampling: str) -> np.ndarray:
    if any(c != 0 for c in box.center):
        raise ValueError(f"radial generators need a box centred at the origin, got {box}")
    if sampling not in SAMPLING_RULES:
        raise ValueError(f"unknown sampling rule {sampling!r}")
    m = 1 << level
    h = float(box.side) / m
    k = np.arange(m)
    lo = float(box.lower[0]) + k * h
    hi = lo + h
    if sampling == "outer":
        per_axis = np.maximum(np.abs(lo), np.abs(hi))
    else:
        per_axis = np.abs(lo + 0.5 * h)
    grids = np.meshgrid(*([per_axis] * box.dim), indexing="ij")
    r = np.sqrt(sum(g * g for g in grids))
    # midpoint rule only: the (level-0) cell centred on the origin
    r[r == 0.0] = 0.75 * 0.5 * h
    return r


def gen_power(alpha: float, box: Box, level: int, *, sampling: str = "outer") -> PiecewiseConstantField:
    """Samples of ``|x| ** -alpha``."""
    if alpha <= 0:
        raise ValueError(f"power exponent must be positive, got {alpha}")
    return PiecewiseConstantField(level, box, _radii(box, level, sampling) ** -alpha)


def gen_log(box: Box, level: int, *, sampling: str = "outer") -> PiecewiseConstantField:
    """Samples of ``log |x|``."""
    return PiecewiseConstantField(level, box, np.log(_radii(box, level, sampling)))


def gen_truncated_power(
    alpha: float, cap: float, box: Box, level: int, *, sampling: str = "outer"
) -> PiecewiseConstantField:
    """Samples of ``min(cap, |x| ** -alpha)``."""
    if alpha <= 0 or cap <= 0:
        raise ValueError(f"need alpha > 0 and cap > 0, got alpha={alpha}, cap={cap}")
    r = _radii(box, level, sampling)
    return PiecewiseConstantField(level, box, np.minimum(cap, r**-alpha))


def gen_indicator(cube: DyadicCube, level: int) -> PiecewiseConstantField:
    """Indicator of a dyadic cube on the level-``level`` grid of its box."""
    vals = np.zeros((1 << level,) * cube.box.dim)
    vals[tuple(slice(a, b) for a, b in cube.cell_range(level))] = 1.0
    return PiecewiseConstantField(level, cube.box, vals)


def gen_random_pcf(
    seed: int,
    box: Box,
    level: int,
    scale: float = 1.0,
    spike_fraction: float = SPIKE_FRACTION,
    spike_factor: float = SPIKE_FACTOR,
) -> PiecewiseConstantField:
    """Uniform values on ``[-scale, scale]``; a ``spike_fraction`` of cells multiplied by ``spike_factor``."""
    rng = np.random.default_rng(seed)
    shape = (1 << level,) * box.dim
    vals = scale * rng.uniform(-1.0, 1.0, size=shape)
    spikes = rng.random(shape) < spike_fraction
    vals[spikes] *= spike_factor
    return PiecewiseConstantField(level, box, vals)


KINDS = ("power", "log", "truncated_power", "indicator", "random_pcf", "product", "file")


@dataclass(frozen=True)
class CorpusSpec:
    """Declarative description of one corpus field.

    ``params`` by kind:

    - power: ``alpha``; truncated_power: ``alpha``, ``cap``
    - indicator: ``cube_level``, ``cube_index`` (list of ints)
    - random_pcf: ``seed``, optional ``scale``, ``spike_fraction``, ``spike_factor``
    - product: ``factors`` (list of spec mappings on the same grid)
    - file: ``path`` (grid taken from the file), relative paths resolve
      against ``base_dir`` when set
    - power/log/truncated_power accept ``sampling``
    """

    kind: str
    dim: int = 1
    level: int = 6
    lower: tuple = (0,)
    side: Any = 1
    params: Mapping[str, Any] = field(default_factory=dict)
    base_dir: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown corpus kind {self.kind!r}")
        if self.kind == "power" and not self.params.get("alpha", 0) > 0:
            raise ValueError("power kind requires alpha > 0")
        if self.kind == "random_pcf" and "seed" not in self.params:
            raise ValueError("random_pcf kind requires a seed")
        object.__setattr__(self, "lower", tuple(Fraction(c) for c in self.lower))
        object.__setattr__(self, "side", Fraction(self.side))

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "CorpusSpec":
        d = dict(d)
        dim = int(d.get("dim", 1))
        if "half_side" in d:
            h = Fraction(str(d.pop("half_side")))
            d.setdefault("lower", [-h] * dim)
            d.setdefault("side", 2 * h)
        lower = d.get("lower", [0] * dim)
        return cls(
            kind=d["kind"],
            dim=dim,
            level=int(d.get("level", 6)),
            lower=tuple(Fraction(str(c)) for c in lower),
            side=Fraction(str(d.get("side", 1))),
            params=dict(d.get("params", {})),
        )

    @property
    def box(self) -> Box:
        return Box(self.dim, self.lower, self.side)

    @property
    def name(self) -> str:
        """Stable identifier used in reports."""
        bits = []
        for k in sorted(self.params):
            v = self.params[k]
            if k == "factors":
                v = "*".join(CorpusSpec.from_dict(dict(f, dim=self.dim, level=self.level)).kind for f in v)
            elif isinstance(v, (list, tuple)):
                v = "-".join(str(x) for x in v)
            bits.append(f"{k}={v}")
        arg = ",".join(bits)
        if self.kind == "file":
            return f"file({arg})"  # the grid lives in the file
        lows = sorted(set(self.lower))
        lo = lows[0] if len(lows) == 1 else ";".join(str(c) for c in self.lower)
        box = f"[{lo},{lo + self.side})" if len(lows) == 1 else f"[{lo}]+{self.side}"
        return f"{self.kind}({arg})@n{self.dim}L{self.level}{box}"

    def build(self) -> PiecewiseConstantField:
        p = self.params
        box, level = self.box, self.level
        sampling = p.get("sampling", "outer")
        if self.kind == "power":
            return gen_power(float(p["alpha"]), box, level, sampling=sampling)
        if self.kind == "log":
            return gen_log(box, level, sampling=sampling)
        if self.kind == "truncated_power":
            return gen_truncated_power(float(p["alpha"]), float(p["cap"]), box, level, sampling=sampling)
        if self.kind == "indicator":
            cube = DyadicCube(int(p.get("cube_level", 0)), tuple(p.get("cube_index", (0,) * self.dim)), box)
            return gen_indicator(cube, level)
        if self.kind == "random_pcf":
            return gen_random_pcf(
                int(p["seed"]),
                box,
                level,
                scale=float(p.get("scale", 1.0)),
                spike_fraction=float(p.get("spike_fraction", SPIKE_FRACTION)),
                spike_factor=float(p.get("spike_factor", SPIKE_FACTOR)),
            )
        if self.kind == "product":
            out = None
            for sub in p["factors"]:
                sub = dict(sub)
                sub.setdefault("dim", self.dim)
                sub.setdefault("level", self.level)
                sub.setdefault("lower", list(self.lower))
                sub.setdefault("side", self.side)
                g = CorpusSpec.from_dict(sub).build()
                out = g if out is None else out * g
            return out
        path = Path(p["path"])
        return read_field(Path(self.base_dir) / path if self.base_dir else path)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "dim": self.dim,
                "level": self.level,
                "lower": [str(c) for c in self.lower],
                "side": str(self.side),
                "params": dict(self.params),
            },
            sort_keys=True,
        )

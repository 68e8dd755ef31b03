"""Inequality checks producing one :class:`VerificationReport` each."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .. import constants
from ..lattice import GridCube, PiecewiseConstantField, Region, same_grid
from ..norms import (
    GRID_ALIGNED,
    CubeFamily,
    bmo_norm,
    linf_norm,
    lp_norm,
    morrey_from_maxima,
    morrey_maxima,
    morrey_norm,
    weak_lp_norm,
    weak_morrey_from_maxima,
    weak_morrey_maxima,
)

SLACK = 1e-9
JN_POINTS = 64


class TheoremId(str, enum.Enum):
    T1_Lp_Linf = "T1_Lp_Linf"
    T2_WLp_Linf = "T2_WLp_Linf"
    T4_Lp_BMO = "T4_Lp_BMO"
    T5_Morrey_Linf = "T5_Morrey_Linf"
    T6_WMorrey_Linf = "T6_WMorrey_Linf"
    T7_Morrey_BMO = "T7_Morrey_BMO"
    JN = "JN"
    BILINEAR_LEBESGUE = "BILINEAR_LEBESGUE"
    BILINEAR_MORREY = "BILINEAR_MORREY"

    def __str__(self):
        return self.value


INTERPOLATION = (
    TheoremId.T1_Lp_Linf,
    TheoremId.T2_WLp_Linf,
    TheoremId.T4_Lp_BMO,
    TheoremId.T5_Morrey_Linf,
    TheoremId.T6_WMorrey_Linf,
    TheoremId.T7_Morrey_BMO,
)
MORREY_IDS = (TheoremId.T5_Morrey_Linf, TheoremId.T6_WMorrey_Linf, TheoremId.T7_Morrey_BMO)
BMO_IDS = (TheoremId.T4_Lp_BMO, TheoremId.T7_Morrey_BMO)


@dataclass
class VerificationReport:
    theorem: TheoremId
    function: str
    lhs: float
    rhs: float
    constant: float
    ratio: float
    passed: bool
    vacuous: bool = False
    p: float | None = None
    q: float | None = None
    kappa: float | None = None
    n: int | None = None
    level: int | None = None
    family: str | None = None
    note: str = ""
    failures: list = field(default_factory=list)

    def sort_key(self):
        def num(x):
            return -math.inf if x is None else x

        return (str(self.theorem), self.function, num(self.p), num(self.q), num(self.kappa), num(self.n), num(self.level))


def _finish(report: VerificationReport, slack: float) -> VerificationReport:
    report.lhs, report.rhs = float(report.lhs), float(report.rhs)
    report.constant = float(report.constant)
    if report.lhs == 0.0:
        report.vacuous, report.ratio, report.passed = True, 0.0, True
        report.note = report.note or "zero left-hand side"
    elif report.rhs == 0.0:
        # constant field under a BMO theorem: the oscillation vanishes
        report.vacuous, report.ratio, report.passed = True, 0.0, True
        report.note = report.note or "right-hand side vanishes (BMO proxy 0)"
    else:
        report.ratio = report.lhs / report.rhs
        report.passed = bool(report.ratio <= 1.0 + slack)
    return report


def _interp_rhs(log_const: float, a: float, b: float, p: float, q: float) -> float:
    """``exp(log_const) * a**(p/q) * b**(1-p/q)``, via logs."""
    if a == 0.0 or b == 0.0:
        return 0.0
    theta = p / q
    return math.exp(log_const + theta * math.log(a) + (1.0 - theta) * math.log(b))


def check_interpolation(
    f: PiecewiseConstantField,
    theorem: TheoremId,
    p: float,
    q: float,
    kappa: float | None = None,
    family: CubeFamily = GRID_ALIGNED,
    function: str = "",
    bmo: float | None = None,
    slack: float = SLACK,
    cache: dict | None = None,
) -> VerificationReport:
    """Evaluate one interpolation inequality on ``f``.

    ``bmo`` may carry a precomputed BMO proxy for ``f`` under ``family``.
    ``cache``, if given, memoizes norm values across calls on the same field
    and family.
    """
    theorem = TheoremId(theorem)
    if theorem not in INTERPOLATION:
        raise ValueError(f"{theorem} is not an interpolation inequality")
    if not (p >= 1 and q > p and math.isfinite(q)):
        raise ValueError(f"need 1 <= p < q < inf, got p={p}, q={q}")
    morrey = theorem in MORREY_IDS
    if morrey:
        if kappa is None or not 0 < kappa < 1:
            raise ValueError(f"{theorem} needs 0 < kappa < 1, got {kappa}")
    else:
        kappa = None

    memo = {} if cache is None else cache

    def get(fn, *args):
        key = (fn.__name__,) + args
        if key not in memo:
            memo[key] = fn(f, *args)
        return memo[key]

    def morrey(r):
        return morrey_from_maxima(get(morrey_maxima, r, family), f, r, kappa)

    if theorem in BMO_IDS and bmo is None:
        bmo = get(bmo_norm, family)

    if theorem is TheoremId.T1_Lp_Linf:
        lhs, a, b, log_c = get(lp_norm, q), get(lp_norm, p), get(linf_norm), 0.0
    elif theorem is TheoremId.T2_WLp_Linf:
        lhs, a, b = get(lp_norm, q), get(weak_lp_norm, p), get(linf_norm)
        log_c = math.log(constants.c_weak(p, q))
    elif theorem is TheoremId.T4_Lp_BMO:
        lhs, a, b = get(lp_norm, q), get(lp_norm, p), bmo
        log_c = constants.c_lebesgue(p, q, f.dim).log_value
    elif theorem is TheoremId.T5_Morrey_Linf:
        lhs, a, b, log_c = morrey(q), morrey(p), get(linf_norm), 0.0
    elif theorem is TheoremId.T6_WMorrey_Linf:
        weak = weak_morrey_from_maxima(get(weak_morrey_maxima, p, family), f, p, kappa)
        lhs, a, b = morrey(q), weak, get(linf_norm)
        log_c = math.log(constants.c_weak(p, q))
    else:
        lhs, a, b = morrey(q), morrey(p), bmo
        log_c = constants.c_morrey(p, q, f.dim).log_value

    report = VerificationReport(
        theorem=theorem,
        function=function,
        lhs=lhs,
        rhs=_interp_rhs(log_c, a, b, p, q),
        constant=math.exp(log_c),
        ratio=math.nan,
        passed=False,
        p=p,
        q=q,
        kappa=kappa,
        n=f.dim,
        level=f.grid_level,
        family=family.strategy if (morrey or theorem in BMO_IDS) else None,
    )
    return _finish(report, slack)


# -- John–Nirenberg ------------------------------------------------------------


def jn_lambda_grid(bmo: float, points: int = JN_POINTS) -> np.ndarray:
    """Geometric grid from ``bmo/16`` to ``32 bmo``."""
    return np.geomspace(bmo / 16.0, 32.0 * bmo, points)


def _jn_worst(rows: np.ndarray, measure: float, cm: float, lambdas: np.ndarray, bmo: float, n: int):
    """Largest empirical/bound ratio over the cubes in ``rows`` (one cube per row)."""
    dev = np.abs(rows - rows.mean(axis=1, keepdims=True))
    counts = (dev[:, :, None] > lambdas[None, None, :]).sum(axis=1)  # (cubes, lambdas)
    empirical = counts * cm
    bound = np.array([constants.jn_bound(measure, lam, bmo, n) for lam in lambdas])
    ratio = empirical / bound
    return ratio, empirical, bound


def check_jn(
    f: PiecewiseConstantField,
    cube: Region,
    lambdas=None,
    bmo: float | None = None,
    family: CubeFamily = GRID_ALIGNED,
    function: str = "",
    slack: float = SLACK,
) -> VerificationReport:
    """Empirical oscillation tail on ``cube`` against the John–Nirenberg bound.

    ``lhs``/``rhs`` are taken at the worst grid point; ``failures`` lists
    every failing ``lam``.
    """
    if bmo is None:
        bmo = bmo_norm(f, family)
    base = dict(theorem=TheoremId.JN, function=function, n=f.dim, level=f.grid_level, family=family.strategy)
    if bmo == 0.0:
        return VerificationReport(
            lhs=0.0, rhs=0.0, constant=math.e, ratio=0.0, passed=True, vacuous=True,
            note="constant field (BMO proxy 0)", **base,
        )
    lambdas = jn_lambda_grid(bmo) if lambdas is None else np.asarray(lambdas, dtype=float)
    rows = np.asarray(f.region_values(cube), dtype=float).reshape(1, -1)
    ratio, emp, bound = _jn_worst(rows, f.region_measure(cube), f.cell_measure, lambdas, bmo, f.dim)
    ratio, emp = ratio[0], emp[0]
    k = int(np.argmax(ratio))
    fails = [float(lam) for lam, r in zip(lambdas, ratio) if r > 1.0 + slack]
    return VerificationReport(
        lhs=float(emp[k]), rhs=float(bound[k]), constant=math.e, ratio=float(ratio[k]),
        passed=not fails, failures=fails,
        note=f"worst lambda {lambdas[k]!r}" + (f"; {len(fails)} failing lambda values" if fails else ""),
        **base,
    )


def jn_cubes(f: PiecewiseConstantField, max_cube_level: int = 3):
    """Grid-aligned cubes of side ``box side / 2**L`` for ``L <= max_cube_level``."""
    size = f.cells_per_axis
    for level in range(min(max_cube_level, f.grid_level) + 1):
        w = size >> level
        for start in np.ndindex(*(size - w + 1,) * f.dim):
            yield GridCube(tuple(int(s) for s in start), w)


def check_jn_family(
    f: PiecewiseConstantField,
    max_cube_level: int = 3,
    bmo: float | None = None,
    family: CubeFamily = GRID_ALIGNED,
    function: str = "",
    slack: float = SLACK,
) -> VerificationReport:
    """John–Nirenberg on every grid-aligned cube of level ``<= max_cube_level``."""
    from numpy.lib.stride_tricks import sliding_window_view

    if bmo is None:
        bmo = bmo_norm(f, family)
    base = dict(theorem=TheoremId.JN, function=function, n=f.dim, level=f.grid_level,
                family=family.strategy)
    if bmo == 0.0:
        return VerificationReport(
            lhs=0.0, rhs=0.0, constant=math.e, ratio=0.0, passed=True, vacuous=True,
            note="constant field (BMO proxy 0)", **base,
        )
    lambdas = jn_lambda_grid(bmo)
    size, n, cm = f.cells_per_axis, f.dim, f.cell_measure
    worst = (-1.0, 0.0, 0.0, None, None)
    fails = []
    for level in range(min(max_cube_level, f.grid_level) + 1):
        w = size >> level
        view = sliding_window_view(f.values, (w,) * n)
        rows = view.reshape(-1, w**n)
        ratio, emp, bound = _jn_worst(rows, w**n * cm, cm, lambdas, bmo, n)
        c, k = np.unravel_index(int(np.argmax(ratio)), ratio.shape)
        if ratio[c, k] > worst[0]:
            start = np.unravel_index(c, view.shape[:n])
            worst = (float(ratio[c, k]), float(emp[c, k]), float(bound[k]), GridCube(tuple(int(s) for s in start), w), float(lambdas[k]))
        for c, k in np.argwhere(ratio > 1.0 + slack):
            start = np.unravel_index(int(c), view.shape[:n])
            fails.append((GridCube(tuple(int(s) for s in start), w), float(lambdas[k])))
    r, lhs, rhs, cube, lam = worst
    note = f"worst cube {cube.start}+{cube.width} at lambda {lam!r}"
    if fails:
        note += f"; {len(fails)} failing (cube, lambda) pairs"
    return VerificationReport(lhs=lhs, rhs=rhs, constant=math.e, ratio=r, passed=not fails,
                              failures=fails, note=note, **base)


# -- bilinear --------------------------------------------------------------------


def bilinear_constant(theorem: TheoremId, r: float, n: int) -> float:
    """Square of the interpolation constant at ``(r, 2r, n)``.

    Hölder gives ``||FG|| <= ||F||_{2r} ||G||_{2r}`` and each factor is bounded
    by one application of the interpolation inequality with ``q = 2r``.
    """
    if TheoremId(theorem) is TheoremId.BILINEAR_LEBESGUE:
        rep = constants.c_lebesgue(r, 2 * r, n)
    else:
        rep = constants.c_morrey(r, 2 * r, n)
    return math.exp(2.0 * rep.log_value)


def check_bilinear(
    F: PiecewiseConstantField,
    G: PiecewiseConstantField,
    theorem: TheoremId,
    r: float,
    kappa: float | None = None,
    family: CubeFamily = GRID_ALIGNED,
    function: str = "",
    bmo_F: float | None = None,
    bmo_G: float | None = None,
    slack: float = SLACK,
) -> VerificationReport:
    """``||FG|| <= C (||F|| ||G||_BMO + ||G|| ||F||_BMO)`` in L^r or L^{r,kappa}."""
    theorem = TheoremId(theorem)
    if theorem not in (TheoremId.BILINEAR_LEBESGUE, TheoremId.BILINEAR_MORREY):
        raise ValueError(f"{theorem} is not a bilinear estimate")
    same_grid(F, G)
    if not r >= 1:
        raise ValueError(f"need r >= 1, got {r}")
    morrey = theorem is TheoremId.BILINEAR_MORREY
    if morrey:
        if kappa is None or not 0 < kappa < 1:
            raise ValueError(f"{theorem} needs 0 < kappa < 1, got {kappa}")

        def norm(h):
            return morrey_norm(h, r, kappa, family)
    else:
        kappa = None

        def norm(h):
            return lp_norm(h, r)

    if bmo_F is None:
        bmo_F = bmo_norm(F, family)
    if bmo_G is None:
        bmo_G = bmo_norm(G, family)
    const = bilinear_constant(theorem, r, F.dim)
    lhs = norm(F * G)
    rhs = const * (norm(F) * bmo_G + norm(G) * bmo_F)
    report = VerificationReport(
        theorem=theorem, function=function, lhs=lhs, rhs=rhs, constant=const, ratio=math.nan,
        passed=False, p=r, kappa=kappa, n=F.dim, level=F.grid_level, family=family.strategy,
    )
    return _finish(report, slack)

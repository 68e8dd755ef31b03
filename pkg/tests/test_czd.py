import dataclasses

import numpy as np
import pytest

from conftest import field_1d
from interpineq.corpus import gen_log, gen_random_pcf
from interpineq.czd import (
    CzDecomposition,
    CzHeightError,
    cz_decompose,
    cz_mass_bound,
    validate_cz,
)
from interpineq.lattice import Box, DyadicCube, PiecewiseConstantField, integrate_abs_pow
from interpineq.norms import bmo_norm


def test_constant_below_height_selects_nothing():
    f = field_1d([0.5] * 8)
    d = cz_decompose(f, 2, 1.0)
    assert d.selected == ()
    assert d.good.all()
    assert cz_mass_bound(f, 2, d) == 0.0
    assert validate_cz(f, 2, d) == []


def test_hand_trace_half_indicator():
    f = field_1d([2.0, 0.0])
    d = cz_decompose(f, 1, 1.0)
    assert d.padding == 0
    assert d.selected == (DyadicCube(1, (0,), f.box),)
    assert list(d.good.flat) == [False, True]
    assert validate_cz(f, 1, d) == []
    assert cz_mass_bound(f, 1, d) == 0.5
    assert 0.5 < integrate_abs_pow(f, 1) / d.sigma


def test_average_equal_to_height_is_not_selected():
    f = field_1d([2.0, 0.0])
    d = cz_decompose(f, 1, 2.0)
    assert d.selected == ()


def test_selected_cubes_respect_bracket_2d():
    f = PiecewiseConstantField(2, Box.unit(2), np.r_[[16.0], np.zeros(15)])
    d = cz_decompose(f, 1, 0.5)
    # root average 1 > 0.5 so the box is padded once; the box is then selected
    assert d.padding == 1
    assert validate_cz(f, 1, d) == []
    d = cz_decompose(f, 1, 1.0)
    assert d.padding == 0
    assert [(q.level, q.index) for q in d.selected] == [(1, (0, 0))]
    assert validate_cz(f, 1, d) == []


def test_padding_and_height_error():
    f = field_1d([100.0] * 4)
    d = cz_decompose(f, 1, 1.0)
    assert d.padding == 7  # 100 / 2**7 < 1 <= 100 / 2**6
    assert validate_cz(f, 1, d) == []
    assert len(d.selected) == 1 and d.selected[0].level <= d.padding
    with pytest.raises(CzHeightError):
        cz_decompose(f, 1, 1e-12)
    with pytest.raises(ValueError):
        cz_decompose(f, 1, 0.0)
    with pytest.raises(ValueError):
        cz_decompose(f, 0.5, 1.0)


@pytest.mark.parametrize("seed", range(40))
def test_random_fields_validate(seed):
    dim = 1 + seed % 2
    f = gen_random_pcf(seed, Box.centered(dim, 1), 6 if dim == 1 else 4)
    for p in (1, 2):
        for sigma in (bmo_norm(f) ** p, 0.5, 2.0, 50.0):
            d = cz_decompose(f, p, sigma)
            assert validate_cz(f, p, d) == []
            total = d.selected_measure + d.good_measure
            assert total == pytest.approx(d.domain.volume, rel=1e-12)


def test_mass_bound_at_bmo_height():
    for seed in range(20):
        f = gen_random_pcf(seed, Box.unit(1), 7)
        for p in (1, 2):
            d = cz_decompose(f, p, bmo_norm(f) ** p)
            bound = integrate_abs_pow(f, p) / d.sigma
            assert cz_mass_bound(f, p, d) < bound


def test_monotone_in_height():
    f = gen_log(Box.centered(1, 1), 8)
    sigmas = np.geomspace(0.5, 40, 15)
    measures = [cz_decompose(f, 2, s).selected_measure for s in sigmas]
    assert all(a >= b for a, b in zip(measures, measures[1:]))


def test_deterministic():
    f = gen_random_pcf(5, Box.unit(2), 4)
    a, b = cz_decompose(f, 1, 0.7), cz_decompose(f, 1, 0.7)
    assert a.selected == b.selected
    assert np.array_equal(a.good, b.good)
    assert list(a.selected) == sorted(a.selected, key=lambda q: (q.level, q.index))


def test_planted_bracket_fault_names_the_cube():
    f = gen_random_pcf(8, Box.unit(1), 6)
    d = cz_decompose(f, 1, 2.0)
    victim = d.selected[0]
    lo, hi = d.in_box_range(victim)[0]
    vals = f.values.copy()
    vals[lo] = 1e6  # forces the average far above 2 sigma
    violations = validate_cz(f.with_values(vals), 1, d)
    assert len(violations) == 1
    assert violations[0].kind == "bracket"
    assert violations[0].cube == victim


def test_planted_empty_decomposition_reports_good_set():
    f = field_1d([0.1, 0.1, 5.0, 0.1])
    d = cz_decompose(f, 1, 1.0)
    empty = dataclasses.replace(d, selected=(), good=np.ones_like(d.good))
    kinds = {v.kind for v in validate_cz(f, 1, empty)}
    assert "good" in kinds


def test_planted_overlap_and_gap():
    f = field_1d([0.1, 3.0, 0.1, 0.1])
    d = cz_decompose(f, 1, 1.0)
    assert validate_cz(f, 1, d) == []
    doubled = dataclasses.replace(d, good=np.ones_like(d.good))
    assert "overlap" in {v.kind for v in validate_cz(f, 1, doubled)}
    gap = dataclasses.replace(d, good=np.zeros_like(d.good))
    assert {v.kind for v in validate_cz(f, 1, gap)} == {"tiling"}


def test_decomposition_is_plain_data():
    d = cz_decompose(field_1d([2.0, 0.0]), 1, 1.0)
    assert isinstance(d, CzDecomposition)
    assert d.good_set_cells == [(1,)]

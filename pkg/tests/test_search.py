import numpy as np
import pytest

from interpineq.harness.checks import TheoremId, check_interpolation
from interpineq.harness.search import SearchSpec, _FieldMap, sharpness_search


def test_t1_search_approaches_one():
    spec = SearchSpec(TheoremId.T1_Lp_Linf, dimension=8, level=6, budget=2000, seed=3)
    res = sharpness_search(spec)
    assert res.report.ratio == pytest.approx(1.0, abs=1e-3)
    assert res.report.ratio <= 1 + 1e-9
    assert res.evaluations <= 2000


def test_t2_search_on_wide_box():
    spec = SearchSpec(
        TheoremId.T2_WLp_Linf,
        family="radial_log",
        dimension=16,
        level=12,
        half_side=100,
        bounds=(0.0, 3.0),
        budget=20000,
        golden_iterations=12,
    )
    res = sharpness_search(spec)
    assert res.report.ratio >= 0.99
    assert res.report.passed
    # the best parameters reproduce the reported ratio
    f = _FieldMap(spec)(res.params)
    assert check_interpolation(f, TheoremId.T2_WLp_Linf, 1, 2).ratio == res.report.ratio
    # a decreasing profile: all log-drops stay in bounds
    assert np.all((res.params >= 0) & (res.params <= 3))


def test_budget_one_returns_seed_report():
    start = (0.2, 0.9, 0.4, 0.4)
    spec = SearchSpec(TheoremId.T1_Lp_Linf, dimension=4, level=4, budget=1, start=start)
    res = sharpness_search(spec)
    assert res.evaluations == 1
    assert list(res.params) == list(start)
    f = _FieldMap(spec)(np.array(start))
    assert res.report.ratio == check_interpolation(f, TheoremId.T1_Lp_Linf, 1, 2).ratio


def test_history_is_monotone_and_budget_respected():
    spec = SearchSpec(TheoremId.T4_Lp_BMO, dimension=8, level=5, budget=300, seed=1)
    res = sharpness_search(spec)
    assert res.evaluations <= 300
    assert len(res.history) == res.evaluations
    assert all(a <= b for a, b in zip(res.history, res.history[1:]))
    assert res.history[-1] == res.report.ratio


def test_morrey_search_runs():
    spec = SearchSpec(TheoremId.T6_WMorrey_Linf, dimension=4, level=4, budget=200, kappa=0.5)
    res = sharpness_search(spec)
    assert 0 < res.report.ratio <= 1 + 1e-9


def test_search_is_deterministic():
    spec = SearchSpec(TheoremId.T1_Lp_Linf, dimension=4, level=4, budget=150, seed=9)
    a, b = sharpness_search(spec), sharpness_search(spec)
    assert np.array_equal(a.params, b.params) and a.history == b.history


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(theorem=TheoremId.JN),
        dict(theorem=TheoremId.T1_Lp_Linf, dimension=65),
        dict(theorem=TheoremId.T1_Lp_Linf, dimension=0),
        dict(theorem=TheoremId.T1_Lp_Linf, budget=0),
        dict(theorem=TheoremId.T1_Lp_Linf, family="splines"),
        dict(theorem=TheoremId.T1_Lp_Linf, dimension=3, level=4),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SearchSpec(**kwargs)

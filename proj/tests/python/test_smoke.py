"""Smoke tests for the python bindings against known closed-form values."""

import math

import pytest

import detloop as dl


def test_local_bounds_are_zero():
    for n in range(2, 6):
        assert dl.local_bound(dl.build_inn22(n)).value == 0.0
    assert dl.local_bound(dl.build_ch()).value == 0.0
    assert dl.local_bound(dl.build_i4422()).value == 0.0


def test_evaluate_all_ones_i3322():
    table = dl.CorrelationTable(3, 3)
    table.joint = [1.0] * 9
    table.margA = [1.0] * 3
    table.margB = [1.0] * 3
    assert dl.evaluate(dl.build_inn22(3), table) == -1.0


def test_closed_form_value_and_threshold():
    q0 = math.sqrt(0.9)
    assert dl.asymmetric_value_closed_form(3, q0, 0.5) == pytest.approx(
        0.0189189189, abs=1e-9
    )
    assert dl.asymmetric_threshold(3, q0) == pytest.approx(1 / 2.7, abs=1e-12)
    eps = dl.optimal_epsilon(3, q0)
    assert eps**2 == pytest.approx(0.1 / 3.7, abs=1e-12)


def test_construction_table_matches_closed_form():
    q0 = math.sqrt(0.9)
    eps = dl.optimal_epsilon(3, q0)
    a, b = dl.asymmetric_settings(3, q0)
    state = dl.schmidt_from_epsilon(3, eps)
    table = dl.correlation_table(state, a, b)
    modified = dl.modify_for_detection(dl.build_inn22(3), dl.DetectionScheme.asymmetric(0.5))
    assert dl.evaluate(modified, table) == pytest.approx(
        dl.asymmetric_value_closed_form(3, q0, 0.5), abs=1e-12
    )


def test_detection_duality():
    table = dl.closed_form_table(3, 0.3, 0.8)
    scheme = dl.DetectionScheme.symmetric(0.6)
    expr = dl.build_inn22(3)
    lhs = dl.evaluate(dl.modify_for_detection(expr, scheme), table) * scheme.normalizer()
    rhs = dl.evaluate(expr, dl.apply_detection(table, scheme))
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_small_optimization_recovers_ch_maximum():
    cfg = dl.OptimizerConfig()
    cfg.restarts = 8
    cfg.seed = 5
    state = dl.schmidt_from_epsilon(2, 1 / math.sqrt(2))
    result = dl.maximize_over_settings(dl.build_ch(), state, 2, cfg)
    assert result.value == pytest.approx((math.sqrt(2) - 1) / 2, abs=1e-6)


def test_fixed_construction_threshold():
    fam = dl.FamilySpec(dl.FamilySpec.Kind.SYMMETRIC_I4422)
    a, b = dl.ququart_settings(dl.ququart_maxent_params())
    opts = dl.ThresholdOptions()
    opts.bracketTol = 1e-6
    thr = dl.threshold_for_construction(fam, dl.schmidt_from_epsilon(4, 0.5), a, b, opts)
    assert thr is not None
    assert thr.eta == pytest.approx(0.7698, abs=1e-3)


def test_optimized_threshold_with_seeds():
    fam = dl.FamilySpec(dl.FamilySpec.Kind.CH)
    cfg = dl.OptimizerConfig()
    cfg.restarts = 8
    cfg.seed = 21
    state = dl.schmidt_from_epsilon(2, 1 / math.sqrt(2))
    seeds = fam.constructionSeeds(1 / math.sqrt(2))
    thr = dl.threshold_efficiency(fam, state, cfg, seeds)
    assert thr is not None
    assert thr.eta == pytest.approx(2 / (1 + math.sqrt(2)), abs=1e-3)


def test_no_threshold_is_none():
    fam = dl.FamilySpec(dl.FamilySpec.Kind.CH)
    a, b = dl.ch_settings(math.cos(math.pi / 16), math.cos(3 * math.pi / 16))
    thr = dl.threshold_for_construction(fam, dl.schmidt_from_epsilon(2, 1.0), a, b)
    assert thr is None


def test_registry_lookup():
    names = dl.construction_names()
    assert "inn22" in names and "i4422-maxent" in names
    c = dl.lookup_construction("inn22(3,0.9486832980505138)")
    assert c.expr.nA == 3
    with pytest.raises(ValueError):
        dl.lookup_construction("nope")

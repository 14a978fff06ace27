"""Tests for the model representation and figure-of-merit computations."""

import math

import numpy as np
import pytest

from chshcert import core
from chshcert.core import (
    Box,
    HiddenVariableModel,
    SettingsDistribution,
    ValidationError,
    bayes_mixed_box,
    box_from_marginals,
    chsh_of_box,
    deterministic_box,
    free_will_parameter,
    is_factorizable,
    model_from_json,
    model_to_json,
    observed_S,
    pr_box,
    proof_quantity_K,
    uniform_box,
    uniform_settings,
)


def _random_ns_box(rng: np.random.Generator) -> Box:
    """Random valid no-signalling box: draw marginals, then joints inside the
    Frechet interval [max(0, m+n-1), min(m, n)] cell by cell."""
    m = rng.uniform(0.0, 1.0, size=2)
    n = rng.uniform(0.0, 1.0, size=2)
    lo = np.maximum(0.0, m[:, None] + n[None, :] - 1.0)
    hi = np.minimum(m[:, None], n[None, :])
    c = lo + rng.uniform(0.0, 1.0, size=(2, 2)) * (hi - lo)
    return box_from_marginals(m, n, c)


def _uniform_inputs_model(rng: np.random.Generator, L: int = 4) -> HiddenVariableModel:
    w = rng.dirichlet(np.ones(L))
    comps = tuple(
        (float(w[i]), uniform_settings(), _random_ns_box(rng)) for i in range(L)
    )
    return HiddenVariableModel(comps)


class TestBox:
    def test_pr_box_reaches_algebraic_maximum(self):
        assert chsh_of_box(pr_box()) == pytest.approx(4.0, abs=1e-14)
        assert pr_box().guessing_value() == pytest.approx(0.5, abs=1e-14)

    def test_uniform_box_has_no_correlation(self):
        assert chsh_of_box(uniform_box()) == pytest.approx(0.0, abs=1e-14)

    def test_deterministic_boxes_stay_below_two(self):
        import itertools
        best = 0.0
        for strat in itertools.product((0, 1), repeat=4):
            best = max(best, chsh_of_box(deterministic_box(*strat)))
        assert best == pytest.approx(2.0, abs=1e-14)

    def test_rows_roundtrip(self):
        rng = np.random.default_rng(3)
        box = _random_ns_box(rng)
        again = Box.from_rows(box.to_rows())
        np.testing.assert_allclose(again.p, box.p, atol=0.0)

    def test_from_rows_rejects_bad_shape(self):
        with pytest.raises(ValidationError):
            Box.from_rows([[0.25] * 4] * 3)

    def test_check_flags_negative_entries(self):
        p = np.full((2, 2, 2, 2), 0.25)
        p[0, 0, 0, 0] = -0.05
        p[1, 1, 0, 0] = 0.55
        assert any("negative" in msg for msg in Box(p).check())

    def test_check_flags_normalization(self):
        assert any("normalized" in msg for msg in Box(np.full((2, 2, 2, 2), 0.3)).check())

    def test_check_flags_signalling(self):
        # Alice's marginal depends on Bob's setting: not a physical box.
        p = np.full((2, 2, 2, 2), 0.25)
        p[:, :, 0, 0] = np.array([[0.5, 0.3], [0.1, 0.1]])
        failures = Box(p).check()
        assert any("signals" in msg for msg in failures)

    def test_marginals_of_constructed_box(self):
        rng = np.random.default_rng(11)
        m = rng.uniform(size=2)
        n = rng.uniform(size=2)
        lo = np.maximum(0.0, m[:, None] + n[None, :] - 1.0)
        hi = np.minimum(m[:, None], n[None, :])
        box = box_from_marginals(m, n, (lo + hi) / 2.0)
        np.testing.assert_allclose(box.alice_marginals()[0], m, atol=1e-14)
        np.testing.assert_allclose(box.bob_marginals()[0], n, atol=1e-14)

    def test_guessing_value_dominated_by_marginal_gaps(self):
        # The sum of the four pairwise marginal mismatches always dominates
        # 2g - 1; the bound machinery rests on this inequality.
        rng = np.random.default_rng(2024)
        for _ in range(10_000):
            box = _random_ns_box(rng)
            g = box.guessing_value()
            assert proof_quantity_K(box) >= 2.0 * g - 1.0 - 1e-12


class TestSettings:
    def test_uniform_settings_is_factorizable(self):
        assert is_factorizable(uniform_settings())

    def test_product_distributions_are_factorizable(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            u, v = rng.uniform(size=2)
            q = np.outer([u, 1 - u], [v, 1 - v])
            assert is_factorizable(SettingsDistribution(q))

    def test_correlated_settings_are_not_factorizable(self):
        q = np.array([[0.5, 0.0], [0.0, 0.5]])
        assert not is_factorizable(SettingsDistribution(q))

    def test_factorizability_invariant_under_relabeling(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            q = rng.dirichlet(np.ones(4)).reshape(2, 2)
            base = is_factorizable(SettingsDistribution(q), tol=1e-9)
            for perm in (q[::-1, :], q[:, ::-1], q.T):
                assert is_factorizable(SettingsDistribution(perm), tol=1e-9) == base

    def test_check_flags_denormalized(self):
        s = SettingsDistribution(np.full((2, 2), 0.3))
        assert s.check()


class TestModel:
    def test_weights_must_sum_to_one(self):
        comps = ((0.7, uniform_settings(), pr_box()),)
        report = core.validate(HiddenVariableModel(comps))
        assert not report.valid
        assert any("sum" in msg for msg in report.failures)

    def test_nonuniform_inputs_rejected(self):
        q = SettingsDistribution(np.array([[0.4, 0.2], [0.2, 0.2]]))
        report = core.validate(HiddenVariableModel(((1.0, q, pr_box()),)))
        assert not report.valid
        assert any("uniform" in msg for msg in report.failures)

    def test_observed_S_matches_mixed_box(self):
        rng = np.random.default_rng(77)
        for _ in range(50):
            model = _uniform_inputs_model(rng)
            s_direct = observed_S(model)
            s_mixed = chsh_of_box(bayes_mixed_box(model))
            assert s_direct == pytest.approx(s_mixed, abs=1e-12)

    def test_free_will_ignores_zero_weight_components(self):
        spread = SettingsDistribution(np.array([[0.7, 0.1], [0.1, 0.1]]))
        comps = (
            (1.0, uniform_settings(), uniform_box()),
            (0.0, spread, uniform_box()),
        )
        assert free_will_parameter(HiddenVariableModel(comps)) == pytest.approx(0.25)

    def test_guessing_probability_of_pr_mixture(self):
        model = HiddenVariableModel(((1.0, uniform_settings(), pr_box()),))
        assert core.guessing_probability(model) == pytest.approx(0.5, abs=1e-14)

    def test_report_fields(self):
        model = HiddenVariableModel(((1.0, uniform_settings(), pr_box()),))
        report = core.validate(model)
        assert report.valid
        assert report.factorizable
        assert report.S == pytest.approx(4.0, abs=1e-12)
        assert report.G == pytest.approx(0.5, abs=1e-12)
        assert report.P == pytest.approx(0.25, abs=1e-12)


class TestSerialization:
    def test_json_roundtrip_is_bit_exact(self):
        rng = np.random.default_rng(123)
        model = _uniform_inputs_model(rng)
        again = model_from_json(model_to_json(model))
        assert len(again.components) == len(model.components)
        for (w1, s1, b1), (w2, s2, b2) in zip(model.components, again.components):
            assert w1 == w2
            np.testing.assert_array_equal(s1.q, s2.q)
            np.testing.assert_array_equal(b1.p, b2.p)

    def test_malformed_document_raises(self):
        with pytest.raises(ValidationError):
            core.model_from_dict({"components": [{"weight": 1.0}]})


def test_chsh_of_box_rejects_invalid_boxes():
    with pytest.raises(ValidationError):
        chsh_of_box(Box(np.full((2, 2, 2, 2), 0.3)))

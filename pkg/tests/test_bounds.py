import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genlab.bounds import (
    HypothesisClass,
    _report,
    bounded_family,
    classification_problem,
    corollary_bounds,
    evaluate_all,
    full_class,
    growth_function,
    interval_class,
    sauer_bound,
    thm1_bound,
    thm2_bound,
    thm3_bound,
    thm4_bound,
    thm5_bound,
    thm6_bound,
    threshold_class,
    vc_dimension,
)
from genlab.errors import EnumerationCapExceeded
from genlab.experiments import kernel_menu, random_problem
from genlab.learner import (
    LearningProblem,
    constant_kernel,
    erm_kernel,
    expected_generalization_error,
    gibbs_kernel,
    memorizer_kernel,
)
from genlab.space import Distribution, build_space, line_space, plain_set, uniform

ZERO_ONE = np.array([[0.0, 1.0], [1.0, 0.0]])


def memorizer(d=1.0, scale=1.0):
    z = plain_set(2)
    p = LearningProblem(z, line_space([0, d]), scale * ZERO_ONE, uniform(z), 1)
    return p, memorizer_kernel(p)


def constant_case(n=2):
    z = plain_set(2)
    p = LearningProblem(z, line_space([0, 1]), ZERO_ONE, Distribution(z, [0.3, 0.7]), n)
    return p, constant_kernel(p, [0.2, 0.8])


class TestHeadlineBounds:
    @pytest.mark.parametrize("bound", [thm1_bound, thm2_bound, thm3_bound, thm4_bound, thm5_bound])
    def test_constant_kernel_zero(self, bound):
        assert abs(bound(*constant_case())) <= 1e-12

    def test_thm1_memorizer_tight(self):
        p, k = memorizer()
        assert thm1_bound(p, k) == pytest.approx(0.5, abs=1e-12)
        assert expected_generalization_error(p, k) == pytest.approx(0.5, abs=1e-12)

    def test_thm1_constant_loss(self):
        z = plain_set(2)
        p = LearningProblem(z, line_space([0, 1]), np.full((2, 2), 0.4), uniform(z), 1)
        assert thm1_bound(p, memorizer_kernel(p)) == 0.0

    @pytest.mark.parametrize("d", [1.0, 3.0])
    def test_thm2_memorizer(self, d):
        # K = 1/d and diam = d cancel, TV of joint against product is 0.5
        assert thm2_bound(*memorizer(d)) == pytest.approx(0.5, abs=1e-12)

    def test_thm3_memorizer_and_linearity(self):
        assert thm3_bound(*memorizer()) == pytest.approx(1.0, abs=1e-12)
        assert thm3_bound(*memorizer(scale=10.0)) == pytest.approx(10.0, abs=1e-11)

    def test_thm4_memorizer(self):
        assert thm4_bound(*memorizer()) == pytest.approx(math.sqrt(math.log(2) / 2), abs=1e-12)
        assert thm4_bound(*memorizer()) == pytest.approx(0.588705, abs=1e-6)

    def test_thm4_scales_with_n(self):
        # Same information, twice the sample size: formula shrinks by sqrt 2.
        z = plain_set(2)
        base = LearningProblem(z, line_space([0, 1]), ZERO_ONE, uniform(z), 1)
        dbl = LearningProblem(z, line_space([0, 1]), ZERO_ONE, uniform(z), 2)
        from genlab.learner import kernel_from_function
        echo_first = kernel_from_function("first", lambda s: np.eye(2)[s[0]])
        ratio = thm4_bound(base, memorizer_kernel(base)) / thm4_bound(dbl, echo_first)
        assert ratio == pytest.approx(math.sqrt(2), abs=1e-12)

    @pytest.mark.parametrize("d, expected", [(1.0, 0.5), (3.0, 1.0)])
    def test_thm5_memorizer(self, d, expected):
        assert thm5_bound(*memorizer(d)) == pytest.approx(expected, abs=1e-12)


class TestCorollaries:
    def test_constant_kernel(self):
        reports = corollary_bounds(*constant_case())
        assert len(reports) == 12
        assert all(abs(r.value) <= 1e-12 and r.valid for r in reports)

    def test_memorizer(self):
        reports = corollary_bounds(*memorizer())
        assert len(reports) == 12
        assert all(r.valid and r.true_gen_error == pytest.approx(0.5) for r in reports)
        by_name = {r.name: r.value for r in reports}
        i = math.log(2)
        assert by_name["cor2_mi"] == pytest.approx(math.sqrt(2 * i))
        assert by_name["cor3_transport"] == pytest.approx(0.5)
        assert by_name["cor3_tv"] == pytest.approx(1.0)
        # chi^2 of the memorizer joint against its product is 1
        assert by_name["cor1_chi2"] == pytest.approx(math.sqrt(math.log(2) / 2))

    def test_infinite_values_are_vacuous(self):
        vals = bounded_family(1.0, 2, 0.3, 0.1, math.inf)
        r = _report("cor2_chi2", vals["cor2_chi2"], {"bounded": True}, 0.2)
        assert r.vacuous and r.valid and r.slack == math.inf


class TestEvaluateAll:
    def test_sorted_and_complete(self):
        reports = evaluate_all(*memorizer())
        names = [r.name for r in reports]
        assert names == sorted(names) and len(names) == 17
        assert all(r.valid for r in reports)

    def test_constant_kernel_all_zero(self):
        assert all(abs(r.value) <= 1e-12 and r.valid for r in evaluate_all(*constant_case()))

    def test_zero_distance_skips_lipschitz_family(self):
        z = plain_set(2)
        with pytest.warns(UserWarning):
            w = build_space([0, 1], [[0, 0], [0, 0]])
        p = LearningProblem(z, w, ZERO_ONE, uniform(z), 1)
        by_name = {r.name: r for r in evaluate_all(p, memorizer_kernel(p))}
        for name in ("thm1_transport", "thm2_tv_lipschitz", "thm4_mi", "cor1_prokhorov", "cor3_tv", "thm5_bl"):
            assert not by_name[name].applicable and by_name[name].valid is None
            assert math.isnan(by_name[name].value)
        assert by_name["thm3_tv_bounded"].applicable and by_name["thm3_tv_bounded"].valid

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**63 - 1))
    def test_soundness_and_dominance(self, seed):
        rng = np.random.default_rng(seed)
        p = random_problem(rng)
        for k in kernel_menu(p, rng):
            reports = {r.name: r for r in evaluate_all(p, k)}
            for r in reports.values():
                if r.applicable:
                    assert r.true_gen_error <= r.value + 1e-9, r.name
            assert reports["thm1_transport"].value <= reports["thm2_tv_lipschitz"].value + 1e-8


class TestVc:
    def test_growth_examples(self):
        assert growth_function(threshold_class(5), 3) == 4
        assert growth_function(full_class(3), 3) == 8
        single = HypothesisClass([[0, 1, 1, 0]])
        assert all(growth_function(single, n) == 1 for n in range(1, 6))

    def test_vc_examples(self):
        assert vc_dimension(threshold_class(10)) == 1
        assert vc_dimension(interval_class(10)) == 2
        assert vc_dimension(full_class(4)) == 4
        assert vc_dimension(HypothesisClass([[0, 0, 0]])) == 0

    def test_vc_cap(self):
        with pytest.raises(EnumerationCapExceeded):
            vc_dimension(threshold_class(25))

    def test_duplicates_collapse(self):
        with pytest.warns(UserWarning, match="duplicate"):
            h = HypothesisClass([[0, 1], [0, 1], [1, 1]])
        assert h.size == 2

    @pytest.mark.parametrize("d, n, expected", [(2, 5, (5 * math.e / 2) ** 2), (3, 2, 4.0), (1, 1, math.e)])
    def test_sauer(self, d, n, expected):
        assert sauer_bound(d, n) == pytest.approx(expected, rel=1e-15)

    def test_sauer_numeric(self):
        # (5e/2)^2 = 6.795704571...^2
        assert sauer_bound(2, 5) == pytest.approx(46.181601, abs=1e-6)

    @pytest.mark.parametrize("d, n, expected", [(3, 3, math.sqrt(2)), (1, 100, 0.334820), (2, 5, 1.23816)])
    def test_thm6(self, d, n, expected):
        assert thm6_bound(d, n) == pytest.approx(expected, abs=1e-5)

    @pytest.mark.parametrize("make", [lambda: threshold_class(7), lambda: interval_class(6), lambda: full_class(4)])
    def test_growth_below_sauer(self, make):
        h = make()
        d = vc_dimension(h)
        for n in range(1, 9):
            assert growth_function(h, n) <= sauer_bound(d, n)

    def test_thm6_report_flags(self):
        p = classification_problem(threshold_class(3), 2)
        by_kernel = {k.name: {r.name: r for r in evaluate_all(p, k)}["thm6_vc"]
                     for k in (erm_kernel(p), gibbs_kernel(p, 1.0))}
        assert by_kernel["erm"].applicable and by_kernel["erm"].valid
        assert not by_kernel["gibbs"].applicable and by_kernel["gibbs"].valid is None

    def test_classification_problem_shape(self):
        p = classification_problem(interval_class(3), 2)
        assert p.n_instances == 6 and p.n_hypotheses == 7
        assert set(np.unique(p.loss)) == {0.0, 1.0}

import math

import pytest

from quadres import consts


class TestIntegralConstants:
    def test_c1(self):
        rep = consts.const_C1()
        assert abs(rep.value - 0.8187) < 5e-4
        assert rep.method == "quadrature"

    def test_c1_budget_refinement(self):
        from quadres.specfn import PrecisionBudget

        loose = consts.const_C1(PrecisionBudget(1e-9, 1e-9, 4000)).value
        tight = consts.const_C1(PrecisionBudget(1e-13, 1e-13, 8000)).value
        assert abs(loose - tight) < 1e-6

    def test_c2_value_and_two_forms(self):
        rep = consts.const_C2()
        assert abs(rep.value - 0.455967) < 1e-6
        assert rep.discrepancy < 1e-12

    def test_c3(self):
        rep = consts.const_c3()
        assert abs(rep.value - 0.438825) < 1e-5
        assert rep.discrepancy < 1e-9

    def test_cprime_closed_form(self):
        rep = consts.const_cprime()
        assert abs(rep.value - (math.log(2.0) + math.pi / 2.0 - 2.0)) < 1e-15
        assert rep.discrepancy < 1e-9

    def test_c2_integral_stable(self):
        from quadres.specfn import PrecisionBudget

        a = consts.const_c2_integral(PrecisionBudget(1e-10, 1e-10, 4000)).value
        b = consts.const_c2_integral(PrecisionBudget(1e-13, 1e-13, 8000)).value
        assert abs(a - b) < 1e-9

    def test_c2_consistency_with_pieces(self):
        # C2 - c3 - log(threshold) = 0 by construction
        c2 = consts.const_C2().value
        gap = c2 - consts.const_c3().value - math.log(consts.threshold_c().value)
        assert abs(gap) < 1e-12


class TestThreshold:
    def test_value(self):
        assert abs(consts.threshold_c().value - 1.0173) < 1e-3
        assert abs(consts.threshold_c().value - 1.01729) < 1e-4

    def test_choose_c_above_threshold(self):
        for eta in (0.01, 0.1, 0.5):
            for X in (100.0, 1e6, 1e12):
                c = consts.choose_c(eta, X)
                if 5 * eta > 1.0 / math.sqrt(math.log(math.log(X))):
                    assert c > consts.threshold_c().value

    def test_choose_c_formula_exact(self):
        # log c - log threshold = 5 eta - 1/sqrt(log_2 X), exactly
        for eta, X in ((0.1, 1e4), (0.03, 1e8), (0.2, 1e16)):
            gap = math.log(consts.choose_c(eta, X)) - math.log(consts.threshold_c().value)
            expected = 5.0 * eta - 1.0 / math.sqrt(math.log(math.log(X)))
            assert abs(gap - expected) < 1e-14

    def test_choose_c_limits(self):
        # along a path where eta -> 0 and X -> inf with the two formula terms
        # balancing, c converges to the threshold
        gaps = []
        for k, X in enumerate((1e4, 1e8, 1e16, 1e300), start=1):
            correction = 1.0 / math.sqrt(math.log(math.log(X)))
            eta = correction / 5.0 * (1.0 + 1.0 / k)
            gaps.append(abs(consts.choose_c(eta, X) - consts.threshold_c().value))
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert gaps[-1] < 0.11

    def test_choose_c_domain(self):
        with pytest.raises(ValueError):
            consts.choose_c(0.1, 2.0)
        with pytest.raises(ValueError):
            consts.choose_c(0.0, 1e6)

    def test_choose_c_reproducible(self):
        assert consts.choose_c(0.2, 1e6) == consts.choose_c(0.2, 1e6)


class TestAlphaTheta:
    def test_alpha_limit(self):
        assert abs(consts.alpha_b(1 - 1e-9).value - 2.0 * math.log(2.0)) < 1e-7

    def test_theta_at_zero(self):
        assert consts.theta_b(0.0).value == 0.0

    def test_monotone_on_grid(self):
        grid = [k / 1000.0 for k in range(1, 1000)]
        alphas = [consts.alpha_b(b).value for b in grid]
        thetas = [consts.theta_b(b).value for b in grid]
        assert all(x < y for x, y in zip(alphas, alphas[1:]))
        assert all(x < y for x, y in zip(thetas, thetas[1:]))

    def test_alpha_sigma_corner_limit(self):
        target = math.sqrt(2.0 / math.log(2.0))
        got = consts.alpha_sigma_b(0.5 + 1e-9, 1 - 1e-9).value
        assert abs(got - target) < 1e-6
        assert abs(consts.const_sqrt_2_over_log2().value - 1.6986) < 1e-3

    def test_domains(self):
        with pytest.raises(ValueError):
            consts.alpha_b(0.0)
        with pytest.raises(ValueError):
            consts.alpha_sigma_b(0.4, 0.5)


class TestTau:
    def test_one_formula(self):
        X = 1e6
        l2 = math.log(math.log(X))
        expected = l2 + math.log(l2) - consts.const_C2().value
        assert abs(consts.tau_eta("one", X, 0.0) - expected) < 1e-14

    def test_one_domain(self):
        with pytest.raises(ValueError):
            consts.tau_eta("one", 15.0, 0.0)

    def test_sigma_vanishes_at_eta_limit(self):
        b = 0.9
        a = consts.alpha_b(b).value
        taus = [
            consts.tau_eta("sigma", 1e6, 1.0 / a - eps, sigma=0.75, b=b)
            for eps in (1e-3, 1e-6, 1e-9, 1e-12)
        ]
        assert all(t > 0 for t in taus)
        assert all(y < x for x, y in zip(taus, taus[1:]))
        assert taus[-1] < 1e-2

    def test_sigma_domain(self):
        with pytest.raises(ValueError):
            consts.tau_eta("sigma", 1e6, 2.0, sigma=0.75, b=0.9)


class TestProportionExponent:
    def test_one(self):
        assert abs(consts.proportion_exponent("one", 0.044) - 0.4784769787) < 1e-9
        assert consts.proportion_exponent("one", 0.0) == 0.5

    def test_sigma(self):
        b = 0.9
        a = consts.alpha_b(b).value
        assert abs(
            consts.proportion_exponent("sigma", 0.1, b) - 0.5 * (1.0 - 0.1 * a)
        ) < 1e-15


def test_euler_gamma_digits():
    # e^gamma should invert to gamma through log
    assert abs(math.log(math.exp(consts.EULER_GAMMA)) - consts.EULER_GAMMA) < 1e-16
    assert abs(consts.EULER_GAMMA - 0.577215664901532861) < 1e-15


def test_report_listing():
    reports = consts.all_constant_reports()
    names = [r.name for r in reports]
    assert "C1" in names and "C2" in names and "c_threshold" in names
    for r in reports:
        if r.method == "both":
            assert r.discrepancy <= 1e-9

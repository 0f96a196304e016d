import math
from fractions import Fraction

import pytest

from quadres import resonator as rs
from quadres.arith import kronecker


def override_params(windows, thresholds, N=20.0, a=1.2, delta=0.5):
    return rs.BsParams(
        N=N, a=a, delta=delta, window_override=rs.WindowOverride(windows, thresholds)
    )


class TestBsParams:
    def test_joint_constraint(self):
        with pytest.raises(ValueError):
            rs.BsParams(N=20.0, a=2.5, delta=0.5)  # a >= 1/delta
        with pytest.raises(ValueError):
            rs.BsParams(N=20.0, a=0.9, delta=0.5)
        with pytest.raises(ValueError):
            rs.BsParams(N=8.0, a=1.2, delta=0.5)

    def test_config_round_trip(self):
        p = override_params(((10.0, 30.0),), (2,))
        assert rs.spec_from_config(rs.spec_to_config(p)) == p
        e = rs.EulerParams("central_one", z=35.5)
        assert rs.spec_from_config(rs.spec_to_config(e)) == e
        s = rs.EulerParams("sigma_band", Y=50.0, b=0.9)
        assert rs.spec_from_config(rs.spec_to_config(s)) == s


class TestBsSupport:
    def test_override_window(self):
        sup = rs.bs_support_primes(override_params(((10.0, 30.0),), (None,)))
        assert sup.window_primes == ((11, 13, 17, 19, 23, 29),)

    def test_default_window_count(self):
        # N = e^(e^4), delta = 1/2: floor((log_2 N)^delta) = 2 sub-windows
        params = rs.BsParams(N=math.exp(math.exp(4.0)), a=1.5, delta=0.5)
        sup = rs.bs_support_primes(params)
        assert len(sup.windows) == 2
        for (_, h1), (l2, _) in zip(sup.windows, sup.windows[1:]):
            assert h1 <= l2 or math.isclose(h1, l2)
        # support is cut at the overall edge, so the trailing window is empty
        assert len(sup.window_primes[1]) == 0

    def test_desk_scale_needs_override(self):
        with pytest.raises(ValueError, match="window_override"):
            rs.bs_support_primes(rs.BsParams(N=16.0, a=1.2, delta=0.5))


class TestBsPsi:
    def test_empty_product(self):
        p = override_params(((10.0, 30.0),), (None,))
        assert rs.bs_psi(1, p) == 1.0

    def test_square_kills(self):
        p = override_params(((10.0, 30.0),), (None,))
        assert rs.bs_psi(121, p) == 0.0

    def test_outside_window_kills(self):
        p = override_params(((10.0, 30.0),), (None,))
        assert rs.bs_psi(7, p) == 0.0

    def test_multiplicative(self):
        p = override_params(((10.0, 30.0),), (None,))
        assert abs(rs.bs_psi(11 * 13, p) - rs.bs_psi(11, p) * rs.bs_psi(13, p)) < 1e-16

    def test_formula_value(self):
        p = override_params(((10.0, 30.0),), (None,))
        N = p.N
        m0 = math.log(N) * math.log(math.log(N))
        log3 = math.log(math.log(math.log(N)))
        expected = math.sqrt(m0 / log3) / (math.sqrt(11) * (math.log(11) - math.log(m0)))
        assert abs(rs.bs_psi(11, p) - expected) < 1e-15


class TestBsMembership:
    def test_one_always_member(self):
        p = override_params(((10.0, 30.0),), (2,))
        assert rs.bs_membership(1, p)

    def test_threshold_two(self):
        p = override_params(((10.0, 30.0),), (2,))
        assert rs.bs_membership(11, p)
        assert not rs.bs_membership(11 * 13, p)

    def test_outside_support(self):
        p = override_params(((10.0, 30.0),), (2,))
        assert not rs.bs_membership(7 * 11, p)


class TestBsEnumerate:
    def test_two_prime_window(self):
        p = override_params(((10.0, 14.0),), (None,))
        en = rs.bs_enumerate(p, 100)
        assert en.members == (1, 11, 13, 143)
        assert en.total_count == 4 and not en.truncated

    def test_threshold_one_collapses(self):
        p = override_params(((10.0, 30.0),), (1,))
        assert rs.bs_enumerate(p, 10).members == (1,)

    def test_truncation_flag(self):
        p = override_params(((10.0, 30.0),), (None,))
        en = rs.bs_enumerate(p, 5)
        assert en.truncated and len(en.members) == 5 and en.total_count == 64

    def test_member_size_bound(self):
        # log m <= sum over windows of (allowed count) * log(upper edge)
        p = override_params(((10.0, 30.0), (30.0, 60.0)), (2, 2))
        en = rs.bs_enumerate(p, 10000)
        bound = (2 - 1) * math.log(30.0) + (2 - 1) * math.log(60.0)
        for m in en.members:
            assert math.log(m) <= bound + 1e-12

    def test_le1_bound_at_override_scale(self):
        p = override_params(((10.0, 30.0),), (2,), N=20.0)
        en = rs.bs_enumerate(p, 100)
        assert not en.truncated
        assert en.total_count <= p.N


class TestBsResonatorValue:
    def test_hand_sum(self):
        p = override_params(((10.0, 14.0),), (None,))
        hand = (
            1.0
            + rs.bs_psi(11, p) * kronecker(5, 11)
            + rs.bs_psi(13, p) * kronecker(5, 13)
            + rs.bs_psi(143, p) * kronecker(5, 143)
        )
        assert abs(rs.bs_resonator_value(5, p) - hand) < 1e-15

    def test_triangle_bound(self):
        p = override_params(((10.0, 30.0),), (2,))
        total = sum(rs.bs_psi(m, p) for m in rs.bs_enumerate(p, 100).members)
        for d in (5, -3, 12, -20, 997):
            assert abs(rs.bs_resonator_value(d, p)) <= total + 1e-12

    def test_scaling_linearity(self):
        # scaling every psi by lambda scales R_d by lambda
        p = override_params(((10.0, 14.0),), (None,))
        members = rs.bs_enumerate(p, 100).members
        lam = 3.7
        for d in (5, -3, 13):
            scaled = sum(
                lam * rs.bs_psi(m, p) * kronecker(d, m) for m in members
            )
            assert abs(scaled - lam * rs.bs_resonator_value(d, p)) < 1e-12

    def test_cap_exceeded(self):
        p = override_params(((10.0, 60.0),), (None,))
        with pytest.raises(rs.CapExceededError):
            rs.bs_resonator_value(5, p, count_cap=3)


class TestANProduct:
    def test_single_prime_factor(self):
        p = override_params(((10.0, 12.0),), (None,))
        psi = rs.bs_psi(11, p)
        h = 11.0 / 12.0
        expected = (1.0 + psi * h / math.sqrt(11.0) + psi * psi * h) / (1.0 + psi * psi)
        assert abs(rs.a_n_product(p) - expected) < 1e-14

    def test_two_prime_hand_product(self):
        p = override_params(((10.0, 14.0),), (None,))
        expected = 1.0
        for q in (11, 13):
            psi = rs.bs_psi(q, p)
            h = q / (q + 1.0)
            expected *= (1.0 + psi * h / math.sqrt(q) + psi * psi * h) / (1.0 + psi * psi)
        assert abs(rs.a_n_product(p) - expected) < 1e-12

    def test_exceeds_one(self):
        p = override_params(((10.0, 30.0),), (None,))
        assert rs.a_n_product(p) > 1.0


class TestEulerParams:
    def test_validation(self):
        with pytest.raises(ValueError):
            rs.EulerParams("central_one")
        with pytest.raises(ValueError):
            rs.EulerParams("sigma_band", Y=10.0, b=1.5)
        with pytest.raises(ValueError):
            rs.EulerParams("nope", z=4.0)

    def test_coefficients(self):
        ep = rs.EulerParams("central_one", z=4.0)
        assert rs.euler_r_coefficient(1, ep) == 1.0
        assert rs.euler_r_coefficient(4, ep) == 0.25
        assert rs.euler_r_coefficient(5, ep) == 0.0
        assert rs.euler_r_coefficient(10, ep) == 0.0
        eb = rs.EulerParams("sigma_band", Y=100.0, b=0.3)
        assert abs(rs.euler_r_coefficient(12, eb) - 0.027) < 1e-15

    def test_window_boundaries(self):
        # central_one is strict below z; sigma_band includes Y itself
        ep = rs.EulerParams("central_one", z=5.0)
        assert [p for p, _ in rs.euler_window(ep)] == [2, 3]
        eb = rs.EulerParams("sigma_band", Y=5.0, b=0.5)
        assert [p for p, _ in rs.euler_window(eb)] == [2, 3, 5]


class TestEulerResonatorValue:
    def test_hand_value(self):
        ep = rs.EulerParams("central_one", z=4.0)
        assert abs(rs.euler_resonator_value(5, ep) - 8.0 / 15.0) < 1e-14

    def test_zero_character_window(self):
        ep = rs.EulerParams("central_one", z=4.0)
        assert rs.euler_resonator_value(-24, ep) == 1.0

    def test_positive_and_log_bounded(self):
        ep = rs.EulerParams("central_one", z=30.0)
        bound = sum(math.log(30.0 / p) for p, _ in rs.euler_window(ep))
        for d in (5, -3, -4, 8, 997, -1000004):
            val = rs.euler_resonator_value(d, ep)
            assert val > 0
            assert math.log(val) <= bound + 1e-10


WINDOWS = [
    [(2,)],
    [(3,)],
    [(5,)],
    [(2, 3)],
    [(2, 5)],
    [(3, 5)],
    [(2, 3, 5)],
]


def _r_assignments(primes):
    yield [(p, Fraction(1, 4)) for p in primes]
    yield [(p, Fraction(1, 2)) for p in primes]
    z = max(primes) + 1
    yield [(p, 1 - Fraction(p, z)) for p in primes]


class TestSquarePairIdentity:
    def test_empty_window(self):
        assert rs.square_pair_ksum([], 8) == 1
        assert rs.square_pair_bruteforce([], 8) == 1

    @pytest.mark.parametrize("primes", [w[0] for w in WINDOWS])
    def test_bruteforce_equals_ksum_exactly(self, primes):
        for window in _r_assignments(primes):
            cap = 5 if len(primes) == 3 else 8
            assert rs.square_pair_bruteforce(window, cap) == rs.square_pair_ksum(
                window, cap
            )

    def test_ksum_converges_to_closed_form(self):
        window = [(2, Fraction(1, 2)), (3, Fraction(1, 4))]
        closed = rs.square_pair_closed_form(window)
        assert abs(float(rs.square_pair_ksum(window, 20)) - closed) < 1e-8
        k24 = float(rs.square_pair_ksum(window, 24))
        k28 = float(rs.square_pair_ksum(window, 28))
        assert abs(k28 - k24) < abs(float(rs.square_pair_ksum(window, 12)) - k24) + 1e-15

    def test_spec_wrapper(self):
        ep = rs.EulerParams("central_one", z=4.0)
        res = rs.square_pair_sum(ep, 24)
        assert abs(res.k_sum - res.closed_form) < 1e-8


class TestMcz:
    def test_closed_form_matches_bruteforce(self):
        ep = rs.EulerParams("central_one", z=4.0)
        res = rs.mcz_scz(ep)
        window = [(2, Fraction(1, 2)), (3, Fraction(1, 4))]
        brute = rs.mcz_triple_bruteforce(window, 48)
        assert abs(res.M - float(brute.value)) < 1e-10
        assert brute.tail_bound < 1e-10

    def test_degenerate_resonator(self):
        # r = 0: M collapses to the bare square l-sum, S to 1
        window = [(2, Fraction(0)), (3, Fraction(0))]
        brute = rs.mcz_triple_bruteforce(window, 40).value
        direct = Fraction(1)
        for p in (2, 3):
            direct *= Fraction(1) + Fraction(p, p + 1) * sum(
                Fraction(1, p ** (2 * e)) for e in range(1, 21)
            )
        assert abs(float(brute - direct)) < 1e-10
        assert rs.b_of_z_product(window) == 1.0

    def test_s_equals_square_pair_closed_form(self):
        ep = rs.EulerParams("central_one", z=6.0)
        res = rs.mcz_scz(ep)
        assert abs(res.S - rs.square_pair_closed_form(rs.euler_window(ep))) < 1e-14

    def test_s_ksum_tail_reported(self):
        ep = rs.EulerParams("central_one", z=4.0)
        res = rs.mcz_scz(ep, exponent_cap=20)
        assert abs(res.s_ksum - res.S) <= max(res.s_tail_bound, 1e-8)

    def test_requires_central_one(self):
        with pytest.raises(ValueError):
            rs.mcz_scz(rs.EulerParams("sigma_band", Y=10.0, b=0.5))

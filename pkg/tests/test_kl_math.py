"""Unit and property tests for the Bernoulli divergence primitives."""

import math

import numpy as np
import pytest

from lilklucb.kl_math import (
    as_divergence,
    as_prob,
    bernoulli_kl,
    chernoff_crossing,
    chernoff_floor,
    chernoff_information,
    kl_lower_inverse,
    kl_upper_inverse,
    tilted_kl_lower_inverse,
    tilted_kl_upper_inverse,
)

# Frozen from an independent 40-digit evaluation of the closed form
# (0.3*ln(0.3/0.7) + 0.7*ln(0.7/0.3) on the float64 inputs).
KL_03_07 = 0.33891914415488137971

PROB_GRID = np.round(np.arange(0.01, 1.0, 0.01), 2)


class TestValidation:
    def test_prob_accepts_endpoints(self):
        assert as_prob(0.0) == 0.0
        assert as_prob(1.0) == 1.0

    @pytest.mark.parametrize("bad", [-0.1, 1.1, float("nan"), float("inf")])
    def test_prob_rejects_out_of_range(self, bad):
        with pytest.raises(ValueError):
            as_prob(bad)

    def test_divergence_allows_inf_rejects_nan(self):
        assert as_divergence(math.inf) == math.inf
        with pytest.raises(ValueError):
            as_divergence(float("nan"))
        with pytest.raises(ValueError):
            as_divergence(-1e-9)


class TestBernoulliKl:
    def test_zero_on_diagonal(self):
        for p in PROB_GRID:
            assert bernoulli_kl(p, p) == 0.0

    def test_max_deviation_is_log_inverse_mean(self):
        # D(1, mu) = ln(1/mu)
        assert bernoulli_kl(1.0, 0.5) == pytest.approx(math.log(2.0), abs=1e-15)
        for mu in (0.1, 0.25, 0.9):
            assert bernoulli_kl(1.0, mu) == pytest.approx(-math.log(mu), abs=1e-14)

    def test_interior_value_against_high_precision_oracle(self):
        assert bernoulli_kl(0.3, 0.7) == pytest.approx(KL_03_07, abs=1e-15)

    def test_degenerate_conventions(self):
        assert bernoulli_kl(0.0, 0.0) == 0.0
        assert bernoulli_kl(1.0, 1.0) == 0.0
        assert bernoulli_kl(0.5, 0.0) == math.inf
        assert bernoulli_kl(0.5, 1.0) == math.inf
        assert bernoulli_kl(0.0, 1.0) == math.inf
        assert bernoulli_kl(1.0, 0.0) == math.inf
        assert bernoulli_kl(0.0, 0.3) == pytest.approx(-math.log(0.7), abs=1e-15)

    def test_strictly_increasing_in_second_arg_above_p(self):
        for p in (0.0, 0.2, 0.5, 0.9):
            ms = np.linspace(p, 0.999, 60)
            vals = [bernoulli_kl(p, m) for m in ms]
            assert all(b > a for a, b in zip(vals, vals[1:]))


class TestInverses:
    def test_zero_budget_returns_p(self):
        assert kl_upper_inverse(0.5, 0.0) == 0.5
        assert kl_lower_inverse(0.5, 0.0) == 0.5
        assert tilted_kl_upper_inverse(0.5, 0.0, 8) == 0.5
        assert tilted_kl_lower_inverse(0.5, 0.0, 8) == 0.5

    def test_unbounded_budget_saturates(self):
        for p in (0.0, 0.3, 1.0):
            assert kl_upper_inverse(p, math.inf) == 1.0
            assert kl_lower_inverse(p, math.inf) == 0.0
            assert tilted_kl_upper_inverse(p, math.inf, 8) == 1.0
            assert tilted_kl_lower_inverse(p, math.inf, 8) == 0.0

    def test_plain_roundtrip_at_example_point(self):
        m = kl_upper_inverse(0.5, 0.1)
        assert abs(bernoulli_kl(0.5, m) - 0.1) <= 1e-9
        m = kl_lower_inverse(0.5, 0.1)
        assert abs(bernoulli_kl(0.5, m) - 0.1) <= 1e-9

    def test_tilted_roundtrip_at_example_point(self):
        m = tilted_kl_upper_inverse(0.3, 0.05, 8)
        assert abs(bernoulli_kl((8 * 0.3 + m) / 9.0, m) - 0.05) <= 1e-9
        m = tilted_kl_lower_inverse(0.3, 0.05, 8)
        assert abs(bernoulli_kl((8 * 0.3 + m) / 9.0, m) - 0.05) <= 1e-9

    def test_roundtrip_grid_all_four_solvers(self):
        # Budgets stay below the divergence at m = 0.995 / 0.005 so the
        # solution is interior and the solver's 1e-12 step keeps the
        # divergence within 1e-9 of the request.
        rng = np.random.default_rng(20240811)
        for _ in range(300):
            p = rng.uniform(0.01, 0.99)
            for tilt in (1, 8):
                cap = bernoulli_kl((tilt * p + 0.995) / (tilt + 1.0), 0.995)
                b = rng.uniform(1e-6, 0.95 * cap)
                m = tilted_kl_upper_inverse(p, b, tilt)
                got = bernoulli_kl((tilt * p + m) / (tilt + 1.0), m)
                assert b - 1e-9 <= got <= b
                cap = bernoulli_kl((tilt * p + 0.005) / (tilt + 1.0), 0.005)
                b = rng.uniform(1e-6, 0.95 * cap)
                m = tilted_kl_lower_inverse(p, b, tilt)
                got = bernoulli_kl((tilt * p + m) / (tilt + 1.0), m)
                assert b - 1e-9 <= got <= b
            b = rng.uniform(1e-6, 0.95 * bernoulli_kl(p, 0.995))
            got = bernoulli_kl(p, kl_upper_inverse(p, b))
            assert b - 1e-9 <= got <= b
            b = rng.uniform(1e-6, 0.95 * bernoulli_kl(p, 0.005))
            got = bernoulli_kl(p, kl_lower_inverse(p, b))
            assert b - 1e-9 <= got <= b

    def test_upper_inverse_nondecreasing_in_bound(self):
        for p in (0.1, 0.5, 0.9):
            bounds = np.linspace(0.0, 2.0, 80)
            vals = [kl_upper_inverse(p, b) for b in bounds]
            assert all(b >= a for a, b in zip(vals, vals[1:]))

    def test_inverse_stays_feasible_side(self):
        # the returned point never overshoots the requested budget
        for p in (0.05, 0.4, 0.75):
            for b in (1e-8, 1e-4, 0.02, 0.4):
                assert bernoulli_kl(p, kl_upper_inverse(p, b)) <= b
                assert bernoulli_kl(p, kl_lower_inverse(p, b)) <= b

    def test_tilt_validation(self):
        with pytest.raises(ValueError):
            tilted_kl_upper_inverse(0.5, 0.1, 0)
        with pytest.raises(ValueError):
            tilted_kl_lower_inverse(0.5, 0.1, -3)


class TestChernoff:
    def test_zero_on_diagonal(self):
        for mu in (0.0, 0.3, 1.0):
            assert chernoff_information(mu, mu) == 0.0

    def test_symmetry_is_exact(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            x, y = rng.uniform(0.01, 0.99, size=2)
            assert chernoff_information(x, y) == chernoff_information(y, x)

    def test_symmetric_pair_pins_the_crossing(self):
        # x = 1 - y forces the crossing to 1/2, so the value collapses to
        # a plain divergence evaluation
        assert chernoff_crossing(0.25, 0.75) == pytest.approx(0.5, abs=1e-9)
        assert chernoff_information(0.25, 0.75) == pytest.approx(
            bernoulli_kl(0.5, 0.25), abs=1e-9
        )

    def test_defining_fixed_point(self):
        z = chernoff_crossing(0.3, 0.8)
        assert abs(bernoulli_kl(z, 0.3) - bernoulli_kl(z, 0.8)) <= 1e-10

    def test_degenerate_endpoints(self):
        assert chernoff_information(0.0, 1.0) == math.inf
        assert chernoff_information(0.0, 0.4) == pytest.approx(-math.log(0.6), abs=1e-14)
        assert chernoff_information(0.3, 1.0) == pytest.approx(-math.log(0.3), abs=1e-14)

    def test_pinsker_and_closed_form_floors_on_grid(self):
        # two lower bounds at once: half the squared gap, and the
        # closed-form floor from chernoff_floor
        for x in PROB_GRID:
            for y in PROB_GRID:
                if y < x:
                    continue
                d = chernoff_information(x, y)
                assert d >= 0.5 * (x - y) ** 2 - 1e-12
                assert d >= chernoff_floor(x, y - x) - 1e-12


class TestChernoffFloor:
    def test_zero_gap_gives_zero(self):
        for mu in (0.0, 0.3, 0.8):
            assert chernoff_floor(mu, 0.0) == pytest.approx(0.0, abs=1e-15)

    def test_mu_zero_closed_form(self):
        for gap in (0.1, 0.5, 0.9):
            assert chernoff_floor(0.0, gap) == pytest.approx(
                -0.5 * math.log1p(-gap), abs=1e-14
            )

    def test_example_point_bounds_the_information(self):
        assert chernoff_floor(0.2, 0.3) <= chernoff_information(0.2, 0.5)

    def test_domain_violation(self):
        with pytest.raises(ValueError):
            chernoff_floor(0.6, 0.5)

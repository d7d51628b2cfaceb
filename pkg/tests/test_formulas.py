import math

import pytest

from tasep2c.contour import QuadratureSpec
from tasep2c.errors import WindowTooSmallWarning
from tasep2c.formulas import (
    Configuration,
    StepInitial,
    displacement_tail_bound,
    head_transition_probability,
    head_word,
    leftmost_probability,
    leftmost_probability_shifted_step,
    leftmost_probability_step_det,
    probability_mass_check,
    step_configuration,
    tasep_leftmost_probability,
    transition_probability,
)

QUAD = QuadratureSpec(radius=0.5, points=16, tolerance=1e-12)


def scaled_close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


class TestConfiguration:
    def test_validation(self):
        with pytest.raises(ValueError):
            Configuration((2, 1), "21")
        with pytest.raises(ValueError):
            Configuration((1, 2), "2")
        with pytest.raises(ValueError):
            Configuration((1, 2), "23")
        with pytest.raises(ValueError):
            Configuration((), "")

    def test_step_initial(self):
        assert StepInitial(0).positions(4) == (1, 2, 3, 4)
        assert StepInitial(2).positions(4) == (1, 4, 5, 6)
        assert step_configuration(3).species == "211" == head_word(3)
        with pytest.raises(ValueError):
            StepInitial(-1)


class TestTransition:
    def test_time_zero_atom(self):
        y = step_configuration(2)
        assert transition_probability(y, y, 0.0) == 1.0
        assert transition_probability(y, Configuration((1, 3), "21"), 0.0) == 0.0
        assert transition_probability(y, Configuration((1, 2), "12"), 0.0) == 0.0

    def test_single_particle_is_poisson(self):
        y = Configuration((0,), "2")
        for method in ("residue", "quadrature"):
            v = transition_probability(y, Configuration((3,), "2"), 2.0, method=method)
            assert v == pytest.approx(math.exp(-2) * 2**3 / 6, rel=1e-10)

    def test_species_multiset_guard(self):
        with pytest.raises(ValueError, match="multiset"):
            transition_probability(
                Configuration((1, 2), "21"), Configuration((1, 2), "11"), 1.0
            )

    def test_unreachable_species_order_has_zero_probability(self):
        # a second class particle never overtakes a first class one
        value = transition_probability(
            Configuration((1, 2), "12"), Configuration((1, 2), "21"), 1.0
        )
        assert value == 0.0

    def test_swap_probability_positive_and_methods_agree(self):
        initial = Configuration((1, 2), "21")
        final = Configuration((1, 2), "12")
        a = transition_probability(initial, final, 1.0)
        b = transition_probability(initial, final, 1.0, method="quadrature", quad=QUAD)
        assert a > 0.1
        assert scaled_close(a, b, 1e-9)

    def test_methods_agree_n3(self):
        initial = Configuration((0, 2, 3), "121")
        final = Configuration((1, 2, 4), "112")
        a = transition_probability(initial, final, 0.7)
        b = transition_probability(initial, final, 0.7, method="quadrature", quad=QUAD)
        assert scaled_close(a, b, 1e-9)

    def test_head_matches_general_machinery(self):
        y = step_configuration(3)
        for xs in ((1, 2, 3), (1, 3, 5), (2, 3, 4)):
            x = Configuration(xs, "211")
            a = head_transition_probability(y, x, 1.0)
            b = transition_probability(y, x, 1.0)
            assert scaled_close(a, b, 1e-12)

    def test_head_requires_head_words(self):
        with pytest.raises(ValueError):
            head_transition_probability(
                Configuration((1, 2), "12"), Configuration((1, 2), "12"), 1.0
            )

    def test_bad_method_name(self):
        y = step_configuration(2)
        with pytest.raises(ValueError):
            transition_probability(y, y, 1.0, method="magic")


class TestLeftmost:
    def test_single_particle_poisson(self):
        y = Configuration((0,), "2")
        for x in range(0, 10):
            expect = math.exp(-2) * 2**x / math.factorial(x)
            assert leftmost_probability(y, x, 2.0) == pytest.approx(expect, rel=1e-13)

    def test_renewal_anchor(self):
        # order intact with x1 = 1 iff the front particle's clock never rang
        y = step_configuration(2)
        for t in (0.5, 1.0, 2.0):
            assert leftmost_probability(y, 1, t) == pytest.approx(math.exp(-t), abs=1e-12)

    def test_left_of_start_is_zero(self):
        assert leftmost_probability(step_configuration(2), 0, 1.0) == 0.0

    def test_time_zero_indicator(self):
        y = Configuration((2, 5), "21")
        assert leftmost_probability(y, 2, 0.0) == 1.0
        assert leftmost_probability(y, 3, 0.0) == 0.0

    def test_quadrature_agreement(self):
        for n in (2, 3):
            y = step_configuration(n)
            for x in (1, 2, 4):
                for t in (0.3, 1.0, 3.0):
                    a = leftmost_probability(y, x, t)
                    b = leftmost_probability(y, x, t, method="quadrature", quad=QUAD)
                    assert scaled_close(a, b, 1e-9)

    def test_nonstep_initial_data(self):
        y = Configuration((0, 3, 7), "211")
        values = [leftmost_probability(y, x, 1.5) for x in range(0, 12)]
        assert all(v >= 0 for v in values)
        assert sum(values) <= 1.0 + 1e-12

    def test_requires_head_species(self):
        with pytest.raises(ValueError):
            leftmost_probability(Configuration((1, 2), "12"), 1, 1.0)


class TestStepFamily:
    def test_step_family_agreement_small(self):
        for n in (1, 2, 3, 4):
            y = step_configuration(n)
            for x in (1, 2, 3, 5):
                for t in (0.3, 1.0):
                    a = leftmost_probability(y, x, t)
                    b = leftmost_probability_shifted_step(0, n, x, t)
                    c = leftmost_probability_step_det(n, x, t)
                    assert scaled_close(a, b, 1e-12)
                    assert scaled_close(a, c, 1e-12)

    def test_shifted_matches_direct_evaluation(self):
        for shift in (1, 3):
            for n in (2, 3):
                y = Configuration(StepInitial(shift).positions(n), head_word(n))
                for x in (1, 2, 4):
                    a = leftmost_probability_shifted_step(shift, n, x, 1.0)
                    b = leftmost_probability(y, x, 1.0)
                    assert scaled_close(a, b, 1e-12)

    def test_shifted_quadrature_agreement(self):
        for shift in (0, 1):
            a = leftmost_probability_shifted_step(shift, 2, 2, 1.0)
            b = leftmost_probability_shifted_step(
                shift, 2, 2, 1.0, method="quadrature", quad=QUAD
            )
            assert scaled_close(a, b, 1e-9)

    def test_determinant_single_particle(self):
        for x in (1, 2, 5):
            expect = math.exp(-1.5) * 1.5 ** (x - 1) / math.factorial(x - 1)
            assert leftmost_probability_step_det(1, x, 1.5) == pytest.approx(expect, rel=1e-13)

    def test_determinant_renewal_anchor(self):
        assert leftmost_probability_step_det(2, 1, 1.0) == pytest.approx(
            math.exp(-1), abs=1e-12
        )

    def test_large_n_uses_lu_route(self):
        value = leftmost_probability_step_det(7, 1, 0.5)
        assert 0.0 <= value <= 1.0

    def test_double_sum_cap(self):
        with pytest.raises(ValueError):
            leftmost_probability_shifted_step(0, 7, 1, 1.0)


class TestTasep:
    def test_single_particle_matches_two_species(self):
        a = tasep_leftmost_probability(Configuration((0,), "1"), 3, 2.0)
        b = leftmost_probability(Configuration((0,), "2"), 3, 2.0)
        assert a == pytest.approx(b, rel=1e-13)

    def test_mass_below_one(self):
        y = Configuration((1, 2), "22")
        total = sum(tasep_leftmost_probability(y, x, 1.0) for x in range(1, 16))
        assert total == pytest.approx(1.0, abs=1e-9)
        assert all(tasep_leftmost_probability(y, x, 1.0) >= 0 for x in range(1, 8))

    def test_quadrature_agreement(self):
        y = Configuration((1, 2), "11")
        a = tasep_leftmost_probability(y, 2, 1.0)
        b = tasep_leftmost_probability(y, 2, 1.0, method="quadrature", quad=QUAD)
        assert scaled_close(a, b, 1e-9)

    def test_requires_single_species(self):
        with pytest.raises(ValueError):
            tasep_leftmost_probability(step_configuration(2), 1, 1.0)


class TestMassConservation:
    def test_single_particle(self):
        total = probability_mass_check(Configuration((0,), "2"), 1.0, 40)
        assert total == pytest.approx(1.0, abs=1e-8)

    def test_two_particles(self):
        total = probability_mass_check(Configuration((1, 2), "21"), 1.0, 18)
        assert total == pytest.approx(1.0, abs=1e-6 + displacement_tail_bound(2, 1.0, 18))

    def test_time_zero(self):
        assert probability_mass_check(step_configuration(2), 0.0, 3) == 1.0

    def test_window_warning(self):
        with pytest.warns(WindowTooSmallWarning):
            probability_mass_check(Configuration((0,), "2"), 2.0, 3)

    def test_size_cap(self):
        with pytest.raises(ValueError):
            probability_mass_check(step_configuration(4), 1.0, 5)


def test_summation_realization_small():
    # summing the head transition kernel over the trailing positions
    # reproduces the leftmost-event probability
    y = step_configuration(2)
    t, x, window = 1.0, 1, 20
    total = sum(
        head_transition_probability(y, Configuration((x, x2), "21"), t)
        for x2 in range(x + 1, x + window)
    )
    assert total == pytest.approx(leftmost_probability(y, x, t), abs=1e-10)

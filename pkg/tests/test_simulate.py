import math
import random
from collections import Counter

import pytest

from tasep2c.formulas import Configuration, step_configuration
from tasep2c.simulate import (
    SimulationEstimate,
    estimate_event,
    final_state_sample,
    leftmost_event,
    simulate_until,
    step_dynamics,
    substream,
    transition_event,
)


class ScriptedRng:
    """Fixed dwell, scripted particle picks; for single-step rule checks."""

    def __init__(self, picks):
        self.picks = list(picks)

    def expovariate(self, rate):
        return 1.0 / rate

    def randrange(self, n):
        return self.picks.pop(0)


def test_free_move():
    state, dwell = step_dynamics(Configuration((0, 5), "21"), ScriptedRng([0]))
    assert state == Configuration((1, 5), "21")
    assert dwell == 0.5


def test_swap_first_class_displaces_second():
    state, _ = step_dynamics(Configuration((0, 1), "21"), ScriptedRng([0]))
    assert state == Configuration((0, 1), "12")


def test_blocked_second_behind_first():
    state, _ = step_dynamics(Configuration((0, 1), "12"), ScriptedRng([0]))
    assert state == Configuration((0, 1), "12")


def test_blocked_same_species():
    for word in ("11", "22"):
        state, _ = step_dynamics(Configuration((0, 1), word), ScriptedRng([0]))
        assert state == Configuration((0, 1), word)


def test_rightmost_particle_always_free():
    state, _ = step_dynamics(Configuration((0, 1), "21"), ScriptedRng([1]))
    assert state == Configuration((0, 2), "21")


def test_simulate_until_time_zero():
    y = step_configuration(3)
    assert simulate_until(y, 0.0, random.Random(1)) == y
    with pytest.raises(ValueError):
        simulate_until(y, -1.0, random.Random(1))


def test_simulate_until_composes_step_dynamics():
    y = Configuration((0, 2, 3), "121")
    t = 2.5
    fast = simulate_until(y, t, random.Random(99))
    rng = random.Random(99)
    state, clock = y, 0.0
    while True:
        nxt, dwell = step_dynamics(state, rng)
        clock += dwell
        if clock > t:
            break
        state = nxt
    assert fast == state


def test_invariants_along_trajectories():
    rng = random.Random(7)
    for _ in range(200):
        y = Configuration((0, 2, 3, 7), "2121")
        state = simulate_until(y, 3.0, rng)
        assert all(b > a for a, b in zip(state.positions, state.positions[1:]))
        assert sorted(state.species) == sorted(y.species)
        assert state.positions >= y.positions


def test_estimate_determinism_and_shape():
    y = step_configuration(2)
    e1 = estimate_event(y, leftmost_event(1), 1.0, 3000, seed=42)
    e2 = estimate_event(y, leftmost_event(1), 1.0, 3000, seed=42)
    assert isinstance(e1, SimulationEstimate)
    assert e1.estimate == e2.estimate
    assert e1.std_error == pytest.approx(
        math.sqrt(e1.estimate * (1 - e1.estimate) / 3000)
    )
    e3 = estimate_event(y, leftmost_event(1), 1.0, 3000, seed=43)
    assert e3.estimate != e1.estimate


def test_always_true_predicate():
    est = estimate_event(step_configuration(2), lambda s: True, 0.5, 500, seed=0)
    assert est.estimate == 1.0 and est.std_error == 0.0


def test_transition_event_at_time_zero():
    y = step_configuration(2)
    est = estimate_event(y, transition_event(y), 0.0, 200, seed=0)
    assert est.estimate == 1.0
    other = Configuration((1, 3), "21")
    est = estimate_event(y, transition_event(other), 0.0, 200, seed=0)
    assert est.estimate == 0.0


def test_runs_validation():
    with pytest.raises(ValueError):
        estimate_event(step_configuration(2), lambda s: True, 1.0, 0, seed=0)
    with pytest.raises(ValueError):
        final_state_sample(step_configuration(2), 1.0, 0, seed=0)


def test_parallel_estimates_match_sequential():
    y = step_configuration(2)
    seq = estimate_event(y, leftmost_event(1), 1.0, 2000, seed=8)
    par = estimate_event(y, leftmost_event(1), 1.0, 2000, seed=8, processes=2)
    assert par.estimate == seq.estimate
    seq_counts = final_state_sample(y, 1.0, 2000, seed=8)
    par_counts = final_state_sample(y, 1.0, 2000, seed=8, processes=3)
    assert seq_counts == par_counts


def test_substreams_differ():
    a = substream(1, 0).random()
    b = substream(1, 1).random()
    c = substream(2, 0).random()
    assert len({a, b, c}) == 3
    assert substream(1, 0).random() == a


def test_final_state_sample_consistent_with_estimate():
    y = step_configuration(2)
    runs, seed, t = 4000, 11, 1.0
    counts = final_state_sample(y, t, runs, seed)
    assert sum(counts.values()) == runs
    est = estimate_event(y, leftmost_event(1), t, runs, seed)
    hits = sum(c for (pos, spc), c in counts.items() if pos[0] == 1 and spc == "21")
    assert hits / runs == est.estimate


def test_single_particle_displacement_is_poisson():
    # chi-square goodness of fit against Poisson(1), 9 cells (0..7 and tail);
    # 20.090 is the 0.99 quantile of chi-square with 8 degrees of freedom
    t, runs, seed = 1.0, 100_000, 2718
    counts = Counter()
    y = Configuration((0,), "2")
    for (pos, _), c in final_state_sample(y, t, runs, seed).items():
        counts[min(pos[0], 8)] += c
    expected = [runs * math.exp(-t) * t**j / math.factorial(j) for j in range(8)]
    expected.append(runs - sum(expected))
    chi2 = sum((counts.get(j, 0) - expected[j]) ** 2 / expected[j] for j in range(9))
    assert chi2 < 20.090


def test_renewal_consistency():
    y = step_configuration(2)
    t, runs, seed = 1.0, 50_000, 5
    est = estimate_event(y, leftmost_event(1), t, runs, seed)
    se = math.sqrt(math.exp(-t) * (1 - math.exp(-t)) / runs)
    assert abs(est.estimate - math.exp(-t)) <= 4 * se

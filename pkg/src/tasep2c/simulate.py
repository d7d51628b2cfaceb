"""Continuous-time Monte Carlo for the two-species exclusion process.

Dynamics on the integer lattice: every particle carries an independent
rate-1 exponential clock and tries to hop one site to the right when it
rings.  The target site decides the outcome:

* empty                      -> the particle moves;
* same species ahead         -> blocked, the clock resets;
* first class behind second  -> the pair swaps (species 2 displaces 1);
* second class behind first  -> blocked.

By superposition this is simulated as: wait Exponential(N), pick one of the
N particles uniformly, attempt its jump (blocked attempts simply consume
the ring).  Swaps exchange the species labels at fixed ordered positions,
which keeps the position vector strictly increasing structurally; the
position vector alone evolves exactly like a single-species process.

Reproducibility: run r of a batch draws from ``random.Random`` seeded with
splitmix64(seed, r), so runs are independent streams, order-independent and
parallel-safe, and a (seed, runs) pair pins the estimate bit-exactly --
with any worker count, since hit counters merge order-independently.
Predicates built by :func:`leftmost_event` / :func:`transition_event` are
picklable, which the multi-process path needs.
"""

from __future__ import annotations

import math
import multiprocessing
import random
import time
from collections import Counter
from dataclasses import dataclass
from functools import partial
from typing import Callable

from .formulas import Configuration

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int) -> int:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def substream(seed: int, run_index: int) -> random.Random:
    """Independent RNG for one run, derived deterministically from the seed."""
    return random.Random(_splitmix64((seed & _MASK64) ^ _splitmix64(run_index)))


@dataclass(frozen=True)
class SimulationEstimate:
    """Event-probability estimate with its binomial standard error."""

    estimate: float
    std_error: float
    runs: int
    seed: int
    elapsed: float


def step_dynamics(state: Configuration, rng: random.Random) -> tuple[Configuration, float]:
    """One attempted jump; returns the new state and the dwell time consumed.

    The dwell is Exponential(N) and the attempting particle is uniform among
    the N particles; blocked attempts return the state unchanged.
    """
    pos = list(state.positions)
    spc = list(state.species)
    n = len(pos)
    dwell = rng.expovariate(n)
    i = rng.randrange(n)
    target = pos[i] + 1
    if i + 1 < n and pos[i + 1] == target:
        if spc[i] == "2" and spc[i + 1] == "1":
            spc[i], spc[i + 1] = "1", "2"
    else:
        pos[i] = target
    return Configuration(tuple(pos), "".join(spc)), dwell


def _run_raw(
    pos: list[int], spc: list[str], n: int, t: float, rng: random.Random
) -> tuple[tuple[int, ...], str]:
    """In-place event loop; same draw order as step_dynamics."""
    expovariate = rng.expovariate
    randrange = rng.randrange
    remaining = t
    while True:
        remaining -= expovariate(n)
        if remaining <= 0:
            return tuple(pos), "".join(spc)
        i = randrange(n)
        target = pos[i] + 1
        if i + 1 < n and pos[i + 1] == target:
            if spc[i] == "2" and spc[i + 1] == "1":
                spc[i], spc[i + 1] = "1", "2"
        else:
            pos[i] = target


def simulate_until(initial: Configuration, t: float, rng: random.Random) -> Configuration:
    """State at time t: the composition of step_dynamics until the clock passes t."""
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0:
        return initial
    pos, spc = _run_raw(list(initial.positions), list(initial.species), initial.n, t, rng)
    return Configuration(pos, spc)


def _chunk_ranges(runs: int, chunks: int) -> list[tuple[int, int]]:
    size, extra = divmod(runs, chunks)
    ranges, start = [], 0
    for i in range(chunks):
        stop = start + size + (1 if i < extra else 0)
        if stop > start:
            ranges.append((start, stop))
        start = stop
    return ranges


def _sample_chunk(initial: Configuration, t: float, seed: int, span: tuple[int, int]) -> Counter:
    counts: Counter[tuple[tuple[int, ...], str]] = Counter()
    n = initial.n
    pos0 = list(initial.positions)
    spc0 = list(initial.species)
    for r in range(*span):
        counts[_run_raw(pos0.copy(), spc0.copy(), n, t, substream(seed, r))] += 1
    return counts


def _count_chunk(
    initial: Configuration,
    predicate: Callable[[Configuration], bool],
    t: float,
    seed: int,
    span: tuple[int, int],
) -> int:
    hits = 0
    n = initial.n
    pos0 = list(initial.positions)
    spc0 = list(initial.species)
    for r in range(*span):
        pos, spc = _run_raw(pos0.copy(), spc0.copy(), n, t, substream(seed, r))
        if predicate(Configuration(pos, spc)):
            hits += 1
    return hits


def final_state_sample(
    initial: Configuration, t: float, runs: int, seed: int, processes: int = 1
) -> Counter[tuple[tuple[int, ...], str]]:
    """Histogram of (positions, species) states at time t over seeded runs.

    One batch serves every event probability at once, which is how the
    acceptance checks amortize a million runs across a whole x-sweep.
    Results are identical for every ``processes`` value: runs own their
    substreams and counters merge commutatively.
    """
    if runs < 1:
        raise ValueError(f"need at least one run, got {runs}")
    if processes > 1:
        worker = partial(_sample_chunk, initial, t, seed)
        with multiprocessing.Pool(processes) as pool:
            parts = pool.map(worker, _chunk_ranges(runs, processes))
        total: Counter = Counter()
        for part in parts:
            total.update(part)
        return total
    return _sample_chunk(initial, t, seed, (0, runs))


def estimate_event(
    initial: Configuration,
    predicate: Callable[[Configuration], bool],
    t: float,
    runs: int,
    seed: int,
    processes: int = 1,
) -> SimulationEstimate:
    """Fraction of seeded runs whose final state satisfies the predicate.

    ``processes`` > 1 farms chunks of runs out to a process pool; the
    predicate must then be picklable (the factories below qualify).
    """
    if runs < 1:
        raise ValueError(f"need at least one run, got {runs}")
    start = time.perf_counter()
    if processes > 1:
        worker = partial(_count_chunk, initial, predicate, t, seed)
        with multiprocessing.Pool(processes) as pool:
            hits = sum(pool.map(worker, _chunk_ranges(runs, processes)))
    else:
        hits = _count_chunk(initial, predicate, t, seed, (0, runs))
    p = hits / runs
    return SimulationEstimate(
        estimate=p,
        std_error=math.sqrt(p * (1.0 - p) / runs),
        runs=runs,
        seed=seed,
        elapsed=time.perf_counter() - start,
    )


def _leftmost_check(x: int, state: Configuration) -> bool:
    return state.positions[0] == x and state.species == "2" + "1" * (state.n - 1)


def leftmost_event(x: int) -> Callable[[Configuration], bool]:
    """Predicate: species order still 21...1 and the leftmost particle at x."""
    return partial(_leftmost_check, x)


def _transition_check(positions: tuple[int, ...], species: str, state: Configuration) -> bool:
    return state.positions == positions and state.species == species


def transition_event(final: Configuration) -> Callable[[Configuration], bool]:
    """Predicate: the state equals the given configuration exactly."""
    return partial(_transition_check, final.positions, final.species)

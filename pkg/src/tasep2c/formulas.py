"""Probability formulas for the two-species exclusion process.

The process state is an ordered integer position vector together with a
species word over {1, 2} (2 = first class, 1 = second class).  Every formula
here comes with at least two independent evaluation routes:

* a *residue* route that expands the defining multiple contour integral
  into a permutation sum of products of the one-variable integrals handled
  by :mod:`tasep2c.contour`, and
* a *quadrature* route that evaluates the same multiple integral by the
  adaptive tensor-product circle rule.

The residue route is the default and the numerically stable one; the
alternating permutation sums are capped at N = 8 because sign cancellation
grows with N, and the determinant evaluator is the sanctioned large-N path.
Quadrature is limited to moderate times (the integrand reaches exp(2t) on
the default radius-0.5 circles) and, for the full transition matrix, to
N <= 4 since every grid node costs a 2^N amplitude product.

For transitions between arbitrary species words the amplitude entry has no
product formula, so the residue route expands each amplitude entry
symbolically as a polynomial over Fraction coefficients divided by powers of
(1 - xi_a); each monomial then separates into one-variable residue factors.

Conditioning: the alternating permutation sums cancel catastrophically in
double precision (at N = 5 the terms outweigh the result by ~8 digits), so
every residue route accumulates e^t-scaled fixed-point integers from
:func:`tasep2c.contour.exp_scaled_residue` and converts to float only at
the very end; the per-particle factor e^(-t) is restored in log space.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import bethe, contour
from .bethe import SparseMatrix, word_index
from .contour import QuadratureSpec, residue_value
from .errors import AccuracyError, WindowTooSmallWarning
from .permutations import enumerate_permutations, inverse, sign

#: Alternating permutation sums are refused beyond this size; use the
#: determinant evaluator instead (the N! term count, not precision, is the
#: limit -- fixed-point accumulation removes the cancellation loss).
MAX_ALTERNATING_N = 8
#: The shifted-step expansion is a double permutation sum ((N!)^2 terms).
MAX_DOUBLE_SUM_N = 6
#: Beyond this time the circle-quadrature factor exp(t/xi) overwhelms the
#: rule on radius-0.5 contours; the residue route has no such limit.
MAX_QUADRATURE_TIME = 30.0

_PROBABILITY_SLACK = 1e-9
#: Fixed-point scale for exact accumulation of alternating sums.
_FIXED_BITS = 256
_LN2 = math.log(2.0)


@lru_cache(maxsize=200_000)
def _scaled_residue(k: int, e: int, t: float, bits: int = _FIXED_BITS) -> int:
    """Fixed-point integer for 2^bits * e^t * I(k, e, t) at machine-rational t."""
    return contour.exp_scaled_residue(k, e, Fraction(t), bits)


def _fixed_result(total: int, nvars: int, t: float, bits: int = _FIXED_BITS) -> float:
    """Convert an accumulated fixed-point sum to float, restoring e^(-nvars*t)."""
    if total == 0:
        return 0.0
    magnitude = math.exp(math.log(abs(total)) - bits * _LN2 - nvars * t)
    return magnitude if total > 0 else -magnitude


def head_word(n: int) -> str:
    """The species word 21...1: one first class particle, leftmost."""
    return "2" + "1" * (n - 1)


@dataclass(frozen=True)
class Configuration:
    """Ordered particle positions plus the species word of equal length."""

    positions: tuple[int, ...]
    species: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", tuple(int(p) for p in self.positions))
        if len(self.positions) == 0:
            raise ValueError("need at least one particle")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError(f"positions must be strictly increasing: {self.positions}")
        if len(self.species) != len(self.positions):
            raise ValueError("species word length must match the number of positions")
        if set(self.species) - {"1", "2"}:
            raise ValueError(f"species word may only contain 1 and 2: {self.species!r}")

    @property
    def n(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class StepInitial:
    """Step-like initial positions: y_1 = 1 and y_i = i + shift for i > 1.

    shift = 0 is the step initial condition proper.
    """

    shift: int = 0

    def __post_init__(self) -> None:
        if self.shift < 0:
            raise ValueError(f"shift must be nonnegative, got {self.shift}")

    def positions(self, n: int) -> tuple[int, ...]:
        return tuple([1] + [i + self.shift for i in range(2, n + 1)])

    def configuration(self, n: int) -> Configuration:
        return Configuration(self.positions(n), head_word(n))


def step_configuration(n: int, shift: int = 0) -> Configuration:
    return StepInitial(shift).configuration(n)


def _as_probability(value: float, where: str) -> float:
    v = float(value)
    if v < -_PROBABILITY_SLACK or v > 1 + _PROBABILITY_SLACK:
        raise AccuracyError(f"{where} evaluated to {v}, outside [0, 1]", value=v)
    return min(max(v, 0.0), 1.0)


def _check_pair(initial: Configuration, final: Configuration) -> None:
    if initial.n != final.n:
        raise ValueError("initial and final configurations differ in size")
    if sorted(initial.species) != sorted(final.species):
        raise ValueError(
            f"species multisets differ ({initial.species!r} vs {final.species!r}); "
            "the dynamics conserves species counts"
        )


def _require_head(config: Configuration, what: str) -> None:
    if config.species != head_word(config.n):
        raise ValueError(f"{what} requires the species word {head_word(config.n)!r}")


# ---------------------------------------------------------------------------
# symbolic amplitude entries: polynomial / prod (1 - xi_a)^m  over Fractions
# ---------------------------------------------------------------------------


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for ma, ca in p.items():
        for mb, cb in q.items():
            key = tuple(a + b for a, b in zip(ma, mb))
            if key in out:
                out[key] += ca * cb
            else:
                out[key] = ca * cb
    return {m: c for m, c in out.items() if c}


def _unit_mono(var: int, nvars: int) -> tuple[int, ...]:
    return tuple(1 if i == var else 0 for i in range(nvars))


def _one_minus_power(var: int, power: int, nvars: int) -> dict:
    zero = (0,) * nvars
    out = {zero: Fraction(1)}
    base = {zero: Fraction(1), _unit_mono(var, nvars): Fraction(-1)}
    for _ in range(power):
        out = _poly_mul(out, base)
    return out


class _RationalEntry:
    """num / prod_a (1 - xi_a)^den[a] with a Fraction-coefficient numerator."""

    __slots__ = ("num", "den")

    def __init__(self, num: dict, den: tuple[int, ...]):
        self.num = num
        self.den = den

    def __bool__(self) -> bool:
        return bool(self.num)

    def _scaled(self, c) -> "_RationalEntry":
        if not c:
            return _RationalEntry({}, self.den)
        return _RationalEntry({m: c * v for m, v in self.num.items()}, self.den)

    def __mul__(self, other):
        if isinstance(other, _RationalEntry):
            return _RationalEntry(
                _poly_mul(self.num, other.num),
                tuple(a + b for a, b in zip(self.den, other.den)),
            )
        return self._scaled(other)

    def __rmul__(self, other):
        return self._scaled(other)

    def __add__(self, other):
        if not isinstance(other, _RationalEntry):
            raise TypeError(f"cannot add {type(other).__name__} to a rational entry")
        den = tuple(max(a, b) for a, b in zip(self.den, other.den))
        total = dict(self._raised(den).num)
        for m, c in other._raised(den).num.items():
            if m in total:
                total[m] += c
            else:
                total[m] = c
        return _RationalEntry({m: c for m, c in total.items() if c}, den)

    def _raised(self, den: tuple[int, ...]) -> "_RationalEntry":
        num = self.num
        nvars = len(den)
        for var, (target, have) in enumerate(zip(den, self.den)):
            if target > have:
                num = _poly_mul(num, _one_minus_power(var, target - have, nvars))
        return _RationalEntry(num, den)


def _sym_scattering(alpha: int, beta: int, nvars: int) -> SparseMatrix:
    """Scattering matrix with symbolic entries in variables alpha, beta (1-based)."""
    zero = (0,) * nvars
    den = tuple(1 if i == alpha - 1 else 0 for i in range(nvars))
    e_a = _unit_mono(alpha - 1, nvars)
    e_b = _unit_mono(beta - 1, nvars)
    diag = _RationalEntry({zero: Fraction(-1), e_b: Fraction(1)}, den)
    offd = _RationalEntry({e_b: Fraction(1), e_a: Fraction(-1)}, den)
    mid = _RationalEntry({zero: Fraction(-1)}, (0,) * nvars)
    m = SparseMatrix(4)
    m.set(0, 0, diag)
    m.set(1, 1, diag)
    m.set(1, 2, offd)
    m.set(2, 2, mid)
    m.set(3, 3, diag)
    return m


@lru_cache(maxsize=4096)
def _sym_amplitude(n: int, sigma: tuple[int, ...]) -> SparseMatrix:
    from .permutations import adjacent_decomposition

    mat = SparseMatrix.identity(1 << n)
    current = list(range(1, n + 1))
    for a in adjacent_decomposition(sigma):
        alpha, beta = current[a - 1], current[a]
        mat = bethe.two_site_embed(_sym_scattering(alpha, beta, n), a, n) @ mat
        current[a - 1], current[a] = beta, alpha
    return mat


def _entry_terms(entry, n: int):
    """Yield (coefficient, monomial, pole orders) triples of an entry."""
    if isinstance(entry, _RationalEntry):
        for mono, coef in entry.num.items():
            yield coef, mono, entry.den
    elif entry:
        yield Fraction(entry), (0,) * n, (0,) * n


# ---------------------------------------------------------------------------
# transition probabilities
# ---------------------------------------------------------------------------


def transition_probability(
    initial: Configuration,
    final: Configuration,
    t: float,
    method: str = "residue",
    quad: QuadratureSpec | None = None,
) -> float:
    """P(state = final at time t | state = initial at time 0).

    The residue route expands each amplitude entry symbolically and sums
    separable residue factors; quadrature evaluates the N-fold integral of
    the full matrix integrand (N <= 4, one 2^N amplitude product per node).
    At t = 0 the exact indicator is returned bit-exactly.
    """
    _check_pair(initial, final)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0:
        same = final.positions == initial.positions and final.species == initial.species
        return 1.0 if same else 0.0
    n = initial.n
    if method == "residue":
        if n > 5:
            raise ValueError("symbolic residue expansion supports N <= 5")
        value = _transition_residue(initial, final, t)
    elif method == "quadrature":
        if n > 4:
            raise ValueError("matrix quadrature supports N <= 4")
        if t > MAX_QUADRATURE_TIME:
            raise ValueError(f"t={t} too large for circle quadrature; use the residue route")
        value = _transition_quadrature(initial, final, t, quad or QuadratureSpec())
    else:
        raise ValueError(f"unknown method {method!r}")
    return _as_probability(value, "transition probability")


def _transition_residue(initial: Configuration, final: Configuration, t: float) -> float:
    n = initial.n
    y = initial.positions
    x = final.positions
    row = word_index(final.species)
    col = word_index(initial.species)
    bits = _FIXED_BITS
    total = 0
    for p in enumerate_permutations(n):
        entry = _sym_amplitude(n, p).get(row, col)
        if not entry:
            continue
        inv = inverse(p)
        ks = [x[inv[a0] - 1] - y[a0] - 1 for a0 in range(n)]
        for coef, mono, den in _entry_terms(entry, n):
            acc = (coef.numerator << bits) // coef.denominator
            for a0 in range(n):
                v = _scaled_residue(ks[a0] + mono[a0], -den[a0], t)
                if v == 0:
                    acc = 0
                    break
                acc = (acc * v) >> bits
            total += acc
    return _fixed_result(total, n, t)


def _transition_quadrature(
    initial: Configuration, final: Configuration, t: float, quad: QuadratureSpec
) -> float:
    n = initial.n
    y = initial.positions
    x = final.positions
    row = word_index(final.species)
    col = word_index(initial.species)
    perms = enumerate_permutations(n)

    def F(xis):
        eps = 0
        for z in xis:
            eps = eps + (1.0 / z - 1.0)
        acc = 0
        for p in perms:
            vec = bethe.amplitude(p, xis).matvec({col: 1.0})
            entry = vec.get(row)
            if entry is None:
                continue
            phase = entry
            for i in range(n):
                phase = phase * xis[p[i] - 1] ** (x[i] - y[p[i] - 1] - 1)
            acc = acc + phase
        return acc * np.exp(eps * t)

    return contour.multi_contour(F, n, quad).value.real


def head_transition_probability(initial: Configuration, final: Configuration, t: float) -> float:
    """Transition probability between two states with species word 21...1.

    The amplitude center entry factorizes, so each permutation term is a
    product of one-variable residue integrals: variable a carries the power
    x_{sigma^-1(a)} - y_a - 1 and the (1 - xi_a) exponent
    (a - 2)_+ - (sigma^-1(a) - 2)_+.  Feasible to N = 8.
    """
    _check_pair(initial, final)
    _require_head(initial, "head transition")
    _require_head(final, "head transition")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if t == 0:
        return 1.0 if final.positions == initial.positions else 0.0
    n = initial.n
    if n > MAX_ALTERNATING_N:
        raise ValueError(f"alternating permutation sum capped at N = {MAX_ALTERNATING_N}")
    y = initial.positions
    x = final.positions
    bits = _FIXED_BITS
    total = 0
    for p in enumerate_permutations(n):
        inv = inverse(p)
        acc = 1 << bits
        for a0 in range(n):
            pos0 = inv[a0] - 1
            e = (a0 - 1 if a0 >= 1 else 0) - (pos0 - 1 if pos0 >= 1 else 0)
            v = _scaled_residue(x[pos0] - y[a0] - 1, e, t)
            if v == 0:
                acc = 0
                break
            acc = (acc * v) >> bits
        total += sign(p) * acc
    return _as_probability(_fixed_result(total, n, t), "head transition probability")


# ---------------------------------------------------------------------------
# leftmost-particle event probabilities
# ---------------------------------------------------------------------------


def leftmost_probability(
    initial: Configuration,
    x: int,
    t: float,
    method: str = "residue",
    quad: QuadratureSpec | None = None,
) -> float:
    """P(at time t the species order is still 21...1 with x_1 = x).

    The defining N-fold integral carries the prefactor (1 - xi_1), the
    ratio Vandermonde over prod_(i<j) (1 - xi_i), and 1/(1 - xi_i) per
    variable.  The residue route expands the Vandermonde into a permutation
    sum, leaving per-variable factors with pole order N - i + 1 at 1
    (reduced by one for i = 1); quadrature integrates the displayed
    integrand directly.
    """
    _require_head(initial, "leftmost probability")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    y = initial.positions
    n = initial.n
    if x < y[0]:
        return 0.0
    if t == 0:
        return 1.0 if x == y[0] else 0.0
    if method == "residue":
        if n > MAX_ALTERNATING_N:
            raise ValueError(f"alternating permutation sum capped at N = {MAX_ALTERNATING_N}")
        bits = _FIXED_BITS
        total = 0
        for p in enumerate_permutations(n):
            acc = 1 << bits
            for i0 in range(n):
                e = -(n - i0) + (1 if i0 == 0 else 0)
                v = _scaled_residue(x - y[i0] - 1 + p[i0] - 1, e, t)
                if v == 0:
                    acc = 0
                    break
                acc = (acc * v) >> bits
            total += sign(p) * acc
        value = _fixed_result(total, n, t)
    elif method == "quadrature":
        value = _leftmost_quadrature(y, x, t, quad or QuadratureSpec(), two_species=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _as_probability(value, "leftmost probability")


def tasep_leftmost_probability(
    initial: Configuration,
    x: int,
    t: float,
    method: str = "residue",
    quad: QuadratureSpec | None = None,
) -> float:
    """Single-species analogue: P(x_1 = x at time t) for the plain TASEP.

    Identical integrand except the prefactor (1 - xi_1 ... xi_N) replaces
    (1 - xi_1); kept as a cross-check companion sharing all machinery.
    """
    if len(set(initial.species)) != 1:
        raise ValueError("single-species formula needs all particles of one species")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    y = initial.positions
    n = initial.n
    if x < y[0]:
        return 0.0
    if t == 0:
        return 1.0 if x == y[0] else 0.0
    if method == "residue":
        if n > MAX_ALTERNATING_N:
            raise ValueError(f"alternating permutation sum capped at N = {MAX_ALTERNATING_N}")
        bits = _FIXED_BITS
        total = 0
        for p in enumerate_permutations(n):
            lead = 1 << bits
            shifted = 1 << bits
            for i0 in range(n):
                e = -(n - i0)
                k = x - y[i0] - 1 + p[i0] - 1
                lead = (lead * _scaled_residue(k, e, t)) >> bits
                shifted = (shifted * _scaled_residue(k + 1, e, t)) >> bits
            total += sign(p) * (lead - shifted)
        value = _fixed_result(total, n, t)
    elif method == "quadrature":
        value = _leftmost_quadrature(y, x, t, quad or QuadratureSpec(), two_species=False)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _as_probability(value, "TASEP leftmost probability")


def _leftmost_quadrature(
    y: Sequence[int], x: int, t: float, quad: QuadratureSpec, two_species: bool
) -> float:
    if t > MAX_QUADRATURE_TIME:
        raise ValueError(f"t={t} too large for circle quadrature; use the residue route")
    n = len(y)

    def F(xis):
        eps = 0
        for z in xis:
            eps = eps + (1.0 / z - 1.0)
        val = np.exp(eps * t)
        if two_species:
            val = val * (1 - xis[0])
        else:
            prod = 1
            for z in xis:
                prod = prod * z
            val = val * (1 - prod)
        for i in range(n):
            val = val * xis[i] ** (x - y[i] - 1) / (1 - xis[i])
        for i in range(n):
            for j in range(i + 1, n):
                val = val * (xis[j] - xis[i]) / (1 - xis[i])
        return val

    return contour.multi_contour(F, n, quad).value.real


def _homogeneous_monomials(n: int, degree: int):
    """Exponent vectors of the complete homogeneous polynomial h_degree."""
    if degree == 0:
        yield (0,) * n
        return
    for combo in itertools.combinations_with_replacement(range(n), degree):
        counts = [0] * n
        for i in combo:
            counts[i] += 1
        yield tuple(counts)


def leftmost_probability_shifted_step(
    shift: int,
    n: int,
    x: int,
    t: float,
    method: str = "residue",
    quad: QuadratureSpec | None = None,
) -> float:
    """Leftmost probability for step-like initial positions (1, 2+l, .., N+l).

    The specialized integrand carries h_l times the squared Vandermonde over
    prod (xi_i - 1)^(N-1), with prefactor (-1)^(N(N-1)/2) / N!.  The residue
    route expands both Vandermonde factors and the h_l monomials into a
    double permutation sum of separable residue factors; shift = 0
    reproduces the plain step initial condition.
    """
    if shift < 0:
        raise ValueError(f"shift must be nonnegative, got {shift}")
    if n < 1:
        raise ValueError("need at least one particle")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if x < 1:
        return 0.0
    if t == 0:
        return 1.0 if x == 1 else 0.0
    pref = (-1) ** (n * (n - 1) // 2)
    if method == "residue":
        if n > MAX_DOUBLE_SUM_N:
            raise ValueError(
                f"double permutation sum capped at N = {MAX_DOUBLE_SUM_N}; "
                "use the determinant evaluator"
            )
        bits = _FIXED_BITS
        jsign = (-1) ** (n - 1)
        jcache: dict[int, int] = {}

        def jval(k: int) -> int:
            if k not in jcache:
                jcache[k] = jsign * _scaled_residue(k, -(n - 1), t)
            return jcache[k]

        base = x - n - shift - 1
        perms = [(p, sign(p)) for p in enumerate_permutations(n)]
        monos = list(_homogeneous_monomials(n, shift))
        total = 0
        for p, ps in perms:
            for q, qs in perms:
                pq = ps * qs
                for mono in monos:
                    acc = 1 << bits
                    for i in range(n):
                        v = jval(base + p[i] - 1 + q[i] - 1 + mono[i])
                        if v == 0:
                            acc = 0
                            break
                        acc = (acc * v) >> bits
                    total += pq * acc
        value = pref * _fixed_result(total, n, t) / math.factorial(n)
    elif method == "quadrature":
        if t > MAX_QUADRATURE_TIME:
            raise ValueError(f"t={t} too large for circle quadrature; use the residue route")
        monos = list(_homogeneous_monomials(n, shift))

        def F(xis):
            eps = 0
            for z in xis:
                eps = eps + (1.0 / z - 1.0)
            val = np.exp(eps * t)
            hval = 0
            for mono in monos:
                term = 1
                for i, m in enumerate(mono):
                    if m:
                        term = term * xis[i] ** m
                hval = hval + term
            val = val * hval
            for i in range(n):
                for j in range(i + 1, n):
                    diff = xis[j] - xis[i]
                    val = val * diff * diff
            for i in range(n):
                val = val * xis[i] ** (x - n - shift - 1) / (xis[i] - 1) ** (n - 1)
            return val

        value = pref * contour.multi_contour(F, n, quad or QuadratureSpec()).value.real
        value /= math.factorial(n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _as_probability(value, "shifted-step leftmost probability")


def leftmost_probability_step_det(n: int, x: int, t: float) -> float:
    """Step initial condition via the N x N determinant of contour integrals.

    Entry (i, j) is the one-variable integral with power i + j + x - N - 1
    and pole factor (xi - 1)^-(N-1); the prefactor is (-1)^(N(N-1)/2).
    This is the preferred large-N evaluator: no N! permutation sum.  Up to
    N = 6 the determinant is expanded with compensated summation for full
    accuracy; beyond that LU factorization takes over.
    """
    if n < 1:
        raise ValueError("need at least one particle")
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    if x < 1:
        return 0.0
    if t == 0:
        return 1.0 if x == 1 else 0.0
    sign_pref = (-1) ** (n * (n - 1) // 2)
    if n <= 6:
        bits = _FIXED_BITS
        jsign = (-1) ** (n - 1)
        entries = {
            k: jsign * _scaled_residue(k, -(n - 1), t) for k in range(x - n - 1, x + n - 2)
        }
        mat = [[entries[i + j + x - n - 1] for j in range(n)] for i in range(n)]
        total = 0
        for p in enumerate_permutations(n):
            acc = 1 << bits
            for i in range(n):
                v = mat[i][p[i] - 1]
                if v == 0:
                    acc = 0
                    break
                acc = (acc * v) >> bits
            total += sign(p) * acc
        det = _fixed_result(total, n, t)
    else:
        jsign = (-1.0) ** (n - 1)
        entries = {
            k: jsign * residue_value(k, -(n - 1), t) for k in range(x - n - 1, x + n - 2)
        }
        mat = [[entries[i + j + x - n - 1] for j in range(n)] for i in range(n)]
        det = float(np.linalg.det(np.array(mat)))
    return _as_probability(sign_pref * det, "determinant leftmost probability")


# ---------------------------------------------------------------------------
# conservation check
# ---------------------------------------------------------------------------


def _windowed_positions(y: Sequence[int], window: int):
    n = len(y)

    def rec(prefix: tuple[int, ...], i: int):
        if i == n:
            yield prefix
            return
        lo = y[i] if not prefix else max(y[i], prefix[-1] + 1)
        for v in range(lo, y[i] + window + 1):
            yield from rec(prefix + (v,), i + 1)

    yield from rec((), 0)


def displacement_tail_bound(n: int, t: float, window: int) -> float:
    """Upper bound on the probability some particle moved more than ``window``.

    Each particle attempts at most the rings of a rate-1 Poisson clock, so
    its displacement is stochastically below Poisson(t); a union bound over
    the N particles certifies the truncation tail.
    """
    return n * contour.poisson_upper_tail(t, window)


def probability_mass_check(initial: Configuration, t: float, window: int) -> float:
    """Total transition mass over a truncated position window.

    Sums transition probabilities over all ordered positions with
    per-particle displacement at most ``window`` and every species word with
    the conserved multiset.  The result should be 1 up to numerical noise
    plus ``displacement_tail_bound``; a too-small window triggers
    WindowTooSmallWarning carrying the tail estimate.
    """
    n = initial.n
    if n > 3:
        raise ValueError("mass check enumerates windows only up to N = 3")
    if window < 0:
        raise ValueError("window must be nonnegative")
    if t == 0:
        return 1.0
    tail = displacement_tail_bound(n, t, window)
    if tail > 1e-8:
        warnings.warn(
            f"window {window} leaves certified tail {tail:.3e}; enlarge it",
            WindowTooSmallWarning,
            stacklevel=2,
        )
    words = sorted(set("".join(w) for w in itertools.permutations(initial.species)))
    terms = []
    for xs in _windowed_positions(initial.positions, window):
        for w in words:
            terms.append(transition_probability(initial, Configuration(xs, w), t))
    return math.fsum(terms)

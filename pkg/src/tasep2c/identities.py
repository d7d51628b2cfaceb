"""Exact-rational verification of the algebraic identities behind the formulas.

Every summation step that turns the transition-probability permutation sum
into a closed contour-integral formula rests on a rational-function identity
in the spectral variables.  This module evaluates both sides of each
identity in exact Fraction arithmetic at random rational points, so "equal"
is decidable, not approximate.  The identities are generic-point statements:
points are rejection-sampled away from the measure-zero sets where a
denominator (1 - product of a subset of the xi) vanishes.

After clearing denominators each identity is a polynomial identity of
bounded degree, so agreement at a few hundred random rational points is a
Schwartz-Zippel style certificate; the suite records a coarse degree bound
with every report line.

Checked identities, with LHS always an alternating sum over permutations:

* main        -- center-amplitude sum with geometric-tail denominators
                 equals (1-xi_1) * prod_(i<j) (xi_j-xi_i)/(1-xi_i) * prod 1/(1-xi_i);
* equiv_a     -- same identity with the center amplitudes expanded into
                 per-variable (1-xi) powers;
* equiv_b     -- the inversion substitution xi_i -> 1/xi_(N-i+1) of equiv_a;
* tasep_a/b   -- the single-species analogues with prefactor (1 - prod xi);
* vandermonde -- the cofactor expansion reducing an (xi_a - 1)^(N-1) row to
                 the plain Vandermonde determinant;
* det_collapse-- the power-matrix determinant that vanishes for off-pattern
                 exponents and equals h_l times the descending Vandermonde
                 otherwise;
* closed_form -- the center amplitude product formula against the full
                 sparse matrix product.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Sequence

from . import bethe
from .errors import DegeneratePointError
from .permutations import enumerate_permutations, sign

RationalPoint = tuple[Fraction, ...]

#: Numerators and denominators of sampled coordinates stay below this.
MAX_DENOMINATOR = 1000


def validate_point(xi: Sequence[Fraction], unit_interval: bool = False) -> RationalPoint:
    """Reject points on any denominator of the identity family.

    Requires pairwise-distinct nonzero coordinates, none equal to 1, and no
    subset of size < N whose product is 1 (those products appear in the
    geometric-tail denominators after arbitrary permutations).
    """
    point = tuple(Fraction(z) for z in xi)
    n = len(point)
    if len(set(point)) != n:
        raise DegeneratePointError("coordinates must be pairwise distinct")
    for z in point:
        if z == 0 or z == 1:
            raise DegeneratePointError("coordinates 0 and 1 are excluded")
        if unit_interval and not 0 < z < 1:
            raise DegeneratePointError(f"coordinate {z} outside (0, 1)")
    for size in range(2, n):
        for subset in itertools.combinations(point, size):
            prod = Fraction(1)
            for z in subset:
                prod *= z
            if prod == 1:
                raise DegeneratePointError("a subset product equals 1")
    return point


def random_rational_point(
    n: int, rng: random.Random, max_denominator: int = MAX_DENOMINATOR
) -> RationalPoint:
    """Random point with distinct coordinates in (0, 1), denominators bounded."""
    while True:
        coords = []
        for _ in range(n):
            den = rng.randint(2, max_denominator)
            num = rng.randint(1, den - 1)
            coords.append(Fraction(num, den))
        try:
            return validate_point(coords, unit_interval=True)
        except DegeneratePointError:
            continue


def vandermonde(xi: Sequence[Fraction]) -> Fraction:
    """prod over i < j of (xi_j - xi_i)."""
    prod = Fraction(1)
    n = len(xi)
    for i in range(n):
        for j in range(i + 1, n):
            prod *= xi[j] - xi[i]
    return prod


def complete_homogeneous(degree: int, xi: Sequence[Fraction]) -> Fraction:
    """Complete homogeneous symmetric polynomial h_degree: all monomials, once."""
    total = Fraction(0)
    for combo in itertools.combinations_with_replacement(range(len(xi)), degree):
        term = Fraction(1)
        for i in combo:
            term *= xi[i]
        total += term
    return total


def _suffix_tail_denominator(xi: Sequence[Fraction], p: Sequence[int]) -> Fraction:
    """prod over k = 2..N of (1 - xi_p(k) xi_p(k+1) ... xi_p(N))."""
    n = len(p)
    den = Fraction(1)
    suffix = Fraction(1)
    for k in range(n, 1, -1):
        suffix *= xi[p[k - 1] - 1]
        factor = 1 - suffix
        if factor == 0:
            raise DegeneratePointError("geometric-tail denominator vanished")
        den *= factor
    return den


def _prefix_tail_denominator(xi: Sequence[Fraction], p: Sequence[int]) -> Fraction:
    """prod over k = 1..N-1 of (xi_p(1) ... xi_p(k) - 1)."""
    n = len(p)
    den = Fraction(1)
    prefix = Fraction(1)
    for k in range(1, n):
        prefix *= xi[p[k - 1] - 1]
        factor = prefix - 1
        if factor == 0:
            raise DegeneratePointError("geometric-tail denominator vanished")
        den *= factor
    return den


def _tail_numerator(xi: Sequence[Fraction], p: Sequence[int]) -> Fraction:
    """xi_p(2) xi_p(3)^2 ... xi_p(N)^(N-1)."""
    num = Fraction(1)
    for k in range(2, len(p) + 1):
        num *= xi[p[k - 1] - 1] ** (k - 1)
    return num


def main_identity(xi: Sequence[Fraction]) -> tuple[Fraction, Fraction, bool]:
    """Center-amplitude permutation sum against its closed product form.

    Returns (lhs, rhs, lhs == rhs).  For N = 2 at (1/2, 1/3) both sides are
    -1/2, which is the hand-checkable anchor.
    """
    xi = validate_point(xi)
    n = len(xi)
    if n < 2:
        raise ValueError("the identity is stated for N >= 2")
    lhs = Fraction(0)
    for p in enumerate_permutations(n):
        center = bethe.amplitude_center(p, xi)
        lhs += center * _tail_numerator(xi, p) / _suffix_tail_denominator(xi, p)
    rhs = 1 - xi[0]
    for i in range(n):
        for j in range(i + 1, n):
            rhs *= (xi[j] - xi[i]) / (1 - xi[i])
    for z in xi:
        rhs /= 1 - z
    return lhs, rhs, lhs == rhs


def equivalent_identities(xi: Sequence[Fraction], variant: str) -> bool:
    """The two equivalent per-variable-power forms of the main identity.

    Variant "a" carries denominators (1 - xi_p(k))^(k-2) and holds on the
    same points as the main identity; variant "b" is its image under
    xi_i -> 1/xi_(N-i+1) and accepts any nondegenerate point (coordinates
    beyond (0, 1) included).
    """
    xi = validate_point(xi)
    n = len(xi)
    if n < 2:
        raise ValueError("the identity is stated for N >= 2")
    lhs = Fraction(0)
    if variant == "a":
        for p in enumerate_permutations(n):
            term = Fraction(sign(p))
            for k in range(3, n + 1):
                term /= (1 - xi[p[k - 1] - 1]) ** (k - 2)
            term *= _tail_numerator(xi, p)
            term /= _suffix_tail_denominator(xi, p)
            lhs += term
        rhs = vandermonde(xi)
        for z in xi:
            rhs /= (1 - z) ** (n - 1)
    elif variant == "b":
        for p in enumerate_permutations(n):
            term = Fraction(sign(p))
            for k in range(1, n - 1):
                term *= xi[p[k - 1] - 1] ** (n - 1 - k)
                term /= (xi[p[k - 1] - 1] - 1) ** (n - 1 - k)
            term /= _prefix_tail_denominator(xi, p)
            lhs += term
        rhs = vandermonde(xi)
        for z in xi:
            rhs /= (z - 1) ** (n - 1)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return lhs == rhs


def main_variant_bridge(xi: Sequence[Fraction]) -> bool:
    """Main identity and variant "a" differ by an explicit sigma-free factor.

    Each main-identity term carries the center amplitude, whose numerator
    prod_i (1 - xi_(2+i))^i does not depend on the permutation; dividing it
    out termwise turns the main sum into the variant-"a" sum.  Checking
    lhs_main = factor * lhs_a (and the same for the right sides) makes the
    equivalence mechanical rather than assumed.
    """
    xi = validate_point(xi)
    n = len(xi)
    if n < 2:
        raise ValueError("the identity is stated for N >= 2")
    factor = Fraction(1)
    for i in range(1, n - 1):
        factor *= (1 - xi[1 + i]) ** i

    lhs_main, rhs_main, _ = main_identity(xi)
    lhs_a = Fraction(0)
    for p in enumerate_permutations(n):
        term = Fraction(sign(p))
        for k in range(3, n + 1):
            term /= (1 - xi[p[k - 1] - 1]) ** (k - 2)
        term *= _tail_numerator(xi, p)
        term /= _suffix_tail_denominator(xi, p)
        lhs_a += term
    rhs_a = vandermonde(xi)
    for z in xi:
        rhs_a /= (1 - z) ** (n - 1)
    return lhs_main == factor * lhs_a and rhs_main == factor * rhs_a


def substitution_transport(xi: Sequence[Fraction]) -> bool:
    """Variant "a" evaluated at (1/xi_N, .., 1/xi_1) equals variant "b" at xi.

    This is the mechanical check that the inversion substitution really maps
    one displayed identity onto the other, left side onto left side.
    """
    xi = validate_point(xi)
    n = len(xi)
    mapped = tuple(1 / xi[n - 1 - i] for i in range(n))

    def lhs_a(point):
        total = Fraction(0)
        for p in enumerate_permutations(n):
            term = Fraction(sign(p))
            for k in range(3, n + 1):
                term /= (1 - point[p[k - 1] - 1]) ** (k - 2)
            term *= _tail_numerator(point, p)
            term /= _suffix_tail_denominator(point, p)
            total += term
        return total

    def lhs_b(point):
        total = Fraction(0)
        for p in enumerate_permutations(n):
            term = Fraction(sign(p))
            for k in range(1, n - 1):
                term *= point[p[k - 1] - 1] ** (n - 1 - k)
                term /= (point[p[k - 1] - 1] - 1) ** (n - 1 - k)
            term /= _prefix_tail_denominator(point, p)
            total += term
        return total

    return lhs_a(mapped) == lhs_b(xi)


def tasep_identities(xi: Sequence[Fraction], variant: str) -> bool:
    """Single-species analogues with prefactor (1 - xi_1 ... xi_N).

    Variant "a" is the direct form, variant "b" its inversion substitute
    (valid at any nondegenerate point, components above 1 included).
    """
    xi = validate_point(xi)
    n = len(xi)
    if n < 2:
        raise ValueError("the identity is stated for N >= 2")
    lhs = Fraction(0)
    if variant == "a":
        for p in enumerate_permutations(n):
            term = Fraction(sign(p))
            for k in range(2, n + 1):
                term /= (1 - xi[p[k - 1] - 1]) ** (k - 1)
            term *= _tail_numerator(xi, p)
            term /= _suffix_tail_denominator(xi, p)
            lhs += term
        prod = Fraction(1)
        for z in xi:
            prod *= z
        rhs = (1 - prod) * vandermonde(xi)
        for z in xi:
            rhs /= (1 - z) ** n
    elif variant == "b":
        for p in enumerate_permutations(n):
            term = Fraction(sign(p))
            for k in range(1, n):
                term *= xi[p[k - 1] - 1] ** (n - k)
                term /= (xi[p[k - 1] - 1] - 1) ** (n - k)
            term /= _prefix_tail_denominator(xi, p)
            lhs += term
        prod = Fraction(1)
        for z in xi:
            prod *= z
        rhs = (prod - 1) * vandermonde(xi)
        for z in xi:
            rhs /= (z - 1) ** n
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return lhs == rhs


def vandermonde_cofactor(xi: Sequence[Fraction]) -> bool:
    """Cofactor expansion of the ((xi_a - 1)^(N-1))-bottom-row determinant.

    sum_a (-1)^(N+a) (xi_a - 1)^(N-1) V(xi without a) = V(xi).
    """
    xi = tuple(Fraction(z) for z in xi)
    n = len(xi)
    if n < 2:
        raise ValueError("need N >= 2")
    total = Fraction(0)
    for a in range(1, n + 1):
        rest = tuple(z for i, z in enumerate(xi) if i != a - 1)
        total += Fraction(-1) ** (n + a) * (xi[a - 1] - 1) ** (n - 1) * vandermonde(rest)
    return total == vandermonde(xi)


def det_exact(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by exact fraction-pivoted Gaussian elimination."""
    n = len(matrix)
    work = [[Fraction(v) for v in row] for row in matrix]
    det = Fraction(1)
    for c in range(n):
        pivot_row = next((r for r in range(c, n) if work[r][c] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != c:
            work[c], work[pivot_row] = work[pivot_row], work[c]
            det = -det
        pivot = work[c][c]
        det *= pivot
        for r in range(c + 1, n):
            if work[r][c] != 0:
                factor = work[r][c] / pivot
                work[r] = [a - factor * b for a, b in zip(work[r], work[c])]
    return det


def det_collapse(xi: Sequence[Fraction], shift: int, exponents: Sequence[int]) -> Fraction:
    """Determinant of the power matrix with first-column degree N-1+shift.

    Column 1 holds xi^(N-1+shift); column j (2..N) holds xi^(N-j+k_j) with
    0 <= k_j <= j - 2 taken from ``exponents`` (length N-1, entry 0 is k_2).
    The determinant vanishes whenever some k_j > 0, and for all-zero k it
    equals h_shift(xi) times the descending-order Vandermonde
    prod_(i<j) (xi_i - xi_j).
    """
    xi = tuple(Fraction(z) for z in xi)
    n = len(xi)
    if len(exponents) != n - 1:
        raise ValueError(f"need {n - 1} column exponents, got {len(exponents)}")
    for j, k in zip(range(2, n + 1), exponents):
        if not 0 <= k <= j - 2:
            raise ValueError(f"column {j} exponent {k} outside 0..{j - 2}")
    if shift < 0:
        raise ValueError("shift must be nonnegative")
    rows = []
    for z in xi:
        row = [z ** (n - 1 + shift)]
        for j, k in zip(range(2, n + 1), exponents):
            row.append(z ** (n - j + k))
        rows.append(row)
    return det_exact(rows)


def descending_vandermonde(xi: Sequence[Fraction]) -> Fraction:
    """prod over i < j of (xi_i - xi_j)."""
    return vandermonde(xi) * Fraction(-1) ** (len(xi) * (len(xi) - 1) // 2)


def closed_form_vs_product(xi: Sequence[Fraction], sigma: Sequence[int]) -> bool:
    """Center amplitude: product formula against the full matrix product."""
    point = validate_point(xi)
    c = bethe.center_index(len(point))
    return bethe.amplitude(sigma, point).get(c, c) == bethe.amplitude_center(sigma, point)


# ---------------------------------------------------------------------------
# suite runner
# ---------------------------------------------------------------------------

SUITE_IDENTITIES = (
    "main",
    "equiv_a",
    "equiv_b",
    "substitution",
    "tasep_a",
    "tasep_b",
    "vandermonde",
    "det_collapse",
    "closed_form",
    "braid",
)

#: Matrix-product checks enumerate 2^N-dimensional amplitudes; keep them
#: at N <= 5 while the scalar identities run to N = 6.
MATRIX_CHECKS = ("closed_form", "braid")
MATRIX_CHECK_MAX_N = 5


def _degree_bound(identity: str, n: int) -> int:
    """Coarse upper bound on the cleared-denominator polynomial degree.

    The permutation-sum identities clear to a common denominator built from
    all subset products (degree at most n 2^(n-1)) times per-variable
    (1 - xi)^n powers; the determinant identities are plain polynomials.
    """
    if identity in ("vandermonde",):
        return n * (n - 1) // 2 + n - 1
    if identity in ("det_collapse",):
        return n * n
    if identity in ("closed_form", "braid"):
        return 4 * n
    return n * 2 ** (n - 1) + 3 * n * n


def _check_once(identity: str, n: int, rng: random.Random) -> bool:
    xi = random_rational_point(n, rng)
    if identity == "main":
        return main_identity(xi)[2]
    if identity == "equiv_a":
        return equivalent_identities(xi, "a")
    if identity == "equiv_b":
        # exercise points outside (0, 1) too: invert a fresh sample half the time
        if rng.random() < 0.5:
            xi = validate_point(tuple(1 / z for z in xi))
        return equivalent_identities(xi, "b")
    if identity == "substitution":
        return substitution_transport(xi) and main_variant_bridge(xi)
    if identity == "tasep_a":
        return tasep_identities(xi, "a")
    if identity == "tasep_b":
        if rng.random() < 0.5:
            xi = validate_point(tuple(1 / z for z in xi))
        return tasep_identities(xi, "b")
    if identity == "vandermonde":
        return vandermonde_cofactor(xi)
    if identity == "det_collapse":
        exponents = [rng.randint(0, j - 2) for j in range(2, n + 1)]
        shift = rng.randint(0, 3)
        value = det_collapse(xi, shift, exponents)
        if any(exponents):
            return value == 0
        return value == complete_homogeneous(shift, xi) * descending_vandermonde(xi)
    if identity == "closed_form":
        sigma = list(range(1, n + 1))
        rng.shuffle(sigma)
        return closed_form_vs_product(xi, tuple(sigma))
    if identity == "braid":
        return bethe.braid_relations_hold(xi)
    raise ValueError(f"unknown identity {identity!r}")


def run_identity_suite(
    n_values: Sequence[int] = (2, 3, 4, 5, 6),
    points: int = 100,
    seed: int = 2024,
    identities: Sequence[str] = SUITE_IDENTITIES,
) -> list[dict]:
    """Check each identity at ``points`` random rational points per size.

    Returns one record per (identity, n) with the point count, the pass
    flag, and the coarse cleared-denominator degree bound backing the
    random-evaluation certificate.
    """
    records = []
    for identity in identities:
        if identity not in SUITE_IDENTITIES:
            raise ValueError(f"unknown identity {identity!r}")
        for n in n_values:
            if n < 2:
                continue
            if identity in MATRIX_CHECKS and n > MATRIX_CHECK_MAX_N:
                continue
            rng = random.Random((seed, identity, n).__repr__())
            passed = all(_check_once(identity, n, rng) for _ in range(points))
            records.append(
                {
                    "identity": identity,
                    "n": n,
                    "points": points,
                    "passed": passed,
                    "degree_bound": _degree_bound(identity, n),
                }
            )
    return records

"""Diophantine toolkit: binary quadratic equation counts, divisor counts,
Dirichlet approximation by continued fractions, congruence-pair counts
F_{b1,b2}(X, q), and the small-coefficient reduction of a unit congruence.

Everything here is exact integer arithmetic.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .modcore import mod_inverse


@dataclass(frozen=True)
class BinaryQuadraticInstance:
    """The equation A X^2 + B Y^2 = C restricted to |X|, |Y| <= x."""

    A: int
    B: int
    C: int
    x: int

    def __post_init__(self):
        if self.A == 0 or self.B == 0 or self.C == 0:
            raise ValueError("A, B, C must be nonzero")
        if self.x < 1:
            raise ValueError("box half-width x must be >= 1")


def count_equation_solutions(inst: BinaryQuadraticInstance) -> int:
    """Exact number of integer pairs (X, Y) in the box solving the equation."""
    A, B, C, x = inst.A, inst.B, inst.C, inst.x
    total = 0
    for X in range(-x, x + 1):
        rem = C - A * X * X
        if rem % B != 0:
            continue
        y2 = rem // B
        if y2 < 0:
            continue
        y = math.isqrt(y2)
        if y * y != y2:
            continue
        if y == 0:
            total += 1
        elif y <= x:
            total += 2
    return total


def divisor_count(k: int) -> int:
    """tau(k) by trial division up to sqrt(k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    total = 0
    d = 1
    while d * d <= k:
        if k % d == 0:
            total += 1 if d * d == k else 2
        d += 1
    return total


@dataclass(frozen=True)
class Approximant:
    """A reduced fraction a/r with r <= Q and |target - a/r| <= 1/(rQ)."""

    a: int
    r: int
    Q: int
    target_num: int
    target_den: int

    @property
    def error(self) -> Fraction:
        return abs(Fraction(self.target_num, self.target_den) - Fraction(self.a, self.r))


def convergents(num: int, den: int):
    """The continued-fraction convergents of num/den (den >= 1), in order."""
    out = []
    h0, h1 = 0, 1
    k0, k1 = 1, 0
    a, b = num, den
    while b:
        w = a // b
        a, b = b, a - w * b
        h0, h1 = h1, w * h1 + h0
        k0, k1 = k1, w * k1 + k0
        out.append((h1, k1))
    return out


def dirichlet_approx(beta: int, q: int, Q: int) -> Approximant:
    """The best convergent a/r of beta/q with r <= Q.

    The largest admissible convergent denominator automatically satisfies
    |beta/q - a/r| <= 1/(r(Q+1)) < 1/(rQ); when beta/q itself has
    denominator <= Q the error is 0.
    """
    if Q < 1:
        raise ValueError("Q must be >= 1")
    beta %= q
    best = (0, 1)
    for a, r in convergents(beta, q):
        if r > Q:
            break
        best = (a, r)
    a, r = best
    appr = Approximant(a, r, Q, beta, q)
    assert appr.error <= Fraction(1, r * Q)
    return appr


def _progression_count_nonzero(residue: int, q: int, X: int) -> int:
    """#{A in [-X, X], A != 0, A = residue mod q}."""
    residue %= q
    count = (X - residue) // q + (X + residue) // q + 1
    if residue == 0:
        count -= 1
    return count


def count_F(b1: int, b2: int, X: int, q: int) -> int:
    """F_{b1,b2}(X, q): pairs 0 < |A1|, |A2| <= X with b1 A1 = b2 A2 mod q.

    Walks A2 and counts the admissible A1 by progressions; b1 must be a
    unit mod q. For b1 = b2 and X < q/2 the pairs are forced diagonal,
    giving exactly 2X counted pairs... i.e. F(b, b, 2M^2, q) = 4M^2 when
    2M^2 < q/2.
    """
    if X > 10**6:
        raise ValueError("direct pair count capped at X <= 10^6")
    ratio = b2 * mod_inverse(b1, q) % q
    total = 0
    for a2 in range(1, X + 1):
        total += _progression_count_nonzero(ratio * a2 % q, q, X)
        total += _progression_count_nonzero(-ratio * a2 % q, q, X)
    return total


@dataclass(frozen=True)
class ReducedCoefficients:
    """Output of the gamma-reduction of a unit congruence.

    The congruence r x3^2 = g1 x1^2 + g2 x2^2 mod q carries the same unit
    solutions as b1 x1^2 + b2 x2^2 + b3 x3^2 = 0 whenever gcd(r, q) = 1
    (multiplying by the unit r is then reversible); in general the reduced
    form contains the original solution set.
    """

    g1: int
    g2: int
    r1: int
    r2: int
    a1: int
    a2: int
    q: int

    @property
    def r(self) -> int:
        return self.r1 * self.r2


def reduce_coefficients(b1: int, b2: int, b3: int, q: int, Q: int) -> ReducedCoefficients:
    """Replace b1/b3 and b2/b3 by small gamma coefficients via approximants.

    With t_i = b_i * inverse(b3) mod q and Dirichlet fractions a_i/r_i of
    t_i/q at quality Q, sets r = r1 r2 and
        g1 = -t1 r + a1 r2 q,   g2 = -t2 r + a2 r1 q,
    which obey |g_i| <= q (r1 + r2) / Q + r.
    """
    inv3 = mod_inverse(b3, q)
    t1 = b1 * inv3 % q
    t2 = b2 * inv3 % q
    ap1 = dirichlet_approx(t1, q, Q)
    ap2 = dirichlet_approx(t2, q, Q)
    r = ap1.r * ap2.r
    g1 = -t1 * r + ap1.a * ap2.r * q
    g2 = -t2 * r + ap2.a * ap1.r * q
    out = ReducedCoefficients(g1, g2, ap1.r, ap2.r, ap1.a, ap2.a, q)
    bound = q * (ap1.r + ap2.r) // Q + r + 1
    assert abs(g1) <= bound and abs(g2) <= bound
    return out


def integer_nth_root(x: int, k: int) -> int:
    """floor(x^(1/k)) for x >= 0, exact."""
    if x < 0 or k < 1:
        raise ValueError("x must be >= 0 and k >= 1")
    if x in (0, 1):
        return x
    r = int(round(x ** (1.0 / k)))
    while r**k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def _ceil_fifth_root(num: int, den: int) -> int:
    """Smallest integer R >= (num/den)^(1/5), exact."""
    lo = integer_nth_root(num // den, 5)
    r = max(1, lo)
    while r**5 * den < num:
        r += 1
    return r


def error_term_parameters(p: int, r: int, q: int, N: float, eps: float = 0.0):
    """Derived experiment parameters (L_r, q_r) of the dual-count cascade.

    L_r = p^(-r) q^(1+eps) / N is the cutoff of the dual coefficient range
    and q_r = p^(-r-1) q the dual modulus; eps is a configuration knob that
    defaults to 0.
    """
    if r < 0 or q % p**(r + 1):
        raise ValueError("need r >= 0 and p^(r+1) dividing q")
    return q ** (1.0 + eps) / (p**r * N), q // p ** (r + 1)


def choose_parameters(q: int, M: int):
    """The cutoff pair R = ceil(q^(2/5) M^(-3/5)), Q = ceil(q^(3/5) M^(3/5)).

    Exact ceilings of rational fifth roots (no floating point): R is the
    least integer with R^5 M^3 >= q^2 and Q the least with Q^5 >= q^3 M^3.
    """
    if not 1 <= M <= q:
        raise ValueError("need 1 <= M <= q")
    R = _ceil_fifth_root(q * q, M**3)
    Q = _ceil_fifth_root(q**3 * M**3, 1)
    return R, Q

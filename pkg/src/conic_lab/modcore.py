"""Exact modular arithmetic over odd prime powers.

Jacobi symbols, inverses, square roots with Hensel lifting, quadratic Gauss
sums, and the structural constants s_p / C_p attached to a coefficient triple.
All functions are pure and safe for concurrent use.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple, Optional

import numpy as np

# Residues are conceptually 64-bit; constructors cap q so that downstream
# kernels may assume q*q fits comfortably in signed 128-bit products.
Q_MAX = 2**62

# Direct O(q) summation budget for Gauss sums at double precision.
GAUSS_SUM_Q_MAX = 10**7

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, valid for all n < 3.3e24."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimePowerModulus:
    """The pair (p, n) with q = p^n, p an odd prime, q <= 2^62."""

    p: int
    n: int
    q: int = field(init=False)

    def __post_init__(self):
        if self.p <= 2 or not is_prime(self.p):
            raise ValueError(f"p={self.p} is not an odd prime")
        if self.n < 1:
            raise ValueError(f"exponent n={self.n} must be >= 1")
        q = self.p**self.n
        if q > Q_MAX:
            raise ValueError(f"q = {self.p}^{self.n} exceeds the 2^62 cap")
        object.__setattr__(self, "q", q)


class CoefficientTriple(NamedTuple):
    """Coefficients (a1, a2, a3) of a diagonal ternary quadratic congruence."""

    a1: int
    a2: int
    a3: int

    def reduced(self, q: int) -> "CoefficientTriple":
        return CoefficientTriple(self.a1 % q, self.a2 % q, self.a3 % q)


def as_coeffs(coeffs) -> CoefficientTriple:
    a1, a2, a3 = coeffs
    return CoefficientTriple(a1, a2, a3)


def validate_coeffs(coeffs, p: int) -> CoefficientTriple:
    """Check gcd(a_i, p) = 1 for all three coefficients."""
    c = as_coeffs(coeffs)
    for a in c:
        if a % p == 0:
            raise ValueError(f"coefficient {a} shares a factor with p={p}")
    return c


def jacobi(a: int, m: int) -> int:
    """Jacobi symbol (a/m) for odd positive m (Legendre symbol for prime m)."""
    if m <= 0 or m % 2 == 0:
        raise ValueError(f"modulus {m} must be odd and positive")
    a %= m
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
        a %= m
    return result if m == 1 else 0


def mod_inverse(a: int, q: int) -> int:
    """Inverse of a mod q; raises when gcd(a, q) > 1."""
    try:
        return pow(a, -1, q)
    except ValueError:
        raise ValueError(f"{a} is not invertible mod {q}") from None


def _sqrt_mod_prime(a: int, p: int) -> Optional[int]:
    """Tonelli-Shanks square root mod an odd prime; None for non-residues.

    The quadratic non-residue used internally is the smallest positive one,
    so the algorithm is fully deterministic.
    """
    a %= p
    if a == 0:
        return 0
    if jacobi(a, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # p - 1 = s * 2^e with s odd
    s, e = p - 1, 0
    while s % 2 == 0:
        s //= 2
        e += 1
    z = 2
    while jacobi(z, p) != -1:
        z += 1
    c = pow(z, s, p)
    x = pow(a, (s + 1) // 2, p)
    t = pow(a, s, p)
    m = e
    while t != 1:
        i, sq = 0, t
        while sq != 1:
            sq = sq * sq % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        x = x * b % p
        c = b * b % p
        t = t * c % p
        m = i
    return x


def sqrt_mod_prime_power(a: int, pp: PrimePowerModulus) -> Optional[int]:
    """Smaller root x in [0, q) of x^2 = a mod q for a unit a, or None.

    The prime-level root is lifted by Newton steps that double the working
    precision each round. Rejects a divisible by p: callers must strip even
    powers of p themselves (see sqrt_all_roots for the general case).
    """
    p, n, q = pp.p, pp.n, pp.q
    a %= q
    if a % p == 0:
        raise ValueError("sqrt_mod_prime_power requires gcd(a, p) = 1")
    x = _sqrt_mod_prime(a, p)
    if x is None:
        return None
    mod = p
    while mod < q:
        mod = min(mod * mod, q)
        x = (x + (a - x * x) * pow(2 * x, -1, mod)) % mod
    return min(x, q - x)


def sqrt_all_roots(a: int, pp: PrimePowerModulus) -> list:
    """All x mod q with x^2 = a mod q, p-power stripping included.

    For a = 0 mod q the roots are the multiples of p^ceil(n/2); for
    a = p^e * u with u a unit there are none unless e is even and u is a
    residue, in which case there are 2*p^(e//2) roots.
    """
    p, n, q = pp.p, pp.n, pp.q
    a %= q
    if a == 0:
        step = p ** ((n + 1) // 2)
        return list(range(0, q, step))
    e = 0
    while a % p == 0:
        a //= p
        e += 1
    if e % 2:
        return []
    sub = PrimePowerModulus(p, n - e)
    r = sqrt_mod_prime_power(a % sub.q, sub)
    if r is None:
        return []
    h = p ** (e // 2)
    zbound = p ** (n - e // 2)  # roots are h*z with z = +-r mod p^(n-e)
    roots = []
    for z0 in (r, sub.q - r):
        roots.extend(h * z for z in range(z0, zbound, sub.q))
    return roots


def _kahan_complex_sum(re: np.ndarray, im: np.ndarray) -> complex:
    # math.fsum is exactly rounded, strictly stronger than Kahan compensation.
    return complex(math.fsum(re), math.fsum(im))


def gauss_sum(q: int) -> complex:
    """Quadratic Gauss sum G_q = sum_{x=1..q} exp(2 pi i x^2 / q), q odd."""
    if q <= 0 or q % 2 == 0:
        raise ValueError(f"q={q} must be odd and positive")
    if q > GAUSS_SUM_Q_MAX:
        raise ValueError(f"q={q} exceeds the direct summation budget")
    x = np.arange(1, q + 1, dtype=np.int64)
    ang = (x * x % q) * (2.0 * np.pi / q)
    return _kahan_complex_sum(np.cos(ang), np.sin(ang))


def _factorize(m: int) -> list:
    out = []
    d = 3
    while d * d <= m:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            out.append((d, e))
        d += 2
    if m > 1:
        out.append((m, 1))
    return out


def jacobi_table(q: int) -> np.ndarray:
    """(y/q) for y = 0..q-1 as an int8 array, built multiplicatively.

    (y/q) = prod_p (y/p)^e over the factorization of q; each Legendre table
    is filled by marking the squares mod p, which avoids a per-entry symbol
    computation.
    """
    if q % 2 == 0 or q <= 0:
        raise ValueError("jacobi_table needs odd positive q")
    tab = np.ones(q, dtype=np.int8)
    y = np.arange(q, dtype=np.int64)
    for p, e in _factorize(q):
        leg = np.full(p, -1, dtype=np.int8)
        leg[0] = 0
        r = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
        leg[r * r % p] = 1
        vals = leg[y % p]
        tab *= vals if e % 2 else np.abs(vals)
    return tab


def gauss_sum_character(q: int) -> complex:
    """Character form sum_{y=1..q} (y/q) exp(2 pi i y / q); equals G_q for odd q."""
    if q <= 0 or q % 2 == 0:
        raise ValueError(f"q={q} must be odd and positive")
    if q > GAUSS_SUM_Q_MAX:
        raise ValueError(f"q={q} exceeds the direct summation budget")
    chi = jacobi_table(q).astype(np.float64)
    ang = np.arange(q, dtype=np.float64) * (2.0 * np.pi / q)
    return _kahan_complex_sum(chi * np.cos(ang), chi * np.sin(ang))


def gauss_sum_unit(q: int) -> complex:
    """Exact value of G_q / sqrt(q) for odd q: 1 if q = 1 mod 4, else i."""
    if q % 4 == 1:
        return 1.0 + 0.0j
    return 1.0j


def s_p(coeffs, p: int) -> int:
    """Number of excluded parameter classes mod p for the coefficient triple.

    Equals 2 + (-a1*a2/p) + (-a1*a3/p) + (-a2*a3/p); the prime-level solution
    count of the congruence is (p-1)(p - s_p).
    """
    a1, a2, a3 = validate_coeffs(coeffs, p)
    return (
        2
        + jacobi(-a1 * a2, p)
        + jacobi(-a1 * a3, p)
        + jacobi(-a2 * a3, p)
    )


def main_constant(coeffs, p: int) -> Fraction:
    """Main-term density C_p = (p - s_p)(p - 1) / p^2 as an exact rational.

    May be zero or negative (e.g. Pythagorean coefficients at p = 5, where
    s_p = p); predictions built on it are then vacuous and callers must treat
    them as such rather than expect a failure here.
    """
    s = s_p(coeffs, p)
    return Fraction((p - s) * (p - 1), p * p)

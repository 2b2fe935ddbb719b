"""Complete exponential sums sum_t e(f(t)/p^n) for rational-function f.

Three routes to the same values, kept deliberately separate so they can be
played against each other:

* direct_S_alpha: brute summation over a residue class t = alpha mod p;
* cochrane_evaluate: the critical-point evaluation (zero away from critical
  points of p^(-r) f', a single Gauss-sum-normalized term at simple ones);
* closed_form_E: the two-critical-point closed form for the chord-slope
  amplitude families, phrased through sqrt(D) for the key discriminant D.

Polynomial arithmetic is exact over Python integers; reduction mod q happens
only at evaluation time.
"""

import math
from dataclasses import dataclass

import numpy as np

from .modcore import (
    PrimePowerModulus,
    gauss_sum_unit,
    jacobi,
    mod_inverse,
    sqrt_mod_prime_power,
    validate_coeffs,
)
from .conic import BasePoint, case1_slope_base, case_tag, CASE_I, CASE_II

DIRECT_SUM_Q_MAX = 10**7


class NonUnitDenominatorError(ValueError):
    """The denominator vanishes mod p where a unit value is required."""


class UnsupportedCaseError(ValueError):
    """Inputs outside the closed-form evaluation's hypotheses."""


# ---------------------------------------------------------------------------
# dense integer polynomials, ascending coefficients


def _trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(c)


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return _trim(out)


def _poly_sub(a, b):
    out = [0] * max(len(a), len(b))
    for i, ai in enumerate(a):
        out[i] += ai
    for j, bj in enumerate(b):
        out[j] -= bj
    return _trim(out)


def _poly_deriv(a):
    if len(a) == 1:
        return (0,)
    return _trim([i * ai for i, ai in enumerate(a)][1:])


def _poly_eval_mod(a, x, m):
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % m
    return acc


def _poly_eval_mod_vec(a, xs, m):
    acc = np.zeros_like(xs)
    for c in reversed(a):
        acc = (acc * xs + c % m) % m
    return acc


def _poly_valuation(a, p):
    """Largest e with p^e dividing every coefficient; None for the zero poly."""
    v = None
    for c in a:
        if c == 0:
            continue
        e = 0
        while c % p == 0:
            c //= p
            e += 1
        v = e if v is None else min(v, e)
        if v == 0:
            return 0
    return v


def _poly_strip(a, p, v):
    return tuple(c // p**v for c in a)


def _synth_div(a, alpha, p):
    """Divide a by (x - alpha) mod p; assumes alpha is a root mod p."""
    out = [0] * (len(a) - 1)
    carry = 0
    for i in range(len(a) - 1, 0, -1):
        carry = (carry * alpha + a[i]) % p
        out[i - 1] = carry
    return _trim(out)


class IntRationalFunction:
    """f = numer / denom with integer-coefficient polynomials."""

    __slots__ = ("numer", "denom")

    def __init__(self, numer, denom=(1,)):
        self.numer = _trim(numer)
        self.denom = _trim(denom)
        if self.denom == (0,):
            raise ZeroDivisionError("denominator is the zero polynomial")

    def __repr__(self):
        return f"IntRationalFunction({self.numer}, {self.denom})"

    def is_zero(self):
        return self.numer == (0,)

    def eval_mod(self, t, q):
        dv = _poly_eval_mod(self.denom, t, q)
        if math.gcd(dv, q) != 1:
            raise NonUnitDenominatorError(f"denominator not a unit at t={t} mod {q}")
        return _poly_eval_mod(self.numer, t, q) * pow(dv, -1, q) % q

    def derivative(self):
        num = _poly_sub(
            _poly_mul(_poly_deriv(self.numer), self.denom),
            _poly_mul(self.numer, _poly_deriv(self.denom)),
        )
        return IntRationalFunction(num, _poly_mul(self.denom, self.denom))

    def ord_p(self, p):
        """ord_p(numer) - ord_p(denom); error if the numerator vanishes."""
        vn = _poly_valuation(self.numer, p)
        if vn is None:
            raise ValueError("ord_p undefined: numerator is identically zero")
        vd = _poly_valuation(self.denom, p)
        if vd is None:  # unreachable: denom is nonzero by construction
            raise ZeroDivisionError("zero denominator")
        return vn - vd

    def stripped(self, p):
        """The function with p-content removed from both parts, plus its ord."""
        vn = _poly_valuation(self.numer, p)
        if vn is None:
            raise ValueError("cannot strip the zero function")
        vd = _poly_valuation(self.denom, p)
        return (
            IntRationalFunction(_poly_strip(self.numer, p, vn), _poly_strip(self.denom, p, vd)),
            vn - vd,
        )


def eval_mod(f: IntRationalFunction, t: int, q: int) -> int:
    """numer(t) * inverse(denom(t)) mod q; denominator must be a unit."""
    return f.eval_mod(t, q)


def ord_p_derivative(f: IntRationalFunction, p: int) -> int:
    """r = ord_p(f'), the exact p-content of the derivative."""
    return f.derivative().ord_p(p)


# ---------------------------------------------------------------------------
# direct summation


def _e_q(value: int, q: int) -> complex:
    return complex(np.exp(2j * np.pi * (value % q) / q))


def _vec_inv_mod(d, q, phi):
    e = phi - 1
    out = np.ones_like(d)
    base = d % q
    while e:
        if e & 1:
            out = out * base % q
        base = base * base % q
        e >>= 1
    return out


def direct_S_alpha(f: IntRationalFunction, alpha: int, pp: PrimePowerModulus) -> complex:
    """S_alpha(f; p^n) = sum over t = alpha mod p, t in [1, p^n] of e_q(f(t))."""
    p, n, q = pp.p, pp.n, pp.q
    if q > DIRECT_SUM_Q_MAX:
        raise ValueError(f"q={q} exceeds the direct summation budget")
    alpha %= p
    if _poly_eval_mod(f.denom, alpha, p) == 0:
        raise NonUnitDenominatorError(f"denominator vanishes on the class {alpha} mod {p}")
    ts = alpha + p * np.arange(p ** (n - 1), dtype=np.int64)
    num = _poly_eval_mod_vec(f.numer, ts, q)
    den = _poly_eval_mod_vec(f.denom, ts, q)
    phi = q - q // p
    vals = num * _vec_inv_mod(den, q, phi) % q
    ang = vals * (2.0 * np.pi / q)
    return complex(math.fsum(np.cos(ang)), math.fsum(np.sin(ang)))


def direct_full_sum(f: IntRationalFunction, pp: PrimePowerModulus, alphas=None) -> complex:
    """Sum of S_alpha over the given residue classes (default: all of them)."""
    if alphas is None:
        alphas = range(pp.p)
    return sum((direct_S_alpha(f, a, pp) for a in alphas), start=0j)


# ---------------------------------------------------------------------------
# critical points and the Cochrane evaluation


@dataclass(frozen=True)
class CriticalPointReport:
    """Critical-point data of p^(-r) f' mod p.

    roots lists (alpha, multiplicity); lifted maps each simple root alpha to
    its unique lift mod p^ceil((n-r)/2); second_deriv_unit maps it to
    A(alpha) = 2 p^(-r) f''(alpha*) mod p.
    """

    r: int
    roots: tuple
    lifted: dict
    second_deriv_unit: dict
    lift_modulus: int


def analyze_critical_points(f: IntRationalFunction, pp: PrimePowerModulus) -> CriticalPointReport:
    p, n = pp.p, pp.n
    g, r = f.derivative().stripped(p)
    m = (n - r + 1) // 2
    lift_mod = p**m
    roots = []
    lifted = {}
    second = {}
    gnum_p = tuple(c % p for c in g.numer)
    dg = g.derivative()
    for alpha in range(p):
        if _poly_eval_mod(g.denom, alpha, p) == 0:
            continue
        if _poly_eval_mod(gnum_p, alpha, p) != 0:
            continue
        mult = 0
        cur = gnum_p
        while cur != (0,) and _poly_eval_mod(cur, alpha, p) == 0:
            cur = _synth_div(cur, alpha, p)
            mult += 1
        roots.append((alpha, mult))
        if mult == 1:
            astar = _lift_root(g.numer, alpha, p, lift_mod)
            lifted[alpha] = astar
            second[alpha] = 2 * dg.eval_mod(alpha, p) % p
    return CriticalPointReport(r, tuple(roots), lifted, second, lift_mod)


def _lift_root(poly, alpha, p, target):
    """Newton-lift a simple root of poly from mod p to mod target = p^m."""
    dpoly = _poly_deriv(poly)
    x, mod = alpha % p, p
    while mod < target:
        mod = min(mod * mod, target)
        fx = _poly_eval_mod(poly, x, mod)
        x = (x - fx * pow(_poly_eval_mod(dpoly, x, mod), -1, mod)) % mod
    return x


def cochrane_evaluate(f: IntRationalFunction, alpha: int, pp: PrimePowerModulus) -> complex:
    """Closed-form S_alpha(f; p^n) from the critical points of p^(-r) f'.

    Returns exactly 0 when alpha is not a critical point; at a simple
    critical point, lifts alpha and evaluates
        e_q(f(alpha*)) * p^((n+r)/2) * [1  or  (A(alpha)/p) * G_p/sqrt(p)]
    for n-r even / odd. Raises UnsupportedCaseError when r > n-2 or the
    critical point is a multiple root (cases the evaluation does not cover),
    NonUnitDenominatorError when f is undefined on the class.
    """
    p, n, q = pp.p, pp.n, pp.q
    alpha %= p
    if _poly_eval_mod(f.denom, alpha, p) == 0:
        raise NonUnitDenominatorError(f"denominator vanishes at alpha={alpha} mod {p}")
    g, r = f.derivative().stripped(p)
    if r > n - 2:
        raise UnsupportedCaseError(f"ord_p(f') = {r} > n-2 = {n-2}")
    if p == 3 and n - r == 3 and r >= 1:
        # The cubic Taylor term survives mod 3^n here (3 | 3!), so the
        # quadratic stationary-phase value below is wrong in general.
        raise UnsupportedCaseError("p=3 with n-r=3 and r>=1 is outside the evaluation")
    if g.eval_mod(alpha, p) != 0:
        return 0j
    gnum_p = tuple(c % p for c in g.numer)
    mult = 0
    cur = gnum_p
    while cur != (0,) and _poly_eval_mod(cur, alpha, p) == 0:
        cur = _synth_div(cur, alpha, p)
        mult += 1
    if mult != 1:
        raise UnsupportedCaseError(f"alpha={alpha} is a multiple critical point")
    astar = _lift_root(g.numer, alpha, p, p ** ((n - r + 1) // 2))
    phase = _e_q(f.eval_mod(astar, q), q)
    if (n - r) % 2 == 0:
        return phase * p ** ((n + r) // 2)
    a_unit = 2 * g.derivative().eval_mod(alpha, p) % p
    mag = p ** ((n + r - 1) // 2) * math.sqrt(p)
    return phase * mag * jacobi(a_unit, p) * gauss_sum_unit(p)


# ---------------------------------------------------------------------------
# the chord-slope amplitude families


def family_case1(k1, k2, x3, coeffs, b, pp: PrimePowerModulus) -> IntRationalFunction:
    """Amplitude x3*(2 k1 b a2 t + k2 b (a1 - a2 t^2)) / (a1 + a2 t^2).

    This is the phase produced by the Case I parametrization after Poisson
    summation in the first two coordinates.
    """
    c = validate_coeffs(coeffs, pp.p)
    if (c.a2 * b * b + c.a3) % pp.q != 0:
        raise ValueError("b does not satisfy a2*b^2 = -a3 mod q")
    numer = (x3 * b * k2 * c.a1, 2 * x3 * b * k1 * c.a2, -x3 * b * k2 * c.a2)
    return IntRationalFunction(numer, (c.a1, 0, c.a2))


def family_case2(s, k1, k2, x3, coeffs, base: BasePoint, pp: PrimePowerModulus) -> IntRationalFunction:
    """Amplitude x3*(k1 y1(t/p^s) + k2 y2(t/p^s)) with denominators cleared.

    Layer s of the Case II family; the cleared form is
      x3 * [a1 p^(2s) (a k1 + b k2) + 2 p^s (b a2 k1 - a a1 k2) t
            - a2 (a k1 + b k2) t^2] / (a1 p^(2s) + a2 t^2)
    with exact integer coefficients.
    """
    c = validate_coeffs(coeffs, pp.p)
    p, q = pp.p, pp.q
    if not 0 <= s <= pp.n:
        raise ValueError(f"layer index s={s} out of range 0..{pp.n}")
    a, b = base
    if (c.a1 * a * a + c.a2 * b * b + c.a3) % q != 0:
        raise ValueError("base point does not lie on the conic mod q")
    ps = p**s
    d2 = a * k1 + b * k2
    numer = (x3 * c.a1 * ps * ps * d2, 2 * x3 * ps * (b * c.a2 * k1 - a * c.a1 * k2), -x3 * c.a2 * d2)
    return IntRationalFunction(numer, (c.a1 * ps * ps, 0, c.a2))


def case1_admissible_alphas(coeffs, p: int):
    """Classes alpha mod p with alpha(a1 - a2 alpha^2)(a1 + a2 alpha^2) a unit."""
    c = validate_coeffs(coeffs, p)
    return [
        a
        for a in range(1, p)
        if (c.a1 - c.a2 * a * a) % p and (c.a1 + c.a2 * a * a) % p
    ]


def direct_E_case1(k1, k2, x3, coeffs, b, pp: PrimePowerModulus) -> complex:
    """E(k1,k2,x3;p^n) for Case I: the t-sum over admissible classes, directly."""
    f = family_case1(k1, k2, x3, coeffs, b, pp)
    return direct_full_sum(f, pp, case1_admissible_alphas(coeffs, pp.p))


def direct_E_case2(k1, k2, x3, coeffs, base: BasePoint, pp: PrimePowerModulus) -> complex:
    """The full t-sum of the s=0 Case II amplitude, directly."""
    f = family_case2(0, k1, k2, x3, coeffs, base, pp)
    return direct_full_sum(f, pp)


def layer_sum(s, k1, k2, x3, coeffs, base: BasePoint, pp: PrimePowerModulus) -> complex:
    """Layer-s contribution: the unit-t sum of the layer amplitude over 1/p^s.

    At k1 = k2 = 0 this recovers the layer size (p^(n-s) - p^(n-s-1) for
    1 <= s <= n-1, p^n at s=0, where the s=0 sum runs over all t). For
    s >= 1 the sum vanishes whenever ord_p of the amplitude derivative is
    at most n-2, because unit critical points would force t = 0 mod p.
    """
    f = family_case2(s, k1, k2, x3, coeffs, base, pp)
    if s == 0:
        return direct_full_sum(f, pp)
    return direct_full_sum(f, pp, range(1, pp.p)) / pp.p**s


def _split_common_power(k1, k2, p, n):
    r = 0
    while r < n and k1 % p == 0 and k2 % p == 0:
        k1 //= p
        k2 //= p
        r += 1
    return k1, k2, r


def closed_form_E(k1, k2, x3, coeffs, pp: PrimePowerModulus, tag: str, base: BasePoint = None) -> complex:
    """The sqrt(D) closed form of the family sum E(k1,k2,x3;p^n).

    Writing (k1,k2) = p^r (l1,l2) with l1, l2 units and
    D = a1 a2 l1^2 + a1^2 l2^2 (Case I) or -a3/a2 times that (Case II):
    the sum vanishes when D is a non-residue mod p, and otherwise equals

        p^((n+r)/2) * sum_{eps = +-1} e(eps * c * sqrt(D) / p^(n-r)) * K(eps)

    with c = b*x3/a1 resp. x3/a1, K(eps) = 1 for n-r even and
    (-2*w*a2*eps*sqrt(D) / p) * G_p/sqrt(p) for n-r odd (w = b*x3 resp. x3).
    The Legendre factor is attached per critical point, which makes the
    expression independent of the sqrt(D) branch. Unsupported: r > n-2,
    D = 0 mod p, and Case II instances whose critical quadratic degenerates
    mod p (leading coefficient l2*a1*a - l1*a2*b = 0 at the base point).
    """
    c = validate_coeffs(coeffs, pp.p)
    p, n = pp.p, pp.n
    if tag not in (CASE_I, CASE_II):
        raise ValueError(f"unknown case tag {tag!r}")
    if x3 % p == 0:
        raise ValueError("x3 must be a unit mod p")
    l1, l2, r = _split_common_power(k1, k2, p, n)
    if l1 % p == 0 or l2 % p == 0:
        raise ValueError("k1 and k2 must share the same exact power of p")
    if r > n - 2:
        raise UnsupportedCaseError(f"r = {r} > n-2 = {n-2}")
    if p == 3 and n - r == 3 and r >= 1:
        raise UnsupportedCaseError("p=3 with n-r=3 and r>=1 is outside the evaluation")
    nr = n - r
    mod_nr = p**nr
    ppnr = PrimePowerModulus(p, nr)
    core = c.a1 * c.a2 * l1 * l1 + c.a1 * c.a1 * l2 * l2
    if tag == CASE_I:
        if jacobi(-c.a2 * c.a3, p) != 1:
            raise ValueError("coefficients do not match the Case I pattern")
        b = case1_slope_base(coeffs, pp)
        d_val = core % mod_nr
        w = b * x3
    else:
        if case_tag(coeffs, p) != CASE_II:
            raise ValueError("coefficients do not match the Case II pattern")
        if base is None:
            from .conic import find_base_point

            base = find_base_point(coeffs, pp)
        if (l2 * c.a1 * base.a - l1 * c.a2 * base.b) % p == 0:
            raise UnsupportedCaseError("critical quadratic degenerates mod p")
        d_val = (-c.a3 * mod_inverse(c.a2, mod_nr) * core) % mod_nr
        w = x3
    if d_val % p == 0:
        raise UnsupportedCaseError("D = 0 mod p is excluded by the admissible classes")
    if jacobi(d_val, p) == -1:
        return 0j
    sq = sqrt_mod_prime_power(d_val, ppnr)
    cphase = w * mod_inverse(c.a1, mod_nr) % mod_nr
    total = 0j
    for eps in (1, -1):
        term = _e_q(eps * cphase * sq, mod_nr)
        if nr % 2:
            term *= jacobi(-2 * w * c.a2 * eps * sq, p) * gauss_sum_unit(p)
        total += term
    if nr % 2 == 0:
        return total * p ** ((n + r) // 2)
    return total * p ** ((n + r - 1) // 2) * math.sqrt(p)

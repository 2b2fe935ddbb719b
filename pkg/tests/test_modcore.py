import math
import random

import pytest

from conic_lab.modcore import (
    PrimePowerModulus,
    gauss_sum,
    gauss_sum_character,
    gauss_sum_unit,
    is_prime,
    jacobi,
    jacobi_table,
    main_constant,
    mod_inverse,
    s_p,
    sqrt_all_roots,
    sqrt_mod_prime_power,
    validate_coeffs,
)
from fractions import Fraction

import oracles


def test_modulus_validation():
    pp = PrimePowerModulus(7, 2)
    assert (pp.p, pp.n, pp.q) == (7, 2, 49)
    with pytest.raises(ValueError):
        PrimePowerModulus(2, 3)
    with pytest.raises(ValueError):
        PrimePowerModulus(9, 1)
    with pytest.raises(ValueError):
        PrimePowerModulus(7, 0)
    with pytest.raises(ValueError):
        PrimePowerModulus(3, 41)  # 3^41 > 2^62


def test_is_prime_small():
    primes = {2, 3, 5, 7, 11, 13, 97, 7919}
    for m in range(2, 100):
        assert is_prime(m) == all(m % d for d in range(2, m))
    assert is_prime(2**61 - 1)
    assert not is_prime(2**62 - 1)


def test_jacobi_examples():
    assert jacobi(1, 7) == 1
    assert jacobi(2, 7) == 1  # 3^2 = 9 = 2 mod 7
    assert jacobi(3, 7) == -1
    assert jacobi(0, 7) == 0
    with pytest.raises(ValueError):
        jacobi(3, 10)
    with pytest.raises(ValueError):
        jacobi(3, -7)


def test_jacobi_properties():
    rng = random.Random(0)
    for _ in range(300):
        p = rng.choice([3, 5, 7, 11, 13, 101])
        a = rng.randrange(1, p)
        b = rng.randrange(1, p)
        assert jacobi(a * a, p) == 1
        assert jacobi(a * b, p) == jacobi(a, p) * jacobi(b, p)
    # multiplicative in the modulus as well
    for _ in range(100):
        a = rng.randrange(100)
        m1 = rng.randrange(1, 60) * 2 + 1
        m2 = rng.randrange(1, 60) * 2 + 1
        assert jacobi(a, m1 * m2) == jacobi(a, m1) * jacobi(a, m2)


def test_jacobi_table_matches_scalar():
    for q in (3, 9, 15, 45, 49, 105):
        tab = jacobi_table(q)
        for y in range(q):
            assert tab[y] == jacobi(y, q)


def test_mod_inverse():
    assert mod_inverse(3, 49) == 33
    assert mod_inverse(1, 97) == 1
    with pytest.raises(ValueError):
        mod_inverse(7, 49)
    rng = random.Random(1)
    for _ in range(200):
        q = rng.randrange(3, 10**6)
        a = rng.randrange(1, q)
        if math.gcd(a, q) != 1:
            continue
        assert a * mod_inverse(a, q) % q == 1


def test_sqrt_mod_prime_power_examples():
    assert sqrt_mod_prime_power(2, PrimePowerModulus(7, 2)) == 10
    assert sqrt_mod_prime_power(1, PrimePowerModulus(7, 2)) == 1
    assert sqrt_mod_prime_power(3, PrimePowerModulus(7, 3)) is None
    with pytest.raises(ValueError):
        sqrt_mod_prime_power(7, PrimePowerModulus(7, 2))


def test_sqrt_root_set_property():
    rng = random.Random(2)
    for _ in range(200):
        p = rng.choice([3, 5, 7, 11, 13, 10007])
        n = rng.randint(1, 4)
        pp = PrimePowerModulus(p, n)
        if pp.q > 10**7:
            continue
        a = rng.randrange(1, pp.q)
        if a % p == 0:
            continue
        r = sqrt_mod_prime_power(a, pp)
        if r is None:
            assert jacobi(a, p) == -1
            continue
        assert r * r % pp.q == a % pp.q
        assert r == min(r, pp.q - r)  # smaller representative


def test_sqrt_all_roots_vs_brute():
    rng = random.Random(3)
    for _ in range(60):
        p = rng.choice([3, 5, 7])
        n = rng.randint(1, 4)
        pp = PrimePowerModulus(p, n)
        a = rng.randrange(pp.q)
        assert sorted(sqrt_all_roots(a, pp)) == oracles.brute_sqrt_roots(a, pp.q)


def test_gauss_sum_examples():
    g3 = gauss_sum(3)
    assert abs(g3 - complex(0, math.sqrt(3))) < 1e-12
    g5 = gauss_sum(5)
    assert abs(g5 - complex(math.sqrt(5), 0)) < 1e-12
    assert abs(abs(gauss_sum(49)) - 7.0) < 1e-9
    with pytest.raises(ValueError):
        gauss_sum(10)


def test_gauss_sum_modulus_and_character_form():
    rng = random.Random(4)
    for _ in range(25):
        q = rng.randrange(1, 2000) * 2 + 1
        g = gauss_sum(q)
        assert abs(abs(g) ** 2 - q) / q < 1e-9
        # the character form agrees on squarefree q
        squarefree = all(q % (d * d) for d in range(2, int(math.isqrt(q)) + 1))
        if squarefree:
            assert abs(g - gauss_sum_character(q)) < 1e-9
        assert abs(gauss_sum_unit(q) * math.sqrt(q) - g) < 1e-7


def test_character_form_diverges_on_square_part():
    # (y/9) is the principal character mod 3, so its sum telescopes to 0
    # while G_9 = 3: the two forms agree only for squarefree moduli.
    assert abs(gauss_sum(9) - 3.0) < 1e-12
    assert abs(gauss_sum_character(9)) < 1e-12


def test_s_p_examples():
    assert s_p((1, 1, -1), 7) == 3
    assert s_p((1, 1, 1), 7) == -1
    assert s_p((1, 1, -1), 5) == 5
    with pytest.raises(ValueError):
        s_p((7, 1, 1), 7)


def test_main_constant_examples():
    assert main_constant((1, 1, -1), 7) == Fraction(24, 49)
    assert main_constant((1, 1, 1), 7) == Fraction(48, 49)
    assert main_constant((1, 1, -1), 5) == 0


def test_validate_coeffs():
    assert tuple(validate_coeffs((1, 2, -3), 7)) == (1, 2, -3)
    with pytest.raises(ValueError):
        validate_coeffs((1, 14, 3), 7)

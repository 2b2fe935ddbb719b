"""Counting solution triples of a1 x1^2 + a2 x2^2 + a3 x3^2 = 0 mod p^n in boxes.

Sharp and Gaussian-smoothed counts, the main-term predictor C_p N^3 / q,
exact prime-level counts, unit-circle counts mod p^n, the smallest-solution
shell search, and n-sweeps comparing observed counts to the prediction.

The counting kernels iterate (x1, x2) and resolve x3 through modular square
roots and arithmetic-progression counts; work is data-parallel over x1 rows
with a fixed reduction order, so results do not depend on the worker count
(bit-identical, including the float outputs, which are combined with exact
summation in row order).
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .modcore import (
    CoefficientTriple,
    PrimePowerModulus,
    main_constant,
    mod_inverse,
    s_p,
    validate_coeffs,
)

# Counting kernels build per-residue tables of size q.
TABLE_Q_MAX = 10**7

GAUSSIAN_TAIL_RADIUS = 6.0


@dataclass(frozen=True)
class WeightSpec:
    """Weight Phi applied per coordinate: self-dual Gaussian or sharp cutoff.

    gaussian: Phi(x) = exp(-pi x^2), its own Fourier transform, hat(0) = 1;
    sharp: the indicator of [-1, 1], hat(0) = 2. truncation_radius is in
    units of N and must keep the Gaussian tail below double precision
    (>= 6: per-coordinate tail mass < 1e-15).
    """

    kind: str = "gaussian"
    truncation_radius: float = GAUSSIAN_TAIL_RADIUS

    def __post_init__(self):
        if self.kind not in ("gaussian", "sharp"):
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "gaussian" and self.truncation_radius < GAUSSIAN_TAIL_RADIUS:
            raise ValueError("gaussian truncation radius must be >= 6")

    def phi(self, x):
        if self.kind == "gaussian":
            return np.exp(-np.pi * np.square(x))
        return (np.abs(x) <= 1.0).astype(float)

    @property
    def hat_zero(self) -> float:
        return 1.0 if self.kind == "gaussian" else 2.0


@dataclass(frozen=True)
class CountReport:
    """One observed-vs-predicted record of a box count."""

    modulus: PrimePowerModulus
    coeffs: CoefficientTriple
    box_half_width: float
    observed: float
    predicted: float
    ratio: Optional[float] = field(default=None)

    @staticmethod
    def build(pp, coeffs, n_box, observed, predicted) -> "CountReport":
        ratio = observed / predicted if predicted > 0 else None
        return CountReport(pp, CoefficientTriple(*coeffs), n_box, observed, predicted, ratio)

    @property
    def valid(self) -> bool:
        return self.ratio is not None


def _sqrt_table(pp: PrimePowerModulus) -> np.ndarray:
    """tab[c] = the root of x^2 = c mod q in [1, (q-1)/2], 0 when none.

    Canonical for unit c; a lookup r is genuine iff r*r = c mod q.
    """
    q = pp.q
    if q > TABLE_Q_MAX:
        raise ValueError(f"q={q} exceeds the table budget")
    tab = np.zeros(q, dtype=np.int64)
    x = np.arange(1, (q - 1) // 2 + 1, dtype=np.int64)
    tab[x * x % q] = x
    return tab


def _legendre_table(p: int) -> np.ndarray:
    leg = np.full(p, -1, dtype=np.int64)
    leg[0] = 0
    x = np.arange(1, (p - 1) // 2 + 1, dtype=np.int64)
    leg[x * x % p] = 1
    return leg


def _workers_from(workers: Optional[int]) -> int:
    if workers is None:
        workers = int(os.environ.get("CONIC_LAB_THREADS", "1"))
    return max(1, workers)


def _count_core(coeffs, pp, N, w: Optional[WeightSpec], workers) -> float:
    """Shared (x1, x2)-iteration kernel: sharp count when w is None."""
    p, q = pp.p, pp.q
    c = validate_coeffs(coeffs, p)
    if w is None:
        half = int(N)
    else:
        half = int(math.floor(w.truncation_radius * N))
    if half < 1:
        return 0.0
    xs = np.arange(1, half + 1, dtype=np.int64)
    unit = xs % p != 0
    if w is None:
        w2 = unit.astype(np.float64)
        t = np.arange(q, dtype=np.int64)
        w3 = ((int(N) - t) // q + (int(N) + t) // q + 1).astype(np.float64)
    else:
        w2 = np.where(unit, w.phi(xs / N), 0.0)
        w3 = np.zeros(q, dtype=np.float64)
        np.add.at(w3, xs % q, w2)
        np.add.at(w3, (-xs) % q, w2)  # Phi is even
    w3 = np.append(w3, 0.0)  # slot q: masked-out lookups land here
    inv3 = mod_inverse(c.a3, q)
    sq_xs = xs * xs % q
    c2_vals = (-c.a2 * inv3 % q) * sq_xs % q
    k1_vals = (-c.a1 * inv3 % q) * sq_xs % q
    tab = _sqrt_table(pp)

    def run(block):
        out = np.empty(len(block), dtype=np.float64)
        for i, idx in enumerate(block):
            cc = k1_vals[idx] + c2_vals
            cc -= (cc >= q) * q
            r = tab[cc]
            ok = (r * r % q == cc) & (cc % p != 0)
            mass = np.where(ok, w3[r] + w3[q - r], 0.0)
            out[i] = float(mass @ w2)
        return out

    nworkers = _workers_from(workers)
    blocks = [b for b in np.array_split(np.arange(half), nworkers) if len(b)]
    if len(blocks) == 1:
        rows = [run(blocks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            rows = list(pool.map(run, blocks))
    row_mass = np.concatenate(rows)  # indexed by x1 regardless of partition
    # 4 sign choices of (x1, x2); fsum in row order for partition-independence
    return 4.0 * math.fsum(row_mass * w2)


def count_sharp(coeffs, pp: PrimePowerModulus, N: int, workers: Optional[int] = None) -> int:
    """Exact number of solutions with |x_i| <= N and all coordinates units."""
    if N < 0:
        raise ValueError("box half-width must be >= 0")
    return int(round(_count_core(coeffs, pp, N, None, workers)))


def count_smoothed(
    coeffs, pp: PrimePowerModulus, N: float, w: WeightSpec = WeightSpec(), workers: Optional[int] = None
) -> float:
    """Sum of Phi(x1/N) Phi(x2/N) Phi(x3/N) over unit solutions.

    Truncated at |x_i| <= truncation_radius * N; for the Gaussian the
    discarded tail is below 1e-15 per coordinate. The sharp kind delegates
    to count_sharp.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if w.kind == "sharp":
        return float(count_sharp(coeffs, pp, int(N), workers))
    return _count_core(coeffs, pp, N, w, workers)


def predict_main_term(coeffs, pp: PrimePowerModulus, N: float, w: WeightSpec = WeightSpec()) -> float:
    """Main-term prediction hat(Phi)(0)^3 * C_p * N^3 / q.

    Zero or negative C_p (s_p >= p) makes the prediction vacuous; the value
    is returned as-is and report builders flag the ratio as invalid.
    """
    cp = main_constant(coeffs, pp.p)
    return w.hat_zero**3 * float(cp) * float(N) ** 3 / pp.q


def prediction_is_vacuous(coeffs, p: int) -> bool:
    return main_constant(coeffs, p) <= 0


def count_mod_p(coeffs, p: int) -> int:
    """Exact count of unit-coordinate solutions mod a prime p.

    Scans (x1, x2) and counts admissible x3 from the Legendre symbol;
    always equals (p-1)(p - s_p).
    """
    if p > 10**4:
        raise ValueError("exhaustive prime-level scan capped at p <= 10^4")
    c = validate_coeffs(coeffs, p)
    leg = _legendre_table(p)
    inv3 = mod_inverse(c.a3, p)
    xs = np.arange(1, p, dtype=np.int64)
    c1 = (-c.a1 * inv3 % p) * (xs * xs % p) % p
    c2 = (-c.a2 * inv3 % p) * (xs * xs % p) % p
    total = 0
    for k1 in c1:
        need = k1 + c2
        need -= (need >= p) * p
        total += int(np.sum(np.where(need % p != 0, 1 + leg[need], 0)))
    return total


def sqrt_count_table(pp: PrimePowerModulus) -> np.ndarray:
    """counts[c] = #{x mod q : x^2 = c mod q} for every residue c.

    0 unless c = p^e u with e even and (u/p) = 1, in which case 2 p^(e/2);
    c = 0 has p^floor(n/2) roots.
    """
    p, n, q = pp.p, pp.n, pp.q
    if q > TABLE_Q_MAX:
        raise ValueError(f"q={q} exceeds the table budget")
    leg = _legendre_table(p)
    counts = np.zeros(q, dtype=np.int64)
    counts[0] = p ** (n // 2)
    for e in range(0, n, 2):
        pe = p**e
        us = np.arange(1, (q - 1) // pe + 1, dtype=np.int64)
        us = us[us % p != 0]
        counts[pe * us] = np.where(leg[us % p] == 1, 2 * p ** (e // 2), 0)
    return counts


def count_unit_circle(g1: int, g2: int, pp: PrimePowerModulus) -> int:
    """Number of pairs (x1, x2) mod q with g1 x1^2 + g2 x2^2 = 1 mod q.

    All residue pairs count, units or not; when -g1*g2 is a non-residue
    mod p the value is p^n + p^(n-1).
    """
    p, q = pp.p, pp.q
    if g1 % p == 0 or g2 % p == 0:
        raise ValueError("g1, g2 must be units mod p")
    counts = sqrt_count_table(pp)
    inv2 = mod_inverse(g2, q)
    xs = np.arange(q, dtype=np.int64)
    need = (1 - g1 % q * (xs * xs % q)) % q * inv2 % q
    return int(np.sum(counts[need]))


def smallest_solution(coeffs, pp: PrimePowerModulus):
    """Minimal max-norm unit solution of the congruence, or None.

    Returns (m, witness) with the witness normalized to x1 >= 0 (hence
    x1 >= 1, as 0 is not a unit) and lexicographically least among the
    max-norm-m solutions; None when p <= s_p, in which case no unit
    solution exists mod p and hence none mod q.
    """
    p, q = pp.p, pp.q
    c = validate_coeffs(coeffs, p)
    if p - s_p(coeffs, p) <= 0:
        return None
    tab = _sqrt_table(pp)
    inv3 = mod_inverse(c.a3, q)
    m = 0
    while True:
        m += 1
        if m > (q - 1) // 2 + 1:
            raise AssertionError("shell search overran the residue box")
        best = None
        for x1 in range(1, m + 1):
            if x1 % p == 0:
                continue
            sq1 = c.a1 * x1 * x1
            for x2 in range(-m, m + 1):
                if x2 % p == 0:
                    continue
                cval = (-(sq1 + c.a2 * x2 * x2) * inv3) % q
                if cval % p == 0:
                    continue
                r = int(tab[cval])
                if r * r % q != cval:
                    continue
                for root in (r, q - r):
                    x3 = root - ((m + root) // q) * q  # least value >= -m
                    while x3 <= m:
                        if max(x1, abs(x2), abs(x3)) == m:
                            cand = (x1, x2, x3)
                            if best is None or cand < best:
                                best = cand
                        x3 += q
        if best is not None:
            return m, best


def estimate_scan_work(p: int, n_values, theta: float, w: WeightSpec) -> int:
    """Pair visits the scan will perform (the unit of the work budget)."""
    total = 0
    radius = w.truncation_radius if w.kind == "gaussian" else 1.0
    for n in n_values:
        q = p**n
        N = math.ceil(q**theta)
        total += int(radius * N) ** 2
    return total


def asymptotic_scan(
    coeffs,
    p: int,
    n_values,
    theta: float,
    w: WeightSpec = WeightSpec(),
    workers: Optional[int] = None,
    budget: int = 10**9,
) -> list:
    """CountReports with N = ceil(q^theta) at each n; refuses oversized scans."""
    if not 0.5 < theta <= 1.0:
        raise ValueError("theta must lie in (0.5, 1]")
    n_values = list(n_values)
    work = estimate_scan_work(p, n_values, theta, w)
    if work > budget:
        raise ValueError(f"scan needs ~{work} pair visits, over the budget {budget}")
    c = validate_coeffs(coeffs, p)
    reports = []
    for n in n_values:
        pp = PrimePowerModulus(p, n)
        N = math.ceil(pp.q**theta)
        observed = count_smoothed(coeffs, pp, N, w, workers)
        predicted = predict_main_term(coeffs, pp, N, w)
        reports.append(CountReport.build(pp, c, N, observed, predicted))
    return reports


def poisson_selfcheck(w: WeightSpec, scale: float) -> float:
    """|sum_m Phi(m/scale) - scale * sum_m Phi(scale m)| for the Gaussian.

    Both sides are truncated where the tails drop below double precision;
    the summation-formula defect is ~1e-15 at any scale.
    """
    if w.kind != "gaussian":
        raise ValueError("self-check requires the gaussian weight")
    lhs_half = int(math.ceil(w.truncation_radius * scale)) + 1
    m = np.arange(-lhs_half, lhs_half + 1)
    lhs = math.fsum(w.phi(m / scale))
    rhs_half = int(math.ceil(w.truncation_radius / scale)) + 1
    k = np.arange(-rhs_half, rhs_half + 1)
    rhs = scale * math.fsum(w.phi(scale * k))
    return abs(lhs - rhs)

"""Batch experiment driver.

Subcommands: count | predict | scan | smallest | param-check | expsum-check
| dioph | selftest. Parameters come from flags, optionally seeded from a
JSON config file (flags override file values). Results are emitted as CSV
or JSONL with a fixed column set per subcommand and a schema_version
column; floats are printed with 12 significant digits. Work is estimated
up front in (x1, x2)-pair-visit units and runs over the budget are refused.

Exit codes: 0 success, 2 validation failure, 1 internal assertion failure.
"""

import argparse
import json
import math
import os
import sys

from . import census, conic, dioph, expsum, modcore
from .census import WeightSpec
from .modcore import PrimePowerModulus

SCHEMA_VERSION = 1
DEFAULT_BUDGET = 10**9

FIELDS = {
    "count": ["p", "n", "q", "a1", "a2", "a3", "N", "weight", "observed"],
    "predict": ["p", "n", "q", "a1", "a2", "a3", "N", "weight", "predicted", "vacuous"],
    "scan": ["p", "n", "q", "N", "theta", "observed", "predicted", "ratio"],
    "smallest": ["p", "n", "q", "a1", "a2", "a3", "m", "x1", "x2", "x3"],
    "param-check": [
        "p", "n", "q", "a1", "a2", "a3", "case",
        "family_size", "expected_size", "matches_enumeration",
    ],
    "expsum-check": [
        "p", "n", "q", "source", "k1", "k2", "x3", "alpha", "status", "rel_err",
    ],
    "dioph": ["mode", "inputs", "result"],
    "selftest": ["check", "status"],
}


class ValidationError(Exception):
    """Bad configuration: reported with exit code 2."""


class Splitmix64:
    """Tiny deterministic 64-bit generator for coefficient sampling."""

    MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self.MASK

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self.MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self.MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self.MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        return self.next() % bound

    def unit(self, p: int) -> int:
        return 1 + self.below(p - 1)

    def unit_triple(self, p: int):
        return (self.unit(p), self.unit(p), self.unit(p))


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def emit(records, fields, fmt: str, out, seed=None):
    """Write records as CSV (fixed header + schema_version) or JSONL."""
    if fmt == "csv":
        if seed is not None:
            out.write(f"# seed={seed}\n")
        out.write(",".join(fields + ["schema_version"]) + "\n")
        for rec in records:
            row = [_fmt(rec.get(f)) for f in fields] + [str(SCHEMA_VERSION)]
            out.write(",".join(row) + "\n")
    elif fmt == "jsonl":
        for rec in records:
            doc = {f: rec.get(f) for f in fields}
            doc["schema_version"] = SCHEMA_VERSION
            if seed is not None:
                doc["seed"] = seed
            out.write(json.dumps(doc) + "\n")
    else:
        raise ValidationError(f"unknown format {fmt!r}")


def _parse_coeffs(text: str):
    try:
        parts = [int(x) for x in text.split(",")]
    except ValueError:
        raise ValidationError(f"coeffs must be three comma-separated integers, got {text!r}")
    if len(parts) != 3:
        raise ValidationError(f"coeffs must have exactly three entries, got {text!r}")
    return tuple(parts)


def _parse_n_range(text: str):
    if ".." in text:
        lo, hi = text.split("..", 1)
        try:
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise ValidationError(f"bad n range {text!r}")
        if lo > hi:
            raise ValidationError(f"empty n range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(text)]
    except ValueError:
        raise ValidationError(f"bad n value {text!r}")


def _modulus(p: int, n: int) -> PrimePowerModulus:
    try:
        return PrimePowerModulus(p, n)
    except ValueError as exc:
        raise ValidationError(str(exc))


def _weight(args) -> WeightSpec:
    kind = "sharp" if getattr(args, "sharp", False) else "gaussian"
    radius = getattr(args, "truncation_radius", None)
    try:
        if kind == "sharp":
            return WeightSpec("sharp", 1.0)
        return WeightSpec("gaussian", radius if radius is not None else 6.0)
    except ValueError as exc:
        raise ValidationError(str(exc))


def _budget_gate(args, units: int):
    budget = args.budget
    if units > budget:
        raise ValidationError(
            f"estimated work {units} pair visits exceeds the budget {budget}; "
            "raise --budget or shrink the request"
        )
    if args.dry_run:
        print(f"dry-run: estimated work units = {units} (budget {budget})")
        return True
    return False


def _coeff_list(args, rng, need_p):
    """Coefficient triples from --coeffs or --sample."""
    if args.coeffs:
        return [_parse_coeffs(args.coeffs)]
    if args.sample:
        return [rng.unit_triple(need_p) for _ in range(args.sample)]
    raise ValidationError("provide --coeffs or --sample")


# ----------------------------------------------------------------- handlers

def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ValidationError(f"missing required parameter(s): {flags}")


def _run_count(args, rng):
    _require(args, "p", "n", "N")
    pp = _modulus(args.p, args.n)
    w = _weight(args)
    if args.N is None or args.N < 0:
        raise ValidationError("count requires --N >= 0")
    radius = w.truncation_radius if w.kind == "gaussian" else 1.0
    units = int(radius * args.N) ** 2
    if _budget_gate(args, units):
        return []
    rows = []
    for coeffs in _coeff_list(args, rng, args.p):
        if w.kind == "sharp":
            obs = census.count_sharp(coeffs, pp, int(args.N), workers=args.workers)
        else:
            obs = census.count_smoothed(coeffs, pp, args.N, w, workers=args.workers)
        rows.append(
            dict(p=pp.p, n=pp.n, q=pp.q, a1=coeffs[0], a2=coeffs[1], a3=coeffs[2],
                 N=args.N, weight=w.kind, observed=obs)
        )
    return rows


def _run_predict(args, rng):
    _require(args, "p", "n", "N")
    pp = _modulus(args.p, args.n)
    w = _weight(args)
    if args.N is None:
        raise ValidationError("predict requires --N")
    if _budget_gate(args, 0):
        return []
    rows = []
    for coeffs in _coeff_list(args, rng, args.p):
        pred = census.predict_main_term(coeffs, pp, args.N, w)
        rows.append(
            dict(p=pp.p, n=pp.n, q=pp.q, a1=coeffs[0], a2=coeffs[1], a3=coeffs[2],
                 N=args.N, weight=w.kind, predicted=pred,
                 vacuous=census.prediction_is_vacuous(coeffs, pp.p))
        )
    return rows


def _run_scan(args, rng):
    _require(args, "p")
    if args.n_range is None:
        raise ValidationError("scan requires --n like 3..6")
    n_values = _parse_n_range(args.n_range)
    w = _weight(args)
    units = census.estimate_scan_work(args.p, n_values, args.theta, w)
    triples = _coeff_list(args, rng, args.p)
    if _budget_gate(args, units * len(triples)):
        return []
    rows = []
    for coeffs in triples:
        try:
            reports = census.asymptotic_scan(
                coeffs, args.p, n_values, args.theta, w,
                workers=args.workers, budget=args.budget,
            )
        except ValueError as exc:
            raise ValidationError(str(exc))
        for rep in reports:
            rows.append(
                dict(p=rep.modulus.p, n=rep.modulus.n, q=rep.modulus.q,
                     N=rep.box_half_width, theta=args.theta,
                     observed=rep.observed, predicted=rep.predicted, ratio=rep.ratio)
            )
    return rows


def _run_smallest(args, rng):
    _require(args, "p", "n")
    pp = _modulus(args.p, args.n)
    rows = []
    for coeffs in _coeff_list(args, rng, args.p):
        cp = float(modcore.main_constant(coeffs, pp.p))
        m_est = int(math.ceil((pp.q / max(cp, 0.05)) ** (1 / 3))) if cp > 0 else 0
        if _budget_gate(args, 4 * m_est**3):
            return []
        found = census.smallest_solution(coeffs, pp)
        if found is None:
            # m = 0 encodes absence at this boundary only
            rows.append(dict(p=pp.p, n=pp.n, q=pp.q, a1=coeffs[0], a2=coeffs[1],
                             a3=coeffs[2], m=0, x1=None, x2=None, x3=None))
        else:
            m, (x1, x2, x3) = found
            rows.append(dict(p=pp.p, n=pp.n, q=pp.q, a1=coeffs[0], a2=coeffs[1],
                             a3=coeffs[2], m=m, x1=x1, x2=x2, x3=x3))
    return rows


def _run_param_check(args, rng):
    _require(args, "p", "n")
    pp = _modulus(args.p, args.n)
    if _budget_gate(args, pp.q * pp.p):
        return []
    rows = []
    for coeffs in _coeff_list(args, rng, args.p):
        tag = conic.case_tag(coeffs, pp.p)
        if tag == "mixed":
            coeffs_n, _ = conic.normalize_to_case1(coeffs, pp.p)
            fam = conic.build_case1_family(coeffs_n, pp)
            reference = conic.enumerate_pair_solutions(coeffs_n, pp, units_only=True)
            expected = pp.q // pp.p * (pp.p - modcore.s_p(coeffs_n, pp.p))
        elif tag == conic.CASE_I:
            fam = conic.build_case1_family(coeffs, pp)
            reference = conic.enumerate_pair_solutions(coeffs, pp, units_only=True)
            expected = pp.q // pp.p * (pp.p - modcore.s_p(coeffs, pp.p))
        else:
            fam = conic.build_case2_family(coeffs, pp)
            reference = conic.enumerate_pair_solutions(coeffs, pp, units_only=False)
            expected = pp.q + pp.q // pp.p
        rows.append(
            dict(p=pp.p, n=pp.n, q=pp.q, a1=coeffs[0], a2=coeffs[1], a3=coeffs[2],
                 case=tag, family_size=len(fam.pairs), expected_size=expected,
                 matches_enumeration=fam.pairs == frozenset(reference))
        )
    return rows


def _run_expsum_check(args, rng):
    _require(args, "p", "n")
    pp = _modulus(args.p, args.n)
    count = args.count or 20
    if _budget_gate(args, count * pp.q):
        return []
    rows = []
    made = 0
    while made < count:
        source = ("case1", "case2", "poly")[rng.below(3)]
        coeffs = rng.unit_triple(pp.p)
        # k1, k2 share the exact power of p so the closed form applies
        shift = pp.p ** rng.below(max(1, pp.n - 1))
        k1 = shift * (rng.unit(pp.q) * pp.p + rng.unit(pp.p)) % pp.q
        k2 = shift * (rng.unit(pp.q) * pp.p + rng.unit(pp.p)) % pp.q
        x3 = rng.unit(pp.p)
        alpha = None
        tag = conic.case_tag(coeffs, pp.p)
        try:
            if source == "case1":
                if tag != conic.CASE_I:
                    continue
                b = conic.case1_slope_base(coeffs, pp)
                want = expsum.direct_E_case1(k1, k2, x3, coeffs, b, pp)
                got = expsum.closed_form_E(k1, k2, x3, coeffs, pp, conic.CASE_I)
            elif source == "case2":
                if tag != conic.CASE_II:
                    continue
                base = conic.find_base_point(coeffs, pp)
                want = expsum.direct_E_case2(k1, k2, x3, coeffs, base, pp)
                got = expsum.closed_form_E(k1, k2, x3, coeffs, pp, conic.CASE_II, base=base)
            else:
                coeffs_poly = tuple(1 + rng.below(pp.q - 1) for _ in range(4))
                f = expsum.IntRationalFunction(coeffs_poly)
                alpha = rng.below(pp.p)
                want = expsum.direct_S_alpha(f, alpha, pp)
                got = expsum.cochrane_evaluate(f, alpha, pp)
            status = "ok"
            rel = abs(got - want) / max(1.0, abs(want))
        except expsum.UnsupportedCaseError:
            status = "fallback-direct" if args.fallback_direct else "unsupported"
            rel = None
        except ValueError:
            status, rel = "invalid", None
        made += 1
        rows.append(
            dict(p=pp.p, n=pp.n, q=pp.q, source=source, k1=k1, k2=k2, x3=x3,
                 alpha=alpha, status=status, rel_err=rel)
        )
    return rows


def _run_dioph(args, rng):
    _require(args, "mode")
    mode = args.mode
    if _budget_gate(args, 10**6):
        return []
    if mode == "equation":
        _require(args, "A", "B", "C", "x")
        try:
            inst = dioph.BinaryQuadraticInstance(args.A, args.B, args.C, args.x)
        except ValueError as exc:
            raise ValidationError(str(exc))
        return [dict(mode=mode, inputs=f"A={args.A};B={args.B};C={args.C};x={args.x}",
                     result=dioph.count_equation_solutions(inst))]
    if mode == "approx":
        _require(args, "beta", "q", "Q")
        ap = dioph.dirichlet_approx(args.beta, args.q, args.Q)
        return [dict(mode=mode, inputs=f"beta={args.beta};q={args.q};Q={args.Q}",
                     result=f"a={ap.a};r={ap.r}")]
    if mode == "countf":
        _require(args, "b1", "b2", "X", "q")
        val = dioph.count_F(args.b1, args.b2, args.X, args.q)
        return [dict(mode=mode, inputs=f"b1={args.b1};b2={args.b2};X={args.X};q={args.q}",
                     result=val)]
    if mode == "reduce":
        _require(args, "b1", "b2", "b3", "q", "Q")
        rc = dioph.reduce_coefficients(args.b1, args.b2, args.b3, args.q, args.Q)
        return [dict(mode=mode,
                     inputs=f"b1={args.b1};b2={args.b2};b3={args.b3};q={args.q};Q={args.Q}",
                     result=f"g1={rc.g1};g2={rc.g2};r1={rc.r1};r2={rc.r2};a1={rc.a1};a2={rc.a2}")]
    if mode == "params":
        _require(args, "q", "M")
        try:
            R, Q = dioph.choose_parameters(args.q, args.M)
        except ValueError as exc:
            raise ValidationError(str(exc))
        return [dict(mode=mode, inputs=f"q={args.q};M={args.M}", result=f"R={R};Q={Q}")]
    raise ValidationError(f"unknown dioph mode {mode!r}")


def _run_selftest(args, rng):
    rows = []

    def check(name, fn):
        try:
            ok = bool(fn())
        except Exception:
            ok = False
        rows.append(dict(check=name, status="pass" if ok else "FAIL"))
        return ok

    pp72 = PrimePowerModulus(7, 2)
    check("prime-level-law", lambda: all(
        census.count_mod_p(c, 7) == 6 * (7 - modcore.s_p(c, 7))
        for c in [(1, 1, 1), (1, 1, 6), (2, 3, 5), (1, 2, 3)]))
    check("unit-circle", lambda: census.count_unit_circle(1, 1, PrimePowerModulus(3, 2)) == 12)
    check("gauss-sum", lambda: abs(abs(modcore.gauss_sum(49)) - 7.0) < 1e-9)
    check("case1-coverage", lambda: conic.build_case1_family((1, 1, -1), pp72).pairs
          == frozenset(conic.enumerate_pair_solutions((1, 1, -1), pp72)))
    check("case2-coverage", lambda: len(conic.build_case2_family((1, 1, 1),
          PrimePowerModulus(3, 2)).pairs) == 12)
    check("hensel-lifts", lambda: len(conic.lift_triple((3, 4, 5), (1, 1, -1),
          PrimePowerModulus(7, 1))) == 49)
    check("smallest-solution", lambda: census.smallest_solution((1, 1, -1), pp72)[0] == 5)
    check("cochrane", lambda: abs(
        expsum.cochrane_evaluate(expsum.IntRationalFunction((0, 0, 1)), 0, PrimePowerModulus(7, 3))
        - expsum.direct_S_alpha(expsum.IntRationalFunction((0, 0, 1)), 0, PrimePowerModulus(7, 3))
    ) < 1e-6)
    check("poisson", lambda: census.poisson_selfcheck(WeightSpec(), 10.5) < 1e-9)
    check("dirichlet", lambda: dioph.dirichlet_approx(7, 10, 3).r == 3)
    if not all(r["status"] == "pass" for r in rows):
        raise AssertionError("selftest failed")
    return rows


HANDLERS = {
    "count": _run_count,
    "predict": _run_predict,
    "scan": _run_scan,
    "smallest": _run_smallest,
    "param-check": _run_param_check,
    "expsum-check": _run_expsum_check,
    "dioph": _run_dioph,
    "selftest": _run_selftest,
}


def _build_parser():
    top = argparse.ArgumentParser(prog="conic-lab")
    sub = top.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with defaults for these flags")
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--workers", type=int,
                        default=int(os.environ.get("CONIC_LAB_THREADS", "1")))
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        sp.add_argument("--dry-run", action="store_true")
        sp.add_argument("--output", help="file path; default stdout")
        sp.add_argument("--format", choices=["csv", "jsonl"], default="csv")

    def coeffy(sp, with_n=True):
        sp.add_argument("--p", type=int)
        if with_n:
            sp.add_argument("--n", type=int)
        sp.add_argument("--coeffs", help="a1,a2,a3")
        sp.add_argument("--sample", type=int, help="number of sampled coefficient triples")

    sp = sub.add_parser("count", help="sharp or smoothed box count")
    coeffy(sp)
    sp.add_argument("--N", type=float)
    sp.add_argument("--sharp", action="store_true")
    sp.add_argument("--truncation-radius", type=float, dest="truncation_radius")
    common(sp)

    sp = sub.add_parser("predict", help="main-term prediction")
    coeffy(sp)
    sp.add_argument("--N", type=float)
    sp.add_argument("--sharp", action="store_true")
    common(sp)

    sp = sub.add_parser("scan", help="observed/predicted ratios over an n range")
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", dest="n_range", help="e.g. 3..6")
    sp.add_argument("--theta", type=float, default=0.62)
    sp.add_argument("--coeffs")
    sp.add_argument("--sample", type=int)
    sp.add_argument("--sharp", action="store_true")
    sp.add_argument("--truncation-radius", type=float, dest="truncation_radius")
    common(sp)

    sp = sub.add_parser("smallest", help="minimal max-norm solution")
    coeffy(sp)
    common(sp)

    sp = sub.add_parser("param-check", help="parametrization coverage check")
    coeffy(sp)
    common(sp)

    sp = sub.add_parser("expsum-check", help="closed forms vs direct sums")
    sp.add_argument("--p", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--fallback-direct", action="store_true", dest="fallback_direct")
    common(sp)

    sp = sub.add_parser("dioph", help="Diophantine toolkit")
    sp.add_argument("--mode",
                    choices=["equation", "approx", "countf", "reduce", "params"])
    for flag in ("A", "B", "C", "x", "beta", "q", "Q", "b1", "b2", "b3", "X", "M"):
        sp.add_argument(f"--{flag}", type=int)
    common(sp)

    sp = sub.add_parser("selftest", help="run the bundled invariant checks")
    common(sp)
    return top


def _apply_config(args):
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"config {args.config}: {exc}")
        for key, value in doc.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise ValidationError(f"config {args.config}: unknown field {key!r}")
            # flags explicitly given on the command line win
            if attr in args._explicit:
                continue
            setattr(args, attr, value)
    return args


def run(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    args._explicit = {
        a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")
    }
    try:
        args = _apply_config(args)
        rng = Splitmix64(args.seed)
        records = HANDLERS[args.command](args, rng)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:
        print(f"internal assertion failure: {exc}", file=sys.stderr)
        return 1
    if args.dry_run:
        return 0
    seed = args.seed if getattr(args, "sample", None) else None
    if args.output:
        try:
            with open(args.output, "w") as fh:
                emit(records, FIELDS[args.command], args.format, fh, seed=seed)
        except OSError as exc:
            print(f"error writing {args.output}: {exc}", file=sys.stderr)
            return 2
    else:
        emit(records, FIELDS[args.command], args.format, sys.stdout, seed=seed)
    return 0


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()

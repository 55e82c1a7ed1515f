"""Command-line interface: ``selmerstab <command> [action] [flags]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from fractions import Fraction
from pathlib import Path

from . import counting, groups
from .curve import ApCache, CurveQ, has_good_reduction, trace_of_frobenius
from .errors import InvalidInputError, SelmerStabError
from .fields import (
    AbelianFieldDesc,
    discriminant_abs,
    inertial_degree,
    ramified_primes,
    scholz_check,
    splits_completely,
)
from .modarith import is_prime, sieve_primes
from .selmer import (
    SelmerSpec,
    certify_selmer_vanishing,
    dual_dimension,
    enumerate_W_T,
    find_S0,
    vs_dimension,
    wiles_difference,
)
from .sieve import SearchSpec, TEParams, empirical_density, find_primes, in_TE, surjectivity_heuristic

log = logging.getLogger(__name__)


class CliError(SelmerStabError):
    kind = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _q(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _ints(text: str | None) -> tuple[int, ...]:
    if not text:
        return ()
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError as exc:
        raise InvalidInputError(f"expected a comma list of integers, got {text!r}") from exc


def _emit(obj, args) -> None:
    if isinstance(obj, str):
        sys.stdout.write(obj if obj.endswith("\n") else obj + "\n")
    else:
        sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _curve(args) -> CurveQ:
    if not args.curve:
        raise CliError("--curve is required")
    return CurveQ.parse(args.curve)


def read_curve_list(path: str) -> list[tuple[str, CurveQ]]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "label":
                continue
            if len(row) != 6:
                raise InvalidInputError(f"curve-list row needs label and 5 integers: {row}")
            out.append((row[0], CurveQ(*(int(x) for x in row[1:]))))
    return out


def _curves(args) -> list[tuple[str, CurveQ]]:
    if getattr(args, "curve_list", None):
        return read_curve_list(args.curve_list)
    E = _curve(args)
    return [(E.key, E)]


def _ell(args) -> int:
    ell = args.ell
    if not is_prime(ell):
        raise InvalidInputError(f"ell={ell} is not prime")
    if ell < 5 and not args.allow_small_ell:
        raise InvalidInputError("ell >= 5 is required (use --allow-small-ell for oracle testing)")
    return ell


def _desc(args, ell: int | None = None) -> AbelianFieldDesc | None:
    if not args.desc:
        return None
    d = AbelianFieldDesc.parse(args.desc)
    if ell is not None and d.ell != ell:
        raise InvalidInputError(f"descriptor ell={d.ell} differs from --ell {ell}")
    return d


def _cache(args, E):
    return ApCache(args.cache_dir, E) if args.cache_dir else None


# --- commands -----------------------------------------------------------------------


def cmd_ap(args):
    rows = []
    for label, E in _curves(args):
        cache = _cache(args, E)
        for p in sieve_primes(args.bound):
            if has_good_reduction(E, p):
                rows.append((label, p, trace_of_frobenius(E, p, cache)))
    if args.json:
        return [{"curve": l, "p": p, "ap": a} for l, p, a in rows]
    return _csv(["curve", "p", "ap"], rows)


def cmd_sieve(args):
    E = _curve(args)
    ell = _ell(args)
    params = TEParams(E, ell, _desc(args, ell), cache=_cache(args, E))
    rows = []
    for p in sieve_primes(args.bound):
        m = in_TE(p, params)
        rows.append([p, int(m.member)] + ["" if v is None else int(v) for v in m.clauses.values()]
                    + ["" if m.ap is None else m.ap])
    if args.json:
        return [dict(zip(["p", "member", "a", "b", "c", "d", "ap"], r)) for r in rows]
    return _csv(["p", "member", "a_p_ne_ell", "b_good", "c_split", "d_trace_ne_2", "ap"], rows)


def cmd_density(args):
    ell = _ell(args)
    out = []
    for label, E in _curves(args):
        params = TEParams(E, ell, _desc(args, ell), cache=_cache(args, E))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = empirical_density(params, args.bound, workers=args.workers,
                                    check_surjectivity=not args.assert_surjective)
        d = rep.to_json()
        d.update({"curve": label, "ell": ell, "sigma": list(E.sigma(ell)),
                  "surjectivity_asserted": bool(args.assert_surjective)})
        out.append(d)
    return out[0] if len(out) == 1 else out


def _search_spec(args) -> SearchSpec:
    targets = []
    for item in (args.target or []):
        v, c = item.split(":")
        targets.append((int(v), int(c)))
    split = tuple(AbelianFieldDesc.parse(t) for t in (args.split_in or []))
    return SearchSpec(
        N=args.N,
        in_te=args.in_te,
        avoid=frozenset(_ints(args.avoid)),
        split_in=split,
        symbol_targets=tuple(targets),
        candidates=_ints(args.candidates) or None,
    )


def cmd_find_prime(args):
    E = _curve(args)
    ell = _ell(args)
    res = find_primes(_search_spec(args), TEParams(E, ell, _desc(args, ell)), count=args.count, bound=args.bound)
    return {"primes": res.primes, "scanned": res.scanned, "hit_rate": res.hit_rate,
            "reference_density": _q(res.reference_density), "exhausted": res.exhausted, "bound": res.bound}


def cmd_field(args):
    d = _desc(args)
    if d is None:
        raise CliError("--desc is required")
    if args.action == "disc":
        return {"disc": discriminant_abs(d), "degree": d.degree}
    if args.action == "ramified":
        return {"ramified": list(ramified_primes(d))}
    if args.action == "split":
        out = {}
        for r in _ints(args.primes):
            out[str(r)] = {"inertial_degree": inertial_degree(d, r)} if r in ramified_primes(d) \
                else {"splits": splits_completely(d, r)}
        return out
    if args.action == "scholz":
        rep = scholz_check(d, args.N)
        return {"N": rep.N, "holds": rep.holds, "failures": rep.failures}
    raise CliError(f"unknown field action {args.action!r}")


def _selmer_spec(args) -> SelmerSpec:
    ell = _ell(args)
    Z = set(_ints(args.Z))
    nr = set(_ints(args.nr))
    if args.curve:
        Z |= set(_curve(args).sigma(ell)) - nr
    if ell not in nr:
        Z.add(ell)
    return SelmerSpec(ell, _ints(args.S), tuple(Z), tuple(nr), args.coefficient)


def cmd_selmer(args):
    a = args.action
    if a in ("vs-dim", "dual-dim", "wiles", "enumerate-wt"):
        spec = _selmer_spec(args)
        base = {"S": list(spec.S), "Z": list(spec.Z_part), "nr": list(spec.nr), "ell": spec.ell}
        if a == "wiles":
            return {**base, "wiles": wiles_difference(spec)}
        if a == "vs-dim":
            d, basis = vs_dimension(spec)
            return {**base, "dim": d, "basis": [dict(v.coefficients) for v in basis]}
        if a == "dual-dim":
            d, basis = dual_dimension(spec)
            return {**base, "dim": d, "basis": [dict(v.exponents) for v in basis]}
        W = enumerate_W_T(spec, _ints(args.T))
        return {**base, "T": list(_ints(args.T)), "count": len(W),
                "elements": [dict(w.coefficients) for w in sorted(W, key=lambda w: w.coefficients)]}
    E = _curve(args)
    ell = _ell(args)
    if a == "find-s0":
        Z = set(_ints(args.Z)) | set(E.sigma(ell))
        res = find_S0(E, ell, _desc(args, ell), Z, args.bound)
        return {"S0": list(res.S0), "complete": res.complete, "dual_dimension": res.dual_dimension,
                "failure": res.failure, "Z": sorted(Z), "steps": res.steps}
    if a == "certify":
        d = _desc(args, ell)
        if d is None:
            raise CliError("--desc is required")
        cert = certify_selmer_vanishing(E, ell, d, args.assert_selmer_zero,
                                        surjectivity_assertion=args.assert_surjective)
        return cert.to_json()
    raise CliError(f"unknown selmer action {a!r}")


def cmd_count(args):
    a = args.action
    if a == "malle":
        ref = counting.malle_reference(args.ell, args.n)
        return {"a": _q(ref.a), "delta": _q(counting.delta(args.ell, args.n)), "bracket": ref.description}
    ell = _ell(args)
    if args.pool:
        pool = counting.PrimePool(_ints(args.pool), ell)
        S0: tuple[int, ...] = _ints(args.S0)
        spec = None
    else:
        E = _curve(args)
        res = find_S0(E, ell, None, E.sigma(ell), 10**6)
        S0 = res.S0
        spec = SelmerSpec(ell, S0, E.sigma(ell))
        pool = counting.PrimePool(tuple(p for p in sieve_primes(args.bound)
                                        if p not in set(S0) | set(E.sigma(ell)) and in_TE(p, TEParams(E, ell))), ell)
    Xs = _ints(args.X) or (args.bound,)
    if a == "partial-sum":
        rows = [(X, counting.partial_sum(pool, X), None) for X in Xs]
        return counting.reports_csv(rows) if args.csv else [{"X": X, "S": s} for X, s, _ in rows]
    dim = vs_dimension(spec)[0] if spec is not None else 0
    s0 = counting.S0Data(S0, dim, spec)
    c2 = Fraction(args.c2) if args.c2 is not None else None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        reports = [counting.count_lower_bound_M(pool, s0, X, args.n, ell, c2) for X in Xs]
    if a == "lower":
        if args.csv:
            return counting.reports_csv((r.X, counting.partial_sum(pool, r.X), r.value) for r in reports)
        return [r.to_json() for r in reports]
    if a == "fit":
        return json.loads(counting.fit_json(counting.fit_exponents(reports), ell, args.n))
    raise CliError(f"unknown count action {a!r}")


def _group(args):
    if args.table:
        return groups.GroupTable.read(args.table, args.ell)
    corpus = groups.corpus(args.ell)
    if args.name not in corpus:
        raise InvalidInputError(f"unknown corpus group {args.name!r}; have {sorted(corpus)}")
    return corpus[args.name]


def cmd_group(args):
    G = _group(args)
    ell = args.ell
    a = args.action
    if a == "h2":
        r = groups.h2_dimension(G, ell)
        return {"order": G.order, "h2": r.dimension, "dim_Z2": r.dim_cocycles, "dim_B2": r.dim_coboundaries}
    if a == "filtration":
        return {"chain": [sorted(H) for H in groups.central_filtration(G, ell)]}
    if a == "malle-invariant":
        idx, aG = groups.malle_invariant(G)
        return {"min_index": idx, "a": _q(aG)}
    if a == "extension-class":
        z = args.kernel
        if z is None:
            z = min(x for x in groups.center(G) if x and G.element_order(x) == ell)
        K = groups.generate(G, [z])
        Q, pi = groups.quotient(G, K)
        ext = groups.extension_class(G, Q, pi, ell)
        coords = None if ext.cocycle.h2_coordinates is None else [int(c) for c in ext.cocycle.h2_coordinates]
        return {"kernel_generator": z, "quotient_order": Q.order, "split": ext.is_split, "h2_coordinates": coords}
    raise CliError(f"unknown group action {a!r}")


def cmd_selftest(args):
    from .acceptance import run_all

    results = run_all(verbose=True)
    failed = [r.number for r in results if not r.passed]
    return {"passed": len(results) - len(failed), "failed": failed}, (1 if failed else 0)


# --- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--curve", help="a1,a2,a3,a4,a6 (or a,b for y^2 = x^3 + ax + b)")
    common.add_argument("--curve-list", help="CSV of label,a1,a2,a3,a4,a6")
    common.add_argument("--ell", type=int, default=5)
    common.add_argument("--bound", type=int, default=10_000)
    common.add_argument("--N", type=int, default=1)
    common.add_argument("--desc", help='field descriptor, e.g. "ell=5; gen: 11^1"')
    common.add_argument("--S")
    common.add_argument("--Z")
    common.add_argument("--T")
    common.add_argument("--nr", help="primes with the unramified condition")
    common.add_argument("--coefficient", choices=["trivial", "dual"], default="trivial")
    common.add_argument("--c2")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cache-dir")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    common.add_argument("--allow-small-ell", action="store_true")
    common.add_argument("--assert-selmer-zero", action="store_true")
    common.add_argument("--assert-surjective", action="store_true")
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="selmerstab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("ap", parents=[common], help="trace table").set_defaults(fn=cmd_ap)
    sub.add_parser("sieve", parents=[common], help="T_E membership CSV").set_defaults(fn=cmd_sieve)
    sub.add_parser("density", parents=[common], help="density of T_E").set_defaults(fn=cmd_density)
    fp = sub.add_parser("find-prime", parents=[common], help="multi-condition prime search")
    fp.add_argument("--in-te", action="store_true")
    fp.add_argument("--avoid")
    fp.add_argument("--split-in", action="append")
    fp.add_argument("--target", action="append", help="v:c, ind_p(v) = c")
    fp.add_argument("--candidates")
    fp.add_argument("--count", type=int, default=1)
    fp.set_defaults(fn=cmd_find_prime)
    f = sub.add_parser("field", parents=[common], help="abelian field descriptors")
    f.add_argument("action", choices=["disc", "ramified", "split", "scholz"])
    f.add_argument("--primes")
    f.set_defaults(fn=cmd_field)
    s = sub.add_parser("selmer", parents=[common], help="Selmer dimensions and certificates")
    s.add_argument("action", choices=["vs-dim", "dual-dim", "wiles", "find-s0", "enumerate-wt", "certify"])
    s.set_defaults(fn=cmd_selmer)
    c = sub.add_parser("count", parents=[common], help="partial sums, lower bounds, fits")
    c.add_argument("action", choices=["partial-sum", "lower", "fit", "malle"])
    c.add_argument("--pool")
    c.add_argument("--S0")
    c.add_argument("--X", help="comma list of thresholds")
    c.add_argument("--n", type=int, default=1)
    c.set_defaults(fn=cmd_count)
    g = sub.add_parser("group", parents=[common], help="finite ell-group computations")
    g.add_argument("action", choices=["h2", "filtration", "extension-class", "malle-invariant"])
    g.add_argument("--table")
    g.add_argument("--name", default="Heis5")
    g.add_argument("--kernel", type=int)
    g.set_defaults(fn=cmd_group)
    sub.add_parser("selftest", parents=[common], help="run the acceptance suite").set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        out = args.fn(args)
        code = 0
        if isinstance(out, tuple):
            out, code = out
        _emit(out, args)
        return code
    except SelmerStabError as exc:
        err = {"error": exc.kind, "message": str(exc)}
        if getattr(exc, "predicted", None) is not None:
            err["predicted"] = exc.predicted
        sys.stdout.write(json.dumps(err, sort_keys=True) + "\n")
        return 2
    except (ValueError, OSError) as exc:
        sys.stdout.write(json.dumps({"error": "invalid-input", "message": str(exc)}, sort_keys=True) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())

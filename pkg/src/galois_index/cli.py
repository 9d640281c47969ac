"""Command line entry point.

    galois-index verify-cp [--genus0 F] [--genus1 F] [--allow-partial]
    galois-index reproduce --target i0|i1|final [--cache DIR] [--jobs K]
    galois-index inspect (--gamma LABEL | --group NAME_OR_FILE) QUERY [--prime P]

Reports are JSON on stdout.  Exit codes: 0 ok, 2 data error, 3 result
mismatch, 4 resource failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from . import candidates as cand
from . import classpoly
from . import ec_db
from . import index_calc as ic
from . import modcurve_count as mc
from . import pipeline as pl
from .congruence import (ClassificationError, build_subgroup, data_dir, parse_classification)

SCHEMA_VERSION = 1
CACHE_ENV = "GALOIS_INDEX_CACHE"

EXIT_OK, EXIT_DATA, EXIT_MISMATCH, EXIT_RESOURCE = 0, 2, 3, 4


class DataProblem(Exception):
    pass


def _digest(paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        p = Path(p)
        if p.exists():
            h.update(p.name.encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _report(command: str, target: str, inputs: list, rows, summary) -> dict:
    return {"schema_version": SCHEMA_VERSION, "version": __version__, "command": command,
            "target": target, "inputs_digest": _digest(inputs), "rows": rows, "summary": summary}


def _paths(args):
    d = Path(args.data_dir) if args.data_dir else data_dir()
    g0 = Path(args.genus0) if getattr(args, "genus0", None) else d / "classification" / "genus0.txt"
    g1 = Path(args.genus1) if getattr(args, "genus1", None) else d / "classification" / "genus1.txt"
    return d, g0, g1


def _cache_dir(args):
    c = args.cache or os.environ.get(CACHE_ENV)
    return Path(c) if c else None


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


# verify-cp

def cmd_verify_cp(args) -> int:
    _, g0, g1 = _paths(args)
    rows, failures, counts = [], [], {}
    for genus, path in ((0, g0), (1, g1)):
        try:
            recs = parse_classification(path)
        except (OSError, ClassificationError) as e:
            if genus == 1 and args.allow_partial:
                _log(f"warning: genus 1 file unusable ({e}); checking genus 0 only")
                counts["genus1"] = None
                continue
            _log(f"error: {e}")
            return EXIT_DATA
        if genus == 1 and not recs and args.allow_partial:
            _log("warning: genus 1 file is empty; checking genus 0 only")
        counts[f"genus{genus}"] = len(recs)
        for r in recs:
            row = {"label": r.label, "level": r.level, "index": r.index, "genus": r.genus}
            try:
                cs = build_subgroup(r)
                mu, e2, e3, einf, g = cs.invariants
                row.update({"e2": e2, "e3": e3, "cusps": einf, "computed_genus": g})
                ok = g == r.genus and mu == r.index
            except (ClassificationError, ArithmeticError, ValueError) as e:
                row["error"] = str(e)
                ok = False
            row["ok"] = ok
            if not ok:
                failures.append(r.label)
            rows.append(row)
    summary = {"counts": counts, "failures": failures}
    _emit(_report("verify-cp", "classification", [g0, g1], rows, summary), args.output)
    if failures:
        _log("failing records: " + " ".join(failures))
        return EXIT_DATA
    return EXIT_OK


# reproduce

def cmd_reproduce(args) -> int:
    d, g0, g1 = _paths(args)
    cache = _cache_dir(args)
    if cache:
        classpoly.use_cache(cache)
    try:
        recs0 = parse_classification(g0)
        recs1 = parse_classification(g1) if args.target != "i0" else []
    except (OSError, ClassificationError) as e:
        _log(f"error: {e}")
        return EXIT_DATA
    t0 = time.time()
    try:
        res0 = pl.run_records(recs0, cache, args.jobs)
        s0 = pl.genus0_summary(res0)
        _log(f"genus 0 done in {time.time() - t0:.0f}s")
        summary = {"genus0": s0}
        rows = [r for res in res0 for r in res["rows"]]
        got = set(s0["I_prime"])
        mismatch = {}
        if s0["I_prime"] != s0["I_double_prime"]:
            mismatch["squeeze"] = {"I_prime_only": sorted(set(s0["I_prime"]) - set(s0["I_double_prime"]))}
        if args.target in ("i1", "final"):
            res1 = pl.run_records(recs1, cache, args.jobs)
            s1 = pl.genus0_summary(res1)
            s1 = {k: v for k, v in s1.items() if k not in ("I_prime", "I_double_prime")}
            store_dir = d / "ecdata"
            try:
                jac = pl.run_genus1(recs1, res1, store_dir, got, cache, args.jobs)
            except ec_db.CoverageError as e:
                _log(f"error: {e}")
                return EXIT_DATA
            _log(f"genus 1 done in {time.time() - t0:.0f}s")
            s1.update(jac)
            summary["genus1"] = s1
            rows += [r for res in res1 for r in res["rows"]]
        if args.target == "i0":
            result, expected = sorted(got), pl.EXPECTED_I0
        elif args.target == "i1":
            result, expected = summary["genus1"]["I_triple_prime_minus_I0"], pl.EXPECTED_I1
        else:
            result = sorted(got | set(summary["genus1"]["I_triple_prime_minus_I0"]))
            expected = pl.EXPECTED_FINAL
        summary["result"] = result
        if set(result) != set(expected):
            mismatch["set"] = {"missing": sorted(set(expected) - set(result)),
                               "unexpected": sorted(set(result) - set(expected))}
        summary["mismatch"] = mismatch
    except (ic.IndexError_, MemoryError) as e:
        _log(f"resource failure: {e}")
        return EXIT_RESOURCE
    finally:
        if classpoly._DISK is not None:
            classpoly._DISK.flush()
    _emit(_report("reproduce", args.target, [g0, g1], rows, summary), args.output)
    if mismatch:
        _log("mismatch: " + json.dumps(mismatch, sort_keys=True))
        return EXIT_MISMATCH
    return EXIT_OK


# inspect

BUILTIN_GROUPS = ("borel11", "G1", "G2", "G3", "G4")


def _load_group(name: str):
    if name.startswith("borel") and name[5:].isdigit():
        return cand.borel(int(name[5:]))
    if name in ("G1", "G2", "G3", "G4"):
        N, tab = pl.reference_group(name)
        return cand.OpenGroup(N, tab.gens.gens, name)
    p = Path(name)
    if not p.exists():
        raise DataProblem(f"unknown group {name!r}; give a file or one of {', '.join(BUILTIN_GROUPS)}")
    data = json.loads(p.read_text())
    N = int(data["level"])
    gens = [tuple(x for row in g for x in row) if isinstance(g[0], list) else tuple(g) for g in data["gens"]]
    return cand.OpenGroup(N, gens, p.stem)


def _find_record(args, label: str):
    _, g0, g1 = _paths(args)
    for path in (g0, g1):
        for r in parse_classification(path):
            if r.label == label:
                return r
    raise DataProblem(f"unknown label {label}")


def _group_row(g, query: str, args, store_dir) -> dict:
    row = {"N": g.N, "real": bool(g.real)}
    if query == "index":
        cert = ic.profinite_index(g.generators(), g.N)
        row.update({"n": cert.n, "index": cert.index, "certificate_level": cert.M,
                    "chain": [list(t) for t in cert.tried]})
    elif query == "cusps":
        from .modring import prime_divisors
        row["cusps"] = {"geometric": g.cusps("geometric"), "Q": g.cusps("Q"),
                        "Q_p": {str(p): g.cusps("Q_p", p) for p in prime_divisors(g.N)}}
    elif query == "ap":
        mc.check_prime(args.prime, g.N)
        row.update({"prime": args.prime, "points": mc.count_X_Fp(g, args.prime), "ap": mc.ap_J(g, args.prime)})
    elif query == "jacobian":
        store = ec_db.load_store(store_dir)
        classes = ec_db.candidates_for(store, g.N)
        primes = mc.admissible_primes(g.N, pl.PRIME_BUDGET)
        res = ec_db.match_jacobian(classes, store, lambda p: mc.ap_J(g, p), primes, pl.CONFIRM)
        row.update({"class": res.label, "ambiguous": res.ambiguous, "primes_used": res.primes,
                    "remaining": res.remaining,
                    "rank": store.rank_of(res.label) if res.label else None,
                    "rank_provenance": ec_db.RANK_PROVENANCE})
    return row


def cmd_inspect(args) -> int:
    d, g0, g1 = _paths(args)
    try:
        if args.query == "ap" and args.prime is None:
            raise DataProblem("ap needs --prime")
        if args.gamma:
            rec = _find_record(args, args.gamma)
            if rec.level == 1:
                rows = [pl.trivial_row(rec)]
            else:
                cs = build_subgroup(rec)
                try:
                    ctx = cand.build_context(cs)
                    cands = cand.class_representatives(cand.enumerate_candidates(ctx))
                except cand.Incompatible:
                    cands = []
                rows = []
                for k, c in enumerate(cands):
                    row = {"gamma": rec.label, "candidate": k, "N": c.N, "real": bool(c.real),
                           "conjugates": c.extra.get("class_size", 1),
                           "w": [pl.mat_json(x, c.N) for x in c.w_reps]}
                    if args.query != "candidates":
                        if args.query in ("index", "jacobian") and not c.real:
                            pass
                        else:
                            row.update(_group_row(c, args.query, args, d / "ecdata"))
                    rows.append(row)
            target = args.gamma
        else:
            g = _load_group(args.group)
            rows = [dict(group=g.label, **_group_row(g, args.query, args, d / "ecdata"))] \
                if args.query != "candidates" else [{"group": g.label, "N": g.N, "real": bool(g.real)}]
            target = args.group
    except mc.PrimeError as e:
        _log(f"usage error: {e}")
        return EXIT_DATA
    except (DataProblem, ClassificationError, ec_db.DataError, ec_db.CoverageError) as e:
        _log(f"error: {e}")
        return EXIT_DATA
    except (ic.IndexError_, MemoryError) as e:
        _log(f"resource failure: {e}")
        return EXIT_RESOURCE
    _emit(_report("inspect", f"{target}:{args.query}", [g0, g1], rows, {"count": len(rows)}), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="galois-index")
    ap.add_argument("--data-dir", help="directory with classification/ and ecdata/")
    ap.add_argument("--output", help="write the JSON report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify-cp", help="recompute index and genus of every classification record")
    v.add_argument("--genus0")
    v.add_argument("--genus1")
    v.add_argument("--allow-partial", action="store_true")
    v.set_defaults(func=cmd_verify_cp)

    r = sub.add_parser("reproduce", help="run the pipeline and compare with the expected sets")
    r.add_argument("--target", choices=("i0", "i1", "final"), required=True)
    r.add_argument("--cache", help=f"cache directory (default: ${CACHE_ENV} if set)")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--genus0")
    r.add_argument("--genus1")
    r.set_defaults(func=cmd_reproduce)

    i = sub.add_parser("inspect", help="run single stages on one record or group")
    grp = i.add_mutually_exclusive_group(required=True)
    grp.add_argument("--gamma")
    grp.add_argument("--group")
    i.add_argument("query", choices=("candidates", "index", "cusps", "ap", "jacobian"))
    i.add_argument("--prime", type=int)
    i.add_argument("--genus0")
    i.add_argument("--genus1")
    i.set_defaults(func=cmd_inspect)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())


def main_exit() -> None:
    sys.exit(main())

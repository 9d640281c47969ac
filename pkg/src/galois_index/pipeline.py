"""End to end runs over the classification, with a per-record result cache."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import candidates as cand
from . import ec_db
from . import group_engine as ge
from . import index_calc as ic
from . import modcurve_count as mc
from . import modring as mr
from .congruence import CongruenceRecord, build_subgroup, format_records

# sets printed in the source; used only to compare results against
EXPECTED_I0 = frozenset({2, 4, 6, 8, 10, 12, 16, 20, 24, 30, 32, 36, 40, 48, 54, 60, 72, 84, 96, 108,
                         112, 120, 144, 192, 288, 336, 384, 576, 768, 864, 1152, 1200, 1296, 1536})
EXPECTED_I1 = frozenset({220, 240, 360, 504})
EXPECTED_FINAL = EXPECTED_I0 | EXPECTED_I1
EXPECTED_IDENT = {220: (11, "G1", 55), 240: (15, "G2", 30), 360: (15, "G3", 45), 504: (21, "G4", 63)}

PRIME_BUDGET = 25
CONFIRM = 5
VERIFY_LIMIT = 3_000_000


def mat_json(m, n):
    m = mr.reduce(m, n)
    return [[m[0], m[1]], [m[2], m[3]]]


def record_digest(rec: CongruenceRecord, stage: str) -> str:
    text = f"{__version__}\n{stage}\n" + format_records([rec], rec.genus)
    return hashlib.sha256(text.encode()).hexdigest()


class Cache:
    def __init__(self, directory: str | Path | None):
        self.dir = Path(directory) if directory else None

    def get(self, key: str):
        if self.dir is None:
            return None
        p = self.dir / f"{key}.json"
        if p.exists():
            return json.loads(p.read_text())
        return None

    def put(self, key: str, value) -> None:
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump(value, fh, sort_keys=True)
        os.replace(tmp, self.dir / f"{key}.json")


def trivial_row(rec: CongruenceRecord) -> dict:
    """SL2(Z) itself: G = GL2, contributing n = 2 by convention."""
    return {"gamma": rec.label, "genus": rec.genus, "N0": 1, "N": 1, "w": [], "real": True,
            "verified": True, "n": 2, "certificate_level": 1, "cusps": {"geometric": 1, "Q": 1, "Q_p": {}},
            "empty_cusp_primes": [], "coset_index": 1, "conjugates": 1}


def candidate_row(rec: CongruenceRecord, c: cand.CandidateGroup, with_index: bool = True) -> dict:
    N = c.N
    row = {"gamma": rec.label, "genus": rec.genus, "N0": rec.level, "N": N,
           "w": [mat_json(g, N) for g in sorted(c.w_reps, key=lambda g: mr.encode(g, N))],
           "real": bool(c.real), "coset_index": rec.index,
           "conjugates": c.extra.get("class_size", 1)}
    row["verified"] = cand.verify_direct(c, VERIFY_LIMIT)
    if c.real and with_index:
        cert = ic.candidate_index(c)
        row["n"] = cert.n
        row["certificate_level"] = cert.M
        qp = {str(p): c.cusps("Q_p", p) for p in mr.prime_divisors(N)}
        row["cusps"] = {"geometric": c.cusps("geometric"), "Q": c.cusps("Q"), "Q_p": qp}
        row["empty_cusp_primes"] = [int(p) for p, v in qp.items() if v == 0]
    else:
        row["n"] = None
        row["certificate_level"] = None
    return row


def process_record(rec: CongruenceRecord) -> dict:
    if rec.level == 1:
        return {"gamma": rec.label, "compatible": True, "rows": [trivial_row(rec)]}
    cs = build_subgroup(rec)
    try:
        ctx = cand.build_context(cs)
    except cand.Incompatible:
        return {"gamma": rec.label, "compatible": False, "rows": []}
    cands = cand.enumerate_candidates(ctx)
    reps = cand.class_representatives(cands)
    try:
        rows = [candidate_row(rec, c) for c in reps]
    except ic.IndexError_ as e:
        raise ic.IndexError_(f"{rec.label}: {e}") from None
    return {"gamma": rec.label, "compatible": True, "subgroups_w": len(cands), "rows": rows}


def _cached_process(args):
    rec, cache_dir = args
    cache = Cache(cache_dir)
    key = record_digest(rec, "candidates")
    hit = cache.get(key)
    if hit is not None:
        return hit
    out = process_record(rec)
    cache.put(key, out)
    return out


def run_records(records, cache_dir=None, jobs: int = 1) -> list[dict]:
    tasks = [(r, str(cache_dir) if cache_dir else None) for r in records]
    if jobs <= 1:
        results = [_cached_process(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_cached_process, tasks, chunksize=1))
    return sorted(results, key=lambda r: _label_key(r["gamma"]))


def _label_key(label: str):
    lead = ""
    for ch in label:
        if not ch.isdigit():
            break
        lead += ch
    return (int(lead or 0), len(label), label)


def genus0_summary(results: list[dict]) -> dict:
    rows = [r for res in results for r in res["rows"]]
    real = [r for r in rows if r["real"]]
    i_prime = sorted({r["n"] for r in real})
    i_double = sorted({r["n"] for r in real if len(r["empty_cusp_primes"]) <= 1})
    return {
        "subgroups": len(results),
        "incompatible": sum(not r["compatible"] for r in results),
        "w_subgroups": sum(r.get("subgroups_w", len(r["rows"])) for r in results),
        "classes": len(rows),
        "candidates": len(real),
        "unverified": sum(r["verified"] is None for r in rows),
        "failed_verification": sum(r["verified"] is False for r in rows),
        "I_prime": i_prime,
        "I_double_prime": i_double,
    }


# genus one

def _find_candidate(rec: CongruenceRecord, w: list):
    cs = build_subgroup(rec)
    ctx = cand.build_context(cs)
    for c in cand.class_representatives(cand.enumerate_candidates(ctx)):
        if [mat_json(g, c.N) for g in sorted(c.w_reps, key=lambda g: mr.encode(g, c.N))] == w:
            return c
    raise LookupError(f"candidate not found for {rec.label}")


def cartan_normalizer(ell: int, split: bool) -> list:
    """Generators of the normalizer of a (non)split Cartan subgroup mod ell."""
    us = mr.units(ell)
    if split:
        g = ge.unit_gens(ell, us)
        return [(u, 0, 0, 1) for u in g] + [(1, 0, 0, u) for u in g] + [(0, 1, 1, 0)]
    d = next(u for u in us if pow(u, (ell - 1) // 2, ell) == ell - 1)
    elems = [(a, b * d % ell, b, a) for a in range(ell) for b in range(ell) if (a * a - d * b * b) % ell]
    return elems + [(1, 0, 0, ell - 1)]


def reference_group(name: str) -> tuple[int, ge.GroupTable]:
    parts = {"G1": [(11, False)], "G2": [(3, False), (5, False)],
             "G3": [(3, False), (5, True)], "G4": [(3, False), (7, False)]}[name]
    N = 1
    for ell, _ in parts:
        N *= ell
    gens = []
    for i, (ell, split) in enumerate(parts):
        for g in cartan_normalizer(ell, split):
            comps = [g if j == i else mr.identity(e) for j, (e, _) in enumerate(parts)]
            gens.append(mr.crt_join(comps, [e for e, _ in parts]) if len(parts) > 1 else g)
    return N, ge.close(ge.GenSet(N, tuple(dict.fromkeys(gens)), "GL2"))


def conjugate_in_gl2(a: ge.GroupTable, b: ge.GroupTable) -> bool:
    if a.n != b.n or a.order != b.order:
        return False
    n = a.n
    ag = np.array(a.gens.gens, dtype=np.int64)
    for x in mr.all_gl2(n):
        conj = mr.bmul(mr.bmul(x, ag, n), mr.binv(x[None, :], n), n)
        if np.all(b.contains(conj)):
            return True
    return False


def identify_reference(c: cand.CandidateGroup) -> str | None:
    G = None
    for name in ("G1", "G2", "G3", "G4"):
        N, ref = reference_group(name)
        if N != c.N:
            continue
        if G is None:
            G = ge.close(ge.GenSet(c.N, tuple(c.generators()), "GL2"))
        if conjugate_in_gl2(ref, G):
            return name
    return None


def jacobian_row(rec: CongruenceRecord, row: dict, store: ec_db.CurveStore) -> dict:
    c = _find_candidate(rec, row["w"])
    N = c.N
    classes = ec_db.candidates_for(store, N)
    primes = mc.admissible_primes(N, PRIME_BUDGET)
    seen: dict[int, int] = {}

    def ap_J(p):
        if p not in seen:
            seen[p] = mc.ap_J(c, p)
        return seen[p]

    res = ec_db.match_jacobian(classes, store, ap_J, primes, CONFIRM)
    out = {"classes_considered": len(classes), "primes_used": res.primes,
           "confirmed": res.confirmed, "ambiguous": res.ambiguous,
           "ap": {str(p): a for p, a in sorted(seen.items())}}
    if res.ambiguous:
        out["remaining"] = res.remaining
        out["label"] = None
        out["rank"] = None
    else:
        out["label"] = res.label
        out["rank"] = store.rank_of(res.label)
        out["rank_provenance"] = ec_db.RANK_PROVENANCE
    if out["rank"]:
        out["reference"] = identify_reference(c)
    return out


def _cached_jacobian(args):
    rec, row, store_dir, cache_dir = args
    cache = Cache(cache_dir)
    primes = mc.admissible_primes(row["N"], PRIME_BUDGET)
    key = hashlib.sha256((record_digest(rec, "jacobian") + json.dumps([row["w"], primes])).encode()).hexdigest()
    hit = cache.get(key)
    if hit is not None:
        return hit
    store = _store(store_dir)
    out = jacobian_row(rec, row, store)
    cache.put(key, out)
    return out


_STORES: dict = {}


def _store(d):
    if d not in _STORES:
        _STORES[d] = ec_db.load_store(d)
    return _STORES[d]


def run_genus1(records, results, store_dir, i0, cache_dir=None, jobs: int = 1) -> dict:
    by_label = {r.label: r for r in records}
    todo = []
    for res in results:
        for row in res["rows"]:
            if row["real"] and row["n"] not in i0:
                todo.append((by_label[res["gamma"]], row, str(store_dir), str(cache_dir) if cache_dir else None))
    if jobs <= 1:
        jac = [_cached_jacobian(t) for t in todo]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            jac = list(ex.map(_cached_jacobian, todo, chunksize=1))
    for (rec, row, _, _), j in zip(todo, jac):
        row["jacobian"] = j
    positive = [(t[1], j) for t, j in zip(todo, jac) if j["rank"]]
    i1 = sorted({row["n"] for row, _ in positive})
    idents = sorted({(row["n"], row["N"], j.get("reference"), row["coset_index"]) for row, j in positive},
                    key=lambda x: (x[0], x[1], str(x[2]), x[3]))
    return {
        "needs_jacobian": len(todo),
        "ambiguous": sum(j["ambiguous"] for j in jac),
        "I_triple_prime_minus_I0": i1,
        "identifications": [{"n": n, "N": N, "group": g, "coset_index": k} for n, N, g, k in idents],
    }

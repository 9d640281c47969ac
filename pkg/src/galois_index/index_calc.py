"""Commutator indices of open subgroups of GL2 and the assembled index sets.

For G of level N we need [SL2(Z_N) : G'].  It is enough to find a level M
(same primes as N, N | M) such that G(rM)' contains the kernel K of
SL2(Z/rM) -> SL2(Z/M), r the radical of N; then the index equals
[SL2(Z/M) : G(M)'].

G(rM)' can be far too large to list, so it is handled as an extension: we
enumerate its image L in SL2(Z/M) keeping one lift per element, and K & G(rM)'
is recovered from Schreier generators.  K is abelian, isomorphic to the trace
zero matrices over Z/r under I + M*X <-> X, so the intersection is a
subspace of (Z/r)^3 computed one prime at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import numpy as np

from . import group_engine as ge
from . import modring as mr
from .modring import Mat


class IndexError_(RuntimeError):
    """No certificate below N^2 and the direct computation is out of reach."""


# above this many elements at the enumeration level we give up
ENUM_LIMIT = 12_000_000


@dataclass
class IndexCertificate:
    N: int
    M: int
    index: int
    tried: list[tuple[int, int, bool]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return scr_value(self.index, self.N)


def scr_value(index: int, N: int) -> int:
    return index * 2 // gcd(2, N)


class _Span:
    """Subgroup of (Z/r)^3 for squarefree r, kept as echelon bases mod each p."""

    def __init__(self, r: int):
        self.r = r
        self.primes = mr.prime_divisors(r)
        self.basis = {p: [] for p in self.primes}

    def full(self) -> bool:
        return all(len(b) == 3 for b in self.basis.values())

    def size(self) -> int:
        out = 1
        for p, b in self.basis.items():
            out *= p ** len(b)
        return out

    def _reduce(self, v: list[int], p: int) -> list[int]:
        v = [x % p for x in v]
        for piv, row in self.basis[p]:
            if v[piv]:
                c = v[piv]
                v = [(x - c * y) % p for x, y in zip(v, row)]
        return v

    def add(self, vecs: np.ndarray) -> None:
        for p in self.primes:
            if len(self.basis[p]) == 3:
                continue
            vs = np.unique(vecs % p, axis=0)
            for v in vs:
                if not v.any():
                    continue
                w = self._reduce([int(x) for x in v], p)
                piv = next((i for i, x in enumerate(w) if x), None)
                if piv is None:
                    continue
                inv = pow(w[piv], -1, p)
                w = [x * inv % p for x in w]
                # keep rows fully reduced against the new pivot
                rows = []
                for q, row in self.basis[p]:
                    if row[piv]:
                        c = row[piv]
                        row = [(x - c * y) % p for x, y in zip(row, w)]
                    rows.append((q, row))
                rows.append((piv, w))
                self.basis[p] = rows
                if len(rows) == 3:
                    break

    def contains(self, v: list[int]) -> bool:
        return all(not any(self._reduce(v, p)) for p in self.primes)


class LiftedGroup:
    """A subgroup of SL2(Z/L), L = r*M, seen through its image mod M."""

    def __init__(self, M: int, r: int, gens: list[Mat]):
        self.M, self.r, self.L = M, r, r * M
        self.gens = list(gens)
        self._build()

    def _build(self) -> None:
        M, L = self.M, self.L
        gl = mr.as_array(self.gens) if self.gens else np.zeros((0, 4), dtype=np.int64)
        ident = mr.as_array([mr.identity(L)])
        codes = [mr.bencode(ident % M, M)]
        lifts = [ident]
        seen = codes[0].copy()
        frontier = ident
        total = 1
        while len(frontier):
            prods = np.concatenate([mr.bmul(frontier, g, L) for g in gl]) if len(gl) else frontier[:0]
            c = mr.bencode(prods % M, M)
            c, first = np.unique(c, return_index=True)
            pos = np.searchsorted(seen, c)
            pos[pos == len(seen)] = 0
            new = seen[pos] != c
            c, prods = c[new], prods[first[new]]
            if not len(c):
                break
            codes.append(c)
            lifts.append(prods)
            seen = np.union1d(seen, c)
            total += len(c)
            if total > ENUM_LIMIT:
                raise IndexError_(f"image of the derived group at level {M} exceeds {ENUM_LIMIT}")
            frontier = prods
        codes = np.concatenate(codes)
        lifts = np.concatenate(lifts)
        order = np.argsort(codes)
        self.codes = codes[order]
        self.lifts = lifts[order]
        self.span = _Span(self.r)
        self._schreier()

    def _kernel_vectors(self, k: np.ndarray) -> np.ndarray:
        # k = I + M*X mod L; keep (x11, x12, x21)
        return ((k[:, [0, 1, 2]] - np.array([1, 0, 0])) // self.M) % self.r

    def _locate(self, mats: np.ndarray) -> np.ndarray:
        c = mr.bencode(mats % self.M, self.M)
        pos = np.searchsorted(self.codes, c)
        pos[pos == len(self.codes)] = 0
        if not np.all(self.codes[pos] == c):
            return None
        return pos

    def _schreier(self) -> None:
        L = self.L
        inv_lifts = mr.binv(self.lifts, L)
        for g in self.gens:
            prods = mr.bmul(self.lifts, g, L)
            pos = self._locate(prods)
            k = mr.bmul(prods, inv_lifts[pos], L)
            self.span.add(self._kernel_vectors(k))
            if self.span.full():
                return

    @property
    def image_order(self) -> int:
        return len(self.codes)

    @property
    def order(self) -> int:
        return self.image_order * self.span.size()

    def contains(self, y: Mat) -> bool:
        return bool(self.contains_many(mr.as_array([y]))[0])

    def contains_many(self, mats: np.ndarray) -> np.ndarray:
        c = mr.bencode(mats % self.M, self.M)
        pos = np.searchsorted(self.codes, c)
        pos[pos == len(self.codes)] = 0
        out = self.codes[pos] == c
        idx = np.nonzero(out)[0]
        if len(idx):
            k = mr.bmul(mats[idx], mr.binv(self.lifts[pos[idx]], self.L), self.L)
            vecs = self._kernel_vectors(k)
            # distinct kernel vectors are few; test each once
            uniq, inv = np.unique(vecs, axis=0, return_inverse=True)
            ok = np.array([self.span.contains([int(x) for x in v]) for v in uniq], dtype=bool)
            out[idx] = ok[inv.reshape(-1)]
        return out

    def certified(self) -> bool:
        return self.span.full()


def derived_lifted(gens: list[Mat], M: int, r: int) -> LiftedGroup:
    """G(rM)' for G generated by gens at level rM, as a LiftedGroup."""
    L = r * M
    gens = [mr.reduce(g, L) for g in gens]
    seeds = []
    for i, x in enumerate(gens):
        for y in gens[i + 1:]:
            c = mr.commutator(x, y, L)
            if c != mr.identity(L):
                seeds.append(c)
    seeds = list(dict.fromkeys(seeds))
    grp = LiftedGroup(M, r, seeds)
    while True:
        sg = mr.as_array(grp.gens)
        extra = []
        for x in gens:
            conj = mr.bmul(mr.bmul(np.asarray(x, dtype=np.int64), sg, L), mr.binv(np.asarray([x]), L), L)
            miss = conj[~grp.contains_many(conj)]
            extra.extend(tuple(int(v) for v in m) for m in miss)
        extra = list(dict.fromkeys(extra))
        if not extra:
            return grp
        grp = LiftedGroup(M, r, grp.gens + extra)


def open_group_gens(gens: list[Mat], N: int, level: int) -> list[Mat]:
    """Generators at a level divisible by N of the full preimage of <gens> mod N."""
    lifted = [ge._lift_gl2(g, N, level) for g in gens]
    return list(dict.fromkeys(lifted + list(ge.kernel_gens(level, N, "GL2").gens)))


def profinite_index(gens: list[Mat], N: int, check_next: bool = False) -> IndexCertificate:
    """[SL2(Z_N) : G'] for the open subgroup G of GL2(Z_N) with image <gens> mod N.

    Tries M = N, rN, r^2 N, ... up to N^2.  With check_next the index is
    recomputed at the next level of the chain as a consistency check.
    """
    r = mr.radical(N)
    if N == 1:
        return IndexCertificate(1, 1, 1)
    cert = None
    tried = []
    M = N
    while M <= N * N:
        L = r * M
        grp = derived_lifted(open_group_gens(gens, N, L), M, r)
        idx = mr.sl2_order(M) // grp.image_order
        tried.append((M, idx, grp.certified()))
        if cert is not None:
            if idx != cert.index:
                raise ArithmeticError(f"index changed from {cert.index} to {idx} at level {M}")
            break
        if grp.certified():
            cert = IndexCertificate(N, M, idx, tried)
            if not check_next:
                break
        M *= r
    if cert is None:
        raise IndexError_(f"no certificate up to N^2 = {N * N}")
    cert.tried = tried
    return cert


def candidate_index(c) -> IndexCertificate:
    cert = profinite_index(c.generators(), c.N)
    c.n = cert.n
    c.extra["certificate_level"] = cert.M
    return cert


# assembly

def empty_cusp_primes(c) -> list[int]:
    return [p for p in mr.prime_divisors(c.N) if c.cusps("Q_p", p) == 0]


def in_double_prime(c) -> bool:
    return c.real and len(empty_cusp_primes(c)) <= 1


def assemble_genus0(cands) -> tuple[set[int], set[int]]:
    """(union of n over real candidates, same restricted by the cusp criterion)."""
    prime = {c.n for c in cands if c.real}
    double = {c.n for c in cands if in_double_prime(c)}
    return prime, double


def needs_jacobian(cands, i0: set[int]) -> list:
    return [c for c in cands if c.real and c.n not in i0]

"""Level structures over a congruence subgroup.

For a congruence subgroup with image H0 in SL2(Z/N0) we work at the level N
given by ``level_for``.  H is the full preimage of H0 in SL2(Z/N), H~ is
H times the scalars, and the open subgroups G(N) of GL2(Z/N) with
G(N) & SL2 = H, scalars in G(N) and full determinant are exactly the
preimages of the subgroups W of C = Norm(H~)/H~ on which the determinant is an
isomorphism onto Q_N = (Z/N)^x / squares.

The normalizer is computed at level N0: an element of GL2(Z/N) normalizes H
if and only if its reduction normalizes H0, so Norm(H~) is the full preimage
of Norm(H0).  Elements of C are identified by a key (square class of the
determinant, coset of H0 in SL2(Z/N0)) described in ``_Keyer``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import group_engine as ge
from . import modring as mr
from .congruence import CongruenceSubgroup, T
from .modring import Mat

REAL_TARGETS: tuple[Mat, Mat] = ((1, 0, 0, -1), (1, 1, 0, -1))


def level_for(n0: int) -> int:
    v = 0
    m = n0
    while m % 2 == 0:
        m //= 2
        v += 1
    if v == 0:
        return n0
    if v == 1:
        return 4 * n0
    return 2 * n0


class Incompatible(Exception):
    """H~ & SL2 is larger than H, so no G(N) exists."""


class _Keyer:
    """Canonical labels for cosets g*H~ with g in the normalizer.

    For g of determinant class c we fix once and for all an element t_c of the
    normalizer with that class.  Then g * t_c^-1 has square determinant u^2
    and g * t_c^-1 / u lies in SL2(Z/N) and normalizes H; its coset of H0
    (after reduction mod N0) together with c determines g*H~.  Any square
    root u gives the same coset because the scalars of order two lie in H.
    """

    def __init__(self, N: int, N0: int, x0: ge.CosetSpace):
        self.N, self.N0, self.x0 = N, N0, x0
        self.sq, self.basis = ge.square_classes(N)
        self.root = {}
        for u in mr.units(N):
            self.root.setdefault(u * u % N, u)
        self.t: dict[int, Mat] = {}
        self.tinv: dict[int, Mat] = {}

    def key(self, g: Mat) -> tuple[int, int]:
        N = self.N
        c = self.sq[mr.det(g, N)]
        if c not in self.t:
            self.t[c] = g
            self.tinv[c] = mr.inv(g, N)
        y = mr.mul(g, self.tinv[c], N)
        u = self.root[mr.det(y, N)]
        ui = pow(u, -1, N) if N > 1 else 0
        y = mr.reduce((y[0] * ui, y[1] * ui, y[2] * ui, y[3] * ui), self.N0)
        return c, int(self.x0.locate(mr.as_array([y]))[0])

    def keys(self, mats: np.ndarray) -> list[tuple[int, int]]:
        """Vectorised key for matrices whose classes already have t_c."""
        cls, loc = self.key_arrays(mats)
        return list(zip(cls.tolist(), loc.tolist()))

    def key_arrays(self, mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        N = self.N
        if not hasattr(self, "_sq_arr"):
            self._sq_arr = np.zeros(N, dtype=np.int64)
            self._rinv = np.zeros(N, dtype=np.int64)
            for u in mr.units(N):
                self._sq_arr[u] = self.sq[u]
            for s_, u in self.root.items():
                self._rinv[s_] = pow(u, -1, N) if N > 1 else 0
        tinv = np.zeros((N, 4), dtype=np.int64)
        for c, m in self.tinv.items():
            tinv[c] = m
        cls = self._sq_arr[mr.bdet(mats, N)]
        y = mr.bmul(mats, tinv[cls], N)
        y = (y * self._rinv[mr.bdet(y, N)][:, None]) % N % self.N0
        return cls, self.x0.locate(y)


@dataclass
class LevelContext:
    cs: CongruenceSubgroup
    N: int
    norm0: ge.GroupTable
    quotient: ge.QuotientGroup
    keyer: _Keyer
    keys: list[tuple[int, int]]
    qbasis: list[int]

    @property
    def N0(self) -> int:
        return self.cs.level

    @cached_property
    def key_index(self) -> dict[tuple[int, int], int]:
        return {k: i for i, k in enumerate(self.keys)}


def build_context(cs: CongruenceSubgroup) -> LevelContext:
    N0 = cs.level
    N = level_for(N0)
    # scalars of order two must already lie in H, otherwise H~ & SL2 != H
    for lam in mr.units(N):
        if lam * lam % N == 1 % N and mr.scalar(lam, N0) not in cs.H:
            raise Incompatible(cs.label)
    norm0 = ge.normalizer(cs.H)
    keyer = _Keyer(N, N0, cs.cosets)
    gens = [ge._lift_gl2(g, N0, N) for g in norm0.gens.gens]
    gens += list(ge.kernel_gens(N, N0, "GL2").gens)
    ident = mr.identity(N)
    reps = [ident]
    keys = [keyer.key(ident)]
    index = {keys[0]: 0}
    i = 0
    while i < len(reps):
        for s in gens:
            g = mr.mul(reps[i], s, N)
            k = keyer.key(g)
            if k not in index:
                index[k] = len(reps)
                reps.append(g)
                keys.append(k)
        i += 1
    ra = mr.as_array(reps)
    m = len(reps)
    table = np.zeros((m, m), dtype=np.int64)
    for a in range(m):
        prods = mr.bmul(np.broadcast_to(ra[a], ra.shape), ra, N)
        table[a] = [index[k] for k in keyer.keys(prods)]
    dets = [keyer.sq[mr.det(r, N)] for r in reps]
    q = ge.QuotientGroup(N, reps, table, dets)
    return LevelContext(cs, N, norm0, q, keyer, keys, keyer.basis)


@dataclass
class CandidateGroup:
    ctx: LevelContext
    W: tuple[int, ...]
    real: bool = False
    n: int | None = None
    extra: dict = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.ctx.N

    @cached_property
    def w_reps(self) -> list[Mat]:
        return [self.ctx.quotient.reps[i] for i in self.W]

    @cached_property
    def _wkeys(self) -> set[tuple[int, int]]:
        return {self.ctx.keys[i] for i in self.W}

    def generators(self) -> list[Mat]:
        """Generators of G(N): H, the scalars and representatives of W."""
        ctx = self.ctx
        N, N0 = ctx.N, ctx.N0
        gens = [mr.reduce(mr.lift_sl2(h, N0), N) for h in ctx.cs.H.gens.gens]
        gens += list(ge.kernel_gens(N, N0, "SL2").gens)
        gens += [mr.scalar(u, N) for u in ge.unit_gens(N, mr.units(N))]
        gens += [self.w_reps[i] for i in _basis_positions(self)]
        return [g for g in dict.fromkeys(gens) if g != mr.identity(N)]

    def contains(self, mats: np.ndarray) -> np.ndarray:
        """Membership in G(N) decided through the normalizer and the keys."""
        ctx = self.ctx
        mats = np.asarray(mats, dtype=np.int64).reshape(-1, 4)
        inn = ctx.norm0.contains(mats % ctx.N0)
        out = np.zeros(len(mats), dtype=bool)
        idx = np.nonzero(inn)[0]
        if len(idx):
            cls, loc = ctx.keyer.key_arrays(mats[idx])
            wk = np.array(sorted(self._wkeys), dtype=np.int64)
            code = cls * len(ctx.cs.cosets) + loc
            out[idx] = np.isin(code, wk[:, 0] * len(ctx.cs.cosets) + wk[:, 1])
        return out

    def __contains__(self, m: Mat) -> bool:
        return bool(self.contains(mr.as_array([mr.reduce(m, self.N)]))[0])

    @cached_property
    def det_section(self) -> np.ndarray:
        """Row d holds the inverse of an element of G(N) with determinant d."""
        N = self.N
        sq = self.ctx.keyer.sq
        by_class = {}
        for r in self.w_reps:
            by_class[sq[mr.det(r, N)]] = r
        root = self.ctx.keyer.root
        out = np.zeros((N, 4), dtype=np.int64)
        for d in mr.units(N):
            r = by_class[sq[d]]
            s = root[d * pow(mr.det(r, N), -1, N) % N]
            g = mr.mul(mr.scalar(s, N), r, N)
            out[d] = mr.inv(g, N)
        return out

    @cached_property
    def cosets(self) -> ge.CosetSpace:
        """G(N)\\GL2(Z/N), in bijection with H0\\SL2(Z/N0)."""
        ctx = self.ctx
        N, N0 = ctx.N, ctx.N0
        x0 = ctx.cs.cosets
        reps = mr.as_array([mr.reduce(mr.lift_sl2(tuple(int(v) for v in r), N0), N) for r in x0.reps])
        sec = self.det_section

        def locate(mats):
            y = mr.bmul(sec[mr.bdet(mats, N)], mats, N)
            return x0.locate(y % N0)

        return ge.CosetSpace(N, reps, locate)

    def check_real(self) -> bool:
        return any(self.cosets.fixed(t) > 0 for t in REAL_TARGETS)

    def cusps(self, field: str = "geometric", p: int | None = None) -> int:
        return cusp_count(self, field, p)

    def code_key(self) -> tuple[int, ...]:
        return tuple(sorted(mr.encode(g, self.N) for g in self.w_reps))


def _basis_positions(c: CandidateGroup) -> list[int]:
    sq = c.ctx.keyer.sq
    N = c.N
    out = []
    for e in c.ctx.qbasis:
        for i, r in enumerate(c.w_reps):
            if sq[mr.det(r, N)] == e:
                out.append(i)
                break
    return out


def enumerate_candidates(ctx: LevelContext) -> list[CandidateGroup]:
    """All W in C mapping isomorphically onto Q_N, with condition (d) flagged.

    A basis e_1..e_k of Q_N is fixed.  W is determined by its elements w_i of
    determinant class e_i, which must be commuting involutions; we backtrack
    over such tuples.
    """
    q = ctx.quotient
    t = q.table
    basis = ctx.qbasis
    ident = 0
    choices = []
    for e in basis:
        choices.append([i for i in range(q.order) if q.det_class[i] == e and t[i, i] == ident])
    found: dict[frozenset, tuple[int, ...]] = {}

    def rec(pos: int, chosen: list[int]):
        if pos == len(basis):
            elems = {ident}
            for w in chosen:
                elems |= {int(t[x, w]) for x in elems}
            fs = frozenset(elems)
            found.setdefault(fs, tuple(sorted(elems)))
            return
        for w in choices[pos]:
            if all(t[w, v] == t[v, w] for v in chosen):
                rec(pos + 1, chosen + [w])

    rec(0, [])
    out = []
    for W in found.values():
        c = CandidateGroup(ctx, W)
        c.real = c.check_real()
        out.append(c)
    out.sort(key=lambda c: c.code_key())
    _mark_classes(ctx, out)
    return out


def _mark_classes(ctx: LevelContext, cands: list[CandidateGroup]) -> None:
    """Group the candidates into classes under conjugation by the normalizer.

    Conjugating G(N) by an element of the normalizer corresponds to
    conjugating W inside C.  The first candidate of each class in canonical
    order represents it; extra["class"] is the index of that representative.
    """
    q = ctx.quotient
    t = q.table
    inv = [q.inverse(i) for i in range(q.order)]
    where = {frozenset(c.W): k for k, c in enumerate(cands)}
    for k, c in enumerate(cands):
        if "class" in c.extra:
            continue
        members = set()
        for g in range(q.order):
            members.add(where[frozenset(int(t[t[g, w], inv[g]]) for w in c.W)])
        for m in members:
            cands[m].extra["class"] = k
        c.extra["class_size"] = len(members)


def class_representatives(cands: list[CandidateGroup]) -> list[CandidateGroup]:
    return [c for k, c in enumerate(cands) if c.extra.get("class") == k]


def verify_direct(c: CandidateGroup, limit: int = 3_000_000) -> bool | None:
    """Re-check conditions (a), (b), (c) on the fully enumerated group.

    Returns None when the group is larger than limit elements.
    """
    ctx = c.ctx
    N = c.N
    expected = mr.gl2_order(N) // ctx.cs.index
    if expected > limit:
        return None
    G = ge.close(ge.GenSet(N, tuple(c.generators()), "GL2"))
    if G.order != expected:
        return False
    el = G.elements()
    dets = mr.bdet(el, N)
    sl = el[dets == 1 % N]
    # (a): G & SL2 is the full preimage of H0
    if len(sl) != mr.sl2_order(N) // ctx.cs.index:
        return False
    if not np.all(ctx.cs.H.contains(sl % ctx.N0)):
        return False
    # (b): scalars
    if not all(mr.scalar(u, N) in G for u in mr.units(N)):
        return False
    # (c): surjective determinant
    if set(np.unique(dets).tolist()) != set(mr.units(N)):
        return False
    # and the predicate used elsewhere agrees with the enumeration
    return bool(np.all(c.contains(el)))


def b_group(N: int, field: str, p: int | None = None) -> list[Mat]:
    """Generators of B = {diag(b, 1)} for the image of the cyclotomic character."""
    us = mr.units(N)
    if field == "geometric":
        sub: list[int] = []
    elif field == "Q":
        sub = us
    elif field == "F_p":
        sub = sorted({pow(p, k, N) for k in range(len(us) + 1)})
    elif field == "Q_p":
        e = 0
        m = N
        while m % p == 0:
            m //= p
            e += 1
        powers = {pow(p, k, m) for k in range(len(us) + 1)} if m > 1 else {0}
        sub = [u for u in us if (u % m if m > 1 else 0) in powers]
    else:
        raise ValueError(f"unknown field {field}")
    return [(b, 0, 0, 1) for b in ge.unit_gens(N, sub)]


U_GENS: tuple[Mat, Mat] = (T, (-1, 0, 0, -1))


def cusp_count(c: CandidateGroup, field: str = "geometric", p: int | None = None) -> int:
    N = c.N
    u = [mr.reduce(g, N) for g in U_GENS]
    _, fixed = ge.double_cosets(c.cosets, u, b_group(N, field, p))
    return fixed


def candidates_for(cs: CongruenceSubgroup) -> list[CandidateGroup]:
    """Candidates for one congruence subgroup; [] when incompatible."""
    try:
        ctx = build_context(cs)
    except Incompatible:
        return []
    return enumerate_candidates(ctx)


class OpenGroup:
    """A subgroup of GL2(Z/N) given directly by generators.

    Supports the same coset, cusp and reality queries as CandidateGroup; used
    for groups that do not come from a classification record.
    """

    def __init__(self, N: int, gens, label: str = ""):
        self.N = N
        self.label = label
        gs = [mr.reduce(g, N) for g in gens]
        minus = mr.reduce((-1, 0, 0, -1), N)
        if minus not in gs and minus != mr.identity(N):
            gs.append(minus)
        self.table = ge.close(ge.GenSet(N, tuple(gs), "GL2"))
        self.gens = tuple(gs)
        self.n: int | None = None
        self.extra: dict = {}

    @cached_property
    def cosets(self) -> ge.CosetSpace:
        return ge.coset_space(self.table, "GL2")

    @property
    def real(self) -> bool:
        return self.check_real()

    def check_real(self) -> bool:
        return any(self.cosets.fixed(t) > 0 for t in REAL_TARGETS)

    def cusps(self, field: str = "geometric", p: int | None = None) -> int:
        return cusp_count(self, field, p)

    def generators(self) -> list[Mat]:
        return list(self.gens)


def borel(N: int) -> OpenGroup:
    gens = [(1, 1, 0, 1)] + [(u, 0, 0, 1) for u in ge.unit_gens(N, mr.units(N))] \
        + [(1, 0, 0, u) for u in ge.unit_gens(N, mr.units(N))]
    return OpenGroup(N, gens, f"borel{N}")

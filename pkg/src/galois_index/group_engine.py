"""Finite subgroups of GL2(Z/n): closure, membership, normalizers, quotients,
commutator subgroups and coset spaces.

Elements are handled as integer codes (see modring.encode) so that a whole
group is one sorted int64 array.  Membership goes through a bit table when
n^4 is small enough and through binary search otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import modring as mr
from .modring import Mat

BIT_TABLE_LIMIT = 1 << 28


class GroupError(ValueError):
    pass


class CodeSet:
    """A sorted set of element codes with fast vectorised membership."""

    def __init__(self, codes: np.ndarray, n: int):
        self.n = n
        self.codes = np.unique(np.asarray(codes, dtype=np.int64))
        self._bits = None
        if n ** 4 <= BIT_TABLE_LIMIT:
            bits = np.zeros(n ** 4, dtype=bool)
            bits[self.codes] = True
            self._bits = np.packbits(bits, bitorder="little")

    def __len__(self) -> int:
        return len(self.codes)

    def contains_codes(self, codes: np.ndarray) -> np.ndarray:
        codes = np.asarray(codes, dtype=np.int64)
        if self._bits is not None:
            return ((self._bits[codes >> 3] >> (codes & 7)) & 1).astype(bool)
        pos = np.searchsorted(self.codes, codes)
        pos[pos == len(self.codes)] = 0
        return self.codes[pos] == codes

    def contains(self, mats: np.ndarray) -> np.ndarray:
        return self.contains_codes(mr.bencode(mats, self.n))


@dataclass(frozen=True)
class GenSet:
    n: int
    gens: tuple[Mat, ...]
    ambient: str = "GL2"

    def __post_init__(self):
        if self.ambient not in ("GL2", "SL2"):
            raise GroupError(f"unknown ambient {self.ambient}")
        for g in self.gens:
            d = mr.det(g, self.n)
            if self.ambient == "SL2" and d != 1 % self.n:
                raise GroupError(f"{g} is not in SL2(Z/{self.n})")
            if np.gcd(d, self.n) != 1:
                raise GroupError(f"{g} is not invertible mod {self.n}")


def genset(gens: Iterable[Sequence[int]], n: int, ambient: str = "GL2") -> GenSet:
    return GenSet(n, tuple(mr.reduce(g, n) for g in gens), ambient)


@dataclass
class GroupTable:
    n: int
    members: CodeSet
    gens: GenSet

    @property
    def order(self) -> int:
        return len(self.members)

    @property
    def codes(self) -> np.ndarray:
        return self.members.codes

    def elements(self) -> np.ndarray:
        return mr.bdecode(self.members.codes, self.n)

    def __contains__(self, m: Sequence[int]) -> bool:
        return bool(self.members.contains(mr.as_array([mr.reduce(m, self.n)]))[0])

    def contains(self, mats: np.ndarray) -> np.ndarray:
        return self.members.contains(mats)


def _bfs(start: np.ndarray, frontier: np.ndarray, gens: np.ndarray, n: int) -> np.ndarray:
    """Codes of the closure of start under right multiplication by gens.

    start must already be closed under the generators except along the
    frontier, which is the set of elements whose products are still to be
    explored.
    """
    if n ** 4 <= BIT_TABLE_LIMIT:
        seen = np.zeros(n ** 4, dtype=bool)
        seen[start] = True
        chunks = [start]
        while len(frontier):
            cand = np.concatenate([mr.bencode(mr.bmul(frontier, g, n), n) for g in gens])
            cand = np.unique(cand)
            cand = cand[~seen[cand]]
            seen[cand] = True
            chunks.append(cand)
            frontier = mr.bdecode(cand, n)
        return np.sort(np.concatenate(chunks))
    seen = np.unique(start)
    while len(frontier):
        cand = np.concatenate([mr.bencode(mr.bmul(frontier, g, n), n) for g in gens])
        cand = np.unique(cand)
        pos = np.searchsorted(seen, cand)
        pos[pos == len(seen)] = 0
        cand = cand[seen[pos] != cand]
        seen = np.union1d(seen, cand)
        frontier = mr.bdecode(cand, n)
    return seen


def close(g: GenSet) -> GroupTable:
    """The subgroup generated by g, enumerated breadth first.

    Generators are added one at a time and skipped when already present, so
    the cost is driven by the generators actually needed.
    """
    n = g.n
    ident = mr.as_array([mr.identity(n)])
    grp = GroupTable(n, CodeSet(mr.bencode(ident, n), n), GenSet(n, (), g.ambient))
    for x in g.gens:
        if x not in grp:
            grp = extend(grp, [x])
    return GroupTable(n, grp.members, g)


def extend(group: GroupTable, new: Sequence[Mat]) -> GroupTable:
    """Closure of group together with extra generators."""
    n = group.n
    new = [mr.reduce(m, n) for m in new]
    g = GenSet(n, group.gens.gens + tuple(new), "GL2")
    allg = mr.as_array(g.gens)
    elems = group.elements()
    frontier = np.concatenate([mr.bmul(elems, m, n) for m in mr.as_array(new)])
    fc = np.unique(mr.bencode(frontier, n))
    fc = fc[~group.members.contains_codes(fc)]
    codes = _bfs(np.concatenate([group.codes, fc]), mr.bdecode(fc, n), allg, n)
    return GroupTable(n, CodeSet(codes, n), g)


def kernel_gens(n: int, m: int, ambient: str = "SL2") -> GenSet:
    """Generators of {A in ambient(Z/n) : A = I mod m}."""
    if n % m:
        raise GroupError(f"{m} does not divide {n}")
    if m == n:
        return GenSet(n, (), ambient)
    gens: list[Mat] = []
    for k in range(1, n // m):
        if (n // m) % k == 0:
            x = m * k
            gens.append(mr.reduce((1, x, 0, 1), n))
            gens.append(mr.reduce((1, 0, x, 1), n))
            gens.append(mr.reduce((1 + x, x, -x, 1 - x), n))
    ugens = unit_gens(n, [u for u in mr.units(n) if (u - 1) % m == 0])
    gens.extend((u, 0, 0, pow(u, -1, n)) for u in ugens)
    if ambient == "GL2":
        gens.extend((u, 0, 0, 1) for u in ugens)
    # drop duplicates while keeping the order deterministic
    seen, out = set(), []
    for x in gens:
        if x not in seen and x != mr.identity(n):
            seen.add(x)
            out.append(x)
    return GenSet(n, tuple(out), ambient)


def unit_gens(n: int, subgroup: Sequence[int]) -> list[int]:
    """A small generating set of a subgroup of (Z/n)^x given as a list."""
    span = {1 % n}
    out = []
    for u in sorted(subgroup):
        if u in span:
            continue
        out.append(u)
        frontier = list(span)
        while frontier:
            nxt = []
            for v in frontier:
                w = v * u % n
                if w not in span:
                    span.add(w)
                    nxt.append(w)
            frontier = nxt
        # close under all chosen generators
        changed = True
        while changed:
            changed = False
            for v in list(span):
                for g in out:
                    w = v * g % n
                    if w not in span:
                        span.add(w)
                        changed = True
    return out


def preimage(g: GroupTable, n: int, ambient: str = "GL2") -> GroupTable:
    """Full preimage of g (at modulus g.n) in ambient(Z/n)."""
    m = g.n
    if n % m:
        raise GroupError(f"{m} does not divide {n}")
    lifts = []
    for h in g.gens.gens:
        if ambient == "SL2":
            lifts.append(mr.reduce(mr.lift_sl2(h, m), n))
        else:
            lifts.append(_lift_gl2(h, m, n))
    k = kernel_gens(n, m, ambient)
    return close(GenSet(n, tuple(lifts) + k.gens, ambient))


def _lift_gl2(h: Mat, m: int, n: int) -> Mat:
    """Lift of an invertible matrix mod m to an invertible matrix mod n."""
    if m == 1:
        return mr.identity(n)
    d = mr.det(h, m)
    # scale the first row by a lift of det^-1 so the rest is an SL2 lift
    u = pow(d, -1, m)
    x = mr.lift_sl2((h[0] * u, h[1] * u, h[2], h[3]), m)
    lam = next(v for v in range(d, d + n * m + 1, m) if np.gcd(v, n) == 1)
    return mr.reduce((x[0] * lam, x[1] * lam, x[2], x[3]), n)


def normalizer(h: GroupTable, ambient: np.ndarray | None = None) -> GroupTable:
    """Normalizer of h inside GL2(Z/n) (or inside the given element array).

    Each candidate is tested by conjugating only the generators of h, and
    candidates are discarded as soon as one generator leaves h.
    """
    n = h.n
    cand = mr.all_gl2(n) if ambient is None else ambient
    for gen in h.gens.gens:
        if not len(cand):
            break
        c = mr.bmul(mr.bmul(cand, gen, n), mr.binv(cand, n), n)
        cand = cand[h.contains(c)]
    codes = mr.bencode(cand, n)
    gens = _generators_of(codes, n, h.gens.gens)
    return GroupTable(n, CodeSet(codes, n), GenSet(n, gens, "GL2"))


def _generators_of(codes: np.ndarray, n: int, start: Sequence[Mat] = ()) -> tuple[Mat, ...]:
    """A small generating set for the group whose element codes are given."""
    target = len(np.unique(codes))
    gens = list(start)
    grp = close(GenSet(n, tuple(gens), "GL2"))
    order = np.argsort(codes, kind="stable")
    codes = np.asarray(codes)[order]
    while grp.order < target:
        missing = codes[~grp.members.contains_codes(codes)]
        # take the element of largest code not yet covered: deterministic
        m = mr.decode(int(missing[-1]), n)
        gens.append(m)
        grp = extend(grp, [m])
    return tuple(gens)


def commutator_subgroup(g: GroupTable | GenSet) -> GroupTable:
    """Derived subgroup as the normal closure of commutators of generators."""
    gs = g.gens if isinstance(g, GroupTable) else g
    return normal_closure(
        [mr.commutator(x, y, gs.n) for i, x in enumerate(gs.gens) for y in gs.gens[i + 1:]],
        gs.gens, gs.n)


def normal_closure(seeds: Sequence[Mat], conj_by: Sequence[Mat], n: int) -> GroupTable:
    seeds = [s for s in dict.fromkeys(mr.reduce(s, n) for s in seeds) if s != mr.identity(n)]
    grp = close(GenSet(n, tuple(seeds), "GL2"))
    changed = True
    while changed:
        changed = False
        for x in conj_by:
            for s in list(grp.gens.gens):
                c = mr.conj(x, s, n)
                if c not in grp:
                    grp = extend(grp, [c])
                    changed = True
    return grp


def is_normal(sub: GroupTable, conj_by: Sequence[Mat]) -> bool:
    n = sub.n
    return all(mr.conj(x, s, n) in sub for x in conj_by for s in sub.gens.gens)


# quotients by a normal subgroup

def square_classes(n: int) -> tuple[dict[int, int], list[int]]:
    """Map each unit mod n to a canonical representative of its class in
    (Z/n)^x / squares, plus an F2-basis of the class group (as canonical reps)."""
    us = mr.units(n)
    squares = sorted({u * u % n for u in us})
    rep: dict[int, int] = {}
    for u in us:
        if u not in rep:
            cls = sorted({u * s % n for s in squares})
            for v in cls:
                rep[v] = cls[0]
    reps = sorted(set(rep.values()))
    basis: list[int] = []
    span = {rep[1 % n]}
    for r in reps:
        if r not in span:
            basis.append(r)
            span |= {rep[r * s % n] for s in span}
    return rep, basis


@dataclass
class QuotientGroup:
    """A finite group given by representatives and a multiplication table.

    reps[i] is a matrix mod n in the ambient group; table[i, j] is the index
    of the class of reps[i] * reps[j].  Index 0 is the identity class.
    det_class[i] is the canonical square-class representative of det(reps[i]).
    """
    n: int
    reps: list[Mat]
    table: np.ndarray
    det_class: list[int]

    @property
    def order(self) -> int:
        return len(self.reps)

    def inverse(self, i: int) -> int:
        return int(np.nonzero(self.table[i] == 0)[0][0])


def quotient(ambient: GroupTable, kernel: GroupTable) -> QuotientGroup:
    """ambient / kernel computed by labelling every element of ambient."""
    n = ambient.n
    if not np.all(ambient.contains(kernel.elements())):
        raise GroupError("kernel is not contained in ambient")
    if not is_normal(kernel, ambient.gens.gens):
        raise GroupError("kernel is not normal")
    codes = ambient.codes
    label = np.full(len(codes), -1, dtype=np.int64)
    kel = kernel.elements()
    reps: list[Mat] = []
    ident = mr.identity(n)
    start = [ident] + [mr.decode(int(c), n) for c in codes]
    for m in start:
        pos = np.searchsorted(codes, mr.encode(m, n))
        if label[pos] >= 0:
            continue
        coset = np.searchsorted(codes, mr.bencode(mr.bmul(kel, m, n), n))
        label[coset] = len(reps)
        reps.append(m)
        if (label >= 0).all():
            break
    k = len(reps)
    ra = mr.as_array(reps)
    table = np.zeros((k, k), dtype=np.int64)
    for i, r in enumerate(reps):
        prod = mr.bencode(mr.bmul(np.broadcast_to(ra[i], ra.shape), ra, n), n)
        table[i] = label[np.searchsorted(codes, prod)]
    rep, _ = square_classes(n)
    dets = [rep[mr.det(r, n)] for r in reps]
    return QuotientGroup(n, reps, table, dets)


# coset spaces

@dataclass
class CosetSpace:
    """Right cosets base\\ambient with an action of ambient elements.

    reps are matrices mod n; locate maps a batch of matrices to the indices of
    the cosets that contain them.
    """
    n: int
    reps: np.ndarray
    locate: Callable[[np.ndarray], np.ndarray]
    base: GroupTable | None = None
    _cache: dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.reps)

    def act(self, m: Sequence[int]) -> np.ndarray:
        """Permutation x -> x*m of coset indices."""
        key = mr.reduce(m, self.n)
        perm = self._cache.get(key)
        if perm is None:
            perm = self.locate(mr.bmul(self.reps, np.array(key, dtype=np.int64), self.n))
            if len(self._cache) < 4096:
                self._cache[key] = perm
        return perm

    def fixed(self, m: Sequence[int]) -> int:
        perm = self.act(m)
        return int(np.count_nonzero(perm == np.arange(len(perm))))

    def orbits(self, gens: Sequence[Sequence[int]]) -> np.ndarray:
        """Orbit label of every coset under the group generated by gens."""
        k = len(self)
        parent = np.arange(k)
        perms = [self.act(g) for g in gens]

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for perm in perms:
            for x in range(k):
                a, b = find(x), find(int(perm[x]))
                if a != b:
                    parent[max(a, b)] = min(a, b)
        roots = np.array([find(x) for x in range(k)])
        _, lab = np.unique(roots, return_inverse=True)
        return lab


def coset_space(g: GroupTable, ambient: str = "GL2") -> CosetSpace:
    """Right cosets of g by full enumeration of the ambient group; each coset
    is represented by its element of minimal code."""
    n = g.n
    amb = mr.all_gl2(n) if ambient == "GL2" else mr.all_sl2(n)
    acodes = mr.bencode(amb, n)
    order = np.argsort(acodes)
    acodes = acodes[order]
    if not np.all(np.isin(g.codes, acodes)):
        raise GroupError("subgroup not contained in ambient")
    label = np.full(len(acodes), -1, dtype=np.int64)
    gel = g.elements()
    reps = []
    for i in range(len(acodes)):
        if label[i] >= 0:
            continue
        m = mr.decode(int(acodes[i]), n)
        coset = np.searchsorted(acodes, mr.bencode(mr.bmul(gel, m, n), n))
        label[coset] = len(reps)
        reps.append(m)

    def locate(mats):
        return label[np.searchsorted(acodes, mr.bencode(mats, n))]

    return CosetSpace(n, mr.as_array(reps), locate, g)


def fixed_cosets(cs: CosetSpace, m: Sequence[int]) -> int:
    """Number of cosets Gx with Gxm = Gx."""
    return cs.fixed(m)


def double_cosets(cs: CosetSpace, u_gens: Sequence[Mat],
                  b_gens: Sequence[Mat] = ()) -> tuple[int, int]:
    """(number of double cosets G x U, number of them fixed by right
    multiplication by every element of the group generated by b_gens)."""
    n = cs.n
    for b in b_gens:
        for u in u_gens:
            c = mr.conj(mr.inv(b, n), u, n)
            # b^-1 u b must stay in U; U is small so test via its orbit action
            if not _in_group(c, u_gens, n):
                raise GroupError("B does not normalize U")
    lab = cs.orbits(u_gens)
    total = int(lab.max()) + 1 if len(lab) else 0
    fixed = np.ones(total, dtype=bool)
    for b in b_gens:
        perm = cs.act(b)
        fixed &= _orbit_map_is_identity(lab, perm, total)
    return total, int(fixed.sum())


def _orbit_map_is_identity(lab: np.ndarray, perm: np.ndarray, total: int) -> np.ndarray:
    ok = np.ones(total, dtype=bool)
    moved = lab[perm] != lab
    ok[lab[moved]] = False
    return ok


def _in_group(x: Mat, gens: Sequence[Mat], n: int) -> bool:
    return x in close(GenSet(n, tuple(gens), "GL2"))

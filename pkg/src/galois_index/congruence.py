"""Congruence subgroups of SL2(Z) given by their image mod the level, and
the genus-0/1 classification files.

File format, one record per line after a header line ``genus <g>``::

    label level index genus gen_count a b c d [a b c d ...]

Matrix entries may be negative; they are reduced mod the level on input.
Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path

import numpy as np

from . import group_engine as ge
from . import modring as mr
from .modring import Mat

S = (0, -1, 1, 0)
T = (1, 1, 0, 1)
ST = (1, -1, 1, 0)


class ClassificationError(ValueError):
    pass


@dataclass(frozen=True)
class CongruenceRecord:
    label: str
    level: int
    index: int
    genus: int
    gens: tuple[Mat, ...]


def parse_classification(path: str | Path) -> list[CongruenceRecord]:
    lines = Path(path).read_text().splitlines()
    return parse_lines(lines, str(path))


def parse_lines(lines: list[str], source: str = "<input>") -> list[CongruenceRecord]:
    records: list[CongruenceRecord] = []
    file_genus = None
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if file_genus is None:
            if len(fields) != 2 or fields[0] != "genus":
                raise ClassificationError(f"{source}:{lineno}: expected header 'genus <g>'")
            file_genus = _int(fields[1], source, lineno)
            continue
        if len(fields) < 5:
            raise ClassificationError(f"{source}:{lineno}: too few fields")
        label = fields[0]
        level, index, genus, count = (_int(f, source, lineno) for f in fields[1:5])
        entries = [_int(f, source, lineno) for f in fields[5:]]
        if len(entries) != 4 * count:
            raise ClassificationError(
                f"{source}:{lineno}: expected {4 * count} matrix entries, got {len(entries)}")
        if level < 1:
            raise ClassificationError(f"{source}:{lineno}: bad level {level}")
        if genus != file_genus:
            raise ClassificationError(f"{source}:{lineno}: genus {genus} in a genus {file_genus} file")
        gens = []
        for i in range(count):
            m = mr.reduce(entries[4 * i:4 * i + 4], level)
            if mr.det(m, level) != 1 % level:
                raise ClassificationError(f"{source}:{lineno}: {label}: generator {i + 1} is not in SL2(Z/{level})")
            gens.append(m)
        records.append(CongruenceRecord(label, level, index, genus, tuple(gens)))
    if file_genus is None:
        raise ClassificationError(f"{source}: missing header")
    return records


def _int(s: str, source: str, lineno: int) -> int:
    try:
        return int(s)
    except ValueError:
        raise ClassificationError(f"{source}:{lineno}: not an integer: {s!r}") from None


def format_records(records: list[CongruenceRecord], genus: int) -> str:
    out = [f"genus {genus}"]
    for r in records:
        ents = " ".join(f"{x}" for g in r.gens for x in g)
        out.append(f"{r.label} {r.level} {r.index} {r.genus} {len(r.gens)}" + (f" {ents}" if ents else ""))
    return "\n".join(out) + "\n"


def sl2_cosets(h: ge.GroupTable) -> ge.CosetSpace:
    """Right cosets of h in SL2(Z/n), labelled by a lookup over all of SL2."""
    n = h.n
    amb = mr.all_sl2(n)
    acodes = mr.bencode(amb, n)
    label = np.full(len(acodes), -1, dtype=np.int64)
    hel = h.elements()
    reps = []
    for i in range(len(acodes)):
        if label[i] >= 0:
            continue
        m = amb[i]
        label[np.searchsorted(acodes, mr.bencode(mr.bmul(hel, m, n), n))] = len(reps)
        reps.append(tuple(int(x) for x in m))

    def locate(mats):
        return label[np.searchsorted(acodes, mr.bencode(mats, n))]

    return ge.CosetSpace(n, mr.as_array(reps), locate, h)


class CongruenceSubgroup:
    """The image H of a congruence subgroup (with -I adjoined) in SL2(Z/N0)."""

    def __init__(self, level: int, gens: tuple[Mat, ...] = (), label: str = ""):
        self.level = level
        self.label = label
        n = level
        gs = [mr.reduce(g, n) for g in gens]
        minus = mr.reduce((-1, 0, 0, -1), n)
        if minus != mr.identity(n):
            gs.append(minus)
        self.H = ge.close(ge.GenSet(n, tuple(gs), "SL2"))

    @cached_property
    def cosets(self) -> ge.CosetSpace:
        return sl2_cosets(self.H)

    @property
    def index(self) -> int:
        """Index of H in SL2(Z/N0), equal to the PSL2 index since -I is in H."""
        return mr.sl2_order(self.level) // self.H.order

    @cached_property
    def invariants(self) -> tuple[int, int, int, int, int]:
        cs = self.cosets
        mu = len(cs)
        e2 = cs.fixed(S)
        e3 = cs.fixed(ST)
        einf = int(cs.orbits([T]).max()) + 1
        g = 1 + Fraction(mu, 12) - Fraction(e2, 4) - Fraction(e3, 3) - Fraction(einf, 2)
        if g.denominator != 1 or g < 0:
            raise ArithmeticError(f"non-integral genus {g} for {self.label}")
        return mu, e2, e3, einf, int(g)

    @property
    def genus(self) -> int:
        return self.invariants[4]


def build_subgroup(rec: CongruenceRecord) -> CongruenceSubgroup:
    cs = CongruenceSubgroup(rec.level, rec.gens, rec.label)
    if cs.index != rec.index:
        raise ClassificationError(
            f"{rec.label}: recomputed index {cs.index} differs from recorded {rec.index}")
    return cs


def invariants(cs: CongruenceSubgroup) -> tuple[int, int, int, int, int]:
    """(index, e2, e3, cusps, genus)."""
    return cs.invariants


def exact_level(cs: CongruenceSubgroup) -> int:
    """Smallest d | N0 such that H contains the kernel of reduction mod d."""
    n = cs.level
    level = n
    changed = True
    while changed:
        changed = False
        for p in mr.prime_divisors(level):
            d = level // p
            k = ge.kernel_gens(n, d, "SL2")
            if all(g in cs.H for g in k.gens):
                level = d
                changed = True
                break
    return level


def data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def default_files() -> tuple[Path, Path]:
    d = data_dir() / "classification"
    return d / "genus0.txt", d / "genus1.txt"

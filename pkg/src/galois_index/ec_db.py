"""Elliptic curve tables in Cremona's allcurves format.

    conductor class number [a1,a2,a3,a4,a6] rank torsion

The shipped table covers the conductors that can divide N_max for the levels
met in the pipeline; its extent is recorded in manifest.json next to it.
Ranks come from the table.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import modring as mr

EXPONENT_CAPS = {2: 8, 3: 5}
RANK_PROVENANCE = "rank taken from the Cremona tables (not recomputed)"

_LINE = re.compile(r"(\d+)\s+([a-z]+)\s+(\d+)\s+\[\s*(-?\d+(?:\s*,\s*-?\d+){4})\s*\]\s+(\d+)\s+(\d+)")


class DataError(ValueError):
    pass


class CoverageError(RuntimeError):
    pass


@dataclass(frozen=True)
class CurveRecord:
    conductor: int
    cls: str
    number: int
    ainvs: tuple[int, int, int, int, int]
    rank: int
    torsion: int

    @property
    def class_label(self) -> str:
        return f"{self.conductor}{self.cls}"

    @property
    def label(self) -> str:
        return f"{self.conductor}{self.cls}{self.number}"

    def line(self) -> str:
        a = ",".join(str(x) for x in self.ainvs)
        return f"{self.conductor} {self.cls} {self.number} [{a}] {self.rank} {self.torsion}"


def parse_line(line: str, where: str = "") -> CurveRecord:
    m = _LINE.fullmatch(line.strip())
    if not m:
        raise DataError(f"{where}malformed curve line: {line.strip()!r}")
    N, cls, num, ainv, rank, tors = m.groups()
    a = tuple(int(x) for x in ainv.split(","))
    rec = CurveRecord(int(N), cls, int(num), a, int(rank), int(tors))
    if _disc(a) == 0:
        raise DataError(f"{where}singular curve {rec.label}")
    return rec


def _disc(a) -> int:
    a1, a2, a3, a4, a6 = a
    b2, b4, b6 = a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


@dataclass
class CurveStore:
    records: list[CurveRecord] = field(default_factory=list)
    ceiling: int | None = None
    primes: tuple[int, ...] | None = None

    def __post_init__(self):
        self.by_label: dict[str, CurveRecord] = {}
        self.by_class: dict[str, list[CurveRecord]] = {}
        self.by_conductor: dict[int, list[str]] = {}
        for r in self.records:
            if r.label in self.by_label:
                raise DataError(f"duplicate label {r.label}")
            self.by_label[r.label] = r
            cl = self.by_class.setdefault(r.class_label, [])
            if not cl:
                self.by_conductor.setdefault(r.conductor, []).append(r.class_label)
            cl.append(r)

    def __len__(self) -> int:
        return len(self.records)

    def representative(self, class_label: str) -> CurveRecord:
        try:
            cl = self.by_class[class_label]
        except KeyError:
            raise KeyError(f"unknown class {class_label}") from None
        return min(cl, key=lambda r: r.number)

    def serialize(self) -> str:
        return "".join(r.line() + "\n" for r in self.records)

    def rank_of(self, class_label: str) -> int:
        return self.representative(class_label).rank

    def covers(self, n: int) -> bool:
        if self.ceiling is None:
            return False
        if n > self.ceiling:
            return False
        if self.primes is not None and any(p not in self.primes for p in mr.prime_divisors(n)):
            return False
        return True


def parse_db(files: Iterable[str | Path] | str | Path, ceiling: int | None = None,
             primes: Sequence[int] | None = None) -> CurveStore:
    if isinstance(files, (str, Path)):
        files = [files]
    recs = []
    for f in files:
        for i, line in enumerate(Path(f).read_text().splitlines(), 1):
            if line.strip() and not line.startswith("#"):
                recs.append(parse_line(line, f"{f}:{i}: "))
    return CurveStore(recs, ceiling, tuple(primes) if primes else None)


def load_store(directory: str | Path, verify: bool = True) -> CurveStore:
    d = Path(directory)
    man = json.loads((d / "manifest.json").read_text())
    path = d / man["file"]
    if verify:
        digest = hashlib.sha256(path.read_bytes()).hexdigest()
        if digest != man["sha256"]:
            raise DataError(f"checksum mismatch for {path}")
    return parse_db(path, man["ceiling"], man["primes"])


def n_max(N: int) -> int:
    out = 1
    for p in mr.prime_divisors(N):
        out *= p ** EXPONENT_CAPS.get(p, 2)
    return out


def candidates_for(store: CurveStore, N: int) -> list[str]:
    """Isogeny classes whose conductor divides N_max(N)."""
    bound = n_max(N)
    if N > 1 and not store.covers(bound):
        raise CoverageError(f"curve table does not cover conductors dividing {bound}")
    out = []
    for cond in sorted(store.by_conductor):
        if bound % cond == 0 and N > 1:
            out.extend(store.by_conductor[cond])
    return out


def ap(ainvs, p: int) -> int:
    """a_p by counting affine solutions of the long Weierstrass equation."""
    a1, a2, a3, a4, a6 = (x % p for x in ainvs)
    half = (p - 1) // 2
    count = 1
    for x in range(p):
        # y^2 + (a1 x + a3) y = x^3 + a2 x^2 + a4 x + a6; complete the square
        u = (a1 * x + a3) % p
        rhs = (x * x * x + a2 * x * x + a4 * x + a6) % p
        d = (u * u + 4 * rhs) % p
        if d == 0:
            count += 1
        elif pow(d, half, p) == 1:
            count += 2
    return p + 1 - count


@dataclass
class MatchResult:
    label: str | None
    primes: list[int]
    remaining: list[str]
    ambiguous: bool
    confirmed: list[int] = field(default_factory=list)


def match_jacobian(classes: Sequence[str], store: CurveStore, ap_J: Callable[[int], int],
                   primes: Sequence[int], confirm: int = 5) -> MatchResult:
    """Eliminate classes by comparing a_p along primes until one survives.

    primes is the probe budget in the order to use.  The surviving class is
    then checked at up to `confirm` further primes from the budget.
    """
    left = list(classes)
    if not left:
        raise CoverageError("no classes to match against")
    used: list[int] = []
    k = 0
    while len(left) > 1 and k < len(primes):
        p = primes[k]
        k += 1
        used.append(p)
        target = ap_J(p)
        left = [c for c in left if ap(store.representative(c).ainvs, p) == target]
    if not left:
        raise ArithmeticError("every class was eliminated")
    if len(left) > 1:
        return MatchResult(None, used, left, True)
    res = MatchResult(left[0], used, left, False)
    rep = store.representative(left[0])
    for p in primes[k:k + confirm]:
        if ap(rep.ainvs, p) != ap_J(p):
            raise ArithmeticError(f"class {left[0]} fails confirmation at p = {p}")
        res.confirmed.append(p)
    return res

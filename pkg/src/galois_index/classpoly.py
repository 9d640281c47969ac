"""Hilbert class polynomials.

P_D(x) is the product of x - j(tau) over the reduced primitive forms
(a, b, c) of discriminant D, tau = (-b + sqrt(D)) / 2a.  j is evaluated from
its q-expansion E4^3 / Delta in multiprecision floats and the coefficients
are rounded; the precision doubles until every coefficient rounds cleanly.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from functools import lru_cache
from math import gcd, isqrt
from pathlib import Path

import mpmath


class DiscriminantError(ValueError):
    pass


def is_discriminant(D: int) -> bool:
    return D < 0 and D % 4 in (0, 1)


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    if not is_discriminant(D):
        raise DiscriminantError(f"{D} is not a negative discriminant")
    out = []
    a = 1
    while 3 * a * a <= -D:
        for b in range(-a + 1, a + 1):
            if (b * b - D) % (4 * a):
                continue
            c = (b * b - D) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if gcd(gcd(a, abs(b)), c) != 1:
                continue
            out.append((a, b, c))
        a += 1
    return out


def class_number(D: int) -> int:
    return len(reduced_forms(D))


def _j(tau, prec: int):
    """j(tau) for Im(tau) > 0 from E4^3 / Delta, at the current mp precision."""
    q = mpmath.exp(2j * mpmath.pi * tau)
    aq = abs(q)
    eps = mpmath.mpf(2) ** (-prec - 16)
    # E4 = 1 + 240 sum n^3 q^n / (1 - q^n)
    e4 = mpmath.mpc(1)
    qn = q
    n = 1
    while abs(qn) > eps:
        e4 += 240 * n ** 3 * qn / (1 - qn)
        n += 1
        qn *= q
    # prod (1 - q^n) via the pentagonal number series
    eta = mpmath.mpc(1)
    k = 1
    while True:
        e1 = k * (3 * k - 1) // 2
        if aq ** e1 < eps:
            break
        s = -1 if k % 2 else 1
        eta += s * (q ** e1 + q ** (e1 + k))
        k += 1
    delta = q * eta ** 24
    return e4 ** 3 / delta


def _start_bits(D: int, forms) -> int:
    return 32 + math.ceil(math.pi * math.sqrt(-D) * sum(1 / a for a, _, _ in forms) / math.log(2))


def _poly_at(D: int, forms, bits: int):
    with mpmath.workprec(bits + 20):
        sq = mpmath.sqrt(mpmath.mpf(-D)) * 1j
        roots = []
        for a, b, c in forms:
            if b < 0:
                continue
            jv = _j((-b + sq) / (2 * a), bits)
            roots.append(jv)
            # (a, -b, c) is also reduced and gives the complex conjugate
            if 0 < b < a < c:
                roots.append(mpmath.conj(jv))
        coeffs = [mpmath.mpc(1)]
        for rt in roots:
            new = [mpmath.mpc(0)] * (len(coeffs) + 1)
            for i, cf in enumerate(coeffs):
                new[i] += cf
                new[i + 1] -= cf * rt
            coeffs = new
        out = []
        worst = mpmath.mpf(0)
        for cf in coeffs:
            nearest = int(mpmath.nint(cf.real))
            worst = max(worst, abs(cf.real - nearest), abs(cf.imag))
            out.append(nearest)
        return out, float(worst)


def hilbert_poly(D: int, bits: int | None = None, tol: float = 1e-3) -> tuple[int, ...]:
    """Coefficients of P_D, highest degree first; (1,) if D is not a discriminant."""
    if not is_discriminant(D):
        return (1,)
    return _hilbert_cached(D, bits, tol)


@lru_cache(maxsize=None)
def _hilbert_cached(D: int, bits: int | None, tol: float) -> tuple[int, ...]:
    if bits is None and _DISK is not None:
        hit = _DISK.get(D)
        if hit is not None:
            return hit
    forms = reduced_forms(D)
    bits = bits or _start_bits(D, forms)
    while True:
        coeffs, err = _poly_at(D, forms, bits)
        if err < tol:
            break
        bits *= 2
    out = tuple(coeffs)
    if _DISK is not None:
        _DISK.put(D, out)
    return out


def eval_mod(coeffs, j: int, p: int) -> int:
    acc = 0
    for c in coeffs:
        acc = (acc * j + c) % p
    return acc


class DiskCache:
    """D -> coefficients, one JSON object per file, written atomically."""

    def __init__(self, directory: str | Path):
        self.path = Path(directory) / "classpoly.json"
        self.data: dict[int, tuple[int, ...]] = {}
        if self.path.exists():
            raw = json.loads(self.path.read_text())
            self.data = {int(k): tuple(int(x) for x in v) for k, v in raw.items()}
        self.dirty = False

    def get(self, D: int):
        return self.data.get(D)

    def put(self, D: int, coeffs: tuple[int, ...]) -> None:
        self.data[D] = coeffs
        self.dirty = True

    def flush(self) -> None:
        if not self.dirty:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        raw = {str(k): [str(c) for c in v] for k, v in sorted(self.data.items(), reverse=True)}
        fd, tmp = tempfile.mkstemp(dir=self.path.parent)
        with os.fdopen(fd, "w") as fh:
            json.dump(raw, fh, indent=0)
        os.replace(tmp, self.path)
        self.dirty = False


_DISK: DiskCache | None = None


def use_cache(directory: str | Path | None) -> DiskCache | None:
    global _DISK
    _DISK = DiskCache(directory) if directory else None
    _hilbert_cached.cache_clear()
    return _DISK

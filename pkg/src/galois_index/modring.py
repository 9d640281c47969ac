"""2x2 matrices over Z/nZ.

A matrix is a tuple (a, b, c, d) of residues in [0, n) standing for
[[a, b], [c, d]].  Batches of matrices are int64 arrays of shape (k, 4); the
vectorised helpers at the bottom of the module operate on those and are what
the group machinery uses in its inner loops.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd, prod
from typing import Iterable, Sequence

import numpy as np

Mat = tuple[int, int, int, int]


class ModulusError(ValueError):
    pass


def reduce(m: Sequence[int], n: int) -> Mat:
    a, b, c, d = m
    return (a % n, b % n, c % n, d % n)


def identity(n: int) -> Mat:
    return (1 % n, 0, 0, 1 % n)


def scalar(lam: int, n: int) -> Mat:
    return (lam % n, 0, 0, lam % n)


def det(m: Mat, n: int) -> int:
    a, b, c, d = m
    return (a * d - b * c) % n


def trace(m: Mat, n: int) -> int:
    return (m[0] + m[3]) % n


def mul(x: Mat, y: Mat, n: int) -> Mat:
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % n, (a * f + b * h) % n, (c * e + d * g) % n, (c * f + d * h) % n)


def inv(x: Mat, n: int) -> Mat:
    a, b, c, d = x
    dt = (a * d - b * c) % n
    if gcd(dt, n) != 1:
        raise ModulusError(f"determinant {dt} is not a unit mod {n}")
    u = pow(dt, -1, n) if n > 1 else 0
    return ((d * u) % n, (-b * u) % n, (-c * u) % n, (a * u) % n)


def power(x: Mat, k: int, n: int) -> Mat:
    if k < 0:
        x, k = inv(x, n), -k
    r = identity(n)
    while k:
        if k & 1:
            r = mul(r, x, n)
        x = mul(x, x, n)
        k >>= 1
    return r


def conj(g: Mat, x: Mat, n: int) -> Mat:
    """g x g^-1."""
    return mul(mul(g, x, n), inv(g, n), n)


def commutator(x: Mat, y: Mat, n: int) -> Mat:
    return mul(mul(x, y, n), mul(inv(x, n), inv(y, n), n), n)


def encode(m: Mat, n: int) -> int:
    a, b, c, d = m
    return ((a * n + b) * n + c) * n + d


def decode(code: int, n: int) -> Mat:
    code, d = divmod(code, n)
    code, c = divmod(code, n)
    a, b = divmod(code, n)
    return (a, b, c, d)


def reduce_mod(x: Mat, n: int, m: int) -> Mat:
    if n % m:
        raise ModulusError(f"{m} does not divide {n}")
    return reduce(x, m)


def crt_split(x: Mat, n: int, factors: Sequence[int]) -> list[Mat]:
    _check_factors(n, factors)
    return [reduce(x, q) for q in factors]


def crt_join(parts: Sequence[Mat], factors: Sequence[int]) -> Mat:
    n = prod(factors)
    _check_factors(n, factors)
    out = [0, 0, 0, 0]
    for part, q in zip(parts, factors):
        e = (n // q) * pow(n // q, -1, q) if q > 1 else 0
        for i in range(4):
            out[i] += part[i] * e
    return reduce(out, n)


def _check_factors(n: int, factors: Sequence[int]) -> None:
    if prod(factors) != n:
        raise ModulusError(f"factors {list(factors)} do not multiply to {n}")
    for i, p in enumerate(factors):
        for q in factors[i + 1:]:
            if gcd(p, q) != 1:
                raise ModulusError(f"factors {p} and {q} are not coprime")


def lift_sl2(x: Mat, m: int) -> Mat:
    """An integer matrix of determinant exactly 1 congruent to x mod m.

    x must have determinant 1 mod m.  Reducing the result modulo any multiple
    of m gives an element of SL2 over that ring lying above x.
    """
    a, b, c, d = reduce(x, m)
    if m == 1:
        return (1, 0, 0, 1)
    if (a * d - b * c - 1) % m:
        raise ModulusError("matrix is not in SL2")
    # make (c, d) a primitive integer vector without changing it mod m
    if c == 0:
        c = m
    k = 0
    while gcd(c, d + k * m) != 1:
        k += 1
    d = d + k * m
    # solve a0*d - b0*c = 1 and adjust by a multiple of (c, d)
    g, u, v = _xgcd(d, -c)
    a0, b0 = u * g, v * g
    g, s, t = _xgcd(c, d)
    k = (g * (s * (a - a0) + t * (b - b0))) % m
    return (a0 + k * c, b0 + k * d, c, d)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = +-gcd(a, b)."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def units(n: int) -> list[int]:
    if n == 1:
        return [0]
    return [u for u in range(1, n) if gcd(u, n) == 1]


def gl2_order(n: int) -> int:
    r = n ** 4
    for p in _primes(n):
        r = r * (p - 1) * (p * p - 1) // p ** 3
    return r


def sl2_order(n: int) -> int:
    r = n ** 3
    for p in _primes(n):
        r = r * (p * p - 1) // (p * p)
    return r


def _primes(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


prime_divisors = _primes


def radical(n: int) -> int:
    return prod(_primes(n))


def factor(n: int) -> list[tuple[int, int]]:
    out = []
    for p in _primes(n):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        out.append((p, e))
    return out


# vectorised batch operations

def as_array(mats: Iterable[Sequence[int]]) -> np.ndarray:
    arr = np.array(list(mats), dtype=np.int64)
    return arr.reshape(-1, 4)


def bmul(x: np.ndarray, y: np.ndarray, n: int) -> np.ndarray:
    """Row-wise product of batches; either side may be a single matrix."""
    x = np.asarray(x, dtype=np.int64)
    y = np.asarray(y, dtype=np.int64)
    a, b, c, d = x[..., 0], x[..., 1], x[..., 2], x[..., 3]
    e, f, g, h = y[..., 0], y[..., 1], y[..., 2], y[..., 3]
    return np.stack([(a * e + b * g) % n, (a * f + b * h) % n,
                     (c * e + d * g) % n, (c * f + d * h) % n], axis=-1)


def bdet(x: np.ndarray, n: int) -> np.ndarray:
    return (x[..., 0] * x[..., 3] - x[..., 1] * x[..., 2]) % n


@lru_cache(maxsize=64)
def _inverse_table(n: int) -> np.ndarray:
    table = np.zeros(n, dtype=np.int64)
    for u in units(n):
        table[u] = pow(u, -1, n) if n > 1 else 0
    table.setflags(write=False)
    return table


def binv(x: np.ndarray, n: int) -> np.ndarray:
    dt = bdet(x, n)
    u = _inverse_table(n)[dt]
    return np.stack([(x[..., 3] * u) % n, (-x[..., 1] * u) % n,
                     (-x[..., 2] * u) % n, (x[..., 0] * u) % n], axis=-1)


def bencode(x: np.ndarray, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    return ((x[..., 0] * n + x[..., 1]) * n + x[..., 2]) * n + x[..., 3]


def bdecode(codes: np.ndarray, n: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    d = codes % n
    codes = codes // n
    c = codes % n
    codes = codes // n
    return np.stack([codes // n, codes % n, c, d], axis=-1)


def all_gl2(n: int) -> np.ndarray:
    """Every element of GL2(Z/n) as a (k, 4) array, sorted by code."""
    if n == 1:
        return np.zeros((1, 4), dtype=np.int64)
    r = np.arange(n, dtype=np.int64)
    b, c, d = (x.ravel() for x in np.meshgrid(r, r, r, indexing="ij"))
    rows = []
    for a in range(n):
        ok = np.gcd(a * d - b * c, n) == 1
        rows.append(np.stack([np.full(ok.sum(), a), b[ok], c[ok], d[ok]], axis=-1))
    return np.concatenate(rows)


def all_sl2(n: int) -> np.ndarray:
    """Every element of SL2(Z/n), sorted by code."""
    if n == 1:
        return np.zeros((1, 4), dtype=np.int64)
    r = np.arange(n, dtype=np.int64)
    a, b, c = np.meshgrid(r, r, r, indexing="ij")
    a, b, c = a.ravel(), b.ravel(), c.ravel()
    rows = []
    # solve a*d - b*c = 1 for d; enumerate d directly, n is small
    for d in range(n):
        ok = (a * d - b * c) % n == 1
        rows.append(np.stack([a[ok], b[ok], c[ok], np.full(ok.sum(), d)], axis=-1))
    m = np.concatenate(rows)
    return m[np.argsort(bencode(m, n), kind="stable")]

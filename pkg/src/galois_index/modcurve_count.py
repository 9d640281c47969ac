"""Points of X_G over F_p from Frobenius matrices.

For j in F_p other than 0 and 1728 the points of Y_G above j are the cosets
of G(N) in GL2(Z/N) fixed by right multiplication by the integer matrix
Phi_E built from a_E, Delta_E = a_E^2 - 4p and b_E.  Above j = 0 and 1728 the
automorphism group is bigger and we count its orbits that are fixed by
Frobenius.  When the CM curve is ordinary, E[N] is free of rank one over
Z[omega] or Z[i] mod N and Frobenius acts through the regular representation.
When it is supersingular, Frobenius acts semilinearly on that module and
together with the automorphisms generates a maximal order at every l != p,
so any pair of matrices with the same relations and integrality is conjugate
to the true one.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

from . import classpoly as cp
from . import group_engine as ge
from . import modring as mr
from .modring import Mat


class PrimeError(ValueError):
    pass


def _square_table(p: int) -> np.ndarray:
    chi = -np.ones(p, dtype=np.int64)
    chi[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    chi[0] = 0
    return chi


def weierstrass_b(ainv) -> tuple[int, int, int]:
    a1, a2, a3, a4, a6 = ainv
    return a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6


def discriminant(ainv) -> int:
    a1, a2, a3, a4, a6 = ainv
    b2, b4, b6 = weierstrass_b(ainv)
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    return -b2 * b2 * b8 - 8 * b4 ** 3 - 27 * b6 * b6 + 9 * b2 * b4 * b6


def trace_of_frobenius(ainv, p: int) -> int:
    """p + 1 - #E(F_p) by summing the quadratic character of 4x^3 + b2 x^2 + 2 b4 x + b6."""
    if p < 3:
        raise PrimeError("p must be odd")
    if len(ainv) == 2:
        ainv = (0, 0, 0, ainv[0], ainv[1])
    if discriminant(ainv) % p == 0:
        raise ArithmeticError(f"curve is singular mod {p}")
    b2, b4, b6 = weierstrass_b(ainv)
    x = np.arange(p, dtype=np.int64)
    f = (((4 * x + b2 % p) % p * x + 2 * b4 % p) % p * x + b6 % p) % p
    return -int(_square_table(p)[f].sum())


def _traces_all_j(p: int) -> np.ndarray:
    """a_E for the curve y^2 = x^3 + A x + B attached to each j (0 where undefined)."""
    chi = _square_table(p)
    x = np.arange(p, dtype=np.int64)
    x3 = x * x % p * x % p
    out = np.zeros(p, dtype=np.int64)
    for j in range(p):
        if j in (0, 1728 % p):
            continue
        A, B = _generic_AB(j, p)
        out[j] = -int(chi[(x3 + A * x + B) % p].sum())
    return out


def _generic_AB(j: int, p: int) -> tuple[int, int]:
    k = (1728 - j) % p
    return 3 * j * k % p, 2 * j * k * k % p


def generic_curve(j: int, p: int) -> tuple[int, int]:
    """(A, B) with y^2 = x^3 + A x + B of j-invariant j, for j not 0, 1728."""
    return _generic_AB(j % p, p)


@dataclass(frozen=True)
class FrobeniusData:
    p: int
    j: int
    a: int
    disc: int
    b: int

    @property
    def matrix(self) -> Mat:
        return frobenius_from(self.a, self.b, self.p)


def frobenius_from(a: int, b: int, p: int) -> Mat:
    D = a * a - 4 * p
    t = D // b
    if D % b or (a - t) % 2 or (t * (1 - D // (b * b))) % 4:
        raise ArithmeticError(f"non-integral Frobenius matrix for a={a}, b={b}, p={p}")
    return ((a - t) // 2, t * (1 - D // (b * b)) // 4, b, (a + t) // 2)


def _b_candidates(D: int) -> list[int]:
    out = []
    for b in range(isqrt(abs(D)), 0, -1):
        if D % (b * b) == 0 and (D // (b * b)) % 4 in (0, 1):
            out.append(b)
    return out


def conductor_b(a: int, j: int, p: int) -> int:
    D = a * a - 4 * p
    for b in _b_candidates(D):
        if cp.eval_mod(cp.hilbert_poly(D // (b * b)), j, p) == 0:
            return b
    raise ArithmeticError(f"no class polynomial vanishes at j={j} mod {p}")


def frobenius_matrix(ainv, p: int) -> FrobeniusData:
    if len(ainv) == 2:
        ainv = (0, 0, 0, ainv[0], ainv[1])
    j = j_invariant(ainv, p)
    if j in (0, 1728 % p):
        raise PrimeError("j = 0 or 1728 needs the CM embedding")
    a = trace_of_frobenius(ainv, p)
    b = conductor_b(a, j, p)
    return FrobeniusData(p, j, a, a * a - 4 * p, b)


def j_invariant(ainv, p: int) -> int:
    b2, b4, b6 = weierstrass_b(ainv)
    c4 = b2 * b2 - 24 * b4
    return c4 ** 3 * pow(discriminant(ainv) % p, -1, p) % p


@lru_cache(maxsize=64)
def generic_fibers(p: int) -> tuple[tuple[tuple[int, int], int], ...]:
    """Multiset of (a_E, b_E) over j in F_p minus {0, 1728}."""
    traces = _traces_all_j(p)
    by_a: dict[int, list[int]] = {}
    for j in range(p):
        if j in (0, 1728 % p):
            continue
        by_a.setdefault(int(traces[j]), []).append(j)
    counts: Counter = Counter()
    for a, js in by_a.items():
        D = a * a - 4 * p
        left = list(js)
        for b in _b_candidates(D):
            if not left:
                break
            P = cp.hilbert_poly(D // (b * b))
            hit = [j for j in left if cp.eval_mod(P, j, p) == 0]
            counts[(a, b)] += len(hit)
            left = [j for j in left if cp.eval_mod(P, j, p) != 0]
        if left:
            raise ArithmeticError(f"unresolved j values for a={a} mod {p}")
    return tuple(sorted(counts.items()))


@dataclass(frozen=True)
class CMEmbedding:
    j: int
    p: int
    aut: Mat
    frob: Mat


def two_squares(p: int) -> tuple[int, int]:
    for x in range(1, isqrt(p) + 1):
        y = isqrt(p - x * x)
        if x * x + y * y == p:
            return x, y
    raise ArithmeticError(f"{p} is not a sum of two squares")


def _ordinary_1728(p: int, N: int) -> CMEmbedding:
    a = trace_of_frobenius((-1, 0), p)
    x, y = two_squares(p)
    # a = 2x up to swapping x, y and signs
    for xx, yy in ((x, y), (y, x)):
        for s in (1, -1):
            if 2 * s * xx == a:
                frob = (s * xx, -yy, yy, s * xx)
                return CMEmbedding(1728 % p, p, mr.reduce((0, -1, 1, 0), N), mr.reduce(frob, N))
    raise ArithmeticError(f"trace normalisation failed for j=1728, p={p}")


def _ordinary_0(p: int, N: int) -> CMEmbedding:
    a = trace_of_frobenius((0, -1), p)
    for x in range(-isqrt(4 * p), isqrt(4 * p) + 1):
        y = 2 * x - a
        if x * x - x * y + y * y == p:
            frob = (x, -y, y, x - y)
            return CMEmbedding(0, p, mr.reduce((0, 1, -1, 1), N), mr.reduce(frob, N))
    raise ArithmeticError(f"trace normalisation failed for j=0, p={p}")


def _supersingular_1728(p: int, N: int) -> CMEmbedding:
    # basis P, iP; Frobenius is x -> beta * conj(x) with N(beta) = -p, i.e.
    # (u, v; v, -u) with u^2 + v^2 = -p.  Solving mod 4N makes the 2-adic
    # part the reduction of a genuine root.
    M = 4 * N if N % 2 == 0 else N
    roots: dict[int, int] = {}
    for u in range(M):
        roots.setdefault(u * u % M, u)
    for v in range(M):
        u = roots.get((-p - v * v) % M)
        if u is not None:
            return CMEmbedding(1728 % p, p, mr.reduce((0, -1, 1, 0), N), mr.reduce((u, v, v, -u), N))
    raise ArithmeticError(f"no supersingular Frobenius for j=1728, p={p}, N={N}")


def _supersingular_0(p: int, N: int) -> CMEmbedding:
    # basis P, wP with w = (0,-1;1,-1); Frobenius is x -> beta * conj(x),
    # N(beta) = -p.  On y^2 = x^3 + 1 the kernel of 1 - w is rational, so
    # (F - 1)(2 + w) = 0 mod 3, which pins down the order at 3.
    w = (0, -1, 1, -1)
    conj = (1, -1, 0, -1)
    for b1 in range(N):
        for b0 in range(N):
            if (b0 * b0 - b0 * b1 + b1 * b1 + p) % N:
                continue
            frob = mr.mul((b0, -b1, b1, b0 - b1), conj, N)
            if N % 3 == 0:
                e = mr.mul(mr.reduce((frob[0] - 1, frob[1], frob[2], frob[3] - 1), 3), (2, 2, 1, 1), 3)
                if e != (0, 0, 0, 0):
                    continue
            return CMEmbedding(0, p, mr.reduce((0, 1, -1, 1), N), frob)
    raise ArithmeticError(f"no supersingular Frobenius for j=0, p={p}, N={N}")


def cm_embedding(j: int, p: int, N: int) -> CMEmbedding:
    """Automorphism generator and Frobenius on E[N] for j = 0 or 1728."""
    if p < 5:
        raise PrimeError("p must be at least 5")
    if j == 1728 % p:
        return _ordinary_1728(p, N) if p % 4 == 1 else _supersingular_1728(p, N)
    if j == 0:
        return _ordinary_0(p, N) if p % 3 == 1 else _supersingular_0(p, N)
    raise PrimeError("j must be 0 or 1728")


def check_prime(p: int, N: int) -> None:
    if p < 5 or N % p == 0 or not _is_prime(p):
        raise PrimeError(f"prime {p} is not admissible for level {N} (need p prime, p not dividing 6N)")


def _is_prime(p: int) -> bool:
    return p > 1 and all(p % q for q in range(2, isqrt(p) + 1))


def admissible_primes(N: int, count: int, start: int = 5) -> list[int]:
    out = []
    p = start
    while len(out) < count:
        if p >= 5 and N % p and _is_prime(p):
            out.append(p)
        p += 1
    return out


def special_fiber(cosets: ge.CosetSpace, emb: CMEmbedding) -> int:
    _, fixed = ge.double_cosets(cosets, [emb.aut], [emb.frob])
    return fixed


def count_X_Fp(c, p: int) -> int:
    """|X_G(F_p)| for a candidate group (anything with N, cosets and cusps)."""
    N = c.N
    check_prime(p, N)
    cs = c.cosets
    total = 0
    for (a, b), mult in generic_fibers(p):
        total += mult * cs.fixed(mr.reduce(frobenius_from(a, b, p), N))
    for j in (0, 1728 % p):
        total += special_fiber(cs, cm_embedding(j, p, N))
    return total + c.cusps("F_p", p)


def ap_J(c, p: int) -> int:
    return p + 1 - count_X_Fp(c, p)

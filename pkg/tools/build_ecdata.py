"""Extract the curve table shipped with the package from PARI's elldata.

The elldata files are GP lists of [conductor, [label, ainvs, gens], ...].
We keep conductors up to 62208 whose prime support lies in the primes that
occur in levels of genus <= 1 congruence subgroups, with the exponent caps
2^8, 3^5 and p^2 for other primes.  Rank is the number of generators of the
first curve in the class; torsion is computed here by Lutz-Nagell.

    python3 tools/build_ecdata.py /path/to/pari/elldata data/ecdata
"""

import hashlib
import json
import re
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

CEILING = 62208
PRIMES = (2, 3, 5, 7, 11, 13, 17, 19)
CAPS = {2: 8, 3: 5}


def admissible(n):
    for p in PRIMES:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e > CAPS.get(p, 2):
            return False
    return n == 1


def short_model(a):
    a1, a2, a3, a4, a6 = a
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    return -27 * c4, -54 * c6


def add(P, Q, A):
    if P is None:
        return Q
    if Q is None:
        return P
    (x1, y1), (x2, y2) = P, Q
    if x1 == x2 and y1 == -y2:
        return None
    if P == Q:
        lam = (3 * x1 * x1 + A) / (2 * y1)
    else:
        lam = (y2 - y1) / (x2 - x1)
    x3 = lam * lam - x1 - x2
    return x3, lam * (x1 - x3) - y1


def torsion_order(a):
    A, B = short_model(a)
    disc = abs(4 * A ** 3 + 27 * B ** 2)
    # disc is supported on PRIMES, so its square divisors are easy to list
    ys = [1]
    rest = disc
    for p in PRIMES:
        e = 0
        while rest % p == 0:
            rest //= p
            e += 1
        ys = [y * p ** k for y in ys for k in range(e // 2 + 1)]
    assert rest == 1
    pts = []
    for y in [0] + ys:
        # integer roots of x^3 + A x + B - y^2, located numerically then checked exactly
        c = B - y * y
        for r in np.roots([1.0, 0.0, float(A), float(c)]):
            if abs(r.imag) > 1e-6 * (1 + abs(r)):
                continue
            for xc in {int(np.floor(r.real)), int(np.ceil(r.real))}:
                if xc ** 3 + A * xc + c == 0:
                    pts.extend({(xc, y), (xc, -y)})
    count = 1
    for xp, yp in set(pts):
        P = (Fraction(xp), Fraction(yp))
        Q = P
        for _ in range(12):
            Q = add(Q, P, A)
            if Q is None:
                count += 1
                break
            if Q[0].denominator != 1 or Q[1].denominator != 1:
                break
    return count


def main(src, dst):
    src, dst = Path(src), Path(dst)
    lines = []
    for k in range(CEILING // 1000 + 1):
        text = (src / f"ell{k}").read_text()
        text = text.replace("/", ",")
        for entry in eval(text):
            N = entry[0]
            if N > CEILING or not admissible(N):
                continue
            ranks = {}
            for label, ainvs, gens in entry[1:]:
                m = re.fullmatch(r"(\d+)([a-z]+)(\d+)", label)
                cls, num = m.group(2), int(m.group(3))
                ranks.setdefault(cls, len(gens))
                t = torsion_order(ainvs)
                ainv = ",".join(str(c) for c in ainvs)
                lines.append((N, cls, num, f"{N} {cls} {num} [{ainv}] {ranks[cls]} {t}"))
    lines.sort(key=lambda r: (r[0], len(r[1]), r[1], r[2]))
    body = "".join(r[3] + "\n" for r in lines)
    dst.mkdir(parents=True, exist_ok=True)
    (dst / "allcurves.txt").write_text(body)
    manifest = {
        "file": "allcurves.txt",
        "sha256": hashlib.sha256(body.encode()).hexdigest(),
        "ceiling": CEILING,
        "primes": list(PRIMES),
        "exponent_caps": {"2": 8, "3": 5, "other": 2},
        "source": "PARI elldata (Cremona tables), curves re-emitted in allcurves format",
    }
    (dst / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(len(lines), "curves")


if __name__ == "__main__":
    main(*sys.argv[1:3])

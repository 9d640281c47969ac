"""Count points on X0(11) over F_p and compare with the curve 11a.

The Borel subgroup mod 11 gives the modular curve X0(11), which is the
elliptic curve 11a.  Counting fixed cosets of Frobenius matrices, plus the
two CM fibres and the cusps, must reproduce its traces of Frobenius.
"""

from galois_index import candidates as cand
from galois_index import ec_db
from galois_index import modcurve_count as mc

g = cand.borel(11)
print(f"level {g.N}, {len(g.cosets)} cosets, {g.cusps()} cusps, real: {g.real}")

curve_11a = (0, -1, 1, -10, -20)
print(" p   #X(F_p)  a_p(X)  a_p(11a)")
for p in mc.admissible_primes(11, 8):
    n = mc.count_X_Fp(g, p)
    print(f"{p:3d}  {n:7d}  {p + 1 - n:6d}  {ec_db.ap(curve_11a, p):8d}")

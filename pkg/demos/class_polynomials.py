"""Hilbert class polynomials and their role in pinning down Frobenius.

For a curve over F_p with trace a, the endomorphism ring is an order of
discriminant (a^2 - 4p)/b^2 for some b; b is found by testing which class
polynomial vanishes at j.
"""

from galois_index import classpoly as cp
from galois_index import modcurve_count as mc

for D in (-3, -4, -7, -8, -11, -15, -16, -23):
    print(f"P_{D}: h = {cp.class_number(D)}, coefficients {cp.hilbert_poly(D)}")

p = 97
print(f"\nover F_{p}:")
for j in (5, 17, 40):
    A, B = mc.generic_curve(j, p)
    fd = mc.frobenius_matrix((A, B), p)
    print(f"  j = {j}: a = {fd.a}, a^2 - 4p = {fd.disc}, b = {fd.b}, Frobenius matrix {fd.matrix}")

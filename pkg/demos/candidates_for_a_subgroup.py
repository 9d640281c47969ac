"""Walk one genus-0 congruence subgroup through the pipeline.

Pick a record from the shipped classification, build its image in SL2,
list the agreeable groups G over it, and for the real ones compute the
commutator index and the cusp counts.
"""

import sys

from galois_index import candidates as cand
from galois_index import congruence as cg
from galois_index import index_calc as ic

label = sys.argv[1] if len(sys.argv) > 1 else "4A0"
g0, g1 = cg.default_files()
recs = {r.label: r for path in (g0, g1) for r in cg.parse_classification(path)}
rec = recs[label]
cs = cg.build_subgroup(rec)
mu, e2, e3, cusps, genus = cs.invariants
print(f"{label}: level {rec.level}, index {mu}, e2={e2} e3={e3} cusps={cusps} genus={genus}")

try:
    ctx = cand.build_context(cs)
except cand.Incompatible:
    sys.exit(f"{label}: a scalar of order two falls outside H, so there is nothing to do")

cands = cand.enumerate_candidates(ctx)
reps = cand.class_representatives(cands)
print(f"working at level {ctx.N}; |C| = {ctx.quotient.order}; {len(cands)} groups in {len(reps)} classes")
for k, c in enumerate(reps):
    line = f"  class {k}: size {c.extra['class_size']}, real {c.real}"
    if c.real:
        cert = ic.candidate_index(c)
        qp = {p: c.cusps("Q_p", p) for p in ic.mr.prime_divisors(c.N)}
        line += f", n = {cert.n} (certified at level {cert.M}), rational cusps {c.cusps('Q')}, Q_p cusps {qp}"
    print(line)

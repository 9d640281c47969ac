"""The normalizer of a nonsplit Cartan subgroup mod 11.

Its modular curve has genus one.  We compute the commutator index, count
points over a few primes, and find the isogeny class of the Jacobian in the
shipped curve table by comparing traces.
"""

from galois_index import candidates as cand
from galois_index import ec_db
from galois_index import index_calc as ic
from galois_index import modcurve_count as mc
from galois_index import pipeline as pl
from galois_index.congruence import data_dir

N, table = pl.reference_group("G1")
g = cand.OpenGroup(N, table.gens.gens, "G1")
print(f"|G(11)| = {table.order}, cosets {len(g.cosets)}, real {g.real}, cusps over Q {g.cusps('Q')}")

cert = ic.profinite_index(g.generators(), N)
print(f"commutator index {cert.index}, n = {cert.n}")

store = ec_db.load_store(data_dir() / "ecdata")
classes = ec_db.candidates_for(store, N)
primes = mc.admissible_primes(N, pl.PRIME_BUDGET)
res = ec_db.match_jacobian(classes, store, lambda p: mc.ap_J(g, p), primes, pl.CONFIRM)
print(f"{len(classes)} classes with conductor dividing {ec_db.n_max(N)}; "
      f"probes {res.primes} leave {res.label}, confirmed at {res.confirmed}")
print(f"rank of {res.label}: {store.rank_of(res.label)}")

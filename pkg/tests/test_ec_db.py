import hashlib
import json

import pytest
from hypothesis import given, strategies as st

from galois_index import ec_db

import oracles

LINES = """\
11 a 1 [0,-1,1,-10,-20] 0 5
11 a 2 [0,-1,1,-7820,-263580] 0 1
11 a 3 [0,-1,1,0,0] 0 5
37 a 1 [0,0,1,-1,0] 1 1
37 b 1 [0,1,1,-23,-50] 0 3
"""


@pytest.fixture
def store(tmp_path):
    f = tmp_path / "curves.txt"
    f.write_text(LINES)
    return ec_db.parse_db(f, ceiling=2000, primes=(11, 37))


def test_parse_and_index(store):
    assert len(store) == 5
    assert store.by_conductor[11] == ["11a"]
    assert store.by_conductor[37] == ["37a", "37b"]
    assert store.representative("11a").label == "11a1"
    assert store.rank_of("37a") == 1 and store.rank_of("37b") == 0
    with pytest.raises(KeyError):
        store.representative("13a")


def test_serialize_roundtrip(store, tmp_path):
    f = tmp_path / "again.txt"
    f.write_text(store.serialize())
    again = ec_db.parse_db(f)
    assert again.records == store.records
    assert store.serialize() == LINES


@pytest.mark.parametrize("line,msg", [
    ("11 a 1 [0,-1,1,-10] 0 5", "malformed"),
    ("11 a x [0,-1,1,-10,-20] 0 5", "malformed"),
    ("11 a 1 [0,0,0,0,0] 0 1", "singular"),
])
def test_bad_lines(line, msg):
    with pytest.raises(ec_db.DataError, match=msg):
        ec_db.parse_line(line)


def test_duplicate_label(tmp_path):
    f = tmp_path / "dup.txt"
    f.write_text(LINES + "11 a 1 [0,-1,1,-10,-20] 0 5\n")
    with pytest.raises(ec_db.DataError, match="duplicate"):
        ec_db.parse_db(f)


def test_manifest_checksum(tmp_path):
    f = tmp_path / "allcurves.txt"
    f.write_text(LINES)
    man = {"file": "allcurves.txt", "sha256": hashlib.sha256(LINES.encode()).hexdigest(),
           "ceiling": 100, "primes": [11, 37]}
    (tmp_path / "manifest.json").write_text(json.dumps(man))
    assert len(ec_db.load_store(tmp_path)) == 5
    f.write_text(LINES.replace("37 b", "38 b"))
    with pytest.raises(ec_db.DataError, match="checksum"):
        ec_db.load_store(tmp_path)


def test_n_max():
    assert ec_db.n_max(11) == 121
    assert ec_db.n_max(24) == 2 ** 8 * 3 ** 5
    assert ec_db.n_max(15) == 3 ** 5 * 5 ** 2 == 6075


def test_coverage(store):
    assert ec_db.candidates_for(store, 37) == ["37a", "37b"]
    with pytest.raises(ec_db.CoverageError):
        ec_db.candidates_for(store, 13)


@given(st.sampled_from([5, 7, 13, 17, 19, 23]), st.tuples(*[st.integers(-20, 20)] * 5))
def test_ap_against_naive(p, ainv):
    if ec_db._disc(ainv) % p == 0:
        return
    assert ec_db.ap(ainv, p) == p + 1 - oracles.points_naive(ainv, p)


def test_match_jacobian(store):
    target = store.representative("37a").ainvs
    primes = [13, 37 + 24, 73, 97, 109, 157, 181]
    primes = [p for p in primes if p != 37]
    res = ec_db.match_jacobian(["11a", "37a", "37b"], store, lambda p: ec_db.ap(target, p), primes, 3)
    assert res.label == "37a" and not res.ambiguous
    assert len(res.confirmed) == 3
    with pytest.raises(ArithmeticError):
        ec_db.match_jacobian(["11a", "37b"], store, lambda p: ec_db.ap(target, p), primes)
    # no primes at all leaves the choice open
    res = ec_db.match_jacobian(["37a", "37b"], store, lambda p: 0, [])
    assert res.ambiguous and res.remaining == ["37a", "37b"]


def test_isogenous_curves_share_traces(store):
    a = [c.ainvs for c in store.by_class["11a"]]
    for p in (13, 17, 19, 23, 29):
        assert len({ec_db.ap(x, p) for x in a}) == 1

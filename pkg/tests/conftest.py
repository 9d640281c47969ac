import os
import sys
from pathlib import Path

import pytest
from hypothesis import settings

from galois_index import congruence, ec_db

# timings on a shared single core are noisy; correctness is what is tested
settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def classification():
    g0, g1 = congruence.default_files()
    return congruence.parse_classification(g0), congruence.parse_classification(g1)


@pytest.fixture(scope="session")
def by_label(classification):
    return {r.label: r for recs in classification for r in recs}


@pytest.fixture(scope="session")
def cache_dir():
    # full runs are slow on small machines; reuse results between sessions
    d = os.environ.get("GALOIS_INDEX_CACHE")
    p = Path(d) if d else Path(__file__).resolve().parent.parent / ".cache"
    p.mkdir(parents=True, exist_ok=True)
    return p


@pytest.fixture(scope="session")
def shipped_store():
    return ec_db.load_store(congruence.data_dir() / "ecdata")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(mod.LINES):
        terminalreporter.write_line(line)

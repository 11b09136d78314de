import os

import pytest

from bpksharp import scheme
from bpksharp.algebra import SeededRng

# Statistical harness knobs.
TRIALS = int(os.environ.get("BPK_TRIALS", "1000"))
SEED = os.environ.get("BPK_SEED", "bpk-sharp-tests")


@pytest.fixture
def rng(request):
    return SeededRng(f"{SEED}/{request.node.nodeid}")


@pytest.fixture(scope="session")
def pp():
    return scheme.setup(seed=b"test-params")


@pytest.fixture(scope="session")
def master(pp):
    return scheme.keygen(pp, SeededRng("master"))


@pytest.fixture(scope="session")
def users(pp, master):
    rng = SeededRng("users")
    return [scheme.keygen_user(pp, master.msk, rng) for _ in range(4)]


@pytest.fixture(scope="session")
def sps(pp, master):
    rng = SeededRng("sps")
    return [scheme.keygen_sp(pp, master.msk, rng) for _ in range(3)]


@pytest.fixture(scope="session")
def honest(pp, master, users, sps):
    """One honest (user, sp, nym, proof) tuple."""
    user, sp = users[0], sps[0]
    nym, proof = scheme.nymgen_user(pp, user, master.mpk, sp.sppk, SeededRng("honest"))
    return user, sp, nym, proof


# One line per acceptance criterion, echoed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)

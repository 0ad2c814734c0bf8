import pytest

from morsecensus.acampo import load_fixture
from morsecensus.vmcore import Kind, make_state

SEED_R = (2, 2, 2, 2, -2, -2, -2, -2, -2)


@pytest.fixture
def seed_a():
    return load_fixture("x9plus-m7-a")


@pytest.fixture
def seed_b():
    return load_fixture("x9plus-m7-b")


def isolated_state(kinds=(0, 0, 0, 0, 0, 1, 1, 1, 1), q=0, ptype="x9plus"):
    n = len(kinds)
    A = [[-2 if i == j else 0 for j in range(n)] for i in range(n)]
    r = [2 if k == Kind.MIN else -2 for k in kinds]
    return make_state(ptype, A, r, kinds, q)


def entry_growth_state(seed):
    """Seed variant whose first pair move produces an entry of size 3."""
    A = [list(row) for row in seed.matrix]
    A[6][7] = A[7][6] = A[6][8] = A[8][6] = -2
    A[5][6] = A[6][5] = 1
    return make_state(seed.ptype, A, seed.r, seed.kinds, seed.q)


# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

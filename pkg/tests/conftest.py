from pathlib import Path

import pytest

from flowmc.netio import load_pnwt
from flowmc.sdn import parse_network

DATA = Path(__file__).resolve().parent.parent / "data"

AIRPORT_GOLDEN = "G F check -> A (airport -> (G !(cp1 || cp2 || booth) && F terminal))"


@pytest.fixture(scope="session")
def airport():
    return load_pnwt((DATA / "airport.pnwt").read_text())


@pytest.fixture(scope="session")
def diamond_spec():
    return parse_network((DATA / "diamond.net").read_text())


@pytest.fixture
def data_dir():
    return DATA


# criterion number -> one-line outcome, filled in by test_acceptance.py
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

from pathlib import Path

import pytest

from regionminer.eventlog import parse_trace_log

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def l1_text() -> str:
    return (DATA / "l1.log").read_text()


@pytest.fixture(scope="session")
def l1_prime_text() -> str:
    return (DATA / "l1_prime.log").read_text()


@pytest.fixture(scope="session")
def l1(l1_text):
    return parse_trace_log(l1_text)


@pytest.fixture(scope="session")
def l1_prime(l1_prime_text):
    return parse_trace_log(l1_prime_text)

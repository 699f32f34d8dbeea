import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_matrix(rng, k):
    return rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k))


ACCEPTANCE: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line: criterion(number, title, ok, detail)."""

    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {title}  {detail}".rstrip())
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)

import numpy as np
import pytest

from gmcpos.mapio import OccupancyGrid, parse_ascii

ACCEPTANCE: list[tuple[str, bool, str]] = []


def grid_from(text: str, resolution: float = 1.0, origin=(0.0, 0.0)) -> OccupancyGrid:
    rows = [line.strip() for line in text.strip().splitlines()]
    return parse_ascii(f"resolution: {resolution}\norigin: {origin[0]} {origin[1]}\n" + "\n".join(rows))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")

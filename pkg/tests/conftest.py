import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from omsqueeze.model import SystemParams  # noqa: E402
from omsqueeze.spectra import LorentzianBath  # noqa: E402


@pytest.fixture
def fig2_params():
    return SystemParams(g=0.15, G=0.15, r=0.2, delta_c=3.5)


@pytest.fixture
def corner_params():
    return SystemParams(g=0.2, G=0.2, r=0.2, delta_c=3.5)


@pytest.fixture
def baths():
    return LorentzianBath(1e-3, 1e-2, label="a"), LorentzianBath(1.5e-3, 1.5e-2, label="c")


ACCEPTANCE_LINES: list[str] = []


def record_acceptance(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

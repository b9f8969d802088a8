from pathlib import Path

import pytest

from covertree_forensics.graph import generate_bichromatic, generate_tall_imbalanced

HERE = Path(__file__).resolve().parent
GOLDEN = HERE / "golden"
FIXTURES = HERE / "fixtures"


@pytest.fixture(scope="session")
def tall11():
    return generate_tall_imbalanced(11)


@pytest.fixture(scope="session")
def bichromatic12():
    return generate_bichromatic(12)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

import sys

import numpy as np
import pytest

from wiretap.errors import set_size_cap


@pytest.fixture(autouse=True)
def _default_cap(monkeypatch):
    monkeypatch.delenv("WIRETAP_SIZE_CAP", raising=False)
    set_size_cap(None)
    yield
    set_size_cap(None)


@pytest.fixture
def rng():
    return np.random.default_rng([2024, 0])


def pytest_terminal_summary(terminalreporter):
    lines = {}
    for name, mod in list(sys.modules.items()):
        if name.endswith("test_acceptance"):
            lines.update(getattr(mod, "LINES", {}))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])

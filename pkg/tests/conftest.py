import os

import numpy as np
import pytest
from hypothesis import settings

SEED = int(os.environ.get("OPINDEX_SEED", 20240601))

settings.register_profile("opindex", derandomize=True, deadline=None, max_examples=40,
                          print_blob=True)
settings.load_profile("opindex")

ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, label = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {k}: {label}")

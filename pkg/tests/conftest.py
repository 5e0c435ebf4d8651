import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from probseg import AudioSpec, ProbStream  # noqa: E402


@pytest.fixture
def spec():
    return AudioSpec()


@pytest.fixture
def make_stream():
    def make(values, rec="rec"):
        return ProbStream(np.asarray(values, dtype=np.float32), AudioSpec(), rec)

    return make


def pytest_terminal_summary(terminalreporter):
    results = getattr(sys.modules.get("test_acceptance"), "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])

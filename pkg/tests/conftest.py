import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("default", deadline=None, max_examples=50)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.load_profile("default")

# generate_network("full", 6, "uniform02", SIZE6_SEED) has the unique
# optimal partition {1,2,5} / {0,3,4}, found by enumeration over seeds
SIZE6_SEED = 5


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running benchmark (minutes)")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE = {}


@pytest.fixture
def criterion(capsys):
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def report(number, ok, detail):
        line = f"[criterion {number:>2}] {'PASS' if ok else 'FAIL'}: {detail}"
        ACCEPTANCE[number] = line
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])

import pytest

from mlfactor.search import Verdict

_acceptance = []


class GroundTruthClassifier:
    """Stand-in classifier that answers from the known factors."""

    def __init__(self, p, q, accuracy=1.0):
        self.p, self.q, self.accuracy = p, q, accuracy
        self.calls = []

    def __call__(self, n, interval, depth, side):
        self.calls.append((depth, side, interval))
        return Verdict(self.accuracy, interval.contains_open(self.p, self.q))


class FixedClassifier:
    """Returns canned verdicts keyed by side."""

    def __init__(self, lower, upper):
        self.verdicts = {"lower": lower, "upper": upper}

    def __call__(self, n, interval, depth, side):
        return self.verdicts[side]


@pytest.fixture
def oracle_factory():
    return GroundTruthClassifier


@pytest.fixture
def fixed_factory():
    return FixedClassifier


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = item.get_closest_marker("criterion")
    if crit is not None and (rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed")):
        _acceptance.append((crit.args[0], crit.args[1], rep.outcome, rep.duration))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, outcome, dur in sorted(_acceptance):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"AC{num:<3} {status}  {title}  ({dur:.1f}s)")

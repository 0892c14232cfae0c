from fractions import Fraction

import pytest

from fracsieve.params import SieveParams
from fracsieve.sequence import make_polynomial


@pytest.fixture(scope="session")
def square():
    return make_polynomial([1, 0, 0])


@pytest.fixture(scope="session")
def params2():
    return SieveParams(gamma=Fraction(2))


@pytest.fixture(scope="session")
def params2_paper():
    return SieveParams(gamma=Fraction(2), h_mode="paper")


@pytest.fixture(scope="session")
def small_params():
    # c small enough that l_64 <= 20, so brute force over all of [0, 1) is cheap
    return SieveParams(gamma=Fraction(2), c_mode="custom", c_value=Fraction(2, 5), n_start=8)


# --- acceptance summary -----------------------------------------------------------

def pytest_configure(config):
    config._acceptance_lines = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(item.user_properties).get("detail", "")
        if report.outcome != "passed" and call.excinfo is not None:
            detail = (detail + " | " if detail else "") + call.excinfo.exconly().splitlines()[0][:200]
        item.config._acceptance_lines.append(
            f"{marker.args[0]:<26} {'PASS' if report.outcome == 'passed' else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)

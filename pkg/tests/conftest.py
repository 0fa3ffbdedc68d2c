import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

ROOT = Path(__file__).resolve().parent.parent
TOY = ROOT / "data" / "toy"

# criterion number -> list of (test id, outcome)
_ACCEPTANCE: dict[int, list[tuple[str, str]]] = {}


@pytest.fixture(scope="session")
def toy_dir() -> Path:
    return TOY


def pytest_runtest_logreport(report):
    marker = dict(report.user_properties).get("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ACCEPTANCE.setdefault(marker, []).append((report.nodeid, report.outcome))


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            item.user_properties.append(("criterion", m.args[0]))


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    from test_acceptance import TITLES

    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        outcomes = [o for _, o in _ACCEPTANCE[n]]
        if "failed" in outcomes:
            status = "FAIL"
        elif all(o == "skipped" for o in outcomes):
            status = "SKIP"
        else:
            status = "PASS"
        terminalreporter.write_line(f"criterion {n}: {status}  {TITLES[n]}")

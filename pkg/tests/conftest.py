import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# acceptance bookkeeping: criterion id -> [title, passed so far]
_CRITERIA: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion exercised by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    cid, title = crit
    entry = _CRITERIA.setdefault(cid, [title, True])
    if report.failed or (report.when == "call" and report.skipped):
        entry[1] = False


def _order(cid):
    num = "".join(ch for ch in cid if ch.isdigit())
    return int(num), cid


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA, key=_order):
        title, ok = _CRITERIA[cid]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {cid}: {title}")

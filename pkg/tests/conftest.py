"""Shared pytest hooks: the acceptance criteria get one summary line each."""

import pytest

CRITERIA = {
    "A1": "algebra dimensions",
    "A2": "oracle equivalence",
    "A3": "exact noisy simulation",
    "A4": "gradients",
    "A5": "magic-state demo",
    "A6": "overparametrization transition",
    "A7": "compilation scaling",
    "A8": "compilation faithfulness",
    "A9": "Anderson localization",
    "A10": "QAOA pre-training",
    "A11": "LTFIM pre-training",
    "A12": "phase classifier",
    "A13": "performance envelope",
}

_outcomes: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(criterion): end-to-end acceptance criterion A1..A13")


@pytest.fixture
def record(request):
    """Attach ``key=value`` measurements to the acceptance summary line of this test."""

    def add(**values):
        for k, v in values.items():
            request.node.user_properties.append((k, v))

    return add


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    crit = marker.args[0]
    entry = _outcomes.setdefault(crit, {"passed": True, "seconds": 0.0, "notes": []})
    if report.when == "call":
        entry["seconds"] += report.duration
    if report.failed or (report.when == "call" and report.skipped):
        entry["passed"] = False
    if report.when == "teardown":
        entry["notes"] += [f"{k}={_fmt(v)}" for k, v in item.user_properties]


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_fmt(x)}" for k, x in v.items()) + "}"
    return str(v)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, title in CRITERIA.items():
        entry = _outcomes.get(crit)
        if entry is None:
            tr.write_line(f"{crit:<4} NOT RUN  {title}")
            continue
        status = "PASS" if entry["passed"] else "FAIL"
        notes = "; ".join(entry["notes"])
        tr.write_line(f"{crit:<4} {status:<8} {title} ({entry['seconds']:.1f} s) {notes}".rstrip())

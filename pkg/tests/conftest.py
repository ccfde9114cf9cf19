import pytest

CRITERIA = {
    1: "schouten axioms",
    2: "rank 2 and rank 4 affine examples",
    3: "spectral check of delta and Delta for (2,5,11)",
    4: "alpha0 decomposition round trip",
    5: "formal linearization",
    6: "pull-back tangent spaces coincide",
    7: "section space dimensions and descent",
    8: "cli contract",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion this test belongs to")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    k = report.user_properties and dict(report.user_properties).get("criterion")
    if k:
        _outcomes.setdefault(k, []).append(report.outcome == "passed")


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker:
        record_property("criterion", marker.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k not in _outcomes:
            continue
        results = _outcomes[k]
        status = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(
            f"criterion {k} [{CRITERIA[k]}]: {status} ({sum(results)}/{len(results)} checks)")

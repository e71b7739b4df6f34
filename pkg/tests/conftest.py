import re

_results: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = ""
        for name, text in report.user_properties:
            if name == "detail":
                detail = text
        _results.setdefault(int(m.group(1)), []).append((report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_results):
        outcomes = _results[crit]
        ok = all(o == "passed" for o, _ in outcomes)
        details = "; ".join(d for _, d in outcomes if d)
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}" + (f"  ({details})" if details else ""))

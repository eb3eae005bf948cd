"""Prints one pass/fail line per acceptance criterion at the end of the run."""

_CRITERIA = {}


def pytest_collection_modifyitems(items):
    for item in items:
        line = getattr(item.function, "criterion", None)
        if line:
            _CRITERIA[item.nodeid] = line


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    verdict = {line: "SKIP" for line in _CRITERIA.values()}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            line = _CRITERIA.get(rep.nodeid)
            if line is None or (key == "passed" and rep.when != "call"):
                continue
            if key != "passed":
                verdict[line] = "FAIL"
            elif verdict[line] == "SKIP":
                verdict[line] = "PASS"
    terminalreporter.section("acceptance")
    for line in sorted(verdict):
        terminalreporter.write_line(f"{verdict[line]}  {line}")

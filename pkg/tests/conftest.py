ACCEPTANCE = {}  # criterion number -> (passed, detail)
CRITERIA = range(1, 10)
_collected = []


def pytest_collection_modifyitems(items):
    _collected.extend(item for item in items if item.module.__name__.endswith("test_acceptance"))


def pytest_terminal_summary(terminalreporter):
    if not _collected:
        return
    terminalreporter.section("acceptance criteria")
    for n in CRITERIA:
        passed, detail = ACCEPTANCE.get(n, (False, "no verdict (test errored or was deselected)"))
        terminalreporter.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'}  {detail}")

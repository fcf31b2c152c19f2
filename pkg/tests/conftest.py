ACCEPTANCE_LINES = {}


def record_criterion(number, passed, summary):
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {summary}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])

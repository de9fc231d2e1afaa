from __future__ import annotations

import gen


def pytest_terminal_summary(terminalreporter):
    if not gen.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(gen.REPORT):
        terminalreporter.write_line(gen.REPORT[num])

import sys
from pathlib import Path

# make the enumeration oracles importable from every test module
sys.path.insert(0, str(Path(__file__).parent))

# one line per acceptance criterion, echoed after the run so the verdicts
# stay visible even when pytest captures stdout
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

"""Shared plumbing: the acceptance suite records one line per criterion and
this hook replays them after the run, outside pytest's capture."""

acceptance_lines: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)

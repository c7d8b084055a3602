"""Shared test plumbing: the acceptance suite records one verdict per
criterion and the terminal summary prints them as pass/fail lines."""

ACCEPTANCE_RESULTS: list[tuple[int, str, bool, str]] = []


def record_acceptance(number: int, title: str, ok: bool, detail: str = ""):
    ACCEPTANCE_RESULTS.append((number, title, ok, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ok else "FAIL"
        line = f"criterion {number:2d} [{verdict}] {title}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(
            line, green=ok, red=not ok
        )

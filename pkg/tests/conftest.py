"""Shared pytest hooks: the acceptance suite reports one verdict line per criterion."""

ACCEPTANCE = {}


def record(number, title, passed, detail):
    ACCEPTANCE[number] = (title, passed, detail)
    print(f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'} [{title}] {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"{number}. {'PASS' if passed else 'FAIL'}  {title}: {detail}")

import pytest

from ppsq.sequences import build_sequence_set

REFERENCE_BASE = [1, 2, 0, 3, 3, 2, 3, 0, 1, 1, 3, 1, 0, 2, 2]


@pytest.fixture(scope="session")
def s2():
    return build_sequence_set(2)


@pytest.fixture(scope="session")
def s3():
    return build_sequence_set(3)


@pytest.fixture(scope="session")
def reference_set():
    # polynomial/seed recovered by match_paper_sequence
    return build_sequence_set(2, (1, 1, 2), (1, 2))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}"
        if detail:
            line += f"  [{detail}]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)

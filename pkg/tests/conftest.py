import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if ("test_acceptance.py" not in report.nodeid
            and "test_trainer_parity.py" not in report.nodeid):
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call":
        _acceptance_outcomes[name] = report.outcome
    elif report.when == "setup" and report.outcome != "passed":
        _acceptance_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    from test_acceptance import ACCEPTANCE_CRITERIA
    from test_trainer_parity import SECONDARY_CRITERIA

    for title, criteria in (("acceptance criteria", ACCEPTANCE_CRITERIA),
                            ("secondary criteria", SECONDARY_CRITERIA)):
        lines = [(name, label) for name, label in criteria.items()
                 if name in _acceptance_outcomes]
        if not lines:
            continue
        terminalreporter.section(title)
        for name, label in lines:
            outcome = _acceptance_outcomes[name]
            status = "PASS" if outcome == "passed" else outcome.upper()
            terminalreporter.write_line(f"{status:7s} {label}")

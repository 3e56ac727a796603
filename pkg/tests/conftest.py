import sys

import hypothesis

hypothesis.settings.register_profile(
    "suite",
    derandomize=True,
    max_examples=60,
    deadline=None,
)
hypothesis.settings.load_profile("suite")


def pytest_terminal_summary(terminalreporter):
    """Print one line per acceptance criterion after the run."""
    module = sys.modules.get("test_acceptance")
    if module is None or not getattr(module, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(module.RESULTS):
        terminalreporter.write_line(f"criterion {number}: {status} - {detail}")

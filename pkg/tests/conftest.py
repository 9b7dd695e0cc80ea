import os
import sys

from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("mucut", deadline=None, max_examples=60, derandomize=False)
settings.load_profile("mucut")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])

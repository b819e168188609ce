import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile("default")

# criterion number -> list of (label, passed, detail), filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[number]
        ok = all(passed for _, passed, _ in checks)
        failed = [f"{label}: {detail}" for label, passed, detail in checks if not passed]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({len(checks)} checks)"
        if failed:
            line += " - " + "; ".join(failed)
        terminalreporter.write_line(line)

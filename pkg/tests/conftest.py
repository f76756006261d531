import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(results):
        ok, detail = results[num]
        tr.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}")
    tr.write_line(f"{sum(ok for ok, _ in results.values())}/{len(results)} criteria pass")

import sys
from pathlib import Path

from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=30)
settings.load_profile("default")


def pytest_terminal_summary(terminalreporter):
    from report import LINES

    if not LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_crit: dict[str, list] = {}
    for crit, label, ok, detail in LINES:
        by_crit.setdefault(crit, []).append((label, ok, detail))
    for crit in sorted(by_crit, key=int):
        parts = by_crit[crit]
        ok = all(p[1] for p in parts)
        tr.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")
        for label, pok, detail in parts:
            tr.write_line(f"    {label}: {'PASS' if pok else 'FAIL'} ({detail})")

import functools
import time

import pytest

RESULTS: dict[int, tuple[str, bool, str]] = {}


def criterion(number: int, title: str, budget: float | None = None):
    """Record a pass/fail line for an acceptance test and enforce its time budget."""

    def wrap(fn):
        @functools.wraps(fn)
        def inner(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs) or ""
            except BaseException as exc:
                RESULTS[number] = (title, False, f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
                raise
            elapsed = time.perf_counter() - t0
            ok = budget is None or elapsed < budget
            note = f"{detail} [{elapsed:.2f}s" + (f" < {budget:.0f}s]" if budget else "]")
            RESULTS[number] = (title, ok, note.strip())
            assert ok, f"took {elapsed:.1f}s, budget {budget}s"

        return inner

    return wrap


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, ok, note = RESULTS[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {number}. {title}  {note}")


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)

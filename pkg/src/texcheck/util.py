"""Small shared helpers: provider-call timing and bounded retries."""

from __future__ import annotations

import time
from contextlib import contextmanager


class CallTimer:
    """Accumulates wall time spent inside external provider calls.

    The pipeline subtracts this from its total elapsed time to report its own
    overhead separately from model/embedding latency.
    """

    def __init__(self) -> None:
        self.total_s = 0.0
        self.calls = 0

    @contextmanager
    def track(self):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.total_s += time.perf_counter() - t0
            self.calls += 1


def with_retries(fn, *, attempts: int = 3, backoff_s: float = 0.25,
                 transient: tuple[type[BaseException], ...] = (Exception,),
                 sleep=time.sleep):
    """Call ``fn`` up to ``attempts`` times with exponential backoff.

    Re-raises the last transient error once attempts are exhausted.
    """
    delay = backoff_s
    for attempt in range(attempts):
        try:
            return fn()
        except transient:
            if attempt == attempts - 1:
                raise
            sleep(delay)
            delay *= 2

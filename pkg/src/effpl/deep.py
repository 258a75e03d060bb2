"""Run recursive term code on a large stack when a term is too deep for the default one.

The reader, the rewriter and the printers walk terms recursively. That is fine
for ordinary clauses, but a clause holding a list literal of a few thousand
elements exceeds Python's recursion limit. Entry points decorated with
``deep`` first run normally; on RecursionError they are re-run once on a
worker thread with a large stack and a raised limit. The decorated functions
are pure, so the retry is safe.
"""

from __future__ import annotations

import functools
import sys
import threading

STACK_BYTES = 512 * 1024 * 1024
RECURSION_LIMIT = 200_000

_state = threading.local()
_limit_lock = threading.Lock()


def _run_on_big_stack(fn, args, kwargs):
    result: list = []
    error: list = []

    def target():
        _state.active = True
        try:
            result.append(fn(*args, **kwargs))
        except BaseException as e:  # re-raised on the calling thread
            error.append(e)

    with _limit_lock:
        old_size = threading.stack_size(STACK_BYTES)
        old_limit = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old_limit, RECURSION_LIMIT))
        try:
            t = threading.Thread(target=target, name="effpl-deep")
            t.start()
            t.join()
        finally:
            threading.stack_size(old_size)
            sys.setrecursionlimit(old_limit)
    if error:
        raise error[0]
    return result[0]


def deep(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        if getattr(_state, "active", False):
            return fn(*args, **kwargs)
        try:
            return fn(*args, **kwargs)
        except RecursionError:
            return _run_on_big_stack(fn, args, kwargs)
    return wrapper


__all__ = ["deep"]

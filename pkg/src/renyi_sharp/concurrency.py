"""Thread pool for sweep cells with deterministic result ordering."""

from __future__ import annotations

import logging
import os
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Generic, List, Optional, Tuple, TypeVar

from .logging_config import cell_prefix

logger = logging.getLogger(__name__)

T = TypeVar("T")
CellKey = Tuple[Any, ...]


def _label(key: CellKey) -> str:
    return " ".join(str(k) for k in key)


@dataclass
class CellOutcome(Generic[T]):
    """Result or error of one sweep cell."""

    key: CellKey
    value: Optional[T] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class SweepPool:
    """Runs independent sweep cells on a thread pool.

    Numerical kernels release the GIL, so threads are enough to keep several
    solves busy. Results come back sorted by cell key regardless of
    completion order.
    """

    def __init__(self, jobs: Optional[int] = None) -> None:
        self.jobs = max(1, jobs or os.cpu_count() or 1)
        self._executor = ThreadPoolExecutor(
            max_workers=self.jobs, thread_name_prefix="sweep"
        )
        self._futures: Dict[CellKey, Future] = {}
        self._lock = threading.Lock()
        self._shutting_down = False

    def __enter__(self) -> "SweepPool":
        return self

    def __exit__(self, exc_type: Any, exc: Any, tb: Any) -> None:
        self.shutdown(cancel_pending=exc_type is not None)

    @property
    def is_shutting_down(self) -> bool:
        return self._shutting_down

    def submit(
        self,
        key: CellKey,
        fn: Callable[..., T],
        *args: Any,
        label: Optional[str] = None,
        **kwargs: Any,
    ) -> None:
        """Schedule fn(*args, **kwargs) as the cell identified by key."""
        if self._shutting_down:
            raise RuntimeError("SweepPool is shutting down")

        def run() -> T:
            with cell_prefix(label or _label(key)):
                return fn(*args, **kwargs)

        with self._lock:
            if key in self._futures:
                raise ValueError(f"Duplicate sweep cell {key}")
            self._futures[key] = self._executor.submit(run)

    def results(self) -> List[CellOutcome]:
        """Wait for all cells and return their outcomes sorted by key."""
        with self._lock:
            items = sorted(self._futures.items(), key=lambda item: item[0])

        outcomes: List[CellOutcome] = []
        try:
            for key, future in items:
                try:
                    outcomes.append(CellOutcome(key=key, value=future.result()))
                except Exception as e:
                    logger.warning(f"Cell {key} failed: {e}")
                    outcomes.append(CellOutcome(key=key, error=e))
        except KeyboardInterrupt:
            logger.warning("Interrupted, cancelling pending cells")
            self.shutdown(cancel_pending=True)
            raise
        return outcomes

    def shutdown(self, cancel_pending: bool = False) -> None:
        """Stop accepting cells; optionally cancel the ones not yet started."""
        if self._shutting_down:
            return
        self._shutting_down = True
        if cancel_pending:
            with self._lock:
                pending = [f for f in self._futures.values() if not f.done()]
            cancelled = sum(1 for f in pending if f.cancel())
            if cancelled:
                logger.info(f"Cancelled {cancelled} pending cells")
        self._executor.shutdown(wait=not cancel_pending)


def run_cells(
    cells: Dict[CellKey, Callable[[], T]], jobs: Optional[int] = None
) -> List[CellOutcome]:
    """Run zero-argument callables keyed by cell and collect sorted outcomes."""
    if jobs == 1:
        outcomes: List[CellOutcome] = []
        for key in sorted(cells):
            with cell_prefix(_label(key)):
                try:
                    outcomes.append(CellOutcome(key=key, value=cells[key]()))
                except Exception as e:
                    logger.warning(f"Cell {key} failed: {e}")
                    outcomes.append(CellOutcome(key=key, error=e))
        return outcomes

    with SweepPool(jobs) as pool:
        for key, fn in cells.items():
            pool.submit(key, fn)
        return pool.results()

###############################################################################
# SWEEP POINT MANAGER
# Runs independent sweep points on a thread pool with deterministic collection
###############################################################################

import time
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence

from validation import QptConfig, QptError

logger = logging.getLogger(__name__)


@dataclass
class PointOutcome:
    """Result of one sweep point; `error` holds the failure kind when flagged"""

    index: int
    control: Any
    value: Any = None
    error: Optional[str] = None
    message: str = ''

    @property
    def flagged(self) -> bool:
        return self.error is not None


###############################################################################
# SWEEP MANAGER CLASS
# Worker pool over sweep points; numpy/LAPACK release the GIL
###############################################################################

class SweepManager:
    """Sweep point scheduler - O(n) dispatch where n is the number of points"""

    def __init__(self, max_workers: int = QptConfig.DEFAULT_WORKERS):
        self.max_workers = max(1, int(max_workers))
        self._lock = threading.Lock()
        self._stats = {'runs': 0, 'points': 0, 'flagged': 0, 'seconds': 0.0}

    def _run_point(self, fn: Callable[[Any], Any], index: int, control: Any) -> PointOutcome:
        try:
            return PointOutcome(index=index, control=control, value=fn(control))
        except QptError as e:
            logger.warning(f"Point {index} ({control!r}) flagged: {e.kind}: {e}")
            return PointOutcome(index=index, control=control, error=e.kind, message=str(e))

    def map_points(self, fn: Callable[[Any], Any], controls: Sequence[Any],
                   workers: Optional[int] = None) -> List[PointOutcome]:
        """Evaluate fn on every control value; results come back in input order.

        Domain failures (QptError) become flagged outcomes so one bad point
        never aborts the sweep. Any other exception propagates.
        """
        n_workers = max(1, int(workers or self.max_workers))
        started = time.time()
        logger.info(f"Sweep started - {len(controls)} points on {n_workers} worker(s)")

        if n_workers == 1 or len(controls) <= 1:
            outcomes = [self._run_point(fn, i, c) for i, c in enumerate(controls)]
        else:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                futures = [pool.submit(self._run_point, fn, i, c) for i, c in enumerate(controls)]
                outcomes = [f.result() for f in futures]

        outcomes.sort(key=lambda o: o.index)
        elapsed = time.time() - started
        flagged = sum(o.flagged for o in outcomes)

        with self._lock:
            self._stats['runs'] += 1
            self._stats['points'] += len(outcomes)
            self._stats['flagged'] += flagged
            self._stats['seconds'] += elapsed

        logger.info(f"Sweep complete - {len(outcomes)} points, {flagged} flagged, {elapsed:.2f}s")
        return outcomes


###############################################################################
# STATISTICS
###############################################################################

    def get_stats(self) -> Dict[str, float]:
        """Snapshot of cumulative run statistics"""
        with self._lock:
            return dict(self._stats)

    def reset_stats(self):
        with self._lock:
            self._stats = {'runs': 0, 'points': 0, 'flagged': 0, 'seconds': 0.0}


###############################################################################
# GLOBAL INSTANCE
# Shared sweep manager
###############################################################################

sweep_manager = SweepManager(max_workers=QptConfig.DEFAULT_WORKERS)

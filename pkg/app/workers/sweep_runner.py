"""
Parallel evaluation of parameter sweeps.

Points run on a thread pool; records come back in declared grid order.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

from app.core.config import settings
from app.schemas.report import ReportRecord, RunConfig

logger = logging.getLogger(__name__)

PointEvaluator = Callable[[RunConfig, float], ReportRecord]


def run_sweep(
    config: RunConfig,
    evaluate_point: PointEvaluator,
    workers: Optional[int] = None,
) -> List[ReportRecord]:
    if config.sweep is None:
        raise ValueError("run_sweep needs a config with a sweep grid")
    workers = settings.sweep_workers if workers is None else workers
    values = config.sweep.values()
    logger.info(
        f"Sweeping {config.sweep.parameter} over {len(values)} points "
        f"[{values[0]:g}, {values[-1]:g}] for {config.sweep.quantity} on {workers} workers"
    )
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        records = list(pool.map(lambda value: evaluate_point(config, value), values))

    failed = sum(1 for record in records if record.errors)
    if failed:
        logger.warning(f"{failed} of {len(records)} sweep points failed")
    else:
        logger.info(f"All {len(records)} sweep points evaluated")
    return records


def sweep_succeeded(records: List[ReportRecord]) -> bool:
    """At least one point produced a value."""
    return any(not record.errors for record in records)

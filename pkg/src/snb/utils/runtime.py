"""Process-level helpers: worker count, output directories and the ordered pool map"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, List, Optional, TypeVar

from ..core.errors import ConfigError

logger = logging.getLogger(__name__)

JOBS_ENV = "SNB_JOBS"

T = TypeVar("T")
R = TypeVar("R")


def resolve_jobs(requested: Optional[int] = None) -> int:
    """
    Number of worker processes for grid sweeps.

    An explicit request wins; otherwise SNB_JOBS is read, and without it a
    single process is used.

    Returns:
        int: Positive worker count

    Raises:
        ConfigError: If SNB_JOBS is set but not a positive integer
    """
    if requested is not None:
        if requested < 1:
            raise ConfigError([f"jobs: must be a positive integer, got {requested}"])
        return requested

    raw = os.environ.get(JOBS_ENV)
    if raw is None or not raw.strip():
        return 1
    try:
        jobs = int(raw)
    except ValueError:
        raise ConfigError([f"{JOBS_ENV}: not an integer: {raw!r}"])
    if jobs < 1:
        raise ConfigError([f"{JOBS_ENV}: must be a positive integer, got {jobs}"])
    return jobs


def ensure_output_dir(path) -> Path:
    """
    Create the parent directory of an output file.

    Returns:
        Path: The output path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def ordered_map(func: Callable[[T], R], items: Iterable[T], jobs: int = 1) -> List[R]:
    """Map func over items, in a process pool when jobs > 1; results keep input order."""
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(jobs, len(items))
    logger.debug("mapping %d tasks over %d processes", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))

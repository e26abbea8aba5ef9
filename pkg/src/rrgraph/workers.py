from __future__ import annotations

from typing import Any, Callable, Iterable, List, Sequence

from joblib import Parallel, delayed


def map_trials(
    fn: Callable[..., Any],
    tasks: Iterable[Sequence[Any]],
    threads: int = 1,
    backend: str = "threads",
) -> List[Any]:
    """Run ``fn(*task)`` for every task; results come back in task order."""
    tasks = list(tasks)
    if threads == 1 or len(tasks) <= 1:
        return [fn(*task) for task in tasks]
    return Parallel(n_jobs=threads, prefer=backend)(delayed(fn)(*task) for task in tasks)

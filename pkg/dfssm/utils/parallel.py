import os
from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, Callable, Any, Optional, List

from ditk import logging
from tqdm import tqdm


def parallel_call(iterable: Iterable, fn: Callable[[Any], Any], total: Optional[int] = None,
                  desc: Optional[str] = None, max_workers: Optional[int] = None) -> List[Any]:
    """
    Map ``fn`` over ``iterable`` on a thread pool, keeping input order.
    The first worker error is re-raised once the pool drains.
    """
    items = list(iterable)
    if total is None:
        total = len(items)

    pg = tqdm(total=total, desc=desc or f'Process with {fn!r}')
    if not max_workers:
        max_workers = min(os.cpu_count() or 1, 16)

    def _fn(item):
        try:
            return fn(item)
        except Exception as err:
            logging.exception(f'Error when processing {item!r} - {err!r}')
            raise
        finally:
            pg.update()

    with ThreadPoolExecutor(max_workers=max_workers) as tp:
        futures = [tp.submit(_fn, item) for item in items]

    pg.close()
    errors = [f.exception() for f in futures if f.exception() is not None]
    if errors:
        raise errors[0]
    return [f.result() for f in futures]

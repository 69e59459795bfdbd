"""
Sweep processor - fans grid evaluations out over a thread pool
Results are reassembled in grid order whatever the completion order.
"""
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Callable, List, Sequence

from utils.jcm.errors import JCMError
from utils.jcm.helpers import debug_print


class SweepProcessor:
    """
    Coordinates evaluation of one function over many grid values
    """

    def __init__(self, max_workers: int = 4, parallel: bool = True, enable_timing: bool = True,
                 axis_name: str = "value"):
        """
        Args:
            max_workers: thread pool size
            parallel: evaluate sequentially when False (same output)
            enable_timing: report timing through debug_print
            axis_name: context key attached to errors raised for a grid value
        """
        self.max_workers = max(1, int(max_workers))
        self.parallel = parallel
        self.enable_timing = enable_timing
        self.axis_name = axis_name

    @classmethod
    def from_config(cls, config_manager, axis_name: str = "value") -> "SweepProcessor":
        return cls(
            max_workers=config_manager.get("sweep.max_workers", 4),
            parallel=config_manager.get("sweep.parallel", True),
            axis_name=axis_name,
        )

    def map_grid(self, func: Callable[[Any], Any], values: Sequence[Any]) -> List[Any]:
        """
        Evaluate func on every grid value

        Returns:
            list of results in the order of values

        Raises:
            JCMError: the first failure in grid order, with the offending value attached
        """
        start = time.time()
        values = list(values)
        results: List[Any] = [None] * len(values)
        failures = {}

        if not self.parallel or self.max_workers == 1 or len(values) < 2:
            for index, value in enumerate(values):
                try:
                    results[index] = func(value)
                except JCMError as e:
                    raise e.with_context(**{self.axis_name: value})
        else:
            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                futures = {executor.submit(func, value): index for index, value in enumerate(values)}
                for future in as_completed(futures):
                    index = futures[future]
                    try:
                        results[index] = future.result()
                    except JCMError as e:
                        failures[index] = e
            if failures:
                first = min(failures)
                raise failures[first].with_context(**{self.axis_name: values[first]})

        if self.enable_timing:
            mode = f"{self.max_workers} workers" if self.parallel else "sequential"
            debug_print(f"⚡ Swept {len(values)} {self.axis_name} values ({mode}) in {time.time() - start:.3f}s")
        return results

"""
experiments/base_experiment.py

Base class for experiment drivers: a synchronous run(), an async wrapper with
a timeout, and per-stage status tracking.
"""

from __future__ import annotations
import asyncio
import functools
import logging
import os
import threading
from typing import Any, Callable, Dict, List, Optional

from irdpg.config import Settings

logger = logging.getLogger(__name__)


class BaseExperiment:
    """Base class to provide staged, async-capable runs for all experiments."""

    name: str = ""

    def __init__(self, settings: Settings) -> None:
        self.settings = settings
        self.progress: Dict[str, str] = {}
        self.artifacts: List[str] = []
        self._cancelled = threading.Event()

    def run(self, out_dir: str) -> Dict[str, Any]:
        """
        Produce the experiment's CSV artifacts under out_dir.

        Must be implemented by subclasses. Returns a dict with at least
        'artifacts' (list of paths) and 'summary' (scalar results).
        """
        raise NotImplementedError

    async def run_async(self, out_dir: str, timeout: Optional[float] = None) -> Dict[str, Any]:
        """
        Run run() in the default executor, bounded by `timeout` seconds.

        The worker thread cannot be interrupted; on timeout the experiment is
        cancelled and stops at its next stage boundary.
        """
        loop = asyncio.get_running_loop()
        limit = self.settings.timeout if timeout is None else timeout
        try:
            return await asyncio.wait_for(loop.run_in_executor(None, functools.partial(self.run, out_dir)),
                                          timeout=limit)
        except asyncio.TimeoutError:
            self.cancel()
            raise

    def cancel(self) -> None:
        """Refuse every later stage."""
        self._cancelled.set()

    @property
    def cancelled(self) -> bool:
        return self._cancelled.is_set()

    def stage(self, name: str, fn: Callable[..., Any], *args, **kwargs) -> Any:
        """Run one stage, recording Running/Complete/Failed; failures re-raise with the stage name."""
        if self.cancelled:
            self.progress[name] = "Cancelled"
            raise RuntimeError(f"{self.name}/{name} cancelled")
        self.progress[name] = "Running"
        try:
            result = fn(*args, **kwargs)
        except Exception as e:
            self.progress[name] = "Failed"
            logger.error(f"{self.name}/{name} failed: {e}")
            raise RuntimeError(f"{self.name}/{name} failed: {e}") from e
        self.progress[name] = "Complete"
        return result

    def output_path(self, out_dir: str, filename: str) -> str:
        if self.cancelled:
            raise RuntimeError(f"{self.name} cancelled before writing {filename}")
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, filename)
        if path not in self.artifacts:
            self.artifacts.append(path)
        return path

    @property
    def seeds(self) -> List[int]:
        return list(self.settings.seeds)

    def param(self, key: str, desk: Any, full: Any) -> Any:
        """An explicitly configured setting, else this experiment's desk or full-scale default."""
        if key in self.settings.model_fields_set:
            return getattr(self.settings, key)
        return full if self.settings.full_scale else desk

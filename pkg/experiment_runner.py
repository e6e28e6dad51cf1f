"""
experiment_runner.py

ExperimentRunner runs experiment drivers concurrently, tracks their progress,
and writes a manifest recording settings, seeds, versions, runtimes and
the artifacts each experiment produced.
"""

from __future__ import annotations
import asyncio
import hashlib
import logging
import os
import time
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence

from data_utils import package_versions, read_csv, write_json
from experiments import EXPERIMENTS
from experiments.base_experiment import BaseExperiment
from irdpg.config import Settings

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


class ExperimentRunner:
    """
    Orchestrates experiment drivers in parallel using asyncio.
    """

    def __init__(self, settings: Settings, names: Sequence[str]):
        unknown = [name for name in names if name not in EXPERIMENTS]
        if unknown:
            raise ValueError(f"Unknown experiment(s) {unknown}. Expected some of {sorted(EXPERIMENTS)}")
        if not names:
            raise ValueError("no experiments requested")
        self.settings = settings
        self.experiments: Dict[str, BaseExperiment] = {name: EXPERIMENTS[name](settings) for name in names}
        self.progress = {name: "Pending" for name in self.experiments}
        self.runtimes: Dict[str, float] = {}

    def get_progress(self) -> Dict[str, str]:
        """Returns current status of each experiment."""
        return self.progress

    async def _run_experiment_async(self, name: str, experiment: BaseExperiment, out_dir: str) -> Dict[str, Any]:
        """Run a single experiment with timeout and error handling."""
        self.progress[name] = "Running"
        start = time.perf_counter()
        try:
            result = await experiment.run_async(out_dir)
            self.progress[name] = "Complete"
            logger.info(f"{name} completed successfully.")
            return result
        except asyncio.TimeoutError:
            self.progress[name] = "Failed"
            logger.error(f"{name} timed out after {self.settings.timeout} seconds.")
            raise RuntimeError(f"{name} failed: timed out after {self.settings.timeout} seconds")
        except Exception as e:
            self.progress[name] = "Failed"
            logger.error(f"{name} failed: {e}")
            raise RuntimeError(f"{name} failed: {e}") from e
        finally:
            self.runtimes[name] = time.perf_counter() - start

    def run(self, out_dir: Optional[str] = None) -> Dict[str, Any]:
        """Synchronous entry point; see run_async."""
        return asyncio.run(self.run_async(out_dir))

    async def run_async(self, out_dir: Optional[str] = None) -> Dict[str, Any]:
        """
        Run all requested experiments in parallel and write the manifest.

        Returns:
            dict: the manifest.

        Raises:
            RuntimeError: if any experiment failed; the message names it. The
            manifest is still written with the failure recorded.
        """
        out_dir = out_dir or self.settings.out_dir
        os.makedirs(out_dir, exist_ok=True)
        logger.info(f"Starting experiments {list(self.experiments)} into {out_dir}.")

        tasks = [self._run_experiment_async(name, exp, out_dir) for name, exp in self.experiments.items()]
        results_list = await asyncio.gather(*tasks, return_exceptions=True)

        entries: Dict[str, Any] = {}
        failures: List[str] = []
        for name, result in zip(self.experiments, results_list):
            entry: Dict[str, Any] = {"status": self.progress[name],
                                     "runtime_seconds": round(self.runtimes.get(name, 0.0), 3),
                                     "stages": dict(self.experiments[name].progress)}
            if isinstance(result, Exception):
                entry["error"] = str(result)
                failures.append(str(result))
            else:
                entry["summary"] = result.get("summary", {})
                entry["artifacts"] = [
                    {"path": os.path.relpath(path, out_dir), "sha256": _sha256(path), "rows": len(read_csv(path))}
                    for path in result.get("artifacts", [])
                ]
            entries[name] = entry

        manifest = {
            "created": datetime.now(timezone.utc).isoformat(),
            "settings": self.settings.model_dump(),
            "seeds": list(self.settings.seeds),
            "seed": self.settings.seed,
            "versions": package_versions(),
            "experiments": entries,
        }
        write_json(manifest, os.path.join(out_dir, MANIFEST_NAME))

        if failures:
            raise RuntimeError("; ".join(failures))
        logger.info("All experiments complete.")
        return manifest


def verify_manifest(manifest: Dict[str, Any], out_dir: str) -> List[str]:
    """Problems found when checking that every listed artifact exists, parses and matches its hash."""
    problems = []
    for name, entry in manifest.get("experiments", {}).items():
        for artifact in entry.get("artifacts", []):
            path = os.path.join(out_dir, artifact["path"])
            if not os.path.exists(path):
                problems.append(f"{name}: missing {artifact['path']}")
                continue
            try:
                read_csv(path)
            except Exception as e:
                problems.append(f"{name}: {artifact['path']} does not parse: {e}")
                continue
            if _sha256(path) != artifact["sha256"]:
                problems.append(f"{name}: {artifact['path']} changed since the manifest was written")
    return problems


if __name__ == "__main__":
    import sys

    from irdpg.config import load_settings

    settings = load_settings(os.getenv("IRDPG_CONFIG"))
    logging.basicConfig(level=getattr(logging, settings.log_level),
                        format="%(asctime)s [%(levelname)s] %(message)s")
    names = sys.argv[1:] or list(EXPERIMENTS)
    manifest = ExperimentRunner(settings, names).run()
    for name, entry in manifest["experiments"].items():
        print(f"{name}: {entry['status']} ({entry['runtime_seconds']}s)")

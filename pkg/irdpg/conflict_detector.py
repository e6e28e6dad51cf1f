"""
irdpg/conflict_detector.py

Detects conflicting candidate values for the same theoretical quantity and
resolves them against an independent Monte Carlo estimate.
"""

from __future__ import annotations
import logging
from typing import Any, Dict, List

logger = logging.getLogger(__name__)


class ConflictDetector:
    """
    Compare competing closed forms (e.g. two readings of one formula) with a
    Monte Carlo estimate of the same quantity.
    """

    @staticmethod
    def detect_conflicts(candidates: Dict[str, float], estimate: float, std_error: float,
                         z: float = 3.0) -> Dict[str, Any]:
        """
        Adjudicate between candidate values.

        Args:
            candidates: name -> candidate value.
            estimate: Monte Carlo estimate of the quantity.
            std_error: standard error of the estimate.
            z: number of standard errors a candidate may sit from the estimate.

        Returns:
            dict: conflict report with keys 'conflict_detected', 'conflicts',
            'consistent', 'selected' and 'resolution'. A conflict exists when the
            candidates disagree with each other by more than the tolerance.
        """
        if not candidates:
            raise ValueError("no candidates to adjudicate")
        tolerance = z * max(std_error, 0.0)
        entries: List[Dict[str, Any]] = []
        for name, value in candidates.items():
            deviation = abs(value - estimate)
            entries.append({
                "source": name,
                "value": float(value),
                "deviation": float(deviation),
                "z_score": float(deviation / std_error) if std_error > 0 else float("inf"),
                "consistent": deviation <= tolerance,
            })

        values = [e["value"] for e in entries]
        report: Dict[str, Any] = {
            "conflict_detected": max(values) - min(values) > tolerance,
            "conflicts": [],
            "consistent": [e["source"] for e in entries if e["consistent"]],
        }
        closest = min(entries, key=lambda e: e["deviation"])
        report["selected"] = closest["source"]

        if not report["conflict_detected"]:
            report["resolution"] = "Candidates indistinguishable at this sample size; first closest kept"
            if len(entries) > 1:
                logger.warning("Candidates %s are indistinguishable from estimate %.6g (se %.2g)",
                               list(candidates), estimate, std_error)
        elif closest["consistent"] and len(report["consistent"]) == 1:
            report["resolution"] = f"Use '{closest['source']}', the only candidate matching Monte Carlo"
        elif closest["consistent"]:
            report["resolution"] = f"Use closest candidate '{closest['source']}'; several match, flag for review"
        else:
            report["resolution"] = "No candidate within tolerance; closest kept with flag for review"
            logger.warning("No candidate within %.1f standard errors of %.6g", z, estimate)

        if report["conflict_detected"]:
            report["conflicts"].append({
                "field": "candidate_value",
                "sources": entries,
                "resolution": report["resolution"],
            })
        return report

"""Error metrics and the naive previous-day baseline.

The headline score is the mean of per-day absolute errors — the form the
reference tables use — with the conventional root-mean-square available
behind a flag for comparison.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence


def rmse(measured: Sequence[float], simulated: Sequence[float],
         conventional: bool = False) -> float:
    """Mean absolute error by default; sqrt-of-mean-squares when asked."""
    if len(measured) != len(simulated):
        raise ValueError(
            f"series length mismatch: {len(measured)} vs {len(simulated)}"
        )
    if not measured:
        raise ValueError("empty series")
    if conventional:
        return math.sqrt(
            math.fsum((m - s) ** 2 for m, s in zip(measured, simulated))
            / len(measured)
        )
    return math.fsum(abs(m - s) for m, s in zip(measured, simulated)) / len(measured)


def ar1_baseline(measured: Sequence[float], first_value: float) -> List[float]:
    """Previous-day persistence forecast; the first day has no previous
    measurement and uses the supplied (open-loop) value."""
    if len(measured) < 2:
        raise ValueError("AR(1) baseline needs at least 2 days")
    return [first_value] + list(measured[:-1])


def percent_change(value: float, reference: float) -> float:
    if reference == 0.0:
        return 0.0 if value == 0.0 else math.inf
    return (value / reference - 1.0) * 100.0


@dataclass
class ModeScore:
    flow_rmse: float
    flow_rmse_conventional: float
    swe_rmse: float
    flow_delta_vs_open_loop_pct: float = 0.0
    flow_delta_vs_ar1_pct: float = 0.0
    swe_delta_vs_open_loop_pct: float = 0.0


@dataclass
class MetricsReport:
    """Per-mode scores with changes relative to the two baselines."""

    modes: Dict[str, ModeScore] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        measured_flow: Sequence[float],
        measured_swe: Sequence[float],
        flow_by_mode: Dict[str, Sequence[float]],
        swe_by_mode: Dict[str, Sequence[float]],
        ar1_flow: Sequence[float],
    ) -> "MetricsReport":
        report = cls()
        scores = {}
        for mode, flow in flow_by_mode.items():
            scores[mode] = ModeScore(
                flow_rmse=rmse(measured_flow, flow),
                flow_rmse_conventional=rmse(measured_flow, flow, conventional=True),
                swe_rmse=rmse(measured_swe, swe_by_mode[mode]),
            )
        ar1_rmse = rmse(measured_flow, ar1_flow)
        scores["ar1"] = ModeScore(
            flow_rmse=ar1_rmse,
            flow_rmse_conventional=rmse(measured_flow, ar1_flow, conventional=True),
            swe_rmse=math.nan,
        )
        open_loop = scores.get("open-loop")
        for mode, sc in scores.items():
            if open_loop is not None:
                sc.flow_delta_vs_open_loop_pct = percent_change(
                    sc.flow_rmse, open_loop.flow_rmse
                )
                if not math.isnan(sc.swe_rmse):
                    sc.swe_delta_vs_open_loop_pct = percent_change(
                        sc.swe_rmse, open_loop.swe_rmse
                    )
            sc.flow_delta_vs_ar1_pct = percent_change(sc.flow_rmse, ar1_rmse)
        report.modes = scores
        return report

    def to_dict(self) -> Dict:
        return {
            mode: {
                "flow_rmse": sc.flow_rmse,
                "flow_rmse_conventional": sc.flow_rmse_conventional,
                "swe_rmse": sc.swe_rmse,
                "flow_delta_vs_open_loop_pct": sc.flow_delta_vs_open_loop_pct,
                "flow_delta_vs_ar1_pct": sc.flow_delta_vs_ar1_pct,
                "swe_delta_vs_open_loop_pct": sc.swe_delta_vs_open_loop_pct,
            }
            for mode, sc in self.modes.items()
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def format_table(self) -> str:
        lines = [
            f"{'mode':<12} {'flow RMSE':>12} {'vs open-loop':>13} "
            f"{'vs AR(1)':>10} {'SWE RMSE':>10} {'vs open-loop':>13}"
        ]
        for mode, sc in self.modes.items():
            swe = "-" if math.isnan(sc.swe_rmse) else f"{sc.swe_rmse:.4f}"
            swe_d = (
                "-" if math.isnan(sc.swe_rmse)
                else f"{sc.swe_delta_vs_open_loop_pct:+.1f}%"
            )
            lines.append(
                f"{mode:<12} {sc.flow_rmse:>12.3f} "
                f"{sc.flow_delta_vs_open_loop_pct:>+12.1f}% "
                f"{sc.flow_delta_vs_ar1_pct:>+9.1f}% {swe:>10} {swe_d:>13}"
            )
        return "\n".join(lines)

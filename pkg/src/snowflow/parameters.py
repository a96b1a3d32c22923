"""Calibratable parameter registry: names, scopes, cadences, and legal ranges.

Every model parameter is declared here once. A :class:`ParameterSet` stores
the actual values as numpy arrays whose shape is dictated by the spec's
scope (global vs per-HRU) and cadence (constant vs monthly):

    global  + constant -> shape (1,)
    global  + monthly  -> shape (12,), indexed by calendar month - 1
    per_hru + constant -> shape (n_hru,)
    curve              -> shape (11,), the snow-area depletion curve

``tmax_allrain`` is published with both cadences in the literature; the
registry defaults to constant and can be built with the monthly variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

GLOBAL = "global"
PER_HRU = "per_hru"
CURVE = "curve"

CONSTANT = "constant"
MONTHLY = "monthly"


@dataclass(frozen=True)
class ParameterSpec:
    """Declaration of one calibratable parameter."""

    name: str
    scope: str
    cadence: str
    vmin: float
    vmax: float
    units: str = ""
    description: str = ""

    def __post_init__(self):
        if not self.vmin < self.vmax:
            raise ValueError(f"{self.name}: min {self.vmin} must be < max {self.vmax}")
        if self.scope not in (GLOBAL, PER_HRU, CURVE):
            raise ValueError(f"{self.name}: bad scope {self.scope!r}")
        if self.cadence not in (CONSTANT, MONTHLY):
            raise ValueError(f"{self.name}: bad cadence {self.cadence!r}")

    def expected_length(self, n_hru: int) -> int:
        if self.scope == CURVE:
            return 11
        if self.scope == PER_HRU:
            return n_hru
        return 12 if self.cadence == MONTHLY else 1


def _specs(tmax_allrain_cadence: str) -> List[ParameterSpec]:
    s = ParameterSpec
    return [
        s("ppt_rad_adj", GLOBAL, MONTHLY, 0.0, 0.5, "in", "minimum precipitation that reduces solar radiation"),
        s("dday_slope", GLOBAL, MONTHLY, 0.2, 0.9, "degday/degF", "slope of the degree-day radiation curve"),
        s("dday_intcp", GLOBAL, MONTHLY, -60.0, 10.0, "degday", "intercept of the degree-day radiation curve"),
        s("radj_sppt", GLOBAL, CONSTANT, 0.0, 1.0, "", "summer wet-day solar adjustment"),
        s("radj_wppt", GLOBAL, CONSTANT, 0.0, 1.0, "", "winter wet-day solar adjustment"),
        s("tmax_lapse", GLOBAL, MONTHLY, -10.0, 10.0, "degF/kft", "max temperature lapse per 1000 ft"),
        s("tmin_lapse", GLOBAL, MONTHLY, -10.0, 10.0, "degF/kft", "min temperature lapse per 1000 ft"),
        s("tmax_adj", PER_HRU, CONSTANT, -10.0, 10.0, "degF", "physiographic max temperature adjustment"),
        s("tmin_adj", PER_HRU, CONSTANT, -10.0, 10.0, "degF", "physiographic min temperature adjustment"),
        s("covden_sum", PER_HRU, CONSTANT, 0.0, 1.0, "", "summer vegetation cover density"),
        s("covden_win", PER_HRU, CONSTANT, 0.0, 1.0, "", "winter vegetation cover density"),
        s("tmax_allsnow", GLOBAL, MONTHLY, -10.0, 40.0, "degF", "max temperature at/below which precipitation is all snow"),
        s("tmax_allrain", GLOBAL, tmax_allrain_cadence, -8.0, 60.0, "degF", "max temperature at/above which precipitation is all rain"),
        s("adjmix_rain", GLOBAL, MONTHLY, 0.6, 1.4, "", "rain fraction adjustment for mixed events"),
        s("srain_intcp", PER_HRU, CONSTANT, 0.0, 1.0, "in", "summer rain canopy capacity"),
        s("wrain_intcp", PER_HRU, CONSTANT, 0.0, 1.0, "in", "winter rain canopy capacity"),
        s("snow_intcp", PER_HRU, CONSTANT, 0.0, 1.0, "in", "snow canopy capacity"),
        s("jh_coef", GLOBAL, MONTHLY, 0.005, 0.06, "1/degF", "potential-ET coefficient"),
        s("albedo", PER_HRU, CONSTANT, 0.0, 1.0, "", "snow albedo when the constant-albedo option is selected"),
        s("rad_trncf", PER_HRU, CONSTANT, 0.0, 1.0, "", "shortwave transmission through winter canopy"),
        s("emis_noppt", GLOBAL, CONSTANT, 0.757, 1.0, "", "air emissivity on days without precipitation"),
        s("cecn_coef", GLOBAL, MONTHLY, 2.0, 10.0, "cal/degC", "convection-condensation coefficient"),
        s("potet_sublim", GLOBAL, CONSTANT, 0.0, 1.0, "", "fraction of potential ET available for sublimation"),
        s("den_init", GLOBAL, CONSTANT, 0.01, 0.5, "g/cm3", "density of new snow"),
        s("den_max", GLOBAL, CONSTANT, 0.1, 0.8, "g/cm3", "maximum settled snowpack density"),
        s("settle_const", GLOBAL, CONSTANT, 0.01, 0.5, "1/day", "snow depth settlement constant"),
        s("hru_percent_imperv", PER_HRU, CONSTANT, 0.0, 0.999, "", "impervious area fraction"),
        s("imperv_stor_max", PER_HRU, CONSTANT, 0.0, 0.1, "in", "impervious retention capacity"),
        s("soilmoist_max", PER_HRU, CONSTANT, 0.001, 60.0, "in", "soil-zone water holding capacity"),
        s("smidx_coef", PER_HRU, CONSTANT, 0.001, 0.06, "", "linear surface-runoff coefficient"),
        s("smidx_exp", PER_HRU, CONSTANT, 0.1, 0.5, "1/in", "exponential surface-runoff coefficient"),
        s("ssrcoef_sq", PER_HRU, CONSTANT, 0.0, 1.0, "", "subsurface-to-streamflow routing coefficient"),
        s("ssrcoef_lin", PER_HRU, CONSTANT, 0.0, 1.0, "1/day", "subsurface-to-streamflow routing coefficient"),
        s("ssr2gw_rate", PER_HRU, CONSTANT, 0.05, 0.8, "1/day", "subsurface-to-groundwater routing rate"),
        s("ssr2gw_exp", PER_HRU, CONSTANT, 0.0, 3.0, "", "subsurface-to-groundwater routing exponent"),
        s("ssrmax_coef", PER_HRU, CONSTANT, 1.0, 20.0, "in", "subsurface-to-groundwater scaling storage"),
        s("gwflow_coef", PER_HRU, CONSTANT, 0.001, 0.5, "1/day", "groundwater-to-streamflow rate"),
        s("gwsink_coef", PER_HRU, CONSTANT, 0.0, 1.0, "1/day", "groundwater sink rate"),
        s("soil2gw_max", PER_HRU, CONSTANT, 0.0, 5.0, "in", "max daily soil-to-groundwater recharge"),
        s("snarea_curve", CURVE, CONSTANT, 0.0, 1.0, "", "snow-area depletion curve (11 points)"),
        s("snarea_thresh", PER_HRU, CONSTANT, 0.0, 200.0, "in", "SWE above which an HRU is fully snow covered"),
        s("carea_max", PER_HRU, CONSTANT, 0.0, 1.0, "", "max pervious area fraction contributing to surface runoff"),
    ]


def build_registry(tmax_allrain_cadence: str = CONSTANT) -> Dict[str, ParameterSpec]:
    """Return the full parameter registry keyed by name."""
    return {spec.name: spec for spec in _specs(tmax_allrain_cadence)}


@dataclass
class Violation:
    """One out-of-range or missing parameter value."""

    name: str
    index: Optional[int]
    value: Optional[float]
    vmin: float
    vmax: float
    reason: str = "out of range"

    def __str__(self) -> str:
        where = "" if self.index is None else f"[{self.index}]"
        if self.value is None:
            return f"{self.name}{where}: {self.reason} (range {self.vmin}..{self.vmax})"
        return (
            f"{self.name}{where} = {self.value:g} {self.reason} "
            f"(range {self.vmin}..{self.vmax})"
        )


@dataclass
class ParameterSet:
    """Concrete parameter values for one basin (or one ensemble member).

    Values are float64 arrays shaped per the spec registry. Access helpers
    resolve the monthly/per-HRU indexing so process code never needs to
    know a parameter's cadence.
    """

    n_hru: int
    registry: Dict[str, ParameterSpec]
    values: Dict[str, np.ndarray] = field(default_factory=dict)

    def set(self, name: str, value) -> None:
        spec = self.registry.get(name)
        if spec is None:
            raise KeyError(f"unknown parameter {name!r}")
        arr = np.atleast_1d(np.asarray(value, dtype=float)).copy()
        want = spec.expected_length(self.n_hru)
        if arr.shape == (1,) and want > 1:
            arr = np.full(want, arr[0])
        if arr.shape != (want,):
            raise ValueError(
                f"{name}: expected {want} value(s) for scope={spec.scope} "
                f"cadence={spec.cadence}, got shape {arr.shape}"
            )
        self.values[name] = arr

    def array(self, name: str) -> np.ndarray:
        return self.values[name]

    def scalar(self, name: str) -> float:
        return float(self.values[name][0])

    def monthly(self, name: str, month: int) -> float:
        """Value of a global parameter for calendar ``month`` (1..12)."""
        arr = self.values[name]
        if arr.shape[0] == 12:
            return float(arr[month - 1])
        return float(arr[0])

    def per_hru(self, name: str, hru: int) -> float:
        return float(self.values[name][hru])

    def copy(self) -> "ParameterSet":
        return ParameterSet(
            n_hru=self.n_hru,
            registry=self.registry,
            values={k: v.copy() for k, v in self.values.items()},
        )

    def clamp_to_ranges(self) -> None:
        for name, arr in self.values.items():
            spec = self.registry[name]
            np.clip(arr, spec.vmin, spec.vmax, out=arr)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        return iter(self.values.items())


def validate_parameters(pset: ParameterSet) -> List[Violation]:
    """Check completeness and ranges; an empty list means the set is legal."""
    violations: List[Violation] = []
    for name, spec in pset.registry.items():
        arr = pset.values.get(name)
        if arr is None:
            violations.append(
                Violation(name, None, None, spec.vmin, spec.vmax, reason="missing")
            )
            continue
        want = spec.expected_length(pset.n_hru)
        if arr.shape != (want,):
            violations.append(
                Violation(
                    name, None, None, spec.vmin, spec.vmax,
                    reason=f"wrong length {arr.shape[0]}, expected {want}",
                )
            )
            continue
        for i, v in enumerate(arr):
            if not np.isfinite(v) or v < spec.vmin or v > spec.vmax:
                idx = i if arr.shape[0] > 1 else None
                violations.append(Violation(name, idx, float(v), spec.vmin, spec.vmax))
    for name in pset.values:
        if name not in pset.registry:
            violations.append(Violation(name, None, None, 0.0, 0.0, reason="not in registry"))
    return violations

"""Core domain types: HRU geometry, prognostic state, daily fluxes, bounds.

Storage conventions
-------------------
All water storages are depths in inches averaged over the full HRU area,
including the canopy store (capacity comparisons convert through the cover
density where needed). Keeping one spatial frame makes the daily mass
ledger exact. The snowpack heat deficit is likewise an HRU-average energy
in Langleys; pack temperature is the diagnostic
``T_pack_C = -heat_deficit / (1.27 * swe)``.

Subsurface and groundwater reservoirs are co-located with their HRU, so
they live on the same state object even though the filter treats them as
separate spatial units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List

from .constants import COLD_CONTENT_CAL_PER_INCH_DEGC, FREEZE_F, c_to_f
from .parameters import ParameterSet


@dataclass(frozen=True)
class HruGeometry:
    """Static physiographic attributes of one HRU."""

    hru_id: int
    area_acres: float
    elevation_ft: float
    slope: float            # rise/run, dimensionless
    latitude_deg: float

    def __post_init__(self):
        if not self.area_acres > 0:
            raise ValueError(f"hru {self.hru_id}: area must be positive")
        if not math.isfinite(self.elevation_ft):
            raise ValueError(f"hru {self.hru_id}: elevation must be finite")
        if self.slope < 0:
            raise ValueError(f"hru {self.hru_id}: slope must be >= 0")
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"hru {self.hru_id}: latitude out of range")


@dataclass(slots=True)
class HruState:
    """Prognostic water/energy state of one HRU.

    The first twelve fields (through ``soil_store``) form the per-HRU block
    of the filter state vector; the remaining fields persist between days
    but are never updated by an analysis step.
    """

    canopy_store: float = 0.0      # intercepted water, HRU-average inches
    free_water: float = 0.0        # liquid water held in the pack
    density: float = 0.0           # pack density, g/cm3 (swe/depth)
    swe: float = 0.0               # snow water equivalent = ice + free_water
    ice: float = 0.0               # frozen pack storage
    depth: float = 0.0             # pack depth, inches
    heat_deficit: float = 0.0      # Langleys to bring the pack to 0 degC
    pack_temp: float = FREEZE_F    # pack temperature, degF (<= 32)
    snow_cover: float = 0.0        # fractional snow-covered area
    imperv_store: float = 0.0      # impervious retention storage
    recharge_store: float = 0.0    # upper (recharge) part of the soil zone
    soil_store: float = 0.0        # total soil-zone storage (includes recharge)
    subsurface_store: float = 0.0  # co-located subsurface reservoir
    gw_store: float = 0.0          # co-located groundwater reservoir
    swe_peak: float = 0.0          # seasonal max SWE for the depletion curve
    days_since_snow: float = 0.0   # albedo ageing clock

    def copy(self) -> "HruState":
        return replace(self)


STATE_FIELDS = [f.name for f in fields(HruState)]

# Slots exposed to the ensemble filter, in layout order.
FILTER_FIELDS = STATE_FIELDS[:12]

WATER_FIELDS = [
    "canopy_store", "free_water", "swe", "ice", "imperv_store",
    "recharge_store", "soil_store", "subsurface_store", "gw_store",
]


@dataclass(slots=True)
class FluxRecord:
    """Daily per-HRU fluxes (inches) and snowpack energy terms (Langleys)."""

    precip: float = 0.0
    net_precip: float = 0.0        # reaches the ground after interception
    net_rain: float = 0.0
    net_snow: float = 0.0
    throughfall: float = 0.0
    interception: float = 0.0
    canopy_evap: float = 0.0
    melt_out: float = 0.0          # liquid leaving the snowpack
    sublimation: float = 0.0
    imperv_evap: float = 0.0
    imperv_runoff: float = 0.0
    pervious_runoff: float = 0.0   # per unit pervious area
    surface_runoff: float = 0.0    # HRU-average, pervious + impervious
    soil_et: float = 0.0
    soil_to_gw: float = 0.0
    soil_to_subsurface: float = 0.0
    subsurface_flow: float = 0.0
    subsurface_to_gw: float = 0.0
    gw_flow: float = 0.0
    gw_sink: float = 0.0
    et_total: float = 0.0
    pot_et: float = 0.0
    # Energy terms (per unit snow-covered area, summed over both periods).
    net_shortwave: float = 0.0
    longwave_in: float = 0.0
    blackbody: float = 0.0
    convection: float = 0.0
    conduction: float = 0.0
    energy_balance: float = 0.0
    albedo: float = 0.0


@dataclass
class StateBounds:
    """Hard clamp limits for one HRU's filterable state."""

    lower: Dict[str, float]
    upper: Dict[str, float]

    @classmethod
    def default(
        cls,
        soil_max: float = 1e4,
        imperv_max: float = 1e4,
        storage_cap: float = 1e4,
    ) -> "StateBounds":
        lower = {name: 0.0 for name in STATE_FIELDS}
        lower["pack_temp"] = -60.0
        upper = {
            "canopy_store": storage_cap,
            "free_water": storage_cap,
            "density": 1.0,
            "swe": storage_cap,
            "ice": storage_cap,
            "depth": storage_cap,
            "heat_deficit": storage_cap,
            "pack_temp": FREEZE_F,
            "snow_cover": 1.0,
            "imperv_store": imperv_max,
            "recharge_store": soil_max,
            "soil_store": soil_max,
            "subsurface_store": storage_cap,
            "gw_store": storage_cap,
            "swe_peak": storage_cap,
            "days_since_snow": 1e6,
        }
        return cls(lower=lower, upper=upper)


def default_bounds(params: ParameterSet, hru: int) -> StateBounds:
    """Bounds for one HRU, with soil and impervious caps from parameters."""
    return StateBounds.default(
        soil_max=params.per_hru("soilmoist_max", hru),
        imperv_max=params.per_hru("imperv_stor_max", hru),
    )


def clamp_state(state: HruState, bounds: StateBounds) -> HruState:
    """Force every field into its bounds.

    Fields already inside their range are untouched. When clamping moves
    ``swe`` (or the ice/liquid parts individually), the ice/liquid split is
    rescaled proportionally so ``ice + free_water == swe`` survives.
    Idempotent by construction.
    """
    s = state.copy()
    for name in STATE_FIELDS:
        v = getattr(s, name)
        lo, hi = bounds.lower[name], bounds.upper[name]
        if v < lo:
            setattr(s, name, lo)
        elif v > hi:
            setattr(s, name, hi)
    total = s.ice + s.free_water
    if s.swe <= 0.0:
        s.ice = 0.0
        s.free_water = 0.0
    elif total > 0.0:
        if total != s.swe:
            s.ice = min(s.ice * (s.swe / total), s.swe)
            s.free_water = s.swe - s.ice
    else:
        s.ice = s.swe
        s.free_water = 0.0
    if s.recharge_store > s.soil_store:
        s.recharge_store = s.soil_store
    return s


def pack_temperature_f(heat_deficit: float, swe: float) -> float:
    """Diagnostic pack temperature from the heat deficit."""
    if swe <= 0.0 or heat_deficit <= 0.0:
        return FREEZE_F
    t_c = -heat_deficit / (COLD_CONTENT_CAL_PER_INCH_DEGC * swe)
    return c_to_f(max(t_c, -60.0))


def zero_states(n_hru: int) -> List[HruState]:
    return [HruState() for _ in range(n_hru)]

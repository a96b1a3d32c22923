"""Impervious store, soil zone, subsurface and groundwater reservoirs,
surface runoff generation, and basin streamflow aggregation.

All storages and fluxes here are HRU-average depths (inches), so each
step's balance closes exactly: whatever leaves a store shows up in another
store or in an outgoing flux the same day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .basin import HruGeometry

# Fraction of the soil-zone capacity treated as the recharge (upper) layer.
RECHARGE_CAPACITY_FRACTION = 0.5


@dataclass(frozen=True)
class ImperviousResult:
    runoff: float        # overflow past the retention capacity
    evaporation: float
    store: float


def impervious_step(
    water_available: float,
    et_available: float,
    snow_cover: float,
    store: float,
    imperv_frac: float,
    capacity: float,
) -> ImperviousResult:
    """Impervious retention: fill, spill, then evaporate from bare area.

    ``water_available`` is the day's surface water (rain + melt) per unit
    area; the impervious fraction of it lands here. The store and its
    outputs are HRU-average depths, so the capacity scales with the
    impervious fraction.
    """
    if imperv_frac <= 0.0:
        return ImperviousResult(0.0, 0.0, store)
    store = store + water_available * imperv_frac
    cap = capacity * imperv_frac
    runoff = max(0.0, store - cap)
    store -= runoff
    evap = min(et_available * (1.0 - snow_cover) * imperv_frac, store)
    store -= evap
    return ImperviousResult(runoff, evap, store)


def contributing_area_fraction(
    soil_store: float,
    net_precip: float,
    coef: float,
    exponent: float,
    max_fraction: float,
    product_form: bool = False,
) -> float:
    """Soil-moisture-dependent fraction of the pervious area shedding runoff.

    Default uses the antecedent index ``soil + 0.5 * net_precip`` in the
    exponent; ``product_form`` switches to the multiplicative variant. The
    result is capped at the maximum contributing fraction.
    """
    if product_form:
        index = soil_store * 0.5 * net_precip
    else:
        index = soil_store + 0.5 * net_precip
    return min(coef * 10.0 ** (exponent * index), max_fraction)


def pervious_runoff(
    contributing_fraction: float,
    water_available: float,
) -> float:
    """Runoff depth per unit pervious area."""
    return contributing_fraction * water_available


@dataclass(frozen=True)
class SoilZoneResult:
    to_gw: float
    to_subsurface: float
    actual_et: float
    recharge_store: float
    soil_store: float


def soil_zone_step(
    infiltration: float,
    et_available: float,
    recharge_store: float,
    soil_store: float,
    capacity: float,
    max_to_gw: float,
    recharge_fraction: float = RECHARGE_CAPACITY_FRACTION,
) -> SoilZoneResult:
    """Fill the two-layer soil zone, route the excess, then draw ET.

    Infiltration tops up the recharge layer first, then the lower zone up
    to capacity. Excess percolates to groundwater up to the daily maximum;
    the remainder becomes subsurface inflow. ET comes out of the recharge
    layer first, then the lower zone, limited by the remaining potential.
    """
    rechr_cap = recharge_fraction * capacity
    to_rechr = min(infiltration, max(0.0, rechr_cap - recharge_store),
                   max(0.0, capacity - soil_store))
    recharge_store += to_rechr
    soil_store += to_rechr
    rest = infiltration - to_rechr
    to_lower = min(rest, max(0.0, capacity - soil_store))
    soil_store += to_lower
    excess = rest - to_lower

    to_gw = min(max_to_gw, excess)
    to_subsurface = excess - to_gw

    et_upper = min(et_available, recharge_store)
    recharge_store -= et_upper
    soil_store -= et_upper
    et_lower = min(et_available - et_upper, soil_store - recharge_store)
    soil_store -= et_lower

    return SoilZoneResult(
        to_gw=to_gw,
        to_subsurface=to_subsurface,
        actual_et=et_upper + et_lower,
        recharge_store=recharge_store,
        soil_store=soil_store,
    )


@dataclass(frozen=True)
class SubsurfaceResult:
    to_stream: float
    to_gw: float
    store: float


def subsurface_flow(store: float, lin_coef: float, quad_coef: float) -> float:
    """Streamflow release from the subsurface reservoir (quadratic rating)."""
    return lin_coef * store + quad_coef * store * store


def subsurface_percolation(
    store: float, rate: float, exponent: float, scale_store: float
) -> float:
    """Downward transfer from the subsurface to groundwater (power rating)."""
    if store <= 0.0:
        return 0.0
    return rate * (store / scale_store) ** exponent


def subsurface_step(
    store: float,
    inflow: float,
    lin_coef: float,
    quad_coef: float,
    gw_rate: float,
    gw_exponent: float,
    gw_scale: float,
) -> SubsurfaceResult:
    """Explicit daily update: release to the stream, then percolate down.

    Both ratings evaluate on the running storage and are capped at what is
    actually present, so the store never goes negative.
    """
    store += inflow
    to_stream = min(subsurface_flow(store, lin_coef, quad_coef), store)
    store -= to_stream
    to_gw = min(subsurface_percolation(store, gw_rate, gw_exponent, gw_scale), store)
    store -= to_gw
    return SubsurfaceResult(to_stream, to_gw, store)


@dataclass(frozen=True)
class GroundwaterResult:
    baseflow: float
    sink: float
    store: float


def groundwater_step(
    store: float,
    inflow: float,
    flow_coef: float,
    sink_coef: float,
) -> GroundwaterResult:
    """Linear-reservoir release to the stream and to the basin sink.

    When the combined rates exceed unity the two outflows are scaled back
    proportionally so they drain at most the available storage.
    """
    store += inflow
    baseflow = flow_coef * store
    sink = sink_coef * store
    total = baseflow + sink
    if total > store > 0.0:
        scale = store / total
        baseflow *= scale
        sink *= scale
    elif store <= 0.0:
        baseflow = sink = 0.0
    store -= baseflow + sink
    return GroundwaterResult(baseflow, sink, max(store, 0.0))


def basin_streamflow(
    surface: Sequence[float],
    subsurface: Sequence[float],
    baseflow: Sequence[float],
    hrus: Sequence[HruGeometry],
) -> float:
    """Area-weighted basin streamflow depth, inches/day.

    Uses an exact sum so the result is invariant under HRU reordering.
    """
    total_area = math.fsum(h.area_acres for h in hrus)
    if total_area <= 0.0:
        raise ValueError("basin has zero total area")
    return math.fsum(
        (sr + ss + gw) * h.area_acres
        for sr, ss, gw, h in zip(surface, subsurface, baseflow, hrus)
    ) / total_area

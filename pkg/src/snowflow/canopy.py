"""Canopy interception of rain and snow, throughfall, and canopy depletion.

The canopy store is carried as an HRU-average depth. Capacities from the
parameter table apply per unit of covered area, so comparisons divide by
the cover density. Rain and snow fractions are intercepted separately
against their own capacities (snow first) and share the single store; the
day's water ledger is ``precip == net_precip + interception`` exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .parameters import ParameterSet


@dataclass(frozen=True)
class CanopyResult:
    net_precip: float      # reaches the ground, HRU-average inches
    net_rain: float
    net_snow: float
    throughfall: float     # per unit covered area
    interception: float    # HRU-average depth added to the canopy store
    canopy_store: float    # updated store


def intercept(
    precip: float,
    rain_fraction: float,
    summer: bool,
    canopy_store: float,
    hru: int,
    params: ParameterSet,
) -> CanopyResult:
    """Partition a day's precipitation through the canopy."""
    rain = precip * rain_fraction
    snow = precip - rain
    cover = params.per_hru("covden_sum" if summer else "covden_win", hru)
    if cover <= 0.0 or precip <= 0.0:
        return CanopyResult(precip, rain, snow, 0.0, 0.0, canopy_store)

    store_cov = canopy_store / cover    # store per unit covered area
    rain_cap = params.per_hru("srain_intcp" if summer else "wrain_intcp", hru)
    snow_cap = params.per_hru("snow_intcp", hru)

    taken_snow = min(snow, max(0.0, snow_cap - store_cov))
    store_cov += taken_snow
    taken_rain = min(rain, max(0.0, rain_cap - store_cov))
    store_cov += taken_rain

    through_snow = snow - taken_snow
    through_rain = rain - taken_rain
    net_snow = through_snow * cover + (1.0 - cover) * snow
    net_rain = through_rain * cover + (1.0 - cover) * rain
    interception = cover * (taken_snow + taken_rain)
    return CanopyResult(
        net_precip=net_rain + net_snow,
        net_rain=net_rain,
        net_snow=net_snow,
        throughfall=through_snow + through_rain,
        interception=interception,
        canopy_store=canopy_store + interception,
    )


def canopy_evaporate(
    canopy_store: float,
    et_available: float,
    cover: float,
) -> tuple[float, float]:
    """Deplete the canopy store at the free-water rate.

    ``et_available`` is the day's remaining potential ET depth; the covered
    fraction evaporates at that rate, so at most ``cover * et_available``
    (HRU-average) leaves the store. Returns (depletion, new store).
    """
    if canopy_store <= 0.0 or et_available <= 0.0:
        return 0.0, canopy_store
    rate = et_available if cover <= 0.0 else cover * et_available
    depleted = min(canopy_store, rate)
    return depleted, canopy_store - depleted

"""Two-layer snowpack energy and mass balance.

Daily sequence for an HRU with (or receiving) snow:

1. new snow and rain enter the pack (rain only over the covered fraction),
2. the surface energy balance runs twice, for a day and a night period,
3. positive energy pays down the heat deficit, then melts ice,
4. liquid above the free-water capacity leaves as melt outflow,
5. sublimation draws on the remaining potential ET,
6. depth settles toward the maximum density and density is re-derived,
7. the covered-area fraction comes from the depletion curve.

Pack storages are HRU-average depths; energy terms are per unit of
snow-covered area, so energy-to-mass conversions carry the covered
fraction. The heat deficit is stored as an HRU-average so that
``pack_temp_C = -H / (1.27 * swe)`` holds in one frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

from .basin import HruState, pack_temperature_f
from .constants import (
    BLACKBODY_COEF,
    COLD_CONTENT_CAL_PER_INCH_DEGC,
    FREE_WATER_CAPACITY_FRACTION,
    KELVIN_OFFSET_C,
    LATENT_HEAT_CAL_PER_INCH,
    SNOW_EPS,
    SPECIFIC_HEAT_ICE,
    f_to_c,
)
from .parameters import ParameterSet

# Snowfall below this depth does not reset the albedo ageing clock.
ALBEDO_RESET_SNOW_IN = 0.01

# Conduction acts over a half-day period.
CONDUCTION_DT_HOURS = 12.0


@dataclass(frozen=True)
class AlbedoCurve:
    """Exponential albedo decay with days since the last snowfall."""

    accumulation_max: float = 0.9
    accumulation_min: float = 0.4
    accumulation_rate: float = 0.2
    melt_max: float = 0.8
    melt_min: float = 0.35
    melt_rate: float = 0.3

    def value(self, days_since_snow: float, melting: bool) -> float:
        if melting:
            hi, lo, k = self.melt_max, self.melt_min, self.melt_rate
        else:
            hi, lo, k = self.accumulation_max, self.accumulation_min, self.accumulation_rate
        return lo + (hi - lo) * math.exp(-k * max(days_since_snow, 0.0))


@dataclass(frozen=True)
class DepletionCurve:
    """Eleven covered-area fractions over SWE/peak in steps of 0.1."""

    values: Tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != 11:
            raise ValueError("depletion curve needs exactly 11 points")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise ValueError("depletion curve values must lie in [0, 1]")
        if any(b < a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("depletion curve must be nondecreasing")

    def lookup(self, frac: float) -> float:
        f = min(1.0, max(0.0, frac))
        pos = f * 10.0
        i = min(int(pos), 9)
        w = pos - i
        return self.values[i] * (1.0 - w) + self.values[i + 1] * w


DEFAULT_DEPLETION = DepletionCurve(
    (0.0, 0.22, 0.40, 0.55, 0.67, 0.77, 0.85, 0.91, 0.95, 0.98, 1.0)
)


@dataclass(frozen=True)
class EnergyTerms:
    net_shortwave: float      # Langleys, per covered area
    longwave_in: float
    blackbody: float          # air black-body emission
    convection: float
    conduction: float
    balance: float            # net exchange applied to the pack
    albedo: float


def surface_energy(
    temp_f: float,
    shortwave: float,
    precip_today: float,
    winter_cover: float,
    albedo: float,
    pack_temp_f: float,
    density: float,
    month: int,
    params: ParameterSet,
    hru: int,
) -> EnergyTerms:
    """Snow-atmosphere exchange for one half-day period.

    Net shortwave is reduced by albedo and canopy transmission. Longwave in
    mixes canopy emission (taken at air temperature) with clear-air
    emissivity; the pack emits as a black body at its own temperature. When
    the balance is negative, only conduction acts on the pack.
    """
    t_c = f_to_c(temp_f)
    pack_c = f_to_c(min(pack_temp_f, 32.0))
    r_net = (1.0 - albedo) * params.per_hru("rad_trncf", hru) * shortwave
    air_bb = BLACKBODY_COEF * (t_c + KELVIN_OFFSET_C) ** 4
    emis = 1.0 if precip_today > 0.0 else params.scalar("emis_noppt")
    lw_in = winter_cover * air_bb + (1.0 - winter_cover) * emis * air_bb
    pack_bb = BLACKBODY_COEF * (pack_c + KELVIN_OFFSET_C) ** 4
    convection = params.monthly("cecn_coef", month) * t_c
    balance = (lw_in - pack_bb) + convection + r_net

    conduction = 0.0
    if balance < 0.0:
        rho = max(density, 1e-6)
        conduction = (
            2.0
            * 0.5
            * SPECIFIC_HEAT_ICE
            * math.sqrt(0.0077 * rho * rho * CONDUCTION_DT_HOURS
                        / (SPECIFIC_HEAT_ICE * rho))
            * (t_c - pack_c)
        )
    return EnergyTerms(
        net_shortwave=r_net,
        longwave_in=lw_in,
        blackbody=air_bb,
        convection=convection,
        conduction=conduction,
        balance=balance,
        albedo=albedo,
    )


def _refreeze(state: HruState) -> None:
    """Free water refreezes against the heat deficit, releasing latent heat."""
    if state.heat_deficit <= 0.0 or state.free_water <= 0.0:
        return
    freezable = min(
        state.free_water, state.heat_deficit / LATENT_HEAT_CAL_PER_INCH
    )
    state.free_water -= freezable
    state.ice += freezable
    state.heat_deficit = max(
        0.0, state.heat_deficit - freezable * LATENT_HEAT_CAL_PER_INCH
    )


def apply_energy(balance: float, state: HruState) -> float:
    """Apply one period's energy exchange; returns melted depth (HRU inches).

    Positive energy pays the heat deficit before producing melt over the
    covered fraction; negative energy deepens the deficit after refreezing
    any free water. The melt stays in the pack as free water here — the
    outflow decision happens in :func:`resolve_free_water`.
    """
    if state.swe <= 0.0 or balance == 0.0:
        return 0.0
    area = state.snow_cover
    melted = 0.0
    if balance > 0.0:
        energy = balance * area
        pay = min(state.heat_deficit, energy)
        state.heat_deficit -= pay
        energy -= pay
        if energy > 0.0 and state.heat_deficit <= 0.0:
            melted = min(state.ice, energy / LATENT_HEAT_CAL_PER_INCH)
            state.ice -= melted
            state.free_water += melted
    else:
        deficit_add = -balance * area
        freeze = min(state.free_water, deficit_add / LATENT_HEAT_CAL_PER_INCH)
        state.free_water -= freeze
        state.ice += freeze
        deficit_add -= freeze * LATENT_HEAT_CAL_PER_INCH
        state.heat_deficit += max(deficit_add, 0.0)
    state.pack_temp = pack_temperature_f(state.heat_deficit, state.swe)
    return melted


def resolve_free_water(state: HruState) -> float:
    """Liquid above the pack's holding capacity leaves as melt outflow."""
    cap = FREE_WATER_CAPACITY_FRACTION * state.ice
    out = state.free_water - cap
    if out <= 0.0:
        return 0.0
    state.free_water = cap
    state.swe -= out
    return out


def sublimate(
    et_available: float,
    state: HruState,
    params: ParameterSet,
) -> float:
    """Sublimation draw on the pack, capped at the stored water.

    The escaping mass carries its cold content away, shrinking the heat
    deficit in proportion so the pack temperature is unchanged.
    """
    if state.swe <= 0.0 or et_available <= 0.0:
        return 0.0
    want = params.scalar("potet_sublim") * et_available * state.snow_cover
    taken = min(want, state.swe)
    if taken <= 0.0:
        return 0.0
    if state.heat_deficit > 0.0:
        pack_c = f_to_c(state.pack_temp)
        state.heat_deficit = max(
            0.0,
            state.heat_deficit + pack_c * COLD_CONTENT_CAL_PER_INCH_DEGC * taken,
        )
    from_ice = min(state.ice, taken)
    state.ice -= from_ice
    state.free_water -= taken - from_ice
    state.swe -= taken
    state.pack_temp = pack_temperature_f(state.heat_deficit, state.swe)
    return taken


def depth_density_step(
    net_snow: float,
    state: HruState,
    params: ParameterSet,
) -> None:
    """One-day settlement of pack depth, then density re-derivation.

    New snow adds depth at the fresh density while the whole pack relaxes
    toward the maximum settled density:
    ``dD = Pns/rho_init + tau * (swe/rho_max - D)`` with swe already
    including today's snowfall.
    """
    if state.swe <= 0.0:
        state.depth = 0.0
        state.density = 0.0
        return
    rho_init = params.scalar("den_init")
    rho_max = params.scalar("den_max")
    tau = params.scalar("settle_const")
    dd = net_snow / rho_init + tau * (state.swe / rho_max - state.depth)
    state.depth = max(state.depth + dd, 0.0)
    if state.depth < state.swe:
        state.depth = state.swe    # density cannot exceed 1 g/cm3
    state.density = state.swe / state.depth if state.depth > 0.0 else 0.0


def snow_covered_area(
    swe: float,
    swe_peak: float,
    full_cover_swe: float,
    curve: DepletionCurve,
) -> float:
    """Covered fraction from the depletion curve against the seasonal peak."""
    if swe <= 0.0:
        return 0.0
    if swe >= full_cover_swe:
        return 1.0
    if swe_peak <= 0.0:
        return 0.0
    return curve.lookup(swe / swe_peak)


@dataclass(frozen=True)
class SnowpackDayResult:
    melt_out: float         # liquid leaving the pack, HRU inches
    rain_bypass: float      # net rain that never entered the pack
    sublimation: float
    energy: EnergyTerms     # period terms summed


def snowpack_day(
    state: HruState,
    net_snow: float,
    net_rain: float,
    tavg_f: float,
    tmax_f: float,
    tmin_f: float,
    shortwave: float,
    precip_today: float,
    et_available: float,
    month: int,
    hru: int,
    params: ParameterSet,
    curve: DepletionCurve,
    albedo_curve: AlbedoCurve,
    constant_albedo: bool = False,
) -> SnowpackDayResult:
    """Advance one HRU's snowpack by one day. Mutates ``state``.

    Returns the water leaving the pack plus the rain fraction that fell on
    bare ground. ``swe == ice + free_water`` is re-established exactly at
    every exit point, and a pack below the melt-out epsilon is flushed to
    outflow so no water disappears.
    """
    melt_out = 0.0
    # Albedo clock before today's snow is added.
    if net_snow > ALBEDO_RESET_SNOW_IN:
        state.days_since_snow = 0.0
    elif state.swe > 0.0:
        state.days_since_snow += 1.0

    if net_snow > 0.0:
        state.ice += net_snow
        state.swe += net_snow
        new_snow_c = min(f_to_c(tavg_f), 0.0)
        state.heat_deficit += (
            -new_snow_c * COLD_CONTENT_CAL_PER_INCH_DEGC * net_snow
        )
        if state.swe > state.swe_peak:
            state.swe_peak = state.swe

    rain_bypass = net_rain
    if state.swe > 0.0:
        # Interim covered fraction so today's new pack can melt today.
        state.snow_cover = snow_covered_area(
            state.swe, state.swe_peak,
            params.per_hru("snarea_thresh", hru), curve,
        )
        rain_on_pack = net_rain * state.snow_cover
        rain_bypass = net_rain - rain_on_pack
        if rain_on_pack > 0.0:
            state.free_water += rain_on_pack
            state.swe += rain_on_pack
            _refreeze(state)
        state.pack_temp = pack_temperature_f(state.heat_deficit, state.swe)

    energy = EnergyTerms(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    if state.swe > 0.0:
        winter_cover = params.per_hru("covden_win", hru)
        if constant_albedo:
            albedo = params.per_hru("albedo", hru)
        else:
            melting = state.heat_deficit <= 0.0
            albedo = albedo_curve.value(state.days_since_snow, melting)
        terms = []
        for period_t in ((tavg_f + tmax_f) / 2.0, (tavg_f + tmin_f) / 2.0):
            t = surface_energy(
                period_t, shortwave / 2.0, precip_today, winter_cover,
                albedo, state.pack_temp, state.density, month, params, hru,
            )
            terms.append(t)
            applied = t.balance if t.balance >= 0.0 else t.conduction
            apply_energy(applied, state)
            melt_out += resolve_free_water(state)
            if state.swe <= 0.0:
                break
        energy = EnergyTerms(
            net_shortwave=sum(t.net_shortwave for t in terms),
            longwave_in=sum(t.longwave_in for t in terms),
            blackbody=sum(t.blackbody for t in terms),
            convection=sum(t.convection for t in terms),
            conduction=sum(t.conduction for t in terms),
            balance=sum(t.balance for t in terms),
            albedo=albedo,
        )

    subl = sublimate(et_available, state, params)

    # Flush a residual film so the ledger still closes.
    if 0.0 < state.swe <= SNOW_EPS:
        melt_out += state.ice + state.free_water
        state.swe = 0.0
    if state.swe <= 0.0:
        state.ice = 0.0
        state.free_water = 0.0
        state.heat_deficit = 0.0
        state.pack_temp = 32.0
        state.swe_peak = 0.0
        state.days_since_snow = 0.0

    depth_density_step(net_snow, state, params)
    state.snow_cover = snow_covered_area(
        state.swe, state.swe_peak, params.per_hru("snarea_thresh", hru), curve
    )
    return SnowpackDayResult(
        melt_out=melt_out,
        rain_bypass=rain_bypass,
        sublimation=subl,
        energy=energy,
    )

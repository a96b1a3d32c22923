"""Daily basin driver: orders the process steps and closes the water ledger.

Per HRU and day: distribute temperature, shortwave, precipitation phase,
canopy interception, potential ET, canopy evaporation, snowpack, impervious
store, pervious runoff, soil zone, subsurface, groundwater. Streamflow is
the area-weighted sum of surface, subsurface and baseflow releases.

The step is pure with respect to the caller's state: it returns fresh
state objects and per-HRU flux records plus a basin summary carrying the
mass-balance residual (inputs minus storage change minus outputs).
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from . import soil
from .basin import (
    FluxRecord,
    HruGeometry,
    HruState,
    StateBounds,
    clamp_state,
    default_bounds,
    pack_temperature_f,
)
from .canopy import canopy_evaporate, intercept
from .constants import ACRE_INCH_PER_DAY_TO_CFS
from .forcing import (
    ClimateForcing,
    SeasonConfig,
    SolarTable,
    distribute_temperature,
    jensen_haise_et,
    partition_precipitation,
    shortwave_radiation,
)
from .parameters import ParameterSet
from .snowpack import (
    DEFAULT_DEPLETION,
    AlbedoCurve,
    DepletionCurve,
    snow_covered_area,
    snowpack_day,
)


class StepError(RuntimeError):
    """A daily step produced a non-finite value; message names HRU and field."""


@dataclass(frozen=True)
class DailyBasinOutput:
    date: dt.date
    streamflow_in: float     # basin-average depth, inches/day
    streamflow_cfs: float
    surface_in: float
    subsurface_in: float
    baseflow_in: float
    et_in: float
    swe_in: float            # basin-average snow water equivalent
    residual_in: float       # mass-balance residual, should be ~0


@dataclass
class ModelConfig:
    season: SeasonConfig = field(default_factory=SeasonConfig)
    depletion_curve: DepletionCurve = DEFAULT_DEPLETION
    albedo_curve: AlbedoCurve = field(default_factory=AlbedoCurve)
    constant_albedo: bool = False
    smidx_product_form: bool = False
    recharge_fraction: float = soil.RECHARGE_CAPACITY_FRACTION


def hru_water_total(state: HruState) -> float:
    """Total stored water in one HRU, inches over the HRU area.

    The pack is counted through ice + free water (not ``swe``, which is the
    same quantity), and the recharge layer is a sub-account of the soil
    store, so neither appears twice.
    """
    return math.fsum((
        state.canopy_store,
        state.ice,
        state.free_water,
        state.imperv_store,
        state.soil_store,
        state.subsurface_store,
        state.gw_store,
    ))


class BasinModel:
    """Static basin description plus the daily step.

    Parameters are passed to :meth:`step` explicitly so ensemble members
    can run the same model object with their own parameter copies.
    """

    def __init__(
        self,
        hrus: Sequence[HruGeometry],
        index_hru: int = 0,
        config: Optional[ModelConfig] = None,
        solar: Optional[SolarTable] = None,
    ):
        if not hrus:
            raise ValueError("basin needs at least one HRU")
        self.hrus = list(hrus)
        self.index_hru = index_hru
        self.config = config or ModelConfig()
        self.solar = solar or SolarTable(self.hrus)
        self.total_area = math.fsum(h.area_acres for h in self.hrus)

    def bounds_for(self, params: ParameterSet, hru: int) -> StateBounds:
        return default_bounds(params, hru)

    def normalize_state(self, state: HruState, params: ParameterSet, hru: int) -> HruState:
        """Clamp to bounds and re-derive the diagnostic pack fields.

        Used after an analysis update may have nudged individual fields
        apart: density, pack temperature and covered fraction are functions
        of the primary storages and must be re-derived before stepping.
        """
        s = clamp_state(state, self.bounds_for(params, hru))
        if s.swe <= 0.0:
            s.ice = s.free_water = 0.0
            s.depth = 0.0
            s.density = 0.0
            s.heat_deficit = 0.0
            s.pack_temp = 32.0
            s.snow_cover = 0.0
            s.swe_peak = 0.0
        else:
            if s.depth < s.swe:
                s.depth = s.swe
            s.density = s.swe / s.depth
            s.pack_temp = pack_temperature_f(s.heat_deficit, s.swe)
            if s.swe > s.swe_peak:
                s.swe_peak = s.swe
            s.snow_cover = snow_covered_area(
                s.swe, s.swe_peak,
                params.per_hru("snarea_thresh", hru),
                self.config.depletion_curve,
            )
        return s

    def step(
        self,
        states: Sequence[HruState],
        forcing: ClimateForcing,
        params: ParameterSet,
    ) -> Tuple[List[HruState], List[FluxRecord], DailyBasinOutput]:
        date = forcing.date
        month = date.month
        summer = self.config.season.is_summer(date)
        index_geom = self.hrus[self.index_hru]

        new_states: List[HruState] = []
        records: List[FluxRecord] = []
        surface: List[float] = []
        subsurface: List[float] = []
        baseflow: List[float] = []
        residuals: List[float] = []

        for h, geom in enumerate(self.hrus):
            s = states[h].copy()
            start_total = hru_water_total(s)
            rec = FluxRecord()
            precip = forcing.precip[h]
            rec.precip = precip

            tmax, tmin = distribute_temperature(
                forcing.tmax_station, forcing.tmin_station, month,
                geom, index_geom, params,
            )
            tavg = (tmax + tmin) / 2.0
            rsw = shortwave_radiation(
                tmax, precip, date, geom, params, self.solar, summer
            )
            fr = partition_precipitation(tmax, tmin, month, params)

            can = intercept(precip, fr, summer, s.canopy_store, h, params)
            s.canopy_store = can.canopy_store
            rec.net_precip = can.net_precip
            rec.net_rain = can.net_rain
            rec.net_snow = can.net_snow
            rec.throughfall = can.throughfall
            rec.interception = can.interception

            etp = jensen_haise_et(tavg, rsw, geom.elevation_ft, month, params)
            rec.pot_et = etp
            et_left = etp

            cover = params.per_hru("covden_sum" if summer else "covden_win", h)
            evap, s.canopy_store = canopy_evaporate(s.canopy_store, et_left, cover)
            rec.canopy_evap = evap
            et_left -= min(evap, et_left)

            pack = snowpack_day(
                s, can.net_snow, can.net_rain, tavg, tmax, tmin, rsw,
                precip, et_left, month, h, params,
                self.config.depletion_curve, self.config.albedo_curve,
                self.config.constant_albedo,
            )
            rec.melt_out = pack.melt_out
            rec.sublimation = pack.sublimation
            et_left -= min(pack.sublimation, et_left)
            rec.net_shortwave = pack.energy.net_shortwave
            rec.longwave_in = pack.energy.longwave_in
            rec.blackbody = pack.energy.blackbody
            rec.convection = pack.energy.convection
            rec.conduction = pack.energy.conduction
            rec.energy_balance = pack.energy.balance
            rec.albedo = pack.energy.albedo

            available = pack.melt_out + pack.rain_bypass
            fi = params.per_hru("hru_percent_imperv", h)

            imp = soil.impervious_step(
                available, et_left, s.snow_cover, s.imperv_store,
                fi, params.per_hru("imperv_stor_max", h),
            )
            s.imperv_store = imp.store
            rec.imperv_runoff = imp.runoff
            rec.imperv_evap = imp.evaporation
            et_left -= min(imp.evaporation, et_left)

            ca = soil.contributing_area_fraction(
                s.soil_store, can.net_precip,
                params.per_hru("smidx_coef", h),
                params.per_hru("smidx_exp", h),
                params.per_hru("carea_max", h),
                self.config.smidx_product_form,
            )
            fsrp = soil.pervious_runoff(ca, available)
            rec.pervious_runoff = fsrp
            infiltration = (1.0 - fi) * (available - fsrp)

            sz = soil.soil_zone_step(
                infiltration, et_left, s.recharge_store, s.soil_store,
                params.per_hru("soilmoist_max", h),
                params.per_hru("soil2gw_max", h),
                self.config.recharge_fraction,
            )
            s.recharge_store = sz.recharge_store
            s.soil_store = sz.soil_store
            rec.soil_et = sz.actual_et
            rec.soil_to_gw = sz.to_gw
            rec.soil_to_subsurface = sz.to_subsurface
            et_left -= min(sz.actual_et, et_left)

            ss = soil.subsurface_step(
                s.subsurface_store, sz.to_subsurface,
                params.per_hru("ssrcoef_sq", h),   # linear-term coefficient
                params.per_hru("ssrcoef_lin", h),  # quadratic-term coefficient
                params.per_hru("ssr2gw_rate", h),
                params.per_hru("ssr2gw_exp", h),
                params.per_hru("ssrmax_coef", h),
            )
            s.subsurface_store = ss.store
            rec.subsurface_flow = ss.to_stream
            rec.subsurface_to_gw = ss.to_gw

            gw = soil.groundwater_step(
                s.gw_store, sz.to_gw + ss.to_gw,
                params.per_hru("gwflow_coef", h),
                params.per_hru("gwsink_coef", h),
            )
            s.gw_store = gw.store
            rec.gw_flow = gw.baseflow
            rec.gw_sink = gw.sink

            rec.surface_runoff = (1.0 - fi) * fsrp + imp.runoff
            rec.et_total = (
                rec.canopy_evap + rec.sublimation + rec.imperv_evap + rec.soil_et
            )

            end_total = hru_water_total(s)
            outputs = (
                rec.surface_runoff + rec.subsurface_flow + rec.gw_flow
                + rec.gw_sink + rec.et_total
            )
            residual = precip - (end_total - start_total) - outputs
            residuals.append(residual)

            self._check_finite(s, rec, h, date)
            new_states.append(s)
            records.append(rec)
            surface.append(rec.surface_runoff)
            subsurface.append(rec.subsurface_flow)
            baseflow.append(rec.gw_flow)

        fbasin = soil.basin_streamflow(surface, subsurface, baseflow, self.hrus)
        weights = [g.area_acres / self.total_area for g in self.hrus]
        out = DailyBasinOutput(
            date=date,
            streamflow_in=fbasin,
            streamflow_cfs=fbasin * self.total_area * ACRE_INCH_PER_DAY_TO_CFS,
            surface_in=math.fsum(w * v for w, v in zip(weights, surface)),
            subsurface_in=math.fsum(w * v for w, v in zip(weights, subsurface)),
            baseflow_in=math.fsum(w * v for w, v in zip(weights, baseflow)),
            et_in=math.fsum(w * r.et_total for w, r in zip(weights, records)),
            swe_in=math.fsum(w * s.swe for w, s in zip(weights, new_states)),
            residual_in=math.fsum(w * r for w, r in zip(weights, residuals)),
        )
        return new_states, records, out

    @staticmethod
    def _check_finite(state: HruState, rec: FluxRecord, hru: int, date: dt.date) -> None:
        from dataclasses import fields as dc_fields

        for obj, kind in ((state, "state"), (rec, "flux")):
            for f in dc_fields(obj):
                v = getattr(obj, f.name)
                if not math.isfinite(v):
                    raise StepError(
                        f"{date} hru {hru}: non-finite {kind} {f.name} = {v}"
                    )


def run_series(
    model: BasinModel,
    states: Sequence[HruState],
    params: ParameterSet,
    forcing_days: Sequence[ClimateForcing],
) -> Tuple[List[HruState], List[DailyBasinOutput], List[List[FluxRecord]]]:
    """Deterministic open-loop run over a forcing series."""
    outputs: List[DailyBasinOutput] = []
    all_records: List[List[FluxRecord]] = []
    current = [s.copy() for s in states]
    for day in forcing_days:
        current, records, out = model.step(current, day, params)
        outputs.append(out)
        all_records.append(records)
    return current, outputs, all_records

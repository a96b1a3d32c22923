"""Climate forcing distribution and derived inputs.

Station Tmax/Tmin are lapsed to each HRU by elevation; per-HRU daily
precipitation arrives as input. Shortwave radiation comes from a clear-sky
potential table adjusted by the degree-day method; potential ET uses the
temperature/radiation formulation with an elevation-dependent offset.
"""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .basin import HruGeometry
from .parameters import ParameterSet

# Ratio of actual-to-potential radiation vs degree-day index. The curve is
# monotone and concave: 26 points spanning dd 1..26, r 0.2..0.9.
DEFAULT_DD_CURVE: Tuple[Tuple[float, float], ...] = tuple(
    (float(dd), round(0.2 + 0.7 * (1.0 - math.exp(-0.18 * (dd - 1)))
                      / (1.0 - math.exp(-0.18 * 25)), 4))
    for dd in range(1, 27)
)

# Fraction of extraterrestrial radiation reaching the ground under clear sky.
CLEAR_SKY_TRANSMISSIVITY = 0.75
MJ_M2_TO_LANGLEY = 23.884589


@dataclass(frozen=True)
class SeasonConfig:
    """Calendar definition of the summer season (inclusive)."""

    summer_start: Tuple[int, int] = (5, 1)    # (month, day)
    summer_end: Tuple[int, int] = (9, 30)

    def is_summer(self, date: dt.date) -> bool:
        key = (date.month, date.day)
        return self.summer_start <= key <= self.summer_end


@dataclass(frozen=True)
class ClimateForcing:
    """One day of climate input: station temperatures plus per-HRU precip."""

    date: dt.date
    tmax_station: float
    tmin_station: float
    precip: Tuple[float, ...]   # inches per HRU

    def __post_init__(self):
        if self.tmax_station < self.tmin_station:
            raise ValueError(f"{self.date}: tmax < tmin")
        if any(p < 0 for p in self.precip):
            raise ValueError(f"{self.date}: negative precipitation")


def _daily_extraterrestrial_mj(latitude_deg: float, doy: int) -> float:
    """Top-of-atmosphere daily radiation on a horizontal surface, MJ/m2."""
    lat = math.radians(latitude_deg)
    decl = 0.409 * math.sin(2.0 * math.pi * doy / 365.0 - 1.39)
    dr = 1.0 + 0.033 * math.cos(2.0 * math.pi * doy / 365.0)
    x = -math.tan(lat) * math.tan(decl)
    ws = math.acos(min(1.0, max(-1.0, x)))
    ra = (24.0 * 60.0 / math.pi) * 0.0820 * dr * (
        ws * math.sin(lat) * math.sin(decl)
        + math.cos(lat) * math.cos(decl) * math.sin(ws)
    )
    return max(ra, 0.0)


class SolarTable:
    """Clear-sky potential shortwave per HRU per day-of-year, in Langleys,
    plus the degree-day to radiation-ratio curve."""

    def __init__(
        self,
        hrus: Sequence[HruGeometry],
        dd_curve: Sequence[Tuple[float, float]] = DEFAULT_DD_CURVE,
    ):
        self._check_curve(dd_curve)
        self.dd_curve = tuple((float(a), float(b)) for a, b in dd_curve)
        self.potential = np.zeros((367, len(hrus)))
        for doy in range(1, 367):
            for j, hru in enumerate(hrus):
                ra = _daily_extraterrestrial_mj(hru.latitude_deg, min(doy, 365))
                self.potential[doy, j] = (
                    ra * CLEAR_SKY_TRANSMISSIVITY * MJ_M2_TO_LANGLEY
                )

    @staticmethod
    def _check_curve(curve) -> None:
        if len(curve) < 2:
            raise ValueError("degree-day curve needs at least 2 points")
        dds = [a for a, _ in curve]
        rs = [b for _, b in curve]
        if any(b <= a for a, b in zip(dds, dds[1:])):
            raise ValueError("degree-day curve abscissae must increase strictly")
        if any(not 0.0 <= r <= 1.0 for r in rs):
            raise ValueError("radiation ratios must lie in [0, 1]")

    def clear_sky(self, doy: int, hru_index: int) -> float:
        return float(self.potential[doy, hru_index])

    def radiation_ratio(self, dd: float) -> float:
        """Interpolate the ratio curve; clamps to the endpoint values."""
        pts = self.dd_curve
        if dd <= pts[0][0]:
            return pts[0][1]
        if dd >= pts[-1][0]:
            return pts[-1][1]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if dd <= x1:
                w = (dd - x0) / (x1 - x0)
                return min(1.0, max(0.0, y0 + w * (y1 - y0)))
        return pts[-1][1]


def distribute_temperature(
    tmax_station: float,
    tmin_station: float,
    month: int,
    hru: HruGeometry,
    index_hru: HruGeometry,
    params: ParameterSet,
) -> Tuple[float, float]:
    """Lapse station temperatures to an HRU by elevation difference.

    The lapse rates are per 1000 ft; per-HRU adjustments are subtracted
    afterwards. The minimum is pulled down to the maximum if the two cross.
    """
    dz_kft = (hru.elevation_ft - index_hru.elevation_ft) / 1000.0
    j = hru.hru_id
    tmax = (
        tmax_station
        - params.monthly("tmax_lapse", month) * dz_kft
        - params.per_hru("tmax_adj", j)
    )
    tmin = (
        tmin_station
        - params.monthly("tmin_lapse", month) * dz_kft
        - params.per_hru("tmin_adj", j)
    )
    return tmax, min(tmin, tmax)


def shortwave_radiation(
    tmax_hru: float,
    precip: float,
    date: dt.date,
    hru: HruGeometry,
    params: ParameterSet,
    solar: SolarTable,
    summer: bool,
) -> float:
    """Daily shortwave at the HRU surface, Langleys.

    dd = slope_m * Tmax + intercept_m feeds the ratio curve; wet days are
    damped by the seasonal adjustment factor, and the slope correction
    divides by cos(arctan(slope)).
    """
    month = date.month
    dd = (
        params.monthly("dday_slope", month) * tmax_hru
        + params.monthly("dday_intcp", month)
    )
    ratio = solar.radiation_ratio(dd)
    if precip > params.monthly("ppt_rad_adj", month):
        gamma = params.scalar("radj_sppt") if summer else params.scalar("radj_wppt")
    else:
        gamma = 1.0
    potential = solar.clear_sky(date.timetuple().tm_yday, hru.hru_id)
    return ratio * gamma / math.cos(math.atan(hru.slope)) * potential


def partition_precipitation(
    tmax_hru: float,
    tmin_hru: float,
    month: int,
    params: ParameterSet,
) -> float:
    """Rain fraction of the day's precipitation, in [0, 1].

    All snow at/below the all-snow temperature; all rain when the minimum
    clears it and the maximum clears the all-rain temperature; otherwise a
    temperature-weighted mix. A mixed value above 1 is an all-rain event.
    """
    t_snow = params.monthly("tmax_allsnow", month)
    t_rain = params.monthly("tmax_allrain", month)
    if tmax_hru <= t_snow:
        return 0.0
    if tmin_hru >= t_snow and tmax_hru >= t_rain:
        return 1.0
    span = tmax_hru - tmin_hru
    if span <= 0.0:
        # Degenerate single-temperature day: side of the threshold decides.
        return 1.0 if tmax_hru > t_snow else 0.0
    fr = (tmax_hru - t_snow) / span * params.monthly("adjmix_rain", month)
    if fr > 1.0:
        return 1.0
    return min(1.0, max(0.0, fr))


def jensen_haise_et(
    tavg_hru: float,
    shortwave: float,
    elevation_ft: float,
    month: int,
    params: ParameterSet,
) -> float:
    """Potential evapotranspiration, inches/day (floored at zero)."""
    offset = 22.0 - elevation_ft / 1000.0
    coef = params.monthly("jh_coef", month)
    etp = coef * (tavg_hru - offset) * shortwave / (
        2.54 * (597.3 - 0.5653 * tavg_hru)
    )
    return max(etp, 0.0)


@dataclass
class ForcingSeries:
    """Gap-free daily forcing records plus the HRU ids they cover."""

    hru_ids: List[int]
    days: List[ClimateForcing] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.days)

    def validate(self) -> None:
        prev = None
        for rec in self.days:
            if prev is not None and (rec.date - prev).days != 1:
                raise ValueError(
                    f"forcing gap: expected {prev + dt.timedelta(days=1)}, got {rec.date}"
                )
            prev = rec.date
            if len(rec.precip) != len(self.hru_ids):
                raise ValueError(f"{rec.date}: precip count != number of HRUs")

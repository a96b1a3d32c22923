"""CSV readers and writers for forcing, observations and results.

Forcing file: one row per day — ``date,tmax,tmin,p_<id>,p_<id>,...`` with
one precipitation column per HRU, identified by id in the header. Dates
must be consecutive. Validation errors carry the offending row number.
"""

from __future__ import annotations

import csv
import datetime as dt
from typing import Dict, List, Optional, Sequence, Tuple

from .forcing import ClimateForcing, ForcingSeries
from .model import DailyBasinOutput


class FileFormatError(ValueError):
    pass


def _parse_date(token: str, row: int) -> dt.date:
    try:
        return dt.date.fromisoformat(token)
    except ValueError:
        raise FileFormatError(f"row {row}: bad date {token!r}") from None


def load_forcing_csv(path, expected_hru_ids: Optional[Sequence[int]] = None) -> ForcingSeries:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FileFormatError("row 1: empty forcing file") from None
        if header[:3] != ["date", "tmax", "tmin"]:
            raise FileFormatError(
                "row 1: header must start with date,tmax,tmin"
            )
        try:
            hru_ids = [int(col.removeprefix("p_")) for col in header[3:]]
        except ValueError:
            raise FileFormatError("row 1: precip columns must be p_<hru_id>") from None
        if not hru_ids:
            raise FileFormatError("row 1: no precipitation columns")
        if expected_hru_ids is not None and list(expected_hru_ids) != hru_ids:
            raise FileFormatError(
                f"row 1: forcing covers HRUs {hru_ids}, basin has "
                f"{list(expected_hru_ids)}"
            )

        series = ForcingSeries(hru_ids=hru_ids)
        prev_date = None
        for i, cols in enumerate(reader, start=2):
            if not cols:
                continue
            if len(cols) != 3 + len(hru_ids):
                raise FileFormatError(f"row {i}: expected {3 + len(hru_ids)} columns")
            date = _parse_date(cols[0], i)
            if prev_date is not None and (date - prev_date).days != 1:
                raise FileFormatError(
                    f"row {i}: date gap, expected "
                    f"{prev_date + dt.timedelta(days=1)}, got {date}"
                )
            prev_date = date
            try:
                tmax, tmin = float(cols[1]), float(cols[2])
                precip = tuple(float(c) for c in cols[3:])
            except ValueError:
                raise FileFormatError(f"row {i}: non-numeric value") from None
            if tmax < tmin:
                raise FileFormatError(f"row {i}: tmax {tmax} < tmin {tmin}")
            negatives = [p for p in precip if p < 0]
            if negatives:
                raise FileFormatError(f"row {i}: negative precipitation {negatives[0]}")
            series.days.append(
                ClimateForcing(date=date, tmax_station=tmax, tmin_station=tmin,
                               precip=precip)
            )
    if not series.days:
        raise FileFormatError("forcing file has no data rows")
    return series


def save_forcing_csv(path, series: ForcingSeries) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "tmax", "tmin"] + [f"p_{i}" for i in series.hru_ids])
        for day in series.days:
            w.writerow(
                [day.date.isoformat(), repr(day.tmax_station), repr(day.tmin_station)]
                + [repr(float(p)) for p in day.precip]
            )


# -- observation files -------------------------------------------------------

def save_swe_observations_csv(path, rows: Sequence[Tuple[dt.date, int, float]]) -> None:
    """Rows of (date, hru_id, swe)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "hru_id", "swe"])
        for date, hru, swe in rows:
            w.writerow([date.isoformat(), hru, repr(float(swe))])


def load_swe_observations_csv(path) -> Dict[dt.date, Dict[int, float]]:
    out: Dict[dt.date, Dict[int, float]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["date", "hru_id", "swe"]:
            raise FileFormatError("row 1: expected header date,hru_id,swe")
        for i, cols in enumerate(reader, start=2):
            if not cols:
                continue
            if len(cols) != 3:
                raise FileFormatError(f"row {i}: expected 3 columns")
            date = _parse_date(cols[0], i)
            try:
                out.setdefault(date, {})[int(cols[1])] = float(cols[2])
            except ValueError:
                raise FileFormatError(f"row {i}: non-numeric value") from None
    return out


def save_flow_csv(path, rows: Sequence[Tuple[dt.date, float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["date", "flow"])
        for date, flow in rows:
            w.writerow([date.isoformat(), repr(float(flow))])


def load_flow_csv(path) -> Dict[dt.date, float]:
    out: Dict[dt.date, float] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["date", "flow"]:
            raise FileFormatError("row 1: expected header date,flow")
        for i, cols in enumerate(reader, start=2):
            if not cols:
                continue
            if len(cols) != 2:
                raise FileFormatError(f"row {i}: expected 2 columns")
            try:
                out[_parse_date(cols[0], i)] = float(cols[1])
            except ValueError:
                raise FileFormatError(f"row {i}: non-numeric value") from None
    return out


# -- results ------------------------------------------------------------------

RESULT_COLUMNS = [
    "date", "fbasin_in", "fbasin_cfs", "swe_in",
    "surface_in", "subsurface_in", "baseflow_in", "et_in", "residual_in",
]
ENSEMBLE_COLUMNS = RESULT_COLUMNS + [
    "fbasin_std_cfs", "swe_std_forecast_in", "swe_std_analysis_in",
]


def save_results_csv(
    path,
    outputs: Sequence[DailyBasinOutput],
    ensemble_stats: Optional[Sequence[Tuple[float, float, float]]] = None,
) -> None:
    """Daily results; ensemble runs append spread columns
    (flow std, basin-SWE std before and after analysis)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ENSEMBLE_COLUMNS if ensemble_stats is not None else RESULT_COLUMNS)
        for i, o in enumerate(outputs):
            row = [
                o.date.isoformat(), repr(o.streamflow_in), repr(o.streamflow_cfs),
                repr(o.swe_in), repr(o.surface_in), repr(o.subsurface_in),
                repr(o.baseflow_in), repr(o.et_in), repr(o.residual_in),
            ]
            if ensemble_stats is not None:
                row += [repr(float(v)) for v in ensemble_stats[i]]
            w.writerow(row)


def load_results_csv(path) -> Dict[str, List]:
    """Columns of a results file keyed by name ('date' parsed, rest float)."""
    out: Dict[str, List] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "date":
            raise FileFormatError("row 1: expected a results header starting with date")
        for name in header:
            out[name] = []
        for i, cols in enumerate(reader, start=2):
            if not cols:
                continue
            if len(cols) != len(header):
                raise FileFormatError(f"row {i}: expected {len(header)} columns")
            out["date"].append(_parse_date(cols[0], i))
            for name, value in zip(header[1:], cols[1:]):
                try:
                    out[name].append(float(value))
                except ValueError:
                    raise FileFormatError(f"row {i}: non-numeric {name}") from None
    return out

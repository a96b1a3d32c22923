"""YAML configuration: basin description and experiment settings.

A basin file carries the HRU geometry table, the index (station) HRU, the
season calendar, model options and the full parameter block — one key per
parameter, scalars for global constants, 12-element lists for monthly
values, per-HRU lists otherwise. HRU ids must be 0..n-1 in order; they
double as column indices everywhere else.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import yaml

from .basin import HruGeometry
from .enkf import JOINT, STATE_ONLY, NoiseConfig
from .forcing import SeasonConfig
from .model import BasinModel, ModelConfig
from .parameters import ParameterSet, build_registry
from .snowpack import AlbedoCurve, DepletionCurve

BASIN_SCHEMA = "snowflow-basin/1"


class ConfigError(ValueError):
    pass


@dataclass
class BasinConfig:
    hrus: List[HruGeometry]
    index_hru: int
    params: ParameterSet
    model_config: ModelConfig

    def build_model(self) -> BasinModel:
        return BasinModel(self.hrus, self.index_hru, self.model_config)


def _require(mapping: dict, key: str, where: str):
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def load_basin(path) -> BasinConfig:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: basin file must be a mapping")
    if raw.get("schema") != BASIN_SCHEMA:
        raise ConfigError(f"{path}: expected schema {BASIN_SCHEMA!r}")

    hrus = []
    for i, h in enumerate(_require(raw, "hrus", str(path))):
        if h.get("id", i) != i:
            raise ConfigError(f"{path}: hru ids must be 0..n-1 in order")
        hrus.append(
            HruGeometry(
                hru_id=i,
                area_acres=float(_require(h, "area_acres", f"hru {i}")),
                elevation_ft=float(_require(h, "elevation_ft", f"hru {i}")),
                slope=float(h.get("slope", 0.0)),
                latitude_deg=float(h.get("latitude_deg", 40.0)),
            )
        )

    season = SeasonConfig()
    if "season" in raw:
        s = raw["season"]
        season = SeasonConfig(
            summer_start=tuple(s.get("summer_start", [5, 1])),
            summer_end=tuple(s.get("summer_end", [9, 30])),
        )
    options = raw.get("options", {})
    model_config = ModelConfig(
        season=season,
        constant_albedo=bool(options.get("constant_albedo", False)),
        smidx_product_form=bool(options.get("smidx_product_form", False)),
        recharge_fraction=float(options.get("recharge_fraction", 0.5)),
    )
    if "albedo_curve" in options:
        model_config.albedo_curve = AlbedoCurve(**options["albedo_curve"])

    cadence = raw.get("tmax_allrain_cadence", "constant")
    registry = build_registry(cadence)
    params = ParameterSet(n_hru=len(hrus), registry=registry)
    for name, value in _require(raw, "parameters", str(path)).items():
        try:
            params.set(name, value)
        except (KeyError, ValueError) as err:
            raise ConfigError(f"{path}: parameter {name}: {err}") from None
    if "snarea_curve" in params.values:
        model_config.depletion_curve = DepletionCurve(
            tuple(float(v) for v in params.array("snarea_curve"))
        )
    return BasinConfig(
        hrus=hrus, index_hru=int(raw.get("index_hru", 0)),
        params=params, model_config=model_config,
    )


def save_basin(path, cfg: BasinConfig, tmax_allrain_cadence: str = "constant") -> None:
    doc = {
        "schema": BASIN_SCHEMA,
        "index_hru": cfg.index_hru,
        "tmax_allrain_cadence": tmax_allrain_cadence,
        "season": {
            "summer_start": list(cfg.model_config.season.summer_start),
            "summer_end": list(cfg.model_config.season.summer_end),
        },
        "options": {
            "constant_albedo": cfg.model_config.constant_albedo,
            "smidx_product_form": cfg.model_config.smidx_product_form,
            "recharge_fraction": cfg.model_config.recharge_fraction,
        },
        "hrus": [
            {
                "id": h.hru_id,
                "area_acres": h.area_acres,
                "elevation_ft": h.elevation_ft,
                "slope": h.slope,
                "latitude_deg": h.latitude_deg,
            }
            for h in cfg.hrus
        ],
        "parameters": {
            name: (arr.tolist() if arr.shape[0] > 1 else float(arr[0]))
            for name, arr in sorted(cfg.params.items())
        },
    }
    Path(path).write_text(yaml.safe_dump(doc, sort_keys=False))


MODES = ("open-loop", "swe-only", "joint")


@dataclass
class ExperimentConfig:
    basin_path: str
    forcing_path: str
    mode: str = "open-loop"
    n_ensemble: int = 100
    seed: int = 0
    days: Optional[int] = None        # optional truncation of the forcing
    output_dir: str = "out"
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    twin_bias_fraction: float = 0.2
    twin_seeds: List[int] = field(default_factory=lambda: [101, 202, 303, 404, 505])

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.n_ensemble < 2:
            raise ConfigError("n_ensemble must be at least 2")

    @property
    def filter_mode(self) -> str:
        return JOINT if self.mode == "joint" else STATE_ONLY


def load_experiment(path) -> ExperimentConfig:
    raw = yaml.safe_load(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: experiment file must be a mapping")
    base = Path(path).parent
    noise_kwargs = raw.get("noise", {})
    try:
        noise = NoiseConfig(seed=int(raw.get("seed", 0)), **noise_kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"{path}: noise: {err}") from None

    def resolve(p: str) -> str:
        q = Path(p)
        return str(q if q.is_absolute() else base / q)

    cfg = ExperimentConfig(
        basin_path=resolve(_require(raw, "basin", str(path))),
        forcing_path=resolve(_require(raw, "forcing", str(path))),
        mode=raw.get("mode", "open-loop"),
        n_ensemble=int(raw.get("n_ensemble", 100)),
        seed=int(raw.get("seed", 0)),
        days=raw.get("days"),
        output_dir=resolve(raw.get("output", "out")),
        noise=noise,
        twin_bias_fraction=float(raw.get("twin_bias_fraction", 0.2)),
    )
    if "twin_seeds" in raw:
        cfg.twin_seeds = [int(s) for s in raw["twin_seeds"]]
    return cfg

"""Run configuration, read from a JSON file validated against ``CONFIG_SCHEMA``."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
import numpy as np

from .core import PureState, ket
from .optics import DETECTOR_PAIRS, NoiseModel
from .tomography import QPT_INPUTS

OUTPUT_DIR_ENV = "GATE_TELEPORT_OUT"

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gate-teleport run configuration",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "noise": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "epr_visibility": {"type": "number", "minimum": 0, "maximum": 1},
                "mz_visibility_12": {"type": "number", "minimum": 0, "maximum": 1},
                "mz_visibility_3": {"type": "number", "minimum": 0, "maximum": 1},
            },
        },
        "input_label": {"enum": list(QPT_INPUTS) + ["custom"]},
        "amplitudes": {
            "description": "custom input: four [re, im] pairs over |HH>, |HV>, |VH>, |VV>",
            "type": "array",
            "minItems": 4,
            "maxItems": 4,
            "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
        },
        "mean_counts_per_setting": {"type": "number", "exclusiveMinimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "detector_pair": {"enum": list(DETECTOR_PAIRS) + ["all"]},
        "exact": {"type": "boolean"},
    },
}


@dataclass(frozen=True)
class RunConfig:
    noise: NoiseModel = field(default_factory=NoiseModel.ideal)
    input_label: str = "RR"
    amplitudes: tuple[complex, ...] | None = None
    mean_counts_per_setting: float = 1e4
    seed: int = 0
    output_dir: Path = Path("runs")
    detector_pair: str = "D1D4"
    exact: bool = False

    def __post_init__(self):
        if self.input_label == "custom" and self.amplitudes is None:
            raise ValueError("custom input requires amplitudes")
        if self.input_label not in QPT_INPUTS and self.input_label != "custom":
            raise ValueError(f"unknown input label {self.input_label!r}")

    @property
    def input_state(self) -> PureState:
        if self.input_label == "custom":
            return PureState.from_unnormalized(np.array(self.amplitudes))
        return ket(self.input_label)

    @property
    def input_spec(self) -> str | PureState:
        return self.input_state if self.input_label == "custom" else self.input_label

    @property
    def noise_with_counts(self) -> NoiseModel:
        return replace(self.noise, mean_counts_per_setting=self.mean_counts_per_setting)

    def to_dict(self) -> dict:
        out = {
            "noise": {
                "epr_visibility": self.noise.epr_visibility,
                "mz_visibility_12": self.noise.mz_visibility_12,
                "mz_visibility_3": self.noise.mz_visibility_3,
            },
            "input_label": self.input_label,
            "mean_counts_per_setting": self.mean_counts_per_setting,
            "seed": self.seed,
            "output_dir": str(self.output_dir),
            "detector_pair": self.detector_pair,
            "exact": self.exact,
        }
        if self.amplitudes is not None:
            out["amplitudes"] = [[a.real, a.imag] for a in self.amplitudes]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        jsonschema.validate(data, CONFIG_SCHEMA)
        kwargs = {k: v for k, v in data.items() if k not in ("noise", "amplitudes", "output_dir")}
        if "noise" in data:
            kwargs["noise"] = NoiseModel(**data["noise"])
        if "amplitudes" in data:
            kwargs["amplitudes"] = tuple(complex(re, im) for re, im in data["amplitudes"])
        if "output_dir" in data:
            kwargs["output_dir"] = Path(data["output_dir"])
        elif os.environ.get(OUTPUT_DIR_ENV):
            kwargs["output_dir"] = Path(os.environ[OUTPUT_DIR_ENV])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path | None) -> "RunConfig":
        if path is None:
            return cls.from_dict({})
        return cls.from_dict(json.loads(Path(path).read_text()))

"""Run configuration: strict JSON documents with unknown-key rejection at
every nesting level. The exact config is embedded verbatim in every
report so a run can be replayed from its report.
"""

import json
from dataclasses import asdict, dataclass, field, fields

from debiaslab.errors import DataError
from debiaslab.model import AdapterConfig, ModelConfig
from debiaslab.training import SCHEDULE_PER_EPOCH, SCHEDULES


@dataclass
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    adapter: AdapterConfig = field(default_factory=AdapterConfig)
    data: dict = field(default_factory=dict)  # named dataset paths
    mask_rate: float = 0.15
    lr: float = 1e-3
    batch_size: int = 16
    epochs: int = 2
    schedule: str = SCHEDULE_PER_EPOCH
    seeds: list = field(default_factory=lambda: [0])
    trainable: list = field(default_factory=lambda: ["debias-adapter"])

    def __post_init__(self):
        if not 0.0 <= self.mask_rate <= 1.0:
            raise DataError("mask_rate must be in [0, 1]")
        if self.lr <= 0:
            raise DataError("lr must be positive")
        if self.batch_size < 1 or self.epochs < 0:
            raise DataError("batch_size must be >= 1 and epochs >= 0")
        if self.schedule not in SCHEDULES:
            raise DataError(f"schedule must be one of {SCHEDULES}")
        if not self.seeds:
            raise DataError("seeds must be nonempty")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise DataError("config root must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(raw)
        if "model" in kwargs:
            kwargs["model"] = _build(ModelConfig, kwargs["model"], "model")
        if "adapter" in kwargs:
            kwargs["adapter"] = _build(AdapterConfig, kwargs["adapter"], "adapter")
        if "data" in kwargs and not isinstance(kwargs["data"], dict):
            raise DataError("config key 'data' must be an object of named paths")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise DataError(f"{path}: invalid JSON ({e})") from None
        return cls.from_dict(raw)


def _build(cls, raw, where: str):
    if isinstance(raw, cls):
        return raw
    if not isinstance(raw, dict):
        raise DataError(f"config key {where!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise DataError(f"unknown keys under {where!r}: {sorted(unknown)}")
    return cls(**raw)

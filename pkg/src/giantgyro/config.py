"""Run configuration: a JSON file merged with command-line overrides."""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .dynamics import DdeConfig
from .linear_response import SystemParams
from .sensing import DriveConfig
from .topology import Topology

_ANGLE = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*$", re.IGNORECASE)


def parse_angle(text) -> float:
    """Parse radians, accepting a trailing ``pi`` (``pi``, ``0.5pi``, ``1.5*pi``)."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _ANGLE.match(str(text))
    if m:
        factor = float(m.group(1)) if m.group(1) else 1.0
        return factor * math.pi
    return float(text)


@dataclass
class RunConfig:
    params: SystemParams = field(default_factory=lambda: SystemParams.reference(0.1, drive_phase_per_tau=math.pi))
    topology: Optional[Topology] = None
    drive: DriveConfig = field(default_factory=DriveConfig)
    dde: DdeConfig = field(default_factory=DdeConfig)
    out: Optional[str] = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_record(),
            "topology": None if self.topology is None else self.topology.to_record(),
            "drive": self.drive.to_record(),
            "dde": self.dde.to_record(),
            "out": self.out,
            "options": dict(self.options),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {"params", "topology", "drive", "dde", "out", "options"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        cfg = cls()
        if data.get("params") is not None:
            base = cfg.params.to_record()
            base.update(data["params"])
            cfg.params = SystemParams.from_record(base)
        if data.get("topology") is not None:
            cfg.topology = Topology.from_record(data["topology"])
        if data.get("drive") is not None:
            cfg.drive = DriveConfig.from_record(data["drive"])
        if data.get("dde") is not None:
            cfg.dde = DdeConfig.from_record(data["dde"])
        cfg.out = data.get("out")
        cfg.options = dict(data.get("options") or {})
        return cfg

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.loads(fh.read())

# -*- coding: utf-8 -*-
"""Random community-size distributions for the experiment sweeps."""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional

import numpy as np

from ..exceptions import ConfigError
from .model import CommunityInstance, RngHandle, make_instance

logger = logging.getLogger(__name__)

UNIFORM = "uniform"
GEOMETRIC = "geometric"
GAMMA = "gamma"

_PARAMETERS = {
    UNIFORM: ("lo", "hi"),
    GEOMETRIC: ("p",),
    GAMMA: ("shape", "rate"),
}


@dataclass(frozen=True)
class DistributionSpec:
    """Size distribution of m communities.

    uniform: integers in [lo, hi]; geometric: Geom(p) on {1, 2, ...} shifted
    by one so sizes start at 2; gamma: Gamma(shape, rate) floored and shifted
    by 2.
    """

    kind: str
    m: int
    lo: Optional[int] = None
    hi: Optional[int] = None
    p: Optional[float] = None
    shape: Optional[float] = None
    rate: Optional[float] = None

    def problems(self) -> list:
        if self.kind not in _PARAMETERS:
            return [f"unknown distribution kind {self.kind!r}"]
        found = []
        if self.m < 1:
            found.append(f"{self.kind}: m must be positive, got {self.m}")
        for name in _PARAMETERS[self.kind]:
            if getattr(self, name) is None:
                found.append(f"{self.kind}: parameter {name!r} is required")
        if found:
            return found
        if self.kind == UNIFORM and not 1 <= self.lo <= self.hi:
            found.append(f"uniform: need 1 <= lo <= hi, got lo={self.lo}, hi={self.hi}")
        if self.kind == GEOMETRIC and not 0.0 < self.p <= 1.0:
            found.append(f"geometric: p must lie in (0, 1], got {self.p}")
        if self.kind == GAMMA and (self.shape <= 0 or self.rate <= 0):
            found.append(f"gamma: shape and rate must be positive, got {self.shape}, {self.rate}")
        return found

    def validate(self) -> None:
        found = self.problems()
        if found:
            raise ConfigError(found)

    @property
    def label(self) -> str:
        args = ",".join(f"{getattr(self, name):g}" for name in _PARAMETERS.get(self.kind, ()))
        return f"{self.kind}({args})"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "DistributionSpec":
        allowed = {"kind", "m", *{n for names in _PARAMETERS.values() for n in names}}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError([f"unknown distribution field {key!r}" for key in unknown])
        if "kind" not in data or "m" not in data:
            raise ConfigError("a distribution needs 'kind' and 'm'")
        spec = cls(**data)
        spec.validate()
        return spec

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "m": self.m}
        for name in _PARAMETERS.get(self.kind, ()):
            data[name] = getattr(self, name)
        return data


def generate_instance(spec: DistributionSpec, rng: RngHandle) -> CommunityInstance:
    spec.validate()
    generator = rng.generator
    if spec.kind == UNIFORM:
        sizes = generator.integers(spec.lo, spec.hi + 1, size=spec.m)
    elif spec.kind == GEOMETRIC:
        sizes = generator.geometric(spec.p, size=spec.m) + 1
    else:
        sizes = np.floor(generator.gamma(spec.shape, 1.0 / spec.rate, size=spec.m)).astype(int) + 2
    values = [int(d) for d in sizes]
    logger.debug("generated %s sizes: %s", spec.kind, values)
    return make_instance(values)

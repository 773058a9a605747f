#!/usr/bin/env python
"""
.. See the NOTICE file distributed with this work for additional information
   regarding copyright ownership.

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
"""

import dataclasses
import os
from dataclasses import dataclass

from engine.costvolume import CostKind, make_hypotheses
from engine.fusion import FusionMode
from engine.metrics import EvalProtocol
from engine.photometric import LossConfig
from utils.errors import InvalidParameter

THREADS_ENV = "DSCV_THREADS"


# -----------------------------------------------------------------------------
# Run configuration
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:  # pylint: disable=too-many-instance-attributes
    """
    Every tunable of a run, with the defaults used when a key is absent.

    Values are validated by the objects that consume them (hypothesis set,
    loss weights, evaluation protocol), so an invalid run configuration is
    rejected before any work starts.
    """
    d_min: float = 0.1
    d_max: float = 100.0
    n_bins: int = 96
    spacing: str = "inverse-linear"
    alpha_cv: float = 0.4
    alpha_photo: float = 0.85
    q: float = 0.4
    epsilon: float = 0.1
    smoothness_weight: float = 1.0
    cost_kind: str = "photometric"
    fusion_mode: str = "two-branch"
    min_depth: float = 1e-3
    max_depth: float = 80.0
    median_scaling: bool = False
    occlusion_tolerance: float = 0.01
    flow_noise: float = 0.0
    hist_bins: int = 20
    hist_max: float = 1.0
    threads: int = 1
    seed: int = 0

    def __post_init__(self):
        make_hypotheses(self.d_min, self.d_max, self.n_bins, self.spacing)
        self.loss_config()
        self.protocol()
        try:
            CostKind(self.cost_kind)
            FusionMode(self.fusion_mode)
        except ValueError as err:
            raise InvalidParameter(str(err)) from err
        if self.occlusion_tolerance < 0 or self.flow_noise < 0:
            raise InvalidParameter("occlusion_tolerance and flow_noise must be non-negative")
        if self.hist_bins < 1 or not self.hist_max > 0:
            raise InvalidParameter("histogram needs at least one bin and a positive range")
        if self.threads < 1:
            raise InvalidParameter("threads must be at least 1, got {}".format(self.threads))
        if self.seed < 0:
            raise InvalidParameter("seed must be non-negative, got {}".format(self.seed))

    @classmethod
    def from_dict(cls, record):
        """
        Build a RunConfig from a JSON "arguments" mapping; unknown keys are
        rejected.
        """
        if record is None:
            record = {}
        fields = {field.name: field for field in dataclasses.fields(cls)}
        unknown = sorted(set(record) - set(fields))
        if unknown:
            raise InvalidParameter("unknown configuration keys: {}".format(", ".join(unknown)))
        values = {}
        for name, value in record.items():
            kind = type(fields[name].default)
            try:
                if kind is bool and not isinstance(value, bool):
                    raise ValueError("expected true or false")
                if kind is int and (isinstance(value, bool) or
                                    (isinstance(value, float) and not value.is_integer())):
                    raise ValueError("expected an integer")
                values[name] = kind(value)
            except (TypeError, ValueError) as err:
                raise InvalidParameter("bad value for {}: {!r} ({})".format(name, value, err)) from err
        return cls(**values)

    def to_dict(self, echo=False):
        """
        Plain mapping of the configuration; ``echo`` leaves out the thread
        count, which must not influence any result.
        """
        record = dataclasses.asdict(self)
        if echo:
            record.pop("threads")
        return record

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def hypotheses(self):
        return make_hypotheses(self.d_min, self.d_max, self.n_bins, self.spacing)

    def loss_config(self):
        return LossConfig(self.alpha_cv, self.alpha_photo, self.q, self.epsilon)

    def protocol(self, region_mask=None):
        return EvalProtocol(self.min_depth, self.max_depth, self.median_scaling, region_mask)


def resolve_threads(flag=None, configured=None):
    """
    Thread count by precedence: command-line flag, then the DSCV_THREADS
    environment variable, then the configuration, then 1.
    """
    for source, value in (("--threads", flag),
                          (THREADS_ENV, os.environ.get(THREADS_ENV)),
                          ("configuration", configured)):
        if value is None or value == "":
            continue
        try:
            threads = int(value)
        except ValueError as err:
            raise InvalidParameter("{} must be an integer, got {!r}".format(source, value)) from err
        if threads < 1:
            raise InvalidParameter("{} must be at least 1, got {}".format(source, threads))
        return threads
    return 1

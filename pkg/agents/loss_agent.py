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

import numpy as np

from basic_modules.agent import Agent
from engine.formats import read_grid, write_json
from engine.grids import ImageGrid
from engine.photometric import (adaptive_photometric_loss, edge_aware_smoothness,
                                photometric_loss, pyramid_distillation_loss, total_loss)
from utils import logger
from utils.errors import InvalidParameter

KINDS = ("photometric", "adaptive", "smooth", "pyramid", "total")


def disparity_of(depth):
    """
    Inverse depth; pixels without a positive depth get disparity 0 and are
    marked invalid.
    """
    values = depth.plane(0).astype(np.float64)
    usable = depth.validity & (values > 0)
    disp = np.divide(1.0, values, out=np.zeros_like(values), where=usable)
    return ImageGrid(disp.astype(np.float32), usable)


def _as_list(paths):
    if isinstance(paths, (list, tuple)):
        return list(paths)
    return [paths]


# -----------------------------------------------------------------------------
class LossAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Evaluate one of the self-supervised loss terms on files, selected by the
    ``kind`` option:

    - ``photometric``: ``target`` against ``synth``;
    - ``adaptive``: ``target`` against ``synth_static`` and ``synth_dynamic``;
    - ``smooth``: ``disparity`` (or the inverse of ``depth``) against ``image``;
    - ``pyramid``: every map of ``scale_depths`` against ``depth``;
    - ``total``: the full objective from all of the above.

    The scalars are returned in the ``report`` metadata and, when a
    ``report`` path is given, written there as JSON.
    """
    options = {"kind": "photometric"}

    def _disparity(self, input_files):
        if input_files.get("disparity"):
            return read_grid(input_files["disparity"])
        depth_path, = self.require(input_files, "depth")
        return disparity_of(read_grid(depth_path))

    def _terms(self, kind, input_files):
        config = self.run_config.loss_config()
        if kind == "photometric":
            target, synth = self.require(input_files, "target", "synth")
            return {"loss": photometric_loss(read_grid(target), read_grid(synth),
                                             config.alpha_photo)}
        if kind == "adaptive":
            paths = self.require(input_files, "target", "synth_static", "synth_dynamic")
            return {"loss": adaptive_photometric_loss(*[read_grid(p) for p in paths],
                                                      alpha_photo=config.alpha_photo)}
        if kind == "smooth":
            image, = self.require(input_files, "image")
            return {"loss": edge_aware_smoothness(self._disparity(input_files),
                                                  read_grid(image))}
        if kind == "pyramid":
            scales, depth = self.require(input_files, "scale_depths", "depth")
            return {"loss": pyramid_distillation_loss(
                [read_grid(p) for p in _as_list(scales)], read_grid(depth),
                config.q, config.epsilon)}
        paths = self.require(input_files, "target", "synth_static", "synth_dynamic",
                             "scale_depths", "depth")
        return total_loss(read_grid(paths[0]), read_grid(paths[1]), read_grid(paths[2]),
                          self._disparity(input_files),
                          [read_grid(p) for p in _as_list(paths[3])], read_grid(paths[4]),
                          config=config, smoothness_weight=self.run_config.smoothness_weight)

    def run(self, input_files, input_metadata, output_files):
        kind = self.option("kind")
        if kind not in KINDS:
            raise InvalidParameter("loss kind must be one of {}, got '{}'".format(
                "/".join(KINDS), kind))
        record = {"kind": kind}
        record.update(self._terms(kind, input_files))
        logger.info("LossAgent: {}", record)

        path = output_files.get("report")
        if path:
            write_json(path, record)
        output_metadata = {"report": self.make_metadata(
            input_metadata, sorted(input_files), path, "loss_report", "JSON", report=record)}
        return output_files, output_metadata

# ------------------------------------------------------------------------------

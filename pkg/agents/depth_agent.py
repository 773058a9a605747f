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

from basic_modules.agent import Agent
from engine.costvolume import argmin_depth, matching_probability
from engine.formats import read_dscv, write_pfm
from engine.grids import ImageGrid
from utils import logger


# -----------------------------------------------------------------------------
class DepthAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Read the depth out of a cost volume (``cost_volume``): the hypothesis of
    the lowest valid cost per pixel, written as ``depth``.

    The optional ``confidence`` output holds, per pixel, the matching
    probability of the selected bin.
    """

    def run(self, input_files, input_metadata, output_files):
        cv_path, = self.require(input_files, "cost_volume")
        depth_path, = self.require(output_files, "depth")

        cv = read_dscv(cv_path)
        depth = argmin_depth(cv)
        write_pfm(depth_path, depth)
        logger.info("DepthAgent: {} of {} pixels with a depth",
                    int(depth.validity.sum()), depth.validity.size)
        output_metadata = {"depth": self.make_metadata(
            input_metadata, ["cost_volume"], depth_path, "depth", "PFM")}

        confidence_path = output_files.get("confidence")
        if confidence_path:
            confidence = matching_probability(cv).max(axis=0)
            write_pfm(confidence_path, ImageGrid(confidence.astype("float32"), depth.validity))
            output_metadata["confidence"] = self.make_metadata(
                input_metadata, ["cost_volume"], confidence_path, "confidence", "PFM")
        return output_files, output_metadata

# ------------------------------------------------------------------------------

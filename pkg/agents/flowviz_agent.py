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
from engine.flowviz import flow_to_rgb
from engine.formats import read_flo, write_rgb_png
from utils.errors import InvalidParameter


# -----------------------------------------------------------------------------
class FlowVizAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Colour-code a flow field (``flow``) with the standard colour wheel into
    an RGB PNG (``image``). Magnitudes are normalised by ``max_magnitude``,
    or by the largest valid magnitude when it is not set.
    """
    options = {"max_magnitude": None}

    def run(self, input_files, input_metadata, output_files):
        flow_path, = self.require(input_files, "flow")
        image_path, = self.require(output_files, "image")
        max_magnitude = self.option("max_magnitude")
        if max_magnitude is not None:
            max_magnitude = float(max_magnitude)
            if not max_magnitude > 0:
                raise InvalidParameter("max_magnitude must be positive, got {}".format(
                    max_magnitude))

        write_rgb_png(image_path, flow_to_rgb(read_flo(flow_path), max_magnitude))
        output_metadata = {"image": self.make_metadata(
            input_metadata, ["flow"], image_path, "flow_visualisation", "PNG",
            max_magnitude=max_magnitude)}
        return output_files, output_metadata

# ------------------------------------------------------------------------------

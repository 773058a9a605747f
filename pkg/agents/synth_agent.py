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

import os

from basic_modules.agent import Agent
from engine.formats import (read_json, write_flo, write_image_png, write_json,
                            write_mask_png, write_pfm)
from engine.synthetic import SceneSpec, render_pair
from utils import logger
from utils.errors import UsageError

# role -> (file name used when writing a whole pair into a directory,
#          data_type, file_type)
OUTPUTS = {
    "image_t": ("image_t.png", "image", "PNG"),
    "image_src": ("image_src.png", "image", "PNG"),
    "depth_t": ("depth_t.pfm", "depth", "PFM"),
    "intrinsics": ("intrinsics.json", "intrinsics", "JSON"),
    "pose": ("pose.json", "pose", "JSON"),
    "camera_flow": ("camera_flow.flo", "flow", "FLO"),
    "residual_flow": ("residual_flow.flo", "flow", "FLO"),
    "total_flow": ("total_flow.flo", "flow", "FLO"),
    "object_mask": ("object_mask.png", "mask", "PNG"),
    "object_interior": ("object_interior.png", "mask", "PNG"),
    "occlusion_mask": ("occlusion_mask.png", "mask", "PNG"),
    "boundary_mask": ("boundary_mask.png", "mask", "PNG"),
    "scene": ("scene.json", "scene", "JSON"),
}


def _writers(spec, pair):
    return {
        "image_t": lambda path: write_image_png(path, pair.image_t),
        "image_src": lambda path: write_image_png(path, pair.image_src),
        "depth_t": lambda path: write_pfm(path, pair.depth_t),
        "intrinsics": lambda path: write_json(path, pair.intrinsics.to_dict()),
        "pose": lambda path: write_json(path, pair.pose.to_dict()),
        "camera_flow": lambda path: write_flo(path, pair.camera_flow),
        "residual_flow": lambda path: write_flo(path, pair.residual_flow),
        "total_flow": lambda path: write_flo(path, pair.total_flow),
        "object_mask": lambda path: write_mask_png(path, pair.object_mask),
        "object_interior": lambda path: write_mask_png(
            path, pair.object_mask & ~pair.boundary_mask),
        "occlusion_mask": lambda path: write_mask_png(path, pair.occlusion_mask),
        "boundary_mask": lambda path: write_mask_png(path, pair.boundary_mask),
        "scene": lambda path: write_json(path, spec.to_dict()),
    }


def pair_outputs(directory):
    """
    Output roles of a full rendered pair written into ``directory``.
    """
    return {role: os.path.join(directory, name) for role, (name, _, _) in OUTPUTS.items()}


# -----------------------------------------------------------------------------
class SynthAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Render a synthetic frame pair with its ground truth from a scene
    description (input role ``scene``).

    Every output role of OUTPUTS is optional; only the requested ones are
    written. The run's ``seed`` drives textures and noise.
    """

    def run(self, input_files, input_metadata, output_files):
        scene_path, = self.require(input_files, "scene")
        unknown = sorted(set(output_files) - set(OUTPUTS))
        if unknown:
            raise UsageError("unknown synth outputs: {}".format(", ".join(unknown)))

        spec = SceneSpec.from_dict(read_json(scene_path))
        pair = render_pair(spec, seed=self.run_config.seed)

        writers = _writers(spec, pair)
        output_metadata = {}
        for role, path in output_files.items():
            if not path:
                continue
            logger.debug("writing {} to {}", role, path)
            writers[role](path)
            _, data_type, file_type = OUTPUTS[role]
            output_metadata[role] = self.make_metadata(
                input_metadata, ["scene"], path, data_type, file_type,
                seed=self.run_config.seed, role=role)
        logger.info("SynthAgent: wrote {} outputs", len(output_metadata))
        return output_files, output_metadata

# ------------------------------------------------------------------------------

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
from engine.costvolume import argmin_depth, build_dynamic_cv, occlusion_mask
from engine.formats import (read_flo, read_grid, read_intrinsics, read_pose,
                            write_dscv, write_mask_png, write_pfm)
from engine.synthetic import perturb_flow
from utils import logger
from utils.errors import InvalidParameter

MODES = ("static", "dynamic")


def load_intrinsics(path, shape):
    """
    Intrinsics rescaled to the grid they are used with, when the grid was
    resampled (e.g. quarter-resolution features).
    """
    intr = read_intrinsics(path)
    height, width = shape
    if intr.shape != (height, width):
        logger.info("rescaling intrinsics from {}x{} to {}x{}",
                    intr.width, intr.height, width, height)
        intr = intr.scaled(width / intr.width, height / intr.height)
    return intr


# -----------------------------------------------------------------------------
class CostVolumeAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Build the static or dynamic cost volume of a target/source pair.

    Inputs: ``image_t``, ``image_src``, ``intrinsics``, ``pose`` and, in
    dynamic mode, ``residual_flow`` (perturbed by ``flow_noise`` when set).
    Outputs: ``cost_volume`` plus, optionally, the ``depth`` read out of the
    volume and the ``occlusion`` mask of the warp driven by that depth.
    """
    options = {"mode": "static"}

    def run(self, input_files, input_metadata, output_files):
        mode = self.option("mode")
        if mode not in MODES:
            raise InvalidParameter("cost volume mode must be one of {}, got '{}'".format(
                "/".join(MODES), mode))
        roles = ["image_t", "image_src", "intrinsics", "pose"]
        if mode == "dynamic":
            roles.append("residual_flow")
        paths = self.require(input_files, *roles)
        cv_path, = self.require(output_files, "cost_volume")

        feat_t = read_grid(paths[0])
        feat_src = read_grid(paths[1])
        intr = load_intrinsics(paths[2], feat_t.shape)
        pose = read_pose(paths[3])
        residual = None
        if mode == "dynamic":
            residual = perturb_flow(read_flo(paths[4]), self.run_config.flow_noise,
                                    seed=self.run_config.seed)

        config = self.run_config
        hyps = config.hypotheses()
        logger.info("CostVolumeAgent: {} sweep over {} bins in [{}, {}]",
                    mode, len(hyps), hyps.d_min, hyps.d_max)
        cv = build_dynamic_cv(feat_t, feat_src, intr, pose, hyps, residual,
                              alpha_cv=config.alpha_cv, cost_kind=config.cost_kind,
                              executor=self.executor)
        write_dscv(cv_path, cv)

        output_metadata = {"cost_volume": self.make_metadata(
            input_metadata, roles, cv_path, "cost_volume", "DSCV",
            mode=mode, hypotheses=hyps.to_dict())}

        depth_path = output_files.get("depth")
        occ_path = output_files.get("occlusion")
        if depth_path or occ_path:
            depth = argmin_depth(cv)
            if depth_path:
                write_pfm(depth_path, depth)
                output_metadata["depth"] = self.make_metadata(
                    input_metadata, roles, depth_path, "depth", "PFM", mode=mode)
            if occ_path:
                occluded = occlusion_mask(intr, pose, depth, residual,
                                          tolerance=config.occlusion_tolerance)
                write_mask_png(occ_path, occluded)
                logger.info("CostVolumeAgent: {} of {} pixels occluded",
                            int(occluded.sum()), occluded.size)
                output_metadata["occlusion"] = self.make_metadata(
                    input_metadata, roles, occ_path, "mask", "PNG", mode=mode)
        return output_files, output_metadata

# ------------------------------------------------------------------------------

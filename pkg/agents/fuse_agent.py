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
from engine.formats import read_dscv, read_dsfw, read_mask_png, write_dscv
from engine.fusion import FusionMode, adaptive_fuse
from utils import logger

# modes that read the occlusion masks
_MASKED = (FusionMode.TWO_BRANCH, FusionMode.COMPLEMENTARY)


# -----------------------------------------------------------------------------
class FuseAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Fuse a static and a dynamic cost volume (``static``, ``dynamic``) into
    ``cost_volume``, following the run's ``fusion_mode``.

    The occlusion masks ``occ_static`` and ``occ_dynamic`` are needed by the
    two-branch and complementary modes; ``weights`` (DSFW) are optional,
    bin-wise averaging is used without them.
    """

    def run(self, input_files, input_metadata, output_files):
        mode = FusionMode(self.run_config.fusion_mode)
        roles = ["static", "dynamic"]
        if mode in _MASKED:
            roles += ["occ_static", "occ_dynamic"]
        paths = self.require(input_files, *roles)
        out_path, = self.require(output_files, "cost_volume")

        cv_s = read_dscv(paths[0])
        cv_d = read_dscv(paths[1])
        occ_s = occ_d = None
        if mode in _MASKED:
            occ_s = read_mask_png(paths[2], shape=cv_s.shape)
            occ_d = read_mask_png(paths[3], shape=cv_s.shape)
        weights = None
        if input_files.get("weights"):
            weights = read_dsfw(input_files["weights"])
            roles.append("weights")

        logger.info("FuseAgent: {} fusion of {} bins", mode.value, cv_s.n_bins)
        fused = adaptive_fuse(cv_s, cv_d, occ_s, occ_d, weights, mode)
        write_dscv(out_path, fused)
        output_metadata = {"cost_volume": self.make_metadata(
            input_metadata, roles, out_path, "cost_volume", "DSCV",
            fusion_mode=mode.value, learned_weights=weights is not None)}
        return output_files, output_metadata

# ------------------------------------------------------------------------------

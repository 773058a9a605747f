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

from agents.costvolume_agent import CostVolumeAgent
from agents.depth_agent import DepthAgent
from agents.eval_agent import EvalAgent
from agents.fuse_agent import FuseAgent
from agents.synth_agent import SynthAgent, pair_outputs
from basic_modules.workflow import Workflow
from engine.formats import write_json
from utils import logger, remap
from utils.errors import NoValidPixels

VOLUMES = ("static", "dynamic", "fused")


class DepthPipeline(Workflow):  # pylint: disable=too-few-public-methods
    """
    End-to-end depth estimation on a synthetic scene, comparing the static,
    dynamic and fused cost volumes.

    - SynthAgent renders the pair and its ground truth from ``scene``;
    - CostVolumeAgent builds the static volume, and the dynamic one from the
      ground-truth residual flow, each with its argmin depth and occlusion
      mask;
    - FuseAgent fuses them, DepthAgent reads the fused depth out;
    - EvalAgent scores the three depths over all pixels and over the object
      interior.

    Intermediates are written next to the ``report`` output::

          scene
            |
        SynthAgent
            |
        +---+----+
        |        |
      static  dynamic     (CostVolumeAgent)
        |        |
        +---.----+
            |
        FuseAgent -> DepthAgent
            |
        EvalAgent x 3 x 2
            |
          report
    """

    def run(self, input_files, input_metadata, output_files):
        logger.info("\t0. perform checks")
        self.require(input_files, "scene")
        report_path, = self.require(output_files, "report")
        workdir = os.path.dirname(os.path.abspath(report_path))

        def _path(name):
            return os.path.join(workdir, name)

        logger.info("\t1. Render the scene")
        pair_files, pair_md = self.agent(SynthAgent).run(
            remap(input_files, "scene"), remap(input_metadata, "scene"), pair_outputs(workdir))
        self.add_intermediate(pair_files, pair_md)
        logger.progress("pipeline", task_id=1, total=5)

        logger.info("\t2. Build the static and dynamic cost volumes")
        volumes = {}
        for mode in ("static", "dynamic"):
            cv_files, cv_md = self.agent(CostVolumeAgent, mode=mode).run(
                remap(pair_files, "image_t", "image_src", "intrinsics", "pose", "residual_flow"),
                remap(pair_md, "image_t", "image_src", "intrinsics", "pose", "residual_flow"),
                {"cost_volume": _path("{}.dscv".format(mode)),
                 "depth": _path("depth_{}.pfm".format(mode)),
                 "occlusion": _path("occ_{}.png".format(mode))})
            self.add_intermediate(cv_files, cv_md, prefix=mode + "_")
            volumes[mode] = (cv_files, cv_md)
        logger.progress("pipeline", task_id=3, total=5)

        logger.info("\t3. Fuse and read the fused depth out")
        (static_files, static_md), (dynamic_files, dynamic_md) = volumes["static"], volumes["dynamic"]
        fused_files, fused_md = self.agent(FuseAgent).run(
            {"static": static_files["cost_volume"], "dynamic": dynamic_files["cost_volume"],
             "occ_static": static_files["occlusion"], "occ_dynamic": dynamic_files["occlusion"]},
            {"static": static_md["cost_volume"], "dynamic": dynamic_md["cost_volume"],
             "occ_static": static_md["occlusion"], "occ_dynamic": dynamic_md["occlusion"]},
            {"cost_volume": _path("fused.dscv")})
        self.add_intermediate(fused_files, fused_md, prefix="fused_")
        depth_files, depth_md = self.agent(DepthAgent).run(
            fused_files, fused_md, {"depth": _path("depth_fused.pfm")})
        self.add_intermediate(depth_files, depth_md, prefix="fused_")
        logger.progress("pipeline", task_id=4, total=5)

        logger.info("\t4. Evaluate")
        depths = {"static": (static_files["depth"], static_md["depth"]),
                  "dynamic": (dynamic_files["depth"], dynamic_md["depth"]),
                  "fused": (depth_files["depth"], depth_md["depth"])}
        record = {name: self._evaluate(depths[name], pair_files, pair_md) for name in VOLUMES}
        record["fusion_mode"] = self.run_config.fusion_mode
        logger.progress("pipeline", task_id=5, total=5)

        logger.info("\t5. Return")
        write_json(report_path, record)
        parents = [static_md["cost_volume"], dynamic_md["cost_volume"], fused_md["cost_volume"]]
        report_md = self.make_metadata({"volumes": parents}, ["volumes"], report_path,
                                       "pipeline_report", "JSON", report=record)
        return {"report": report_path}, {"report": report_md}

    def _evaluate(self, depth, pair_files, pair_md):
        """
        Reports of one depth map over all pixels and over the object interior
        (None when the scene has no object pixel left to score).
        """
        pred_path, pred_md = depth
        evaluator = self.agent(EvalAgent)
        files = {"pred": pred_path, "gt": pair_files["depth_t"]}
        metadata = {"pred": pred_md, "gt": pair_md["depth_t"]}
        _, all_md = evaluator.run(files, metadata, {})
        try:
            _, object_md = evaluator.run(
                dict(files, mask=pair_files["object_interior"]),
                dict(metadata, mask=pair_md["object_interior"]), {})
            objects = object_md["report"].meta_data["report"]
        except NoValidPixels:
            logger.warn("no object pixel to evaluate {}", pred_path)
            objects = None
        return {"all": all_md["report"].meta_data["report"], "object": objects}

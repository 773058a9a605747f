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
from engine.formats import read_mask_png, read_pfm, write_json
from engine.metrics import error_histogram, evaluate
from utils import logger


def write_histogram_csv(path, counts, edges):
    """
    One row per bin: lower edge, upper edge, count.
    """
    rows = np.column_stack([edges[:-1], edges[1:], counts])
    np.savetxt(path, rows, fmt=("%.6f", "%.6f", "%d"), delimiter=",",
               header="bin_lo,bin_hi,count", comments="")


# -----------------------------------------------------------------------------
class EvalAgent(Agent):  # pylint: disable=too-few-public-methods
    """
    Compare a predicted depth map (``pred``) with ground truth (``gt``),
    optionally inside a region (``mask``).

    The report is returned in the ``report`` metadata and written as JSON
    when a ``report`` path is given; ``histogram`` writes the per-pixel
    AbsRel histogram as CSV.
    """

    def run(self, input_files, input_metadata, output_files):
        pred_path, gt_path = self.require(input_files, "pred", "gt")
        pred = read_pfm(pred_path)
        gt = read_pfm(gt_path)
        region = None
        roles = ["pred", "gt"]
        if input_files.get("mask"):
            region = read_mask_png(input_files["mask"], shape=gt.shape)
            roles.append("mask")
        protocol = self.run_config.protocol(region)

        report = evaluate(pred, gt, protocol)
        record = report.to_dict()
        record["median_scaling"] = protocol.median_scaling
        logger.info("EvalAgent: AbsRel {:.4f} RMSE {:.4f} d1 {:.4f} over {} pixels",
                    report.abs_rel, report.rmse, report.delta1, report.n_valid)

        report_path = output_files.get("report")
        if report_path:
            write_json(report_path, record)
        output_metadata = {"report": self.make_metadata(
            input_metadata, roles, report_path, "depth_report", "JSON", report=record)}

        hist_path = output_files.get("histogram")
        if hist_path:
            counts, edges = error_histogram(pred, gt, protocol, n_bins=self.run_config.hist_bins,
                                            value_range=(0.0, self.run_config.hist_max))
            write_histogram_csv(hist_path, counts, edges)
            output_metadata["histogram"] = self.make_metadata(
                input_metadata, roles, hist_path, "histogram", "CSV")
        return output_files, output_metadata

# ------------------------------------------------------------------------------

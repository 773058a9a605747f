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

Command-line surface of the engine: one subcommand per pipeline stage.

Every subcommand runs its Agent through the JSONApp, so a run configuration
file (``--config``) can supply inputs, outputs and arguments; flags take
precedence over the file. Data (JSON records) goes to standard output,
diagnostics to the error stream. Exit codes: 0 success, 1 validation error,
2 input/output error.
"""

import argparse
import json
import os
import sys

from agents.costvolume_agent import CostVolumeAgent
from agents.depth_agent import DepthAgent
from agents.eval_agent import EvalAgent
from agents.flowviz_agent import FlowVizAgent
from agents.fuse_agent import FuseAgent
from agents.loss_agent import KINDS, LossAgent
from agents.pipeline import DepthPipeline
from agents.synth_agent import SynthAgent, pair_outputs
from apps.jsonapp import JSONApp
from engine.fusion import FusionMode
from utils import logger
from utils.errors import DSCVError, UsageError


class ArgumentParser(argparse.ArgumentParser):
    """
    argparse parser whose usage errors are raised, so they exit with the
    validation code like any other invalid input.
    """

    def error(self, message):
        raise UsageError(message)


def _drop_none(mapping):
    return {key: value for key, value in mapping.items() if value is not None}


# -----------------------------------------------------------------------------
# Subcommands
# -----------------------------------------------------------------------------
#
# Each handler returns (agent_class, input_files, output_files, overrides,
# record_role); record_role names the output whose metadata carries the JSON
# record printed on standard output, if any.

def _synth(args):
    outputs = pair_outputs(args.out) if args.out else {}
    return SynthAgent, _drop_none({"scene": args.spec}), outputs, {}, None


def _costvol(args):
    inputs = _drop_none({"image_t": args.image_t, "image_src": args.image_src,
                         "intrinsics": args.intrinsics, "pose": args.pose,
                         "residual_flow": args.flow})
    if args.mode == "dynamic" and "residual_flow" not in inputs:
        configured, _, _ = JSONApp._read_config(args.config)  # pylint: disable=protected-access
        if not configured.get("residual_flow"):
            raise UsageError("--flow is required in dynamic mode")
    outputs = _drop_none({"cost_volume": args.out, "depth": args.depth_out,
                          "occlusion": args.occ_out})
    return CostVolumeAgent, inputs, outputs, {"mode": args.mode}, None


def _fuse(args):
    inputs = _drop_none({"static": args.static, "dynamic": args.dynamic,
                         "occ_static": args.occ_s, "occ_dynamic": args.occ_d,
                         "weights": args.weights})
    return (FuseAgent, inputs, _drop_none({"cost_volume": args.out}),
            _drop_none({"fusion_mode": args.mode}), None)


def _depth(args):
    outputs = _drop_none({"depth": args.out, "confidence": args.confidence})
    return DepthAgent, _drop_none({"cost_volume": args.cv}), outputs, {}, None


def _loss(args):
    inputs = _drop_none({"target": args.target, "synth": args.synth,
                         "synth_static": args.synth_static, "synth_dynamic": args.synth_dynamic,
                         "disparity": args.disparity, "image": args.image,
                         "depth": args.depth, "scale_depths": args.scale_depth})
    return LossAgent, inputs, {"report": args.out}, {"kind": args.kind}, "report"


def _eval(args):
    inputs = _drop_none({"pred": args.pred, "gt": args.gt, "mask": args.mask})
    overrides = {"median_scaling": True} if args.median_scale else {}
    outputs = {"report": args.out}
    if args.hist:
        outputs["histogram"] = args.hist
    return EvalAgent, inputs, outputs, overrides, "report"


def _flow_viz(args):
    overrides = _drop_none({"max_magnitude": args.max_magnitude})
    return (FlowVizAgent, _drop_none({"flow": args.flow}),
            _drop_none({"image": args.out}), overrides, None)


def _pipeline(args):
    report = os.path.join(args.out, "report.json") if args.out else None
    overrides = _drop_none({"flow_noise": args.flow_noise, "fusion_mode": args.fusion_mode})
    return (DepthPipeline, _drop_none({"scene": args.spec}), _drop_none({"report": report}),
            overrides, "report")


def _common_options():
    common = ArgumentParser(add_help=False)
    group = common.add_argument_group("run options")
    group.add_argument("--config", help="run configuration JSON (inputs, outputs, arguments)")
    group.add_argument("--threads", type=int, help="worker threads (overrides DSCV_THREADS)")
    group.add_argument("--seed", type=int, help="seed of every random draw")
    group.add_argument("--log-level", default=None,
                       help="DEBUG, INFO, PROGRESS, WARNING, ERROR or FATAL")
    group.add_argument("--results", help="write a results JSON listing every output")
    return common


def build_parser():
    """
    Parser of the ``dscv`` command.
    """
    common = _common_options()
    parser = ArgumentParser(prog="dscv", description="Static/dynamic cost-volume depth engine")
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    cmd = commands.add_parser("synth", parents=[common], help="render a synthetic pair")
    cmd.add_argument("--spec", help="scene description JSON")
    cmd.add_argument("--out", help="output directory")
    cmd.set_defaults(handler=_synth)

    cmd = commands.add_parser("costvol", parents=[common], help="build a cost volume")
    cmd.add_argument("--mode", choices=("static", "dynamic"), required=True)
    cmd.add_argument("--image-t", help="target image")
    cmd.add_argument("--image-src", help="source image")
    cmd.add_argument("--intrinsics", help="intrinsics JSON")
    cmd.add_argument("--pose", help="target-to-source pose JSON")
    cmd.add_argument("--flow", help="residual flow (.flo), dynamic mode")
    cmd.add_argument("--out", help="cost volume (.dscv)")
    cmd.add_argument("--depth-out", help="argmin depth (.pfm)")
    cmd.add_argument("--occ-out", help="occlusion mask (.png)")
    cmd.set_defaults(handler=_costvol)

    cmd = commands.add_parser("fuse", parents=[common], help="fuse static and dynamic volumes")
    cmd.add_argument("--static", help="static cost volume")
    cmd.add_argument("--dynamic", help="dynamic cost volume")
    cmd.add_argument("--occ-s", help="static occlusion mask")
    cmd.add_argument("--occ-d", help="dynamic occlusion mask")
    cmd.add_argument("--weights", help="concatenation weights (.dsfw)")
    cmd.add_argument("--mode", choices=[mode.value for mode in FusionMode])
    cmd.add_argument("--out", help="fused cost volume (.dscv)")
    cmd.set_defaults(handler=_fuse)

    cmd = commands.add_parser("depth", parents=[common], help="argmin depth of a volume")
    cmd.add_argument("--cv", help="cost volume (.dscv)")
    cmd.add_argument("--out", help="depth (.pfm)")
    cmd.add_argument("--confidence", help="matching probability of the chosen bin (.pfm)")
    cmd.set_defaults(handler=_depth)

    cmd = commands.add_parser("loss", parents=[common], help="evaluate a loss term")
    cmd.add_argument("--kind", choices=KINDS, required=True)
    cmd.add_argument("--target")
    cmd.add_argument("--synth")
    cmd.add_argument("--synth-static")
    cmd.add_argument("--synth-dynamic")
    cmd.add_argument("--disparity")
    cmd.add_argument("--image")
    cmd.add_argument("--depth")
    cmd.add_argument("--scale-depth", action="append", help="repeat once per scale")
    cmd.add_argument("--out", help="also write the record as JSON")
    cmd.set_defaults(handler=_loss)

    cmd = commands.add_parser("eval", parents=[common], help="score a depth map")
    cmd.add_argument("--pred")
    cmd.add_argument("--gt")
    cmd.add_argument("--mask", help="evaluate inside this region only")
    cmd.add_argument("--median-scale", action="store_true")
    cmd.add_argument("--hist", help="AbsRel histogram (.csv)")
    cmd.add_argument("--out", help="also write the report as JSON")
    cmd.set_defaults(handler=_eval)

    cmd = commands.add_parser("flow-viz", parents=[common], help="colour-code a flow field")
    cmd.add_argument("--flow")
    cmd.add_argument("--out")
    cmd.add_argument("--max-magnitude", type=float)
    cmd.set_defaults(handler=_flow_viz)

    cmd = commands.add_parser("pipeline", parents=[common],
                              help="synth, both volumes, fusion, depth and evaluation")
    cmd.add_argument("--spec", help="scene description JSON")
    cmd.add_argument("--out", help="output directory")
    cmd.add_argument("--flow-noise", type=float, help="std-dev of the residual flow noise")
    cmd.add_argument("--fusion-mode", choices=[mode.value for mode in FusionMode])
    cmd.set_defaults(handler=_pipeline)
    return parser


def run(argv=None):
    """
    Parse and run one subcommand.

    Returns
    -------
    dict or None
        the JSON record of the subcommand, if it produces one.
    """
    args = build_parser().parse_args(argv)
    if args.log_level:
        try:
            logger.set_level(args.log_level)
        except ValueError as err:
            raise UsageError(str(err)) from err
    agent_class, inputs, outputs, overrides, record_role = args.handler(args)
    if args.seed is not None:
        overrides["seed"] = args.seed

    app = JSONApp(threads=args.threads)
    output_files, output_metadata = app.launch(
        agent_class, args.config, args.results, overrides=overrides,
        input_files=inputs, output_files=outputs)
    if record_role is not None:
        return output_metadata[record_role].meta_data["report"]
    return {role: path for role, path in output_files.items() if path}


def main(argv=None):
    """
    Entry point of ``dscv``; returns the exit code.
    """
    try:
        record = run(argv)
    except DSCVError as err:
        logger.error("{}: {}", type(err).__name__, err)
        return err.exit_code
    except OSError as err:
        logger.error("{}: {}", type(err).__name__, err)
        return 2
    if record is not None:
        sys.stdout.write(json.dumps(record, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())

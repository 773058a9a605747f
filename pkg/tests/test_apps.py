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


import json
import os

import numpy as np
import pytest

from agents.costvolume_agent import CostVolumeAgent
from agents.depth_agent import DepthAgent
from agents.pipeline import DepthPipeline
from agents.synth_agent import SynthAgent, pair_outputs
from apps.jsonapp import JSONApp
from apps.poolapp import PoolApp
from apps.workflowapp import WorkflowApp
from basic_modules.agent import Agent
from basic_modules.config import THREADS_ENV, RunConfig, resolve_threads
from basic_modules.metadata import Metadata
from engine.costvolume import CostVolume, make_hypotheses
from engine.formats import read_json, read_pfm, write_dscv
from utils import remap
from utils.errors import (InvalidParameter, InvalidRange, MissingInput, TruncatedFile,
                          UsageError, ValidationError)


@pytest.fixture
def cost_volume_file(tmp_path):
    """
    3-bin volume whose best bin is the middle one everywhere but in the
    first column (the nearest one).
    """
    costs = np.ones((3, 4, 5))
    costs[1] = 0.2
    costs[0, :, 0] = 0.0
    cv = CostVolume(costs, make_hypotheses(1.0, 4.0, 3), np.ones((3, 4, 5), dtype=bool))
    path = tmp_path / "data" / "cv.dscv"
    path.parent.mkdir()
    write_dscv(str(path), cv)
    return str(path)


@pytest.fixture
def rendered_pair(tmp_path, plane_scene, write_json_file):
    scene = write_json_file("scene.json", plane_scene())
    outputs = pair_outputs(str(tmp_path / "pair"))
    os.makedirs(str(tmp_path / "pair"))
    files, _ = SynthAgent({}).run({"scene": scene}, {}, outputs)
    return files


# -----------------------------------------------------------------------------
# Apps
# -----------------------------------------------------------------------------

@pytest.mark.apps
def test_missing_input(tmp_path):
    app = WorkflowApp()
    with pytest.raises(MissingInput):
        app.launch(DepthAgent, {"cost_volume": str(tmp_path / "nothing.dscv")}, {},
                   {"depth": str(tmp_path / "depth.pfm")}, {})


@pytest.mark.apps
def test_workflowapp_writes_sidecars(tmp_path, cost_volume_file):
    depth_path = str(tmp_path / "out" / "depth.pfm")
    files, metadata = WorkflowApp().launch(
        DepthAgent, {"cost_volume": cost_volume_file}, {}, {"depth": depth_path},
        {"seed": 3, "threads": 2})

    assert files == {"depth": depth_path}
    depth = read_pfm(depth_path)
    assert np.allclose(depth.plane(0)[:, 0], 1.0)
    assert np.allclose(depth.plane(0)[:, 1:], 1.6)

    sidecar = read_json(depth_path + ".json")
    assert sidecar == json.loads(json.dumps(metadata["depth"].to_dict()))
    assert sidecar["data_type"] == "depth"
    assert sidecar["file_type"] == "PFM"
    assert sidecar["sources"] == [cost_volume_file]
    assert sidecar["meta_data"]["config"]["seed"] == 3
    assert "threads" not in sidecar["meta_data"]["config"]


@pytest.mark.apps
def test_thread_count_does_not_change_results(tmp_path, rendered_pair, sweep_arguments):
    inputs = remap(rendered_pair, "image_t", "image_src", "intrinsics", "pose", "residual_flow")
    results = []
    for threads in (1, 8):
        out = str(tmp_path / "cv_{}.dscv".format(threads))
        _, metadata = PoolApp(threads).launch(
            CostVolumeAgent, inputs, {}, {"cost_volume": out},
            dict(sweep_arguments, mode="dynamic"))
        with open(out, "rb") as handle:
            results.append((handle.read(), metadata["cost_volume"].meta_data))
    assert results[0][0] == results[1][0]
    assert results[0][1] == results[1][1]


@pytest.mark.apps
def test_thread_precedence(monkeypatch):
    assert resolve_threads() == 1
    assert resolve_threads(configured=3) == 3
    monkeypatch.setenv(THREADS_ENV, "5")
    assert resolve_threads(configured=3) == 5
    assert resolve_threads(2, 3) == 2
    monkeypatch.setenv(THREADS_ENV, "many")
    with pytest.raises(InvalidParameter):
        resolve_threads(configured=3)
    with pytest.raises(InvalidParameter):
        resolve_threads(0)


@pytest.mark.apps
def test_jsonapp_relative_paths(tmp_path, cost_volume_file):
    config = tmp_path / "data" / "run.json"
    config.write_text(json.dumps({
        "input_files": {"cost_volume": "cv.dscv"},
        "output_files": {"depth": "out/depth.pfm"},
        "arguments": {"seed": 1},
    }))
    results_path = str(tmp_path / "results.json")
    files, _ = JSONApp().launch(DepthAgent, str(config), results_path)

    expected = str(tmp_path / "data" / "out" / "depth.pfm")
    assert files == {"depth": expected}
    assert os.path.isfile(expected)
    results = read_json(results_path)["output_files"]
    assert [result["name"] for result in results] == ["depth"]
    assert results[0]["file_path"] == expected
    assert results[0]["sources"] == [cost_volume_file]
    assert "exception" not in results[0]


@pytest.mark.apps
def test_jsonapp_overrides(tmp_path, cost_volume_file):
    config = tmp_path / "data" / "run.json"
    config.write_text(json.dumps({
        "input_files": {"cost_volume": "cv.dscv"},
        "output_files": {"depth": "depth.pfm"},
        "arguments": {"seed": 1},
    }))
    override = str(tmp_path / "elsewhere.pfm")
    _, metadata = JSONApp().launch(DepthAgent, str(config), overrides={"seed": 7},
                                   output_files={"depth": override})
    assert os.path.isfile(override)
    assert metadata["depth"].meta_data["config"]["seed"] == 7


@pytest.mark.apps
def test_jsonapp_reports_failures(tmp_path):
    corrupt = tmp_path / "corrupt.dscv"
    corrupt.write_bytes(b"DSCV")
    config = tmp_path / "run.json"
    config.write_text(json.dumps({
        "input_files": {"cost_volume": "corrupt.dscv"},
        "output_files": {"depth": "depth.pfm"},
    }))
    results_path = str(tmp_path / "results.json")
    with pytest.raises(TruncatedFile):
        JSONApp().launch(DepthAgent, str(config), results_path)

    results = read_json(results_path)["output_files"]
    assert results[0]["name"] == "depth"
    assert results[0]["exception"].startswith("TruncatedFile: ")
    assert not os.path.exists(str(tmp_path / "depth.pfm"))


@pytest.mark.apps
def test_jsonapp_reports_missing_input(tmp_path):
    results_path = str(tmp_path / "results.json")
    with pytest.raises(MissingInput):
        JSONApp().launch(DepthAgent, None, results_path,
                         input_files={"cost_volume": str(tmp_path / "nothing.dscv")},
                         output_files={"depth": str(tmp_path / "depth.pfm")})

    results = read_json(results_path)["output_files"]
    assert results[0]["name"] == "depth"
    assert results[0]["exception"].startswith("MissingInput: ")


@pytest.mark.apps
def test_jsonapp_reports_invalid_configuration(tmp_path, cost_volume_file):
    results_path = str(tmp_path / "results.json")
    with pytest.raises(InvalidRange):
        JSONApp().launch(DepthAgent, None, results_path, overrides={"n_bins": 1},
                         input_files={"cost_volume": cost_volume_file},
                         output_files={"depth": str(tmp_path / "depth.pfm")})

    results = read_json(results_path)["output_files"]
    assert results[0]["exception"].startswith("InvalidRange: ")


@pytest.mark.apps
def test_jsonapp_failures_do_not_leak_between_launches(tmp_path):
    corrupt = tmp_path / "corrupt.dscv"
    corrupt.write_bytes(b"DSCV")
    outputs = {"depth": str(tmp_path / "depth.pfm")}
    app = JSONApp()

    with pytest.raises(TruncatedFile):
        app.launch(DepthAgent, None, str(tmp_path / "first.json"),
                   input_files={"cost_volume": str(corrupt)}, output_files=outputs)
    with pytest.raises(MissingInput):
        app.launch(DepthAgent, None, str(tmp_path / "second.json"),
                   input_files={"cost_volume": str(tmp_path / "nothing.dscv")},
                   output_files=outputs)

    second = read_json(str(tmp_path / "second.json"))["output_files"]
    assert second[0]["exception"].startswith("MissingInput: ")


# -----------------------------------------------------------------------------
# Agents, configuration and metadata
# -----------------------------------------------------------------------------

@pytest.mark.apps
def test_run_config_defaults():
    config = RunConfig.from_dict(None)
    assert config.n_bins == 96
    assert config.fusion_mode == "two-branch"
    assert "threads" in config.to_dict()
    assert "threads" not in config.to_dict(echo=True)
    assert RunConfig.from_dict({"n_bins": "16"}).n_bins == 16


@pytest.mark.apps
@pytest.mark.parametrize("record", [
    {"bins": 16},
    {"median_scaling": "yes"},
    {"n_bins": "many"},
    {"d_min": 5.0, "d_max": 1.0},
    {"n_bins": 1},
    {"n_bins": 96.5},
    {"seed": True},
    {"fusion_mode": "average"},
    {"cost_kind": "census"},
    {"threads": 0},
    {"alpha_cv": 1.5},
])
def test_run_config_rejects(record):
    with pytest.raises(ValidationError):
        RunConfig.from_dict(record)


@pytest.mark.apps
def test_agent_options():
    agent = CostVolumeAgent({"mode": "dynamic", "seed": 4})
    assert agent.option("mode") == "dynamic"
    assert agent.run_config.seed == 4
    assert CostVolumeAgent({}).option("mode") == "static"
    # options of one agent are unknown keys to another
    with pytest.raises(InvalidParameter):
        DepthAgent({"mode": "dynamic"})


@pytest.mark.apps
def test_require():
    assert Agent.require({"a": "x", "b": "y"}, "b", "a") == ["y", "x"]
    with pytest.raises(UsageError, match="missing required file for role 'c'"):
        Agent.require({"a": "x", "c": None}, "a", "c")


@pytest.mark.apps
def test_remap():
    files = {"depth_t": "d.pfm", "image_t": "a.png"}
    assert remap(files, "image_t", gt="depth_t") == {"image_t": "a.png", "gt": "d.pfm"}
    assert remap(files, "weights", mask="object_mask") == {}


@pytest.mark.apps
def test_metadata_child():
    first = Metadata("cost_volume", "DSCV", "s.dscv", meta_data={"mode": "static", "n": 1})
    second = Metadata("cost_volume", "DSCV", "d.dscv", meta_data={"mode": "dynamic"})
    child = Metadata.get_child([first, second], "depth.pfm", "depth")
    assert child.data_type == "depth"
    assert child.file_type == "DSCV"
    assert child.sources == ["s.dscv", "d.dscv"]
    assert child.meta_data == {"mode": "dynamic", "n": 1}
    child.meta_data["n"] = 2
    assert first.meta_data["n"] == 1

    stub = Metadata.for_path("flow.FLO")
    assert (stub.data_type, stub.file_type) == ("flow", "FLO")
    assert Metadata.for_path("notes.txt").data_type is None


# -----------------------------------------------------------------------------
# Pipeline
# -----------------------------------------------------------------------------

@pytest.mark.apps
def test_depth_pipeline(tmp_path, moving_object_scene, sweep_arguments, write_json_file):
    scene = write_json_file("scene.json", moving_object_scene)
    report_path = str(tmp_path / "run" / "report.json")
    files, metadata = WorkflowApp().launch(
        DepthPipeline, {"scene": scene}, {}, {"report": report_path}, sweep_arguments)

    assert files == {"report": report_path}
    report = read_json(report_path)
    assert set(report) == {"static", "dynamic", "fused", "fusion_mode"}
    assert report["fusion_mode"] == "two-branch"
    assert metadata["report"].meta_data["report"] == report
    for name in ("static.dscv", "dynamic.dscv", "fused.dscv", "depth_static.pfm",
                 "depth_dynamic.pfm", "depth_fused.pfm", "occ_static.png", "occ_dynamic.png",
                 "image_t.png", "residual_flow.flo", "report.json.json"):
        assert os.path.isfile(str(tmp_path / "run" / name)), name

    static = report["static"]["object"]["abs_rel"]
    assert static > 0.2
    assert report["dynamic"]["object"]["abs_rel"] < static
    assert report["fused"]["object"]["abs_rel"] <= static
    assert report["fused"]["all"]["n_valid"] > report["fused"]["object"]["n_valid"]


@pytest.mark.apps
def test_jsonapp_lists_workflow_intermediates(tmp_path, moving_object_scene, sweep_arguments,
                                              write_json_file):
    scene = write_json_file("scene.json", moving_object_scene)
    report_path = str(tmp_path / "run" / "report.json")
    results_path = str(tmp_path / "results.json")
    JSONApp().launch(DepthPipeline, None, results_path, overrides=sweep_arguments,
                     input_files={"scene": scene}, output_files={"report": report_path})

    results = read_json(results_path)["output_files"]
    assert results[0]["name"] == "report"
    assert "intermediate" not in results[0]
    intermediates = {result["name"]: result for result in results[1:]}
    assert all(result["intermediate"] for result in intermediates.values())
    for role in ("image_t", "static_cost_volume", "dynamic_occlusion", "fused_cost_volume",
                 "fused_depth"):
        assert os.path.isfile(intermediates[role]["file_path"]), role
    assert intermediates["fused_depth"]["file_path"] == str(tmp_path / "run" / "depth_fused.pfm")

    # a plain Agent has no intermediates
    JSONApp().launch(DepthAgent, None, results_path,
                     input_files={"cost_volume": intermediates["fused_cost_volume"]["file_path"]},
                     output_files={"depth": str(tmp_path / "depth.pfm")})
    assert len(read_json(results_path)["output_files"]) == 1

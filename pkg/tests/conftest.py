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

import numpy as np
import pytest

from basic_modules.config import THREADS_ENV
from engine.costvolume import make_hypotheses
from engine.geometry import CameraIntrinsics
from utils import logger

IDENTITY = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]


@pytest.fixture(autouse=True)
def _isolated_run(monkeypatch):
    """
    Every test starts at the INFO threshold without a thread override.
    """
    monkeypatch.delenv(THREADS_ENV, raising=False)
    previous = logger.set_level(logger.INFO)
    yield
    logger.set_level(previous)


@pytest.fixture
def intrinsics():
    """128 x 96 camera with a 100 px focal length."""
    return CameraIntrinsics(fx=100.0, fy=100.0, cx=63.5, cy=47.5, width=128, height=96)


@pytest.fixture
def hypotheses():
    """32 inverse-linear bins between 2 m and 20 m."""
    return make_hypotheses(2.0, 20.0, 32)


@pytest.fixture
def plane_scene(intrinsics, hypotheses):
    """
    Builder of a fronto-parallel background sitting exactly on one
    hypothesis, seen by a camera translated along x so that the plane moves
    by ``shift_px``.
    """
    def _build(bin_index=20, shift_px=10.0):
        depth = float(hypotheses.values[bin_index])
        return {
            "intrinsics": intrinsics.to_dict(),
            "camera_motion": {"rotation": IDENTITY,
                              "translation": [shift_px * depth / intrinsics.fx, 0.0, 0.0]},
            "background": {"depth": depth},
            "objects": [],
            "noise_sigma": 0.0,
        }
    return _build


@pytest.fixture
def moving_object_scene(intrinsics, hypotheses):
    """
    Background on bin 24 and a 30 px square on bin 16 that moves 12 px to
    the right on top of the camera motion; the camera baseline is chosen so
    that the static sweep explains the object with bin 8 instead.
    """
    inverse = 1.0 / hypotheses.values
    d_obj = float(hypotheses.values[16])
    baseline = 12.0 / (inverse[8] - inverse[16]) / intrinsics.fx
    size = 30.0 * d_obj / intrinsics.fx
    return {
        "intrinsics": intrinsics.to_dict(),
        "camera_motion": {"rotation": IDENTITY, "translation": [baseline, 0.0, 0.0]},
        "background": {"depth": float(hypotheses.values[24])},
        "objects": [{"center_px": [40.0, 48.0], "depth": d_obj, "size": [size, size],
                     "velocity": [-12.0 * d_obj / intrinsics.fx, 0.0, 0.0]}],
        "noise_sigma": 0.0,
    }


@pytest.fixture
def integer_flow_scene(intrinsics):
    """
    Background at 5 m moving 10 px, object at 2.5 m moving 20 px rigidly plus
    a 6 px residual: every flow lands on a pixel centre.
    """
    return {
        "intrinsics": intrinsics.to_dict(),
        "camera_motion": {"rotation": IDENTITY, "translation": [0.5, 0.0, 0.0]},
        "background": {"depth": 5.0},
        "objects": [{"center_px": [40.0, 48.0], "depth": 2.5, "size": [0.625, 0.625],
                     "velocity": [-0.15, 0.0, 0.0]}],
        "noise_sigma": 0.0,
    }


@pytest.fixture
def sweep_arguments():
    """Run configuration arguments matching the ``hypotheses`` fixture."""
    return {"d_min": 2.0, "d_max": 20.0, "n_bins": 32}


@pytest.fixture
def write_json_file(tmp_path):
    """
    Write a JSON document under tmp_path and return its path as str.
    """
    def _write(name, record):
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(record))
        return str(path)
    return _write


@pytest.fixture
def rng():
    return np.random.default_rng(1234)

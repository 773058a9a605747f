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
import pytest

from engine.grids import ImageGrid
from engine.metrics import EvalProtocol, abs_rel_map, error_histogram, evaluate
from utils.errors import InvalidParameter, NoValidPixels, ShapeMismatch


def _depth(values):
    return ImageGrid.from_array(np.asarray(values, dtype=np.float64))


@pytest.mark.metrics
def test_perfect_prediction(rng):
    gt = _depth(rng.uniform(1.0, 50.0, (6, 8)))
    report = evaluate(gt, gt)
    assert report.abs_rel == 0.0
    assert report.rmse == 0.0
    assert report.rmse_log == 0.0
    assert (report.delta1, report.delta2, report.delta3) == (1.0, 1.0, 1.0)
    assert report.n_valid == 48


@pytest.mark.metrics
def test_doubled_prediction():
    """
    A prediction twice the ground truth fails every threshold (2 > 1.25^3)
    """
    report = evaluate(_depth(np.full((2, 2), 2.0)), _depth(np.ones((2, 2))))
    assert report.abs_rel == pytest.approx(1.0)
    assert report.sq_rel == pytest.approx(1.0)
    assert report.rmse == pytest.approx(1.0)
    assert report.rmse_log == pytest.approx(np.log(2.0))
    assert (report.delta1, report.delta2, report.delta3) == (0.0, 0.0, 0.0)


@pytest.mark.metrics
def test_metrics_match_loop(rng):
    gt = rng.uniform(1.0, 30.0, 40)
    pred = gt * rng.uniform(0.7, 1.4, 40)
    report = evaluate(_depth(pred[None]), _depth(gt[None]))
    abs_rel = sum(abs(p - g) / g for p, g in zip(pred, gt)) / 40
    sq_rel = sum((p - g) ** 2 / g for p, g in zip(pred, gt)) / 40
    rmse = np.sqrt(sum((p - g) ** 2 for p, g in zip(pred, gt)) / 40)
    delta1 = sum(max(p / g, g / p) < 1.25 for p, g in zip(pred, gt)) / 40
    assert report.abs_rel == pytest.approx(abs_rel)
    assert report.sq_rel == pytest.approx(sq_rel)
    assert report.rmse == pytest.approx(rmse)
    assert report.delta1 == pytest.approx(delta1)
    assert report.delta1 <= report.delta2 <= report.delta3 <= 1.0


@pytest.mark.metrics
def test_median_scaling(rng):
    gt = _depth(rng.uniform(1.0, 20.0, (5, 5)))
    pred = _depth(gt.plane(0) * 3.0)
    assert evaluate(pred, gt).abs_rel == pytest.approx(2.0)
    scaled = evaluate(pred, gt, EvalProtocol(median_scaling=True))
    assert scaled.abs_rel == pytest.approx(0.0, abs=1e-12)


@pytest.mark.metrics
def test_median_scaling_needs_positive_median(rng):
    gt = _depth(rng.uniform(1.0, 20.0, (5, 5)))
    values = np.zeros((5, 5))
    values[0, :3] = 4.0
    with pytest.raises(NoValidPixels):
        evaluate(_depth(values), gt, EvalProtocol(median_scaling=True))
    with pytest.raises(NoValidPixels):
        evaluate(_depth(-gt.plane(0)), gt, EvalProtocol(median_scaling=True))
    # without scaling, the same prediction is clamped and stays finite
    report = evaluate(_depth(values), gt)
    assert all(np.isfinite(value) for value in report.to_dict().values())


@pytest.mark.metrics
def test_range_and_clamp():
    gt = _depth([[200.0, 40.0]])
    pred = _depth([[10.0, 100.0]])
    report = evaluate(pred, gt)
    # 200 m is out of range; 100 m is clamped to 80 m
    assert report.n_valid == 1
    assert report.abs_rel == pytest.approx(1.0)


@pytest.mark.metrics
def test_region_mask(rng):
    gt = _depth(np.full((3, 3), 4.0))
    values = np.full((3, 3), 4.0)
    values[0, 0] = 6.0
    pred = _depth(values)
    region = np.zeros((3, 3), dtype=bool)
    region[0, :2] = True
    report = evaluate(pred, gt, EvalProtocol().with_region(region))
    assert report.n_valid == 2
    assert report.abs_rel == pytest.approx(0.25)
    with pytest.raises(ShapeMismatch):
        evaluate(pred, gt, EvalProtocol(region_mask=np.ones((2, 2), dtype=bool)))


@pytest.mark.metrics
def test_invalid_pixels_are_skipped():
    gt = _depth([[2.0, np.nan, 0.0]])
    pred = _depth([[2.0, 2.0, 2.0]])
    assert evaluate(pred, gt).n_valid == 1
    with pytest.raises(NoValidPixels):
        evaluate(pred, _depth([[0.0, 90.0, np.nan]]))


@pytest.mark.metrics
def test_protocol_validation():
    with pytest.raises(InvalidParameter):
        EvalProtocol(min_depth=10.0, max_depth=5.0)
    with pytest.raises(InvalidParameter):
        EvalProtocol(min_depth=0.0)


@pytest.mark.metrics
def test_abs_rel_map():
    gt = _depth([[2.0, 200.0, 4.0]])
    pred = _depth([[3.0, 1.0, 4.0]])
    errors = abs_rel_map(pred, gt)
    assert errors[0, 0] == pytest.approx(0.5)
    assert np.isnan(errors[0, 1])
    assert errors[0, 2] == 0.0


@pytest.mark.metrics
def test_error_histogram():
    gt = _depth([[1.0, 1.0]])
    pred = _depth([[1.1, 1.9]])
    counts, edges = error_histogram(pred, gt, n_bins=2)
    assert counts.tolist() == [1, 1]
    assert edges.tolist() == pytest.approx([0.0, 0.5, 1.0])


@pytest.mark.metrics
def test_error_histogram_counts_everything(rng):
    gt = _depth(rng.uniform(1.0, 10.0, (8, 8)))
    pred = _depth(gt.plane(0) * rng.uniform(0.1, 4.0, (8, 8)))
    counts, _ = error_histogram(pred, gt, n_bins=5, value_range=(0.0, 0.5))
    assert counts.sum() == 64
    with pytest.raises(InvalidParameter):
        error_histogram(pred, gt, n_bins=0)
    with pytest.raises(InvalidParameter):
        error_histogram(pred, gt, value_range=(1.0, 1.0))

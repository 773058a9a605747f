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

from engine.costvolume import CostVolume, make_hypotheses
from engine.fusion import (FusionMode, FusionWeights, adaptive_fuse, complementary_fuse,
                           concat_fuse, fuse)
from utils.errors import HypothesisMismatch, InvalidParameter, ShapeMismatch, WeightDimMismatch

N_BINS = 4
SHAPE = (3, 5)


def _volume(rng, hyps=None, validity=None):
    if hyps is None:
        hyps = make_hypotheses(1.0, 10.0, N_BINS)
    costs = rng.uniform(0.0, 1.0, (len(hyps),) + SHAPE)
    if validity is None:
        validity = np.ones(costs.shape, dtype=bool)
    return CostVolume(costs, hyps, validity)


@pytest.fixture
def volumes(rng):
    return _volume(rng), _volume(rng)


@pytest.fixture
def masks():
    occ_s = np.zeros(SHAPE, dtype=bool)
    occ_d = np.zeros(SHAPE, dtype=bool)
    occ_s[0, 0] = True             # static only
    occ_d[1, 1] = True             # dynamic only
    occ_s[2, 2] = occ_d[2, 2] = True
    return occ_s, occ_d


@pytest.mark.fusion
def test_complementary_selection(volumes, masks):
    cv_s, cv_d = volumes
    occ_s, occ_d = masks
    fused = complementary_fuse(cv_s, cv_d, occ_s, occ_d)
    assert np.array_equal(fused.costs[:, 0, 0], cv_d.costs[:, 0, 0])
    assert np.array_equal(fused.costs[:, 1, 1], cv_s.costs[:, 1, 1])
    smaller = np.minimum(cv_s.costs, cv_d.costs)
    assert np.array_equal(fused.costs[:, 2, 2], smaller[:, 2, 2])
    assert np.array_equal(fused.costs[:, 0, 4], smaller[:, 0, 4])
    assert fused.hypotheses is cv_s.hypotheses


@pytest.mark.fusion
def test_complementary_is_symmetric(rng, masks):
    validity = rng.uniform(size=(N_BINS,) + SHAPE) > 0.2
    cv_s, cv_d = _volume(rng, validity=validity), _volume(rng)
    occ_s, occ_d = masks
    one = complementary_fuse(cv_s, cv_d, occ_s, occ_d)
    other = complementary_fuse(cv_d, cv_s, occ_d, occ_s)
    assert np.array_equal(one.costs, other.costs)
    assert np.array_equal(one.validity, other.validity)


@pytest.mark.fusion
def test_complementary_keeps_the_only_valid_bin(rng):
    validity = np.ones((N_BINS,) + SHAPE, dtype=bool)
    validity[1, 0, 0] = False
    cv_s = CostVolume(np.zeros((N_BINS,) + SHAPE), make_hypotheses(1.0, 10.0, N_BINS), validity)
    cv_d = _volume(rng)
    none = np.zeros(SHAPE, dtype=bool)
    fused = complementary_fuse(cv_s, cv_d, none, none)
    assert fused.costs[1, 0, 0] == np.float32(cv_d.costs[1, 0, 0])
    assert fused.validity[1, 0, 0]


@pytest.mark.fusion
def test_identical_volumes_fuse_to_themselves(rng):
    cv = _volume(rng)
    none = np.zeros(SHAPE, dtype=bool)
    assert np.array_equal(complementary_fuse(cv, cv, none, none).costs, cv.costs)
    averaged = concat_fuse(cv, cv, FusionWeights.averaging(N_BINS))
    assert np.allclose(averaged.costs, cv.costs, atol=1e-7)


@pytest.mark.fusion
def test_concat_with_explicit_weights():
    hyps = make_hypotheses(1.0, 2.0, 2)
    cv_s = CostVolume(np.array([[[1.0]], [[2.0]]]), hyps, np.ones((2, 1, 1), dtype=bool))
    cv_d = CostVolume(np.array([[[3.0]], [[4.0]]]), hyps, np.ones((2, 1, 1), dtype=bool))
    weights = FusionWeights(np.array([[1.0, 0.0, 0.0, 2.0],
                                      [0.5, 0.5, 0.5, 0.5]]), np.array([0.25, -1.0]))
    fused = concat_fuse(cv_s, cv_d, weights)
    assert fused.costs[:, 0, 0].tolist() == [9.25, 4.0]


@pytest.mark.fusion
def test_concat_validity():
    hyps = make_hypotheses(1.0, 2.0, 2)
    validity = np.ones((2, 1, 1), dtype=bool)
    validity[1] = False
    cv_s = CostVolume(np.ones((2, 1, 1)), hyps, validity)
    cv_d = CostVolume(np.ones((2, 1, 1)), hyps, np.ones((2, 1, 1), dtype=bool))
    # row 0 ignores the invalid static bin 1, row 1 uses it
    weights = FusionWeights(np.array([[1.0, 0.0, 1.0, 0.0],
                                      [0.0, 1.0, 0.0, 1.0]]), np.zeros(2))
    fused = concat_fuse(cv_s, cv_d, weights)
    assert fused.validity[:, 0, 0].tolist() == [True, False]


@pytest.mark.fusion
def test_two_branch_is_the_sum(volumes, masks):
    cv_s, cv_d = volumes
    occ_s, occ_d = masks
    weights = FusionWeights.averaging(N_BINS)
    expected = fuse(complementary_fuse(cv_s, cv_d, occ_s, occ_d), concat_fuse(cv_s, cv_d, weights))
    fused = adaptive_fuse(cv_s, cv_d, occ_s, occ_d)
    assert np.array_equal(fused.costs, expected.costs)
    assert np.array_equal(fused.validity, expected.validity)


@pytest.mark.fusion
def test_fusion_modes(volumes, masks):
    cv_s, cv_d = volumes
    occ_s, occ_d = masks
    assert adaptive_fuse(cv_s, cv_d, None, None, mode="static") is cv_s
    assert adaptive_fuse(cv_s, cv_d, None, None, mode=FusionMode.DYNAMIC) is cv_d
    concatenated = adaptive_fuse(cv_s, cv_d, None, None, mode="concatenate")
    assert np.allclose(concatenated.costs, (cv_s.costs + cv_d.costs) / 2.0, atol=1e-6)
    complementary = adaptive_fuse(cv_s, cv_d, occ_s, occ_d, mode="complementary")
    assert np.array_equal(complementary.costs,
                          complementary_fuse(cv_s, cv_d, occ_s, occ_d).costs)
    with pytest.raises(InvalidParameter):
        adaptive_fuse(cv_s, cv_d, occ_s, occ_d, mode="max")


@pytest.mark.fusion
def test_fusion_checks(rng, volumes, masks):
    cv_s, cv_d = volumes
    occ_s, occ_d = masks
    other_hyps = _volume(rng, hyps=make_hypotheses(1.0, 20.0, N_BINS))
    with pytest.raises(HypothesisMismatch):
        complementary_fuse(cv_s, other_hyps, occ_s, occ_d)
    with pytest.raises(ShapeMismatch):
        complementary_fuse(cv_s, _volume(rng, hyps=make_hypotheses(1.0, 10.0, 5)), occ_s, occ_d)
    with pytest.raises(ShapeMismatch):
        complementary_fuse(cv_s, cv_d, occ_s[:, :2], occ_d)
    with pytest.raises(WeightDimMismatch):
        concat_fuse(cv_s, cv_d, FusionWeights.averaging(N_BINS + 1))


@pytest.mark.fusion
@pytest.mark.parametrize("matrix, bias", [
    (np.zeros((2, 3)), np.zeros(2)),
    (np.zeros((2, 4)), np.zeros(3)),
])
def test_weights_dimensions(matrix, bias):
    with pytest.raises(WeightDimMismatch):
        FusionWeights(matrix, bias)


@pytest.mark.fusion
def test_averaging_weights():
    weights = FusionWeights.averaging(3)
    assert weights.matrix.shape == (3, 6)
    assert weights.matrix[1].tolist() == [0.0, 0.5, 0.0, 0.0, 0.5, 0.0]
    assert not weights.bias.any()

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

Adaptive fusion of the static and dynamic cost volumes: occlusion-aware
complementary selection, the concatenation branch (a per-pixel 2N -> N
linear map) and their sum.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from engine.costvolume import CostVolume
from utils import logger
from utils.errors import HypothesisMismatch, InvalidParameter, ShapeMismatch, WeightDimMismatch


class FusionMode(Enum):
    """
    Which branches contribute to the fused volume.
    """
    TWO_BRANCH = "two-branch"
    COMPLEMENTARY = "complementary"
    CONCATENATE = "concatenate"
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class FusionWeights:
    """
    Per-pixel mixing of the stacked [static; dynamic] bins.

    Attributes
    ----------
    matrix : numpy.ndarray
        N x 2N float32; row k produces output bin k.
    bias : numpy.ndarray
        N float32.
    """
    matrix: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float32)
        bias = np.asarray(self.bias, dtype=np.float32).reshape(-1)
        if matrix.ndim != 2 or matrix.shape[1] != 2 * matrix.shape[0]:
            raise WeightDimMismatch("fusion weights must be N x 2N, got {}".format(matrix.shape))
        if bias.size != matrix.shape[0]:
            raise WeightDimMismatch("{} biases for {} output bins".format(bias.size, matrix.shape[0]))
        if not (np.isfinite(matrix).all() and np.isfinite(bias).all()):
            raise InvalidParameter("fusion weights must be finite")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "bias", bias)

    @property
    def n_bins(self):
        return self.matrix.shape[0]

    @classmethod
    def averaging(cls, n_bins):
        """
        Each output bin is the mean of the matching static and dynamic bins.
        """
        matrix = np.zeros((n_bins, 2 * n_bins), dtype=np.float32)
        index = np.arange(n_bins)
        matrix[index, index] = 0.5
        matrix[index, index + n_bins] = 0.5
        return cls(matrix, np.zeros(n_bins, dtype=np.float32))


def _check_pair(cv_a, cv_b):
    if cv_a.costs.shape != cv_b.costs.shape:
        raise ShapeMismatch("cost volumes differ in shape: {} vs {}".format(
            cv_a.costs.shape, cv_b.costs.shape))
    if not cv_a.hypotheses.same_as(cv_b.hypotheses):
        raise HypothesisMismatch("cost volumes were swept over different depths")


def _check_mask(mask, shape, name):
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != tuple(shape):
        raise ShapeMismatch("{} {} does not match volume {}".format(name, mask.shape, tuple(shape)))
    return mask


def _valid_min(cv_s, cv_d):
    """
    Per-bin min; where only one bin is valid its value is kept.
    """
    only_s = cv_s.validity & ~cv_d.validity
    only_d = cv_d.validity & ~cv_s.validity
    costs = np.where(only_s, cv_s.costs,
                     np.where(only_d, cv_d.costs, np.minimum(cv_s.costs, cv_d.costs)))
    return costs, cv_s.validity | cv_d.validity


def complementary_fuse(cv_s, cv_d, occ_s, occ_d):
    """
    Occlusion-aware selection between the two volumes, per pixel column:

    - occluded in the static view only: the dynamic column;
    - occluded in the dynamic view only: the static column;
    - otherwise (visible in both, or occluded in both): per-bin minimum.

    The result is symmetric in swapping ``(cv_s, occ_s)`` with
    ``(cv_d, occ_d)``.
    """
    _check_pair(cv_s, cv_d)
    occ_s = _check_mask(occ_s, cv_s.shape, "static occlusion mask")
    occ_d = _check_mask(occ_d, cv_s.shape, "dynamic occlusion mask")

    costs, validity = _valid_min(cv_s, cv_d)
    take_d = occ_s & ~occ_d
    take_s = occ_d & ~occ_s
    costs = np.where(take_d, cv_d.costs, np.where(take_s, cv_s.costs, costs))
    validity = np.where(take_d, cv_d.validity, np.where(take_s, cv_s.validity, validity))
    logger.debug("complementary fusion: {} dynamic columns, {} static columns",
                 int(take_d.sum()), int(take_s.sum()))
    return CostVolume(costs, cv_s.hypotheses, validity)


def concat_fuse(cv_s, cv_d, weights):
    """
    Concatenation branch: stack the 2N bins of both volumes and apply the
    per-pixel linear map plus bias.

    An output bin is valid when every input bin with a non-zero weight in its
    row is valid.
    """
    _check_pair(cv_s, cv_d)
    if weights.n_bins != cv_s.n_bins:
        raise WeightDimMismatch("weights map {} bins, volumes have {}".format(
            2 * weights.n_bins, 2 * cv_s.n_bins))
    stacked = np.concatenate([cv_s.costs, cv_d.costs]).astype(np.float64)
    stacked_valid = np.concatenate([cv_s.validity, cv_d.validity])
    stacked = np.where(stacked_valid, stacked, 0.0)

    matrix = weights.matrix.astype(np.float64)
    costs = np.einsum("kj,jhw->khw", matrix, stacked) + weights.bias.astype(np.float64)[:, None, None]

    used = (matrix != 0).astype(np.int64)
    n_invalid = np.einsum("kj,jhw->khw", used, (~stacked_valid).astype(np.int64))
    return CostVolume(costs.astype(np.float32), cv_s.hypotheses, n_invalid == 0)


def fuse(cv_com, cv_cat):
    """
    Final fused volume: elementwise sum; validity is the AND.
    """
    _check_pair(cv_com, cv_cat)
    return CostVolume(cv_com.costs + cv_cat.costs, cv_com.hypotheses,
                      cv_com.validity & cv_cat.validity)


def adaptive_fuse(cv_s, cv_d, occ_s, occ_d, weights=None, mode=FusionMode.TWO_BRANCH):  # pylint: disable=too-many-arguments
    """
    Fuse the static and dynamic volumes with one of the fusion variants.

    Parameters
    ----------
    weights : FusionWeights, optional
        concatenation weights; bin-wise averaging when absent.
    mode : FusionMode or str
        ``two-branch`` (complementary + concatenation), ``complementary``,
        ``concatenate``, ``static`` or ``dynamic``.
    """
    try:
        mode = FusionMode(mode)
    except ValueError as err:
        raise InvalidParameter("unknown fusion mode '{}'".format(mode)) from err
    _check_pair(cv_s, cv_d)
    if mode is FusionMode.STATIC:
        return cv_s
    if mode is FusionMode.DYNAMIC:
        return cv_d
    if weights is None:
        weights = FusionWeights.averaging(cv_s.n_bins)
    if mode is FusionMode.COMPLEMENTARY:
        return complementary_fuse(cv_s, cv_d, occ_s, occ_d)
    if mode is FusionMode.CONCATENATE:
        return concat_fuse(cv_s, cv_d, weights)
    return fuse(complementary_fuse(cv_s, cv_d, occ_s, occ_d), concat_fuse(cv_s, cv_d, weights))

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

Depth evaluation: the standard error statistics and threshold accuracies,
optionally restricted to a region (e.g. moving objects), and per-pixel
relative-error histograms.
"""

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from engine.grids import require_same_shape
from utils import logger
from utils.errors import InvalidParameter, NoValidPixels


@dataclass(frozen=True)
class EvalProtocol:
    """
    Which pixels are evaluated and how predictions are treated.

    Attributes
    ----------
    min_depth, max_depth : float
        ground truth outside this range is ignored; predictions are clamped
        into it.
    median_scaling : bool
        rescale predictions by median(gt) / median(pred) per image.
    region_mask : numpy.ndarray, optional
        H x W boolean mask of pixels to evaluate.
    """
    min_depth: float = 1e-3
    max_depth: float = 80.0
    median_scaling: bool = False
    region_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        if not 0 < self.min_depth < self.max_depth:
            raise InvalidParameter("need 0 < min_depth < max_depth, got {} and {}".format(
                self.min_depth, self.max_depth))

    def with_region(self, region_mask):
        return EvalProtocol(self.min_depth, self.max_depth, self.median_scaling, region_mask)


@dataclass(frozen=True)
class DepthEvalReport:  # pylint: disable=too-many-instance-attributes
    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    delta1: float
    delta2: float
    delta3: float
    n_valid: int

    def to_dict(self):
        return asdict(self)


def _prepare(pred, gt, protocol):
    """
    Valid-pixel vectors (pred, gt) after masking, scaling and clamping.
    """
    require_same_shape(pred.shape, gt.shape, what="prediction and ground truth")
    gt_depth = gt.plane(0).astype(np.float64)
    pred_depth = pred.plane(0).astype(np.float64)
    with np.errstate(invalid="ignore"):
        mask = (gt.validity & pred.validity & np.isfinite(pred_depth)
                & (gt_depth >= protocol.min_depth) & (gt_depth <= protocol.max_depth))
    if protocol.region_mask is not None:
        region = np.asarray(protocol.region_mask, dtype=bool)
        require_same_shape(region.shape, gt.shape, what="region mask and ground truth")
        mask &= region
    if not mask.any():
        raise NoValidPixels("no ground-truth pixel in [{}, {}] survives the mask".format(
            protocol.min_depth, protocol.max_depth))
    gt_valid = gt_depth[mask]
    pred_valid = pred_depth[mask]
    if protocol.median_scaling:
        pred_median = np.median(pred_valid)
        if not pred_median > 0:
            raise NoValidPixels("median scaling needs a positive prediction median, got {}".format(
                pred_median))
        ratio = np.median(gt_valid) / pred_median
        logger.debug("median scaling ratio {:.4f}", ratio)
        pred_valid = pred_valid * ratio
    pred_valid = np.clip(pred_valid, protocol.min_depth, protocol.max_depth)
    return pred_valid, gt_valid


def evaluate(pred, gt, protocol=None):
    """
    Compare a predicted depth map with ground truth.

    Parameters
    ----------
    pred, gt : ImageGrid
        single-channel depth maps of equal shape.
    protocol : EvalProtocol, optional

    Returns
    -------
    DepthEvalReport

    Raises
    ------
    NoValidPixels
        if no pixel survives the range, validity and region masks, or if
        median scaling meets a prediction whose median is not positive.
    """
    if protocol is None:
        protocol = EvalProtocol()
    pred_valid, gt_valid = _prepare(pred, gt, protocol)

    thresh = np.maximum(gt_valid / pred_valid, pred_valid / gt_valid)
    diff = gt_valid - pred_valid
    return DepthEvalReport(
        abs_rel=float(np.mean(np.abs(diff) / gt_valid)),
        sq_rel=float(np.mean(diff ** 2 / gt_valid)),
        rmse=float(np.sqrt(np.mean(diff ** 2))),
        rmse_log=float(np.sqrt(np.mean((np.log(gt_valid) - np.log(pred_valid)) ** 2))),
        delta1=float((thresh < 1.25).mean()),
        delta2=float((thresh < 1.25 ** 2).mean()),
        delta3=float((thresh < 1.25 ** 3).mean()),
        n_valid=int(gt_valid.size),
    )


def abs_rel_map(pred, gt, protocol=None):
    """
    Per-pixel |p - g| / g over the evaluated pixels; NaN elsewhere.
    """
    if protocol is None:
        protocol = EvalProtocol()
    require_same_shape(pred.shape, gt.shape, what="prediction and ground truth")
    out = np.full(gt.shape, np.nan)
    gt_depth = gt.plane(0).astype(np.float64)
    with np.errstate(invalid="ignore"):
        mask = (gt.validity & pred.validity & np.isfinite(pred.plane(0))
                & (gt_depth >= protocol.min_depth) & (gt_depth <= protocol.max_depth))
    if protocol.region_mask is not None:
        mask &= np.asarray(protocol.region_mask, dtype=bool)
    pred_valid, gt_valid = _prepare(pred, gt, protocol)
    out[mask] = np.abs(gt_valid - pred_valid) / gt_valid
    return out


def error_histogram(pred, gt, protocol=None, n_bins=20, value_range=(0.0, 1.0)):
    """
    Histogram of per-pixel AbsRel over the evaluated pixels.

    Values outside ``value_range`` are counted in the first or last bin, so
    the counts always sum to the number of evaluated pixels.

    Returns
    -------
    (counts, edges) : tuple of numpy.ndarray
        ``n_bins`` integer counts and ``n_bins + 1`` bin edges.
    """
    if protocol is None:
        protocol = EvalProtocol()
    low, high = (float(v) for v in value_range)
    if int(n_bins) != n_bins or n_bins < 1 or not low < high:
        raise InvalidParameter("need n_bins >= 1 and a non-empty range, got {} over {}".format(
            n_bins, value_range))
    pred_valid, gt_valid = _prepare(pred, gt, protocol)
    errors = np.clip(np.abs(gt_valid - pred_valid) / gt_valid, low, high)
    counts, edges = np.histogram(errors, bins=int(n_bins), range=(low, high))
    return counts, edges

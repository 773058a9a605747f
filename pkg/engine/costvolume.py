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

Plane-sweep cost volumes.

For every depth hypothesis the source features are warped into the target
view as if the whole scene sat at that depth, and the SSIM+L1 matching cost
against the target features fills one bin of the volume. The dynamic volume
adds a residual flow to the sampling coordinates of every bin.

Bins are independent; when an executor is supplied they are evaluated
through ``executor.map``, which keeps the results in bin order so that the
assembled volume does not depend on the number of workers.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from engine.geometry import reproject_arrays
from engine.grids import ImageGrid, SampleCoords, pixel_grid, require_same_shape
from engine.photometric import cost_error
from engine.sampler import bilinear_sample
from utils import logger
from utils.errors import InvalidParameter, InvalidRange, ShapeMismatch


# -----------------------------------------------------------------------------
# Hypotheses
# -----------------------------------------------------------------------------

class Spacing(Enum):
    """
    Placement of the depth hypotheses between d_min and d_max.
    """
    LINEAR = "linear"
    INVERSE_LINEAR = "inverse-linear"


class CostKind(Enum):
    """
    Matching-cost variants: the SSIM+L1 blend, or either of its two parts.
    """
    PHOTOMETRIC = "photometric"
    L1 = "l1"
    SSIM = "ssim"

    def alpha(self, alpha_cv):
        """
        SSIM weight to pass to ``cost_error``.
        """
        if self is CostKind.L1:
            return 0.0
        if self is CostKind.SSIM:
            return 1.0
        return alpha_cv


def _parse_enum(enum_class, value):
    if isinstance(value, enum_class):
        return value
    try:
        return enum_class(value)
    except ValueError as err:
        choices = ", ".join(member.value for member in enum_class)
        raise InvalidParameter("unknown {} '{}' (choose from {})".format(
            enum_class.__name__, value, choices)) from err


@dataclass(frozen=True)
class DepthHypothesisSet:
    """
    Ordered depth values swept during volume construction.

    Attributes
    ----------
    values : numpy.ndarray
        N strictly increasing positive depths (float64).
    spacing : Spacing or None
        how the values were generated; None for sets read from a file.
    """
    values: np.ndarray
    spacing: Optional[Spacing] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        if values.size < 2:
            raise InvalidRange("a hypothesis set needs at least 2 depths")
        if not (np.isfinite(values).all() and values[0] > 0 and (np.diff(values) > 0).all()):
            raise InvalidRange("hypothesis depths must be positive and strictly increasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size

    @property
    def d_min(self):
        return float(self.values[0])

    @property
    def d_max(self):
        return float(self.values[-1])

    def same_as(self, other):
        return np.array_equal(self.values.astype(np.float32), other.values.astype(np.float32))

    def to_dict(self):
        return {"d_min": self.d_min, "d_max": self.d_max, "n": len(self),
                "spacing": self.spacing.value if self.spacing else None}


def make_hypotheses(d_min, d_max, n, spacing=Spacing.INVERSE_LINEAR):
    """
    Generate N depths between d_min and d_max (both included).

    Parameters
    ----------
    spacing : Spacing or str
        ``inverse-linear`` (default) places the values uniformly in 1/depth,
        ``linear`` uniformly in depth.

    Raises
    ------
    InvalidRange
        unless 0 < d_min < d_max and n >= 2.

    Example
    -------
    >>> make_hypotheses(1, 4, 3).values
    array([1. , 1.6, 4. ])
    """
    spacing = _parse_enum(Spacing, spacing)
    if not (np.isfinite(d_min) and np.isfinite(d_max) and 0 < d_min < d_max):
        raise InvalidRange("need 0 < d_min < d_max, got {} and {}".format(d_min, d_max))
    if int(n) != n or n < 2:
        raise InvalidRange("need at least 2 hypotheses, got {}".format(n))
    n = int(n)
    if spacing is Spacing.LINEAR:
        values = np.linspace(d_min, d_max, n)
    else:
        values = 1.0 / np.linspace(1.0 / d_min, 1.0 / d_max, n)
    values[0] = d_min
    values[-1] = d_max
    return DepthHypothesisSet(values, spacing)


# -----------------------------------------------------------------------------
# Volume container
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class CostVolume:
    """
    Bin-major N x H x W matching costs; lower means a better match.
    """
    costs: np.ndarray
    hypotheses: DepthHypothesisSet
    validity: np.ndarray

    def __post_init__(self):
        costs = np.asarray(self.costs, dtype=np.float32)
        validity = np.asarray(self.validity, dtype=bool)
        if costs.ndim != 3:
            raise ShapeMismatch("cost volume must be N x H x W, got {}".format(costs.shape))
        if costs.shape[0] != len(self.hypotheses):
            raise ShapeMismatch("{} cost bins for {} hypotheses".format(
                costs.shape[0], len(self.hypotheses)))
        if validity.shape != costs.shape:
            raise ShapeMismatch("validity {} does not match costs {}".format(
                validity.shape, costs.shape))
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "validity", validity)

    @property
    def n_bins(self):
        return self.costs.shape[0]

    @property
    def shape(self):
        """(H, W)"""
        return self.costs.shape[1:]


# -----------------------------------------------------------------------------
# Sweep
# -----------------------------------------------------------------------------

def sweep_coords(intr, pose, depth, residual=None):
    """
    Source sampling coordinates of every target pixel for one constant depth
    (plus the residual flow, if any).

    Returns
    -------
    (SampleCoords, numpy.ndarray)
        coordinates and the mask of pixels that stay in front of the camera.
    """
    xs, ys = pixel_grid(*intr.shape)
    out_x, out_y, _, valid = reproject_arrays(xs, ys, depth, intr, pose)
    if residual is not None:
        out_x = out_x + residual.u.astype(np.float64)
        out_y = out_y + residual.v.astype(np.float64)
        valid = valid & residual.validity
    return SampleCoords(out_x, out_y), valid


class _BinSweep:  # pylint: disable=too-few-public-methods,too-many-instance-attributes
    """
    Cost of one depth bin; a callable so it can be handed to executor.map.
    """

    def __init__(self, feat_t, feat_src, intr, pose, hyps, residual, alpha):  # pylint: disable=too-many-arguments
        self.feat_t = feat_t
        self.feat_src = feat_src
        self.intr = intr
        self.pose = pose
        self.hyps = hyps
        self.residual = residual
        self.alpha = alpha

    def __call__(self, k):
        coords, in_front = sweep_coords(self.intr, self.pose, self.hyps.values[k], self.residual)
        warped = bilinear_sample(self.feat_src, coords)
        error = cost_error(warped, self.feat_t, self.alpha)
        valid = error.validity & in_front
        costs = np.where(valid, np.maximum(error.values, 0.0), 0.0)
        logger.debug("bin {} (depth {:.4f}): {} valid pixels", k, self.hyps.values[k], int(valid.sum()))
        return costs.astype(np.float32), valid


def _check_inputs(feat_t, feat_src, intr, residual):
    require_same_shape(feat_t.data.shape, feat_src.data.shape, what="target and source features")
    require_same_shape(feat_t.shape, intr.shape, what="features and intrinsics")
    if residual is not None:
        require_same_shape(feat_t.shape, residual.shape, what="features and residual flow")


def build_dynamic_cv(feat_t, feat_src, intr, pose, hyps, residual,  # pylint: disable=too-many-arguments
                     alpha_cv=0.4, cost_kind=CostKind.PHOTOMETRIC, executor=None):
    """
    Dynamic cost volume: the plane sweep with the residual flow added to the
    projected coordinates of every bin.

    Parameters
    ----------
    feat_t, feat_src : ImageGrid
        target and source features of equal shape.
    intr : CameraIntrinsics
        intrinsics at the feature resolution.
    pose : PoseSE3
        target-to-source camera transform.
    hyps : DepthHypothesisSet
    residual : FlowField or None
        None builds the static volume.
    alpha_cv : float
        SSIM weight of the matching cost.
    cost_kind : CostKind or str
    executor : concurrent.futures.Executor, optional
        bins run through ``executor.map``; serial when absent.

    Returns
    -------
    CostVolume
    """
    _check_inputs(feat_t, feat_src, intr, residual)
    alpha = _parse_enum(CostKind, cost_kind).alpha(alpha_cv)
    sweep = _BinSweep(feat_t, feat_src, intr, pose, hyps, residual, alpha)
    label = "static sweep" if residual is None else "dynamic sweep"
    logger.progress(label, status="RUNNING")
    bins = range(len(hyps))
    results = list(executor.map(sweep, bins) if executor is not None else map(sweep, bins))
    logger.progress(label, task_id=len(hyps), total=len(hyps))
    costs = np.stack([costs for costs, _ in results])
    validity = np.stack([valid for _, valid in results])
    logger.progress(label, status="DONE")
    return CostVolume(costs, hyps, validity)


def build_static_cv(feat_t, feat_src, intr, pose, hyps,  # pylint: disable=too-many-arguments
                    alpha_cv=0.4, cost_kind=CostKind.PHOTOMETRIC, executor=None):
    """
    Static cost volume: the plane sweep driven by camera motion only.
    """
    return build_dynamic_cv(feat_t, feat_src, intr, pose, hyps, None,
                            alpha_cv=alpha_cv, cost_kind=cost_kind, executor=executor)


# -----------------------------------------------------------------------------
# Read-out
# -----------------------------------------------------------------------------

def argmin_depth(cv):
    """
    Depth of the lowest-cost valid bin per pixel; ties go to the lowest bin.

    Pixels without any valid bin are invalid with depth 0.
    """
    masked = np.where(cv.validity, cv.costs, np.inf)
    index = np.argmin(masked, axis=0)
    valid = cv.validity.any(axis=0)
    depth = np.where(valid, cv.hypotheses.values[index], 0.0).astype(np.float32)
    n_empty = int((~valid).sum())
    if n_empty:
        logger.warn("{} pixels have no valid depth bin", n_empty)
    return ImageGrid(depth, valid)


def matching_probability(cv):
    """
    Softmax of the negated costs over the valid bins of each pixel.

    Returns
    -------
    numpy.ndarray
        N x H x W float64; each pixel with a valid bin sums to 1, invalid
        bins hold 0.
    """
    costs = cv.costs.astype(np.float64)
    masked = np.where(cv.validity, costs, np.inf)
    best = masked.min(axis=0)
    best = np.where(np.isfinite(best), best, 0.0)
    weights = np.where(cv.validity, np.exp(-(costs - best)), 0.0)
    total = weights.sum(axis=0)
    return np.divide(weights, total, out=np.zeros_like(weights), where=total > 0)


# -----------------------------------------------------------------------------
# Occlusion
# -----------------------------------------------------------------------------

def occlusion_mask(intr, pose, depth_for_warp, residual=None, tolerance=0.01):
    """
    Target pixels whose warped source content cannot be trusted.

    A pixel is occluded when its composed sampling coordinate leaves the
    source image (or lands behind the camera), or when another target pixel
    that is nearer to the source camera splats into the same source cell.
    Forward splatting onto nearest source cells, with a z-buffer per cell,
    stands in for the hole test of a full splat: the pixel that loses its
    cell is the one whose content the source frame does not show.

    Parameters
    ----------
    depth_for_warp : ImageGrid
        per-pixel depth driving the warp (argmin depth or ground truth).
    residual : FlowField, optional
    tolerance : float
        relative depth margin before a nearer splat counts as occluding.

    Returns
    -------
    numpy.ndarray
        H x W boolean, True = occluded.
    """
    require_same_shape(depth_for_warp.shape, intr.shape, what="depth and intrinsics")
    if residual is not None:
        require_same_shape(depth_for_warp.shape, residual.shape, what="depth and residual flow")
    height, width = intr.shape
    depth = depth_for_warp.plane(0).astype(np.float64)
    usable = depth_for_warp.validity & (depth > 0)
    xs, ys = pixel_grid(height, width)
    out_x, out_y, out_z, valid = reproject_arrays(xs, ys, np.where(usable, depth, 1.0), intr, pose)
    valid &= usable
    if residual is not None:
        out_x = out_x + residual.u.astype(np.float64)
        out_y = out_y + residual.v.astype(np.float64)
        valid &= residual.validity

    with np.errstate(invalid="ignore"):
        in_view = valid & (out_x >= 0) & (out_x <= width - 1) & (out_y >= 0) & (out_y <= height - 1)

    # nearest source cell of every splat, with the nearest depth kept per cell
    cell_x = np.floor(np.where(in_view, out_x, 0.0) + 0.5).astype(np.intp)
    cell_y = np.floor(np.where(in_view, out_y, 0.0) + 0.5).astype(np.intp)
    zbuffer = np.full((height, width), np.inf)
    np.minimum.at(zbuffer, (cell_y[in_view], cell_x[in_view]), out_z[in_view])

    hidden = np.zeros((height, width), dtype=bool)
    hidden[in_view] = out_z[in_view] > zbuffer[cell_y[in_view], cell_x[in_view]] * (1.0 + tolerance)
    return ~in_view | hidden

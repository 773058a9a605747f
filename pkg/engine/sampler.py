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

Bilinear sampling, flow warping and corner-aligned upsampling.

Coordinates outside ``[0, W-1] x [0, H-1]`` sample to 0 with validity false
(zero padding with mask, never border clamping). Interpolation is carried
out in float64 and cast back to the source grid's dtype.
"""

import numpy as np

from engine.grids import ImageGrid, SampleCoords, pixel_grid, require_same_shape
from utils.errors import InvalidTarget


def _corners(src, coords):
    """
    Shared set-up for value and derivative evaluation.

    The cell is chosen as floor(x) clamped to [0, W-2], so exact integer
    coordinates use the right-hand cell and the last column/row uses the
    cell to its left (weight 1 on its right corner).
    """
    height, width = src.shape
    x = coords.x
    y = coords.y
    inside = (np.isfinite(x) & np.isfinite(y)
              & (x >= 0) & (x <= width - 1) & (y >= 0) & (y <= height - 1))
    xs = np.where(inside, x, 0.0)
    ys = np.where(inside, y, 0.0)

    ix_nw = np.clip(np.floor(xs), 0, max(width - 2, 0)).astype(np.intp)
    iy_nw = np.clip(np.floor(ys), 0, max(height - 2, 0)).astype(np.intp)
    ix_se = np.minimum(ix_nw + 1, width - 1)
    iy_se = np.minimum(iy_nw + 1, height - 1)
    dx = xs - ix_nw
    dy = ys - iy_nw

    data = src.data.astype(np.float64)
    val_nw = data[iy_nw, ix_nw]
    val_ne = data[iy_nw, ix_se]
    val_sw = data[iy_se, ix_nw]
    val_se = data[iy_se, ix_se]

    nw = (1.0 - dx) * (1.0 - dy)
    ne = dx * (1.0 - dy)
    sw = (1.0 - dx) * dy
    se = dx * dy

    # a corner with positive weight must itself be valid
    valid = inside.copy()
    for weight, iy, ix in ((nw, iy_nw, ix_nw), (ne, iy_nw, ix_se),
                           (sw, iy_se, ix_nw), (se, iy_se, ix_se)):
        valid &= ~((weight > 0) & ~src.validity[iy, ix])

    return {
        "inside": inside, "valid": valid, "dx": dx, "dy": dy,
        "weights": (nw, ne, sw, se),
        "values": (val_nw, val_ne, val_sw, val_se),
    }


def bilinear_sample(src, coords):
    """
    Sample ``src`` at continuous coordinates with 4-neighbour bilinear
    interpolation.

    Parameters
    ----------
    src : ImageGrid
    coords : SampleCoords
        one (x, y) per output pixel; the output takes the coordinate shape.

    Returns
    -------
    ImageGrid
        out-of-bounds samples are 0 and invalid.
    """
    parts = _corners(src, coords)
    nw, ne, sw, se = parts["weights"]
    val_nw, val_ne, val_sw, val_se = parts["values"]
    out = (nw[..., None] * val_nw + ne[..., None] * val_ne
           + sw[..., None] * val_sw + se[..., None] * val_se)
    out = np.where(parts["inside"][..., None], out, 0.0)
    return ImageGrid(out.astype(src.data.dtype), parts["valid"])


def bilinear_sample_grad(src, coords):
    """
    Analytic derivatives of ``bilinear_sample`` with respect to the sampling
    coordinates.

    Returns
    -------
    (d_dx, d_dy) : tuple of numpy.ndarray
        float64 arrays of shape H x W x C; zero where the coordinate is out of
        bounds.
    """
    parts = _corners(src, coords)
    dx = parts["dx"][..., None]
    dy = parts["dy"][..., None]
    val_nw, val_ne, val_sw, val_se = parts["values"]
    d_dx = (1.0 - dy) * (val_ne - val_nw) + dy * (val_se - val_sw)
    d_dy = (1.0 - dx) * (val_sw - val_nw) + dx * (val_se - val_ne)
    inside = parts["inside"][..., None]
    return np.where(inside, d_dx, 0.0), np.where(inside, d_dy, 0.0)


def identity_coords(height, width):
    xs, ys = pixel_grid(height, width)
    return SampleCoords(xs, ys)


def warp(src, flow):
    """
    Backward-warp ``src`` by a flow field: output(p) = src(p + flow(p)).

    Pixels where the flow is invalid are invalid in the output.
    """
    require_same_shape(src.shape, flow.shape, what="image and flow")
    xs, ys = pixel_grid(*src.shape)
    coords = SampleCoords(xs + flow.u.astype(np.float64), ys + flow.v.astype(np.float64))
    sampled = bilinear_sample(src, coords)
    return sampled.with_validity(sampled.validity & flow.validity)


def upsample(src, target_h, target_w):
    """
    Corner-aligned bilinear upsampling: the first and last pixel centres of
    the target coincide with those of the source.

    Raises
    ------
    InvalidTarget
        if the target is smaller than the source in either dimension.
    """
    height, width = src.shape
    if target_h < height or target_w < width:
        raise InvalidTarget("cannot upsample {}x{} to {}x{}".format(
            height, width, target_h, target_w))
    ys, xs = np.meshgrid(np.arange(target_h, dtype=np.float64),
                         np.arange(target_w, dtype=np.float64), indexing="ij")
    if target_w > 1:
        xs = xs * (width - 1) / (target_w - 1)
    if target_h > 1:
        ys = ys * (height - 1) / (target_h - 1)
    return bilinear_sample(src, SampleCoords(xs, ys))

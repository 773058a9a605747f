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

Grid containers shared by every engine module.

Pixel convention: pixel centres sit at integer coordinates, the origin is
the centre of the top-left pixel, x grows to the right and y downwards.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from utils.errors import ShapeMismatch


def _as_float(data):
    data = np.asarray(data)
    if not np.issubdtype(data.dtype, np.floating):
        data = data.astype(np.float32)
    return data


@dataclass(frozen=True)
class ImageGrid:
    """
    H x W x C grid of scalars with a per-pixel validity mask.

    Images, feature maps, depth maps and disparities all use this container.
    A 2-D array is promoted to a single channel.

    Attributes
    ----------
    data : numpy.ndarray
        H x W x C floating grid (dtype kept as supplied; integers become
        float32).
    validity : numpy.ndarray
        H x W boolean mask.
    """
    data: np.ndarray
    validity: np.ndarray

    def __post_init__(self):
        data = _as_float(self.data)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or min(data.shape) < 1:
            raise ShapeMismatch("ImageGrid needs H x W x C data, got {}".format(data.shape))
        validity = np.asarray(self.validity, dtype=bool)
        if validity.shape != data.shape[:2]:
            raise ShapeMismatch("validity {} does not match data {}".format(
                validity.shape, data.shape[:2]))
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "validity", validity)

    @classmethod
    def from_array(cls, data, validity=None):
        """
        Wrap an array; validity defaults to "finite everywhere".
        """
        data = _as_float(data)
        if validity is None:
            finite = np.isfinite(data)
            validity = finite if finite.ndim == 2 else finite.all(axis=2)
        return cls(data, validity)

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @property
    def shape(self) -> Tuple[int, int]:
        """(H, W)"""
        return self.data.shape[:2]

    def plane(self, channel=0):
        """
        One channel as an H x W array.
        """
        return self.data[:, :, channel]

    def with_validity(self, validity):
        return ImageGrid(self.data, np.asarray(validity, dtype=bool))

    def flip_horizontal(self):
        return ImageGrid(self.data[:, ::-1], self.validity[:, ::-1])


@dataclass(frozen=True)
class FlowField:
    """
    Per-pixel 2-D displacement in pixels (camera, residual or total flow).

    ``(u, v)`` at pixel ``p`` points from ``p`` in the target frame to the
    corresponding location in the source frame.
    """
    u: np.ndarray
    v: np.ndarray
    validity: Optional[np.ndarray] = None

    def __post_init__(self):
        u = _as_float(self.u)
        v = _as_float(self.v)
        if u.ndim != 2 or u.shape != v.shape:
            raise ShapeMismatch("flow components must be equal H x W grids, got {} and {}".format(
                u.shape, v.shape))
        validity = self.validity
        if validity is None:
            validity = np.isfinite(u) & np.isfinite(v)
        validity = np.asarray(validity, dtype=bool)
        if validity.shape != u.shape:
            raise ShapeMismatch("flow validity {} does not match {}".format(validity.shape, u.shape))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "validity", validity)

    @classmethod
    def zeros(cls, height, width, dtype=np.float32):
        return cls(np.zeros((height, width), dtype), np.zeros((height, width), dtype),
                   np.ones((height, width), bool))

    @property
    def shape(self):
        return self.u.shape

    def magnitude(self):
        return np.hypot(self.u.astype(np.float64), self.v.astype(np.float64))


@dataclass(frozen=True)
class SampleCoords:
    """
    Continuous source coordinates, one (x, y) pair per output pixel.
    """
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.float64)
        if x.ndim != 2 or x.shape != y.shape:
            raise ShapeMismatch("coordinate grids must be equal H x W, got {} and {}".format(
                x.shape, y.shape))
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def shape(self):
        return self.x.shape


def pixel_grid(height, width):
    """
    Integer pixel-centre coordinates as float64 (xs, ys) arrays of shape H x W.
    """
    ys, xs = np.meshgrid(np.arange(height, dtype=np.float64),
                         np.arange(width, dtype=np.float64), indexing="ij")
    return xs, ys


def require_same_shape(*shapes, what="grids"):
    """
    Raise ShapeMismatch unless every shape is identical.
    """
    first = tuple(shapes[0])
    for other in shapes[1:]:
        if tuple(other) != first:
            raise ShapeMismatch("{} differ in shape: {} vs {}".format(what, first, tuple(other)))

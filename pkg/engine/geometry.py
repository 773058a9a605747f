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

Pinhole geometry: projection, rigid transforms, reprojection and the
camera / residual / scene-flow decomposition.

A pose maps points from one camera frame into another: ``X' = R X + T``.
For view synthesis the pose takes target-camera coordinates into the source
camera. For the scene-flow relations, ``pose0`` and ``pose1`` are the
world-to-camera extrinsics of the two frames.

All arithmetic is float64.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from engine.grids import FlowField, ImageGrid, pixel_grid
from utils.errors import InvalidParameter, NonPositiveDepth, ShapeMismatch


# -----------------------------------------------------------------------------
# Camera model
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class CameraIntrinsics:
    """
    Pinhole intrinsics K plus the image size they apply to.
    """
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        values = (self.fx, self.fy, self.cx, self.cy, self.width, self.height)
        if not all(np.isfinite(v) for v in values):
            raise InvalidParameter("intrinsics must be finite: {}".format(values))
        if self.fx <= 0 or self.fy <= 0:
            raise InvalidParameter("focal lengths must be positive: fx={} fy={}".format(
                self.fx, self.fy))
        if int(self.width) != self.width or int(self.height) != self.height:
            raise InvalidParameter("image size must be integral")
        if self.width < 2 or self.height < 2:
            raise InvalidParameter("image must be at least 2 x 2, got {} x {}".format(
                self.width, self.height))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    @property
    def matrix(self):
        """3 x 3 K"""
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])

    @property
    def shape(self):
        return (self.height, self.width)

    def scaled(self, sx, sy=None):
        """
        Intrinsics for a grid resampled by (sx, sy), e.g. 0.25 for the
        quarter-resolution feature maps. Pixel centres stay at integers, so
        the principal point maps as c' = (c + 0.5) * s - 0.5.
        """
        if sy is None:
            sy = sx
        return CameraIntrinsics(
            fx=self.fx * sx, fy=self.fy * sy,
            cx=(self.cx + 0.5) * sx - 0.5, cy=(self.cy + 0.5) * sy - 0.5,
            width=int(round(self.width * sx)), height=int(round(self.height * sy)))

    @classmethod
    def from_dict(cls, record):
        try:
            return cls(float(record["fx"]), float(record["fy"]),
                       float(record["cx"]), float(record["cy"]),
                       record["width"], record["height"])
        except KeyError as err:
            raise InvalidParameter("intrinsics record lacks {}".format(err)) from err

    def to_dict(self):
        return {"fx": self.fx, "fy": self.fy, "cx": self.cx, "cy": self.cy,
                "width": self.width, "height": self.height}


@dataclass(frozen=True)
class PoseSE3:
    """
    Rigid transform [R|T]; translation in metres.
    """
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rotation = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        translation = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not (np.isfinite(rotation).all() and np.isfinite(translation).all()):
            raise InvalidParameter("pose must be finite")
        if np.abs(rotation.T @ rotation - np.eye(3)).max() > 1e-9:
            raise InvalidParameter("rotation is not orthonormal")
        if abs(np.linalg.det(rotation) - 1.0) > 1e-9:
            raise InvalidParameter("rotation determinant must be +1")
        rotation.setflags(write=False)
        translation.setflags(write=False)
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls):
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_translation(cls, tx, ty, tz):
        return cls(np.eye(3), np.array([tx, ty, tz], dtype=np.float64))

    @classmethod
    def from_axis_angle(cls, axis, angle, translation=(0.0, 0.0, 0.0)):
        """
        Rodrigues rotation about a unit axis (radians).
        """
        axis = np.asarray(axis, dtype=np.float64)
        axis = axis / np.linalg.norm(axis)
        skew = np.array([[0.0, -axis[2], axis[1]],
                         [axis[2], 0.0, -axis[0]],
                         [-axis[1], axis[0], 0.0]])
        rotation = np.eye(3) + np.sin(angle) * skew + (1.0 - np.cos(angle)) * (skew @ skew)
        # re-orthonormalise so the 1e-9 invariants hold exactly enough
        u, _, vt = np.linalg.svd(rotation)
        return cls(u @ vt, translation)

    @classmethod
    def from_dict(cls, record):
        try:
            rotation = np.asarray(record["rotation"], dtype=np.float64)
            translation = np.asarray(record["translation"], dtype=np.float64)
        except KeyError as err:
            raise InvalidParameter("pose record lacks {}".format(err)) from err
        if rotation.size != 9 or translation.size != 3:
            raise InvalidParameter("pose needs 9 rotation and 3 translation numbers")
        return cls(rotation.reshape(3, 3), translation)

    def to_dict(self):
        return {"rotation": [float(v) for v in self.rotation.ravel()],
                "translation": [float(v) for v in self.translation]}

    def apply(self, points):
        """
        Transform points given as (..., 3).
        """
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def inverse(self):
        rt = self.rotation.T
        return PoseSE3(rt, -(rt @ self.translation))

    def compose(self, first):
        """
        ``self ∘ first``: apply ``first``, then ``self``.
        """
        return PoseSE3(self.rotation @ first.rotation,
                       self.rotation @ first.translation + self.translation)


class Reprojection(NamedTuple):
    """
    Result of reproject: pixel (x, y), depth in the new camera, and whether
    the transformed point lies in front of it. Invalid results carry NaN.
    """
    pixel: np.ndarray
    depth: float
    valid: bool


# -----------------------------------------------------------------------------
# Point operations
# -----------------------------------------------------------------------------

def project(point, intr):
    """
    Project a camera-frame point; returns (pixel, depth).

    Raises
    ------
    NonPositiveDepth
        if the point is not in front of the camera.
    """
    x, y, z = (float(c) for c in point)
    if not z > 0:
        raise NonPositiveDepth("cannot project point with z={}".format(z))
    return np.array([intr.fx * x / z + intr.cx, intr.fy * y / z + intr.cy]), z


def backproject(pixel, depth, intr):
    """
    Lift a pixel at a given depth to a camera-frame point (K^-1 p D).
    """
    depth = float(depth)
    if not depth > 0:
        raise NonPositiveDepth("cannot back-project at depth {}".format(depth))
    u, v = (float(c) for c in pixel)
    return np.array([(u - intr.cx) / intr.fx * depth, (v - intr.cy) / intr.fy * depth, depth])


def reproject_arrays(xs, ys, depth, intr, pose):
    """
    Vectorised K[R|T] D K^-1 p.

    The new pixel is computed as ``p + f * (q_xy / q_z - r_xy)`` with
    ``r = K^-1 p`` and ``q = R r + T / d``; this is the same quantity as
    ``K (R X + T)`` projected, but it returns ``p`` exactly under the identity
    pose, which keeps sweeps bitwise stable.

    Parameters
    ----------
    xs, ys : numpy.ndarray
        pixel coordinates (any equal shapes).
    depth : numpy.ndarray or float
        strictly positive depths (broadcast against xs).

    Returns
    -------
    (x', y', depth', valid) : tuple of numpy.ndarray
        invalid entries (non-positive input or output depth) are NaN.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    depth = np.broadcast_to(np.asarray(depth, dtype=np.float64), xs.shape)
    rx = (xs - intr.cx) / intr.fx
    ry = (ys - intr.cy) / intr.fy
    rot = pose.rotation
    with np.errstate(divide="ignore", invalid="ignore"):
        tx, ty, tz = (pose.translation[i] / depth for i in range(3))
        qx = rot[0, 0] * rx + rot[0, 1] * ry + rot[0, 2] + tx
        qy = rot[1, 0] * rx + rot[1, 1] * ry + rot[1, 2] + ty
        qz = rot[2, 0] * rx + rot[2, 1] * ry + rot[2, 2] + tz
        new_depth = depth * qz
        valid = (depth > 0) & (new_depth > 0) & np.isfinite(new_depth)
        out_x = xs + intr.fx * (qx / qz - rx)
        out_y = ys + intr.fy * (qy / qz - ry)
    out_x = np.where(valid, out_x, np.nan)
    out_y = np.where(valid, out_y, np.nan)
    new_depth = np.where(valid, new_depth, np.nan)
    return out_x, out_y, new_depth, valid


def reproject(pixel, depth, intr, pose):
    """
    Map a target pixel seen at ``depth`` into the camera reached by ``pose``.

    A point that lands behind the new camera is reported with
    ``valid=False`` rather than raising.

    Raises
    ------
    NonPositiveDepth
        if the input depth is not positive.
    """
    if not float(depth) > 0:
        raise NonPositiveDepth("cannot reproject at depth {}".format(depth))
    x, y, z, valid = reproject_arrays(np.array([pixel[0]]), np.array([pixel[1]]),
                                      float(depth), intr, pose)
    return Reprojection(np.array([x[0], y[0]]), float(z[0]), bool(valid[0]))


# -----------------------------------------------------------------------------
# Flow decomposition
# -----------------------------------------------------------------------------

def camera_flow(depth_map, intr, pose):
    """
    Rigid flow induced by camera motion over a static scene:
    ``u_cam(p) = reproject(p, D(p)) - p``.

    Pixels with invalid or non-positive depth, or that end up behind the
    camera, are invalid in the returned field.
    """
    if isinstance(depth_map, ImageGrid):
        depth = depth_map.plane(0)
        depth_valid = depth_map.validity
    else:
        depth = np.asarray(depth_map)
        depth_valid = np.isfinite(depth)
    if depth.shape != intr.shape:
        raise ShapeMismatch("depth map {} does not match intrinsics {}".format(
            depth.shape, intr.shape))
    depth = depth.astype(np.float64)
    usable = depth_valid & (depth > 0)
    xs, ys = pixel_grid(*intr.shape)
    safe_depth = np.where(usable, depth, 1.0)
    out_x, out_y, _, valid = reproject_arrays(xs, ys, safe_depth, intr, pose)
    valid &= usable
    u = np.where(valid, out_x - xs, 0.0)
    v = np.where(valid, out_y - ys, 0.0)
    return FlowField(u, v, valid)


def compose_total_flow(cam, residual):
    """
    Total flow = camera flow + residual flow; validity is the AND.
    """
    if cam.shape != residual.shape:
        raise ShapeMismatch("flow fields differ in shape: {} vs {}".format(
            cam.shape, residual.shape))
    return FlowField(cam.u + residual.u, cam.v + residual.v,
                     cam.validity & residual.validity)


def scene_flow_from_depths(pixel, opt_flow, d0, d1, pose0, pose1, intr):  # pylint: disable=too-many-arguments
    """
    Recover the 3-D motion of the point seen at ``pixel`` in frame 0 from its
    optical flow and the depths observed in both frames::

        X_sen = T1^-1 P^-1(u + u_opt, D1) - T0^-1 P^-1(u, D0)

    Returns the world-frame displacement in metres.
    """
    if not (float(d0) > 0 and float(d1) > 0):
        raise NonPositiveDepth("depths must be positive: d0={} d1={}".format(d0, d1))
    pixel = np.asarray(pixel, dtype=np.float64)
    moved = pixel + np.asarray(opt_flow, dtype=np.float64)
    x0 = pose0.inverse().apply(backproject(pixel, d0, intr))
    x1 = pose1.inverse().apply(backproject(moved, d1, intr))
    return x1 - x0


def projected_optical_flow(point, scene_flow, pose0, pose1, intr):
    """
    Optical flow of a world point moving by ``scene_flow`` while the camera
    moves from ``pose0`` to ``pose1``::

        u_opt = P(T1 (X0 + X_sen)) - P(T0 X0)
    """
    point = np.asarray(point, dtype=np.float64)
    moved = point + np.asarray(scene_flow, dtype=np.float64)
    end, _ = project(pose1.apply(moved), intr)
    start, _ = project(pose0.apply(point), intr)
    return end - start

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

Procedural two-frame scenes with exact ground truth.

The world frame is the target camera. A scene is a textured background
plane plus fronto-parallel textured rectangles that translate with a
constant velocity (metres per frame). The source frame precedes the target
frame, so at source time an object sits at ``X - velocity``; the camera
motion maps target-camera coordinates into the source camera.

Both frames are ray cast with the same code path and z-buffered; flows come
from the known geometry, not from matching.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import ndimage

from engine.geometry import CameraIntrinsics, PoseSE3
from engine.grids import FlowField, ImageGrid, pixel_grid
from utils import logger
from utils.errors import DegenerateScene, InvalidParameter

N_SINUSOIDS = 8
WAVELENGTH_RANGE = (16.0, 48.0)
TEXTURE_AMPLITUDE = 0.04
TEXTURE_BASE = 0.5

BACKGROUND_ID = 0
NO_SURFACE = -1


# -----------------------------------------------------------------------------
# Scene description
# -----------------------------------------------------------------------------

@dataclass(frozen=True)
class PlaneSurface:
    """
    Background plane through ``(0, 0, depth)`` with unit normal ``normal``
    (pointing back at the camera; ``(0, 0, 1)`` is fronto-parallel).
    """
    depth: float
    normal: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    texture_seed: int = 0

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=np.float64)
        norm = np.linalg.norm(normal)
        if not (self.depth > 0 and norm > 0 and normal[2] > 0):
            raise DegenerateScene("background needs positive depth and a normal facing the camera")
        object.__setattr__(self, "normal", tuple(float(c) for c in normal / norm))


@dataclass(frozen=True)
class RectObject:
    """
    Fronto-parallel rectangle centred on pixel ``center_px`` of the target
    frame at ``depth``; ``size`` is (width, height) in metres.
    """
    center_px: Tuple[float, float]
    depth: float
    size: Tuple[float, float]
    velocity: Tuple[float, float, float] = (0.0, 0.0, 0.0)
    texture_seed: int = 0

    def center(self, intr):
        u, v = self.center_px
        return np.array([(u - intr.cx) / intr.fx * self.depth,
                         (v - intr.cy) / intr.fy * self.depth, self.depth])


@dataclass(frozen=True)
class SceneSpec:
    """
    Two-frame scene: intrinsics, camera motion (target to source), a
    background plane, moving rectangles and image noise.
    """
    intrinsics: CameraIntrinsics
    background: PlaneSurface
    objects: Tuple[RectObject, ...] = field(default_factory=tuple)
    camera_motion: PoseSE3 = field(default_factory=PoseSE3.identity)
    noise_sigma: float = 0.0

    def __post_init__(self):
        if not self.noise_sigma >= 0:
            raise InvalidParameter("noise_sigma must be non-negative")
        object.__setattr__(self, "objects", tuple(self.objects))

    @classmethod
    def from_dict(cls, record):
        """
        Build a scene from its JSON form::

            {"intrinsics": {...}, "camera_motion": {"rotation": [...], "translation": [...]},
             "background": {"depth": 4.0, "normal": [0, 0, 1], "texture_seed": 0},
             "objects": [{"center_px": [64, 48], "depth": 3.0, "size": [0.8, 0.6],
                          "velocity": [0, 0.1, 0], "texture_seed": 1}],
             "noise_sigma": 0.0}
        """
        try:
            intr = CameraIntrinsics.from_dict(record["intrinsics"])
            background = PlaneSurface(**record["background"])
            objects = []
            for index, obj in enumerate(record.get("objects", [])):
                obj = dict(obj)
                obj.setdefault("texture_seed", index + 1)
                objects.append(RectObject(
                    center_px=tuple(obj["center_px"]), depth=float(obj["depth"]),
                    size=tuple(obj["size"]), velocity=tuple(obj.get("velocity", (0, 0, 0))),
                    texture_seed=int(obj["texture_seed"])))
        except (KeyError, TypeError) as err:
            raise InvalidParameter("malformed scene description: {}".format(err)) from err
        motion = record.get("camera_motion")
        pose = PoseSE3.from_dict(motion) if motion else PoseSE3.identity()
        return cls(intr, background, tuple(objects), pose, float(record.get("noise_sigma", 0.0)))

    def to_dict(self):
        return {
            "intrinsics": self.intrinsics.to_dict(),
            "camera_motion": self.camera_motion.to_dict(),
            "background": {"depth": self.background.depth, "normal": list(self.background.normal),
                           "texture_seed": self.background.texture_seed},
            "objects": [{"center_px": list(obj.center_px), "depth": obj.depth,
                         "size": list(obj.size), "velocity": list(obj.velocity),
                         "texture_seed": obj.texture_seed} for obj in self.objects],
            "noise_sigma": self.noise_sigma,
        }


@dataclass(frozen=True)
class RenderedPair:  # pylint: disable=too-many-instance-attributes
    """
    Target and source frames with their ground truth.

    Attributes
    ----------
    image_t, image_src : ImageGrid
        single-channel intensities in [0, 1].
    depth_t : ImageGrid
        target-frame depth.
    camera_flow, residual_flow, total_flow : FlowField
        rigid flow, object motion on top of it (exactly 0 off objects) and
        their sum.
    object_mask : numpy.ndarray
        target pixels that see a moving rectangle.
    occlusion_mask : numpy.ndarray
        target pixels that leave the source view or are hidden in it.
    boundary_mask : numpy.ndarray
        pixels of mixed coverage, dilated by one pixel.
    """
    image_t: ImageGrid
    image_src: ImageGrid
    depth_t: ImageGrid
    pose: PoseSE3
    intrinsics: CameraIntrinsics
    camera_flow: FlowField
    residual_flow: FlowField
    total_flow: FlowField
    object_mask: np.ndarray
    occlusion_mask: np.ndarray
    boundary_mask: np.ndarray


# -----------------------------------------------------------------------------
# Textures
# -----------------------------------------------------------------------------

class _Texture:  # pylint: disable=too-few-public-methods
    """
    Band-limited sum of seeded sinusoids in pixel-like surface units.
    """

    def __init__(self, rng):
        self.wavelengths = rng.uniform(*WAVELENGTH_RANGE, size=N_SINUSOIDS)
        self.angles = rng.uniform(0.0, np.pi, size=N_SINUSOIDS)
        self.phases = rng.uniform(0.0, 2.0 * np.pi, size=N_SINUSOIDS)

    def __call__(self, a, b):
        value = np.full(np.shape(a), TEXTURE_BASE)
        for wavelength, angle, phase in zip(self.wavelengths, self.angles, self.phases):
            arg = (np.cos(angle) * a + np.sin(angle) * b) * (2.0 * np.pi / wavelength) + phase
            value += TEXTURE_AMPLITUDE * np.sin(arg)
        return value


# -----------------------------------------------------------------------------
# Ray casting
# -----------------------------------------------------------------------------

class _Scene:
    """
    Scene geometry with textures drawn for one seed.
    """

    def __init__(self, spec, seed):
        self.spec = spec
        self.intr = spec.intrinsics
        self.bg_normal = np.asarray(spec.background.normal)
        self.bg_offset = self.bg_normal[2] * spec.background.depth
        self.bg_texture = _Texture(np.random.default_rng([seed, spec.background.texture_seed]))
        self.centers = [obj.center(self.intr) for obj in spec.objects]
        self.velocities = [np.asarray(obj.velocity, dtype=np.float64) for obj in spec.objects]
        self.textures = [_Texture(np.random.default_rng([seed, obj.texture_seed]))
                         for obj in spec.objects]

    def cast(self, pose, time, xs, ys):  # pylint: disable=too-many-locals
        """
        Ray cast the camera reached by ``pose`` at ``time`` (0 target,
        -1 source) through pixel coordinates ``xs, ys``.

        Returns
        -------
        (depth, surface_id, points, intensity)
        """
        intr = self.intr
        dirs_cam = np.stack([(xs - intr.cx) / intr.fx, (ys - intr.cy) / intr.fy,
                             np.ones_like(xs)], axis=-1)
        origin = -(pose.rotation.T @ pose.translation)
        dirs = dirs_cam @ pose.rotation

        with np.errstate(divide="ignore", invalid="ignore"):
            facing = dirs @ self.bg_normal
            depth = (self.bg_offset - origin @ self.bg_normal) / facing
        if not (np.isfinite(depth).all() and (facing > 0).all() and (depth > 0).all()):
            raise DegenerateScene("background plane is not in front of the camera everywhere")
        surface = np.full(xs.shape, BACKGROUND_ID)

        for index, obj in enumerate(self.spec.objects):
            center = self.centers[index] + time * self.velocities[index]
            if not center[2] - origin[2] > 0:
                raise DegenerateScene("object {} is not in front of the camera".format(index))
            with np.errstate(divide="ignore", invalid="ignore"):
                t_hit = (center[2] - origin[2]) / dirs[..., 2]
                local = origin + t_hit[..., None] * dirs - center
                inside = ((np.abs(local[..., 0]) <= obj.size[0] / 2.0)
                          & (np.abs(local[..., 1]) <= obj.size[1] / 2.0))
            nearer = inside & (t_hit > 0) & (t_hit < depth)
            depth = np.where(nearer, t_hit, depth)
            surface = np.where(nearer, index + 1, surface)

        points = origin + depth[..., None] * dirs
        intensity = self._shade(points, surface, time)
        return depth, surface, points, intensity

    def _shade(self, points, surface, time):
        intensity = np.zeros(surface.shape)
        scale = self.intr.fx / self.spec.background.depth
        on_bg = surface == BACKGROUND_ID
        intensity[on_bg] = self.bg_texture(points[on_bg, 0] * scale, points[on_bg, 1] * scale)
        for index, obj in enumerate(self.spec.objects):
            on_obj = surface == index + 1
            if not on_obj.any():
                continue
            local = points[on_obj] - (self.centers[index] + time * self.velocities[index])
            obj_scale = self.intr.fx / obj.depth
            intensity[on_obj] = self.textures[index](local[:, 0] * obj_scale, local[:, 1] * obj_scale)
        return intensity

    def velocity_map(self, surface):
        velocity = np.zeros(surface.shape + (3,))
        for index, vel in enumerate(self.velocities):
            velocity[surface == index + 1] = vel
        return velocity


def _check_objects_in_view(spec):
    intr = spec.intrinsics
    for index, obj in enumerate(spec.objects):
        if not obj.depth > 0 or min(obj.size) <= 0:
            raise DegenerateScene("object {} needs positive depth and size".format(index))
        half_w = intr.fx * obj.size[0] / (2.0 * obj.depth)
        half_h = intr.fy * obj.size[1] / (2.0 * obj.depth)
        u, v = obj.center_px
        if (u - half_w < 0 or u + half_w > intr.width - 1
                or v - half_h < 0 or v + half_h > intr.height - 1):
            raise DegenerateScene("object {} leaves the target view".format(index))


def _project(points, intr):
    with np.errstate(divide="ignore", invalid="ignore"):
        x = intr.fx * points[..., 0] / points[..., 2] + intr.cx
        y = intr.fy * points[..., 1] / points[..., 2] + intr.cy
    return x, y, points[..., 2] > 0


def _add_noise(intensity, sigma, rng):
    if sigma == 0:
        return intensity
    return np.clip(intensity + rng.normal(0.0, sigma, intensity.shape), 0.0, 1.0)


def render_pair(spec, seed=0):  # pylint: disable=too-many-locals
    """
    Render the target and source frames of a scene and its ground truth.

    Parameters
    ----------
    spec : SceneSpec
    seed : int
        drives textures and noise; identical (spec, seed) give bitwise
        identical output.

    Returns
    -------
    RenderedPair

    Raises
    ------
    DegenerateScene
        if a surface is at non-positive depth anywhere in view, or an object
        leaves the target view.
    """
    _check_objects_in_view(spec)
    intr = spec.intrinsics
    pose = spec.camera_motion
    scene = _Scene(spec, seed)
    xs, ys = pixel_grid(*intr.shape)

    logger.info("rendering {}x{} scene with {} objects (seed {})",
                intr.width, intr.height, len(spec.objects), seed)
    depth_t, surface_t, points_t, intensity_t = scene.cast(PoseSE3.identity(), 0.0, xs, ys)
    _, _, _, intensity_src = scene.cast(pose, -1.0, xs, ys)

    # analytic flows
    velocity = scene.velocity_map(surface_t)
    moving = surface_t > BACKGROUND_ID
    src_points = pose.apply(points_t - velocity)
    rigid_points = pose.apply(points_t)
    total_x, total_y, total_ok = _project(src_points, intr)
    rigid_x, rigid_y, rigid_ok = _project(rigid_points, intr)
    valid = total_ok & rigid_ok
    rigid_u = np.where(valid, rigid_x - xs, 0.0)
    rigid_v = np.where(valid, rigid_y - ys, 0.0)
    residual_u = np.where(moving & valid, (total_x - xs) - rigid_u, 0.0)
    residual_v = np.where(moving & valid, (total_y - ys) - rigid_v, 0.0)
    cam = FlowField(rigid_u, rigid_v, valid)
    residual = FlowField(residual_u, residual_v, valid)
    total = FlowField(rigid_u + residual_u, rigid_v + residual_v, valid)

    # occlusion: out of the source view, or hidden behind another surface there
    with np.errstate(invalid="ignore"):
        in_view = (valid & (total_x >= 0) & (total_x <= intr.width - 1)
                   & (total_y >= 0) & (total_y <= intr.height - 1))
    hidden = np.zeros(intr.shape, dtype=bool)
    if in_view.any():
        hit_depth, hit_surface, _, _ = scene.cast(
            pose, -1.0, np.where(in_view, total_x, intr.cx), np.where(in_view, total_y, intr.cy))
        hidden = in_view & (hit_surface != surface_t) & (hit_depth < src_points[..., 2])
    occlusion = ~in_view | hidden

    # mixed coverage from the surface ids at the four pixel corners
    corner_x, corner_y = pixel_grid(intr.height + 1, intr.width + 1)
    _, corner_surface, _, _ = scene.cast(PoseSE3.identity(), 0.0, corner_x - 0.5, corner_y - 0.5)
    mixed = np.zeros(intr.shape, dtype=bool)
    for dy in (0, 1):
        for dx in (0, 1):
            mixed |= corner_surface[dy:dy + intr.height, dx:dx + intr.width] != surface_t
    boundary = ndimage.binary_dilation(mixed, structure=np.ones((3, 3), dtype=bool))

    noise_rng = np.random.default_rng([seed, 7919])
    image_t = _add_noise(intensity_t, spec.noise_sigma, noise_rng).astype(np.float32)
    image_src = _add_noise(intensity_src, spec.noise_sigma, noise_rng).astype(np.float32)
    all_valid = np.ones(intr.shape, dtype=bool)
    logger.debug("rendered pair: {} object pixels, {} occluded pixels",
                 int(moving.sum()), int(occlusion.sum()))
    return RenderedPair(
        image_t=ImageGrid(image_t, all_valid),
        image_src=ImageGrid(image_src, all_valid),
        depth_t=ImageGrid(depth_t.astype(np.float32), all_valid),
        pose=pose,
        intrinsics=intr,
        camera_flow=cam,
        residual_flow=residual,
        total_flow=total,
        object_mask=moving,
        occlusion_mask=occlusion,
        boundary_mask=boundary,
    )


def perturb_flow(flow, sigma, seed=0):
    """
    Add seeded zero-mean Gaussian noise to a flow field; sigma 0 returns the
    field unchanged.
    """
    if not sigma >= 0:
        raise InvalidParameter("sigma must be non-negative, got {}".format(sigma))
    if sigma == 0:
        return flow
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, (2,) + flow.shape)
    return FlowField((flow.u + noise[0]).astype(flow.u.dtype),
                     (flow.v + noise[1]).astype(flow.v.dtype), flow.validity)

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

Readers and writers for every file the engine exchanges:

- ``.flo``  Middlebury optical flow
- ``.pfm``  single-channel float maps (depth)
- ``.dscv`` cost volumes
- ``.dsfw`` fusion weights
- ``.png``  images (16-bit grayscale), masks (8-bit) and flow visualisations
- ``.json`` intrinsics, poses, scene descriptions and reports

All binary formats are little-endian.
"""

import json
import struct

import numpy as np
from PIL import Image

from engine.costvolume import CostVolume, DepthHypothesisSet
from engine.fusion import FusionWeights
from engine.geometry import CameraIntrinsics, PoseSE3
from engine.grids import FlowField, ImageGrid
from utils.errors import (BadHeader, BadMagic, DimensionOverflow, InvalidParameter,
                          InvalidRange, ShapeMismatch, TruncatedFile, VersionMismatch)

FLO_MAGIC = 202021.25
FLO_UNKNOWN = 1e10
FLO_MAX_DIM = 99999

DSCV_MAGIC = b"DSCV"
DSCV_VERSION = 1
DSFW_MAGIC = b"DSFW"
DSFW_VERSION = 1


def _read_bytes(path):
    with open(path, "rb") as handle:
        return handle.read()


def _payload(buffer, offset, dtype, count, path):
    size = np.dtype(dtype).itemsize * count
    if len(buffer) < offset + size:
        raise TruncatedFile("{}: expected {} bytes of payload at offset {}, found {}".format(
            path, size, offset, max(len(buffer) - offset, 0)))
    return np.frombuffer(buffer, dtype=dtype, count=count, offset=offset), offset + size


# -----------------------------------------------------------------------------
# Middlebury .flo
# -----------------------------------------------------------------------------

def write_flo(path, flow):
    """
    Write a flow field; invalid pixels carry the unknown-flow value 1e10.
    """
    height, width = flow.shape
    if not (1 <= width <= FLO_MAX_DIM and 1 <= height <= FLO_MAX_DIM):
        raise DimensionOverflow("flow of {}x{} cannot be stored as .flo".format(width, height))
    data = np.empty((height, width, 2), dtype="<f4")
    data[..., 0] = np.where(flow.validity, flow.u, FLO_UNKNOWN)
    data[..., 1] = np.where(flow.validity, flow.v, FLO_UNKNOWN)
    with open(path, "wb") as handle:
        handle.write(np.array([FLO_MAGIC], dtype="<f4").tobytes())
        handle.write(np.array([width, height], dtype="<i4").tobytes())
        handle.write(data.tobytes())


def read_flo(path):
    """
    Read a .flo file; |u| or |v| above 1e9 (or non-finite) marks a pixel
    invalid.

    Raises
    ------
    BadMagic, DimensionOverflow, TruncatedFile
    """
    buffer = _read_bytes(path)
    if len(buffer) < 12:
        raise TruncatedFile("{}: .flo header needs 12 bytes".format(path))
    magic = np.frombuffer(buffer, dtype="<f4", count=1)[0]
    if magic != np.float32(FLO_MAGIC):
        raise BadMagic("{}: .flo sentinel {} is not {}".format(path, magic, FLO_MAGIC))
    width, height = (int(v) for v in np.frombuffer(buffer, dtype="<i4", count=2, offset=4))
    if not (1 <= width <= FLO_MAX_DIM and 1 <= height <= FLO_MAX_DIM):
        raise DimensionOverflow("{}: implausible .flo size {}x{}".format(path, width, height))
    data, _ = _payload(buffer, 12, "<f4", 2 * width * height, path)
    data = data.reshape(height, width, 2).astype(np.float32)
    u = data[..., 0].copy()
    v = data[..., 1].copy()
    with np.errstate(invalid="ignore"):
        valid = np.isfinite(u) & np.isfinite(v) & (np.abs(u) <= 1e9) & (np.abs(v) <= 1e9)
    return FlowField(u, v, valid)


# -----------------------------------------------------------------------------
# PFM
# -----------------------------------------------------------------------------

def write_pfm(path, grid):
    """
    Write the first channel of a grid as a little-endian "Pf" map, rows
    bottom-up; invalid pixels are written as NaN.
    """
    height, width = grid.shape
    data = np.where(grid.validity, grid.plane(0), np.nan).astype("<f4")
    with open(path, "wb") as handle:
        handle.write("Pf\n{} {}\n-1\n".format(width, height).encode("ascii"))
        handle.write(np.flipud(data).tobytes())


def _header_lines(buffer, path):
    lines = []
    offset = 0
    while len(lines) < 3:
        end = buffer.find(b"\n", offset)
        if end < 0:
            raise BadHeader("{}: incomplete PFM header".format(path))
        line = buffer[offset:end].strip()
        offset = end + 1
        if line.startswith(b"#"):
            continue
        lines.append(line)
    return lines, offset


def read_pfm(path):
    """
    Read a PFM map ("Pf" single channel or "PF" colour); big-endian files
    (positive scale) are accepted.

    Raises
    ------
    BadHeader, TruncatedFile
    """
    buffer = _read_bytes(path)
    (tag, dims, scale), offset = _header_lines(buffer, path)
    if tag not in (b"Pf", b"PF"):
        raise BadHeader("{}: unknown PFM tag {!r}".format(path, tag))
    channels = 1 if tag == b"Pf" else 3
    try:
        width, height = (int(v) for v in dims.split())
        scale = float(scale)
    except ValueError as err:
        raise BadHeader("{}: malformed PFM header".format(path)) from err
    if width < 1 or height < 1 or scale == 0:
        raise BadHeader("{}: invalid PFM dimensions or scale".format(path))
    dtype = "<f4" if scale < 0 else ">f4"
    data, _ = _payload(buffer, offset, dtype, width * height * channels, path)
    data = np.flipud(data.reshape(height, width, channels)).astype(np.float32)
    return ImageGrid.from_array(np.ascontiguousarray(data))


# -----------------------------------------------------------------------------
# Cost volumes and fusion weights
# -----------------------------------------------------------------------------

def write_dscv(path, cv):
    """
    Magic "DSCV", u32 version, u32 N H W, N f32 depths, N*H*W f32 costs
    (bin-major), then the validity bitmask packed little-bit-first.
    """
    n_bins, height, width = cv.costs.shape
    with open(path, "wb") as handle:
        handle.write(DSCV_MAGIC)
        handle.write(struct.pack("<IIII", DSCV_VERSION, n_bins, height, width))
        handle.write(cv.hypotheses.values.astype("<f4").tobytes())
        handle.write(cv.costs.astype("<f4").tobytes())
        handle.write(np.packbits(cv.validity.ravel(), bitorder="little").tobytes())


def read_dscv(path):
    """
    Raises
    ------
    BadMagic, VersionMismatch, TruncatedFile
    BadHeader
        if the stored depths do not form a hypothesis set.
    """
    buffer = _read_bytes(path)
    if len(buffer) < 20:
        raise TruncatedFile("{}: DSCV header needs 20 bytes".format(path))
    if buffer[:4] != DSCV_MAGIC:
        raise BadMagic("{}: not a DSCV file".format(path))
    version, n_bins, height, width = struct.unpack_from("<IIII", buffer, 4)
    if version != DSCV_VERSION:
        raise VersionMismatch("{}: DSCV version {} (expected {})".format(path, version, DSCV_VERSION))
    if min(n_bins, height, width) < 1:
        raise BadHeader("{}: empty DSCV volume {}x{}x{}".format(path, n_bins, height, width))
    count = n_bins * height * width
    depths, offset = _payload(buffer, 20, "<f4", n_bins, path)
    costs, offset = _payload(buffer, offset, "<f4", count, path)
    packed, _ = _payload(buffer, offset, np.uint8, (count + 7) // 8, path)
    validity = np.unpackbits(packed, count=count, bitorder="little").astype(bool)
    try:
        hypotheses = DepthHypothesisSet(depths.astype(np.float64))
    except InvalidRange as err:
        raise BadHeader("{}: corrupt DSCV depths: {}".format(path, err)) from err
    return CostVolume(costs.reshape(n_bins, height, width).astype(np.float32), hypotheses,
                      validity.reshape(n_bins, height, width))


def write_dsfw(path, weights):
    """
    Magic "DSFW", u32 version, u32 N, N x 2N f32 weights (row-major), N f32
    biases.
    """
    with open(path, "wb") as handle:
        handle.write(DSFW_MAGIC)
        handle.write(struct.pack("<II", DSFW_VERSION, weights.n_bins))
        handle.write(weights.matrix.astype("<f4").tobytes())
        handle.write(weights.bias.astype("<f4").tobytes())


def read_dsfw(path):
    buffer = _read_bytes(path)
    if len(buffer) < 12:
        raise TruncatedFile("{}: DSFW header needs 12 bytes".format(path))
    if buffer[:4] != DSFW_MAGIC:
        raise BadMagic("{}: not a DSFW file".format(path))
    version, n_bins = struct.unpack_from("<II", buffer, 4)
    if version != DSFW_VERSION:
        raise VersionMismatch("{}: DSFW version {} (expected {})".format(path, version, DSFW_VERSION))
    if n_bins < 1:
        raise BadHeader("{}: DSFW with no bins".format(path))
    matrix, offset = _payload(buffer, 12, "<f4", 2 * n_bins * n_bins, path)
    bias, _ = _payload(buffer, offset, "<f4", n_bins, path)
    try:
        return FusionWeights(matrix.reshape(n_bins, 2 * n_bins), bias)
    except InvalidParameter as err:
        raise BadHeader("{}: corrupt DSFW weights: {}".format(path, err)) from err


# -----------------------------------------------------------------------------
# PNG
# -----------------------------------------------------------------------------

def write_image_png(path, grid):
    """
    First channel, clipped to [0, 1], as 16-bit grayscale.
    """
    data = np.clip(np.nan_to_num(grid.plane(0).astype(np.float64)), 0.0, 1.0)
    Image.fromarray(np.round(data * 65535.0).astype(np.uint16)).save(path)


def read_image_png(path):
    """
    Read a PNG as intensities in [0, 1]; grayscale of any depth or RGB.
    """
    with Image.open(path) as img:
        if img.mode in ("I;16", "I;16B", "I;16L", "I"):
            data = np.asarray(img, dtype=np.float64) / 65535.0
        elif img.mode in ("L", "RGB"):
            data = np.asarray(img, dtype=np.float64) / 255.0
        else:
            data = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return ImageGrid.from_array(data.astype(np.float32))


def read_grid(path):
    """
    Read a float map (``.pfm``) or an image (anything else).
    """
    if str(path).lower().endswith(".pfm"):
        return read_pfm(path)
    return read_image_png(path)


def write_mask_png(path, mask):
    Image.fromarray(np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)).save(path)


def read_mask_png(path, shape=None):
    """
    Non-zero pixels are True.
    """
    with Image.open(path) as img:
        mask = np.asarray(img.convert("L")) != 0
    if shape is not None and mask.shape != tuple(shape):
        raise ShapeMismatch("{}: mask {} does not match {}".format(path, mask.shape, tuple(shape)))
    return mask


def write_rgb_png(path, rgb):
    Image.fromarray(np.asarray(rgb, dtype=np.uint8)).save(path)


# -----------------------------------------------------------------------------
# JSON documents
# -----------------------------------------------------------------------------

def read_json(path):
    with open(path, "r") as handle:
        try:
            return json.load(handle)
        except ValueError as err:
            raise BadHeader("{}: not valid JSON ({})".format(path, err)) from err


def write_json(path, record):
    with open(path, "w") as handle:
        json.dump(record, handle, indent=2, sort_keys=True)
        handle.write("\n")


def read_intrinsics(path):
    return CameraIntrinsics.from_dict(read_json(path))


def read_pose(path):
    return PoseSE3.from_dict(read_json(path))

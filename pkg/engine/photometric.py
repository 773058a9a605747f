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

Photometric terms: SSIM, the SSIM+L1 matching cost, the photometric and
adaptive photometric losses, edge-aware smoothness, the robust penalty and
the pyramid distillation loss.

SSIM uses 3 x 3 uniform local statistics with reflection padding and
C1 = 0.01^2, C2 = 0.03^2 for data in [0, 1].
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from engine.grids import require_same_shape
from engine.sampler import upsample
from utils.errors import InvalidParameter, NoValidPixels, ShapeMismatch, ZeroMeanDisparity

SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


@dataclass(frozen=True)
class LossConfig:
    """
    Weights of the matching cost and of the training losses.

    Attributes
    ----------
    alpha_cv : float
        SSIM share of the matching cost.
    alpha_photo : float
        SSIM share of the photometric loss (halved inside the loss).
    q, epsilon : float
        exponent and offset of the robust penalty (|x| + epsilon)^q.
    """
    alpha_cv: float = 0.4
    alpha_photo: float = 0.85
    q: float = 0.4
    epsilon: float = 0.1

    def __post_init__(self):
        for name in ("alpha_cv", "alpha_photo"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameter("{} must lie in [0, 1], got {}".format(name, value))
        if not self.q > 0:
            raise InvalidParameter("q must be positive, got {}".format(self.q))
        if not self.epsilon > 0:
            raise InvalidParameter("epsilon must be positive, got {}".format(self.epsilon))


@dataclass(frozen=True)
class ErrorMap:
    """
    H x W per-pixel values (errors or SSIM scores) with validity.
    """
    values: np.ndarray
    validity: np.ndarray

    def mean(self):
        if not self.validity.any():
            raise NoValidPixels("error map has no valid pixel")
        return float(self.values[self.validity].mean())


def _box3(data):
    # 3 x 3 mean over the two spatial axes, reflection padding
    return ndimage.uniform_filter(data, size=(3, 3, 1), mode="mirror")


def _require_pair(a, b):
    if a.data.shape != b.data.shape:
        raise ShapeMismatch("grids differ in shape: {} vs {}".format(a.data.shape, b.data.shape))


def ssim(a, b):
    """
    Per-pixel SSIM, averaged over channels.

    The expression is written symmetrically, so ``ssim(a, b)`` and
    ``ssim(b, a)`` agree bit for bit.
    """
    _require_pair(a, b)
    x = a.data.astype(np.float64)
    y = b.data.astype(np.float64)
    mu_x = _box3(x)
    mu_y = _box3(y)
    sigma_x = _box3(x * x) - mu_x * mu_x
    sigma_y = _box3(y * y) - mu_y * mu_y
    sigma_xy = _box3(x * y) - mu_x * mu_y

    numerator = (2.0 * (mu_x * mu_y) + SSIM_C1) * (2.0 * sigma_xy + SSIM_C2)
    denominator = ((mu_x * mu_x + mu_y * mu_y) + SSIM_C1) * ((sigma_x + sigma_y) + SSIM_C2)
    score = (numerator / denominator).mean(axis=2)
    return ErrorMap(score, a.validity & b.validity)


def l1_error(a, b):
    """
    Channel-averaged absolute difference.
    """
    _require_pair(a, b)
    diff = np.abs(a.data.astype(np.float64) - b.data.astype(np.float64)).mean(axis=2)
    return ErrorMap(diff, a.validity & b.validity)


def cost_error(warped, target, alpha_cv=0.4):
    """
    Matching cost between a synthesised and a target grid::

        alpha (1 - SSIM) + (1 - alpha) |warped - target|
    """
    similarity = ssim(warped, target)
    l1 = l1_error(warped, target)
    values = alpha_cv * (1.0 - similarity.values) + (1.0 - alpha_cv) * l1.values
    return ErrorMap(values, similarity.validity)


def _photometric_term(similarity, l1, alpha_photo):
    return (alpha_photo / 2.0) * (1.0 - similarity) + (1.0 - alpha_photo) * l1


def photometric_map(target, synth, alpha_photo=0.85):
    """
    Per-pixel photometric reprojection error (alpha/2 on the SSIM term).
    """
    similarity = ssim(target, synth)
    l1 = l1_error(target, synth)
    return ErrorMap(_photometric_term(similarity.values, l1.values, alpha_photo),
                    similarity.validity)


def photometric_loss(target, synth, alpha_photo=0.85):
    """
    Mean photometric reprojection error over valid pixels.
    """
    return photometric_map(target, synth, alpha_photo).mean()


def adaptive_photometric_loss(target, synth_static, synth_dynamic, alpha_photo=0.85):
    """
    Photometric loss that, pixel by pixel, keeps the better of the two
    syntheses: the larger SSIM and the smaller L1.
    """
    _require_pair(target, synth_static)
    _require_pair(target, synth_dynamic)
    ssim_s = ssim(target, synth_static)
    ssim_d = ssim(target, synth_dynamic)
    l1_s = l1_error(target, synth_static)
    l1_d = l1_error(target, synth_dynamic)
    values = _photometric_term(np.maximum(ssim_s.values, ssim_d.values),
                               np.minimum(l1_s.values, l1_d.values), alpha_photo)
    return ErrorMap(values, ssim_s.validity & ssim_d.validity).mean()


def edge_aware_smoothness(disp, image):
    """
    Edge-aware smoothness of a mean-normalised disparity::

        mean |dx d^| exp(-|dx I|) + mean |dy d^| exp(-|dy I|)

    with forward differences and channel-averaged image gradients.
    """
    require_same_shape(disp.shape, image.shape, what="disparity and image")
    d = disp.plane(0).astype(np.float64)
    mean = d.mean()
    if mean == 0:
        raise ZeroMeanDisparity("disparity has zero mean")
    d = d / mean
    img = image.data.astype(np.float64)

    grad_disp_x = np.abs(d[:, 1:] - d[:, :-1])
    grad_disp_y = np.abs(d[1:, :] - d[:-1, :])
    grad_img_x = np.abs(img[:, 1:] - img[:, :-1]).mean(axis=2)
    grad_img_y = np.abs(img[1:, :] - img[:-1, :]).mean(axis=2)

    total = 0.0
    if grad_disp_x.size:
        total += float((grad_disp_x * np.exp(-grad_img_x)).mean())
    if grad_disp_y.size:
        total += float((grad_disp_y * np.exp(-grad_img_y)).mean())
    return total


def robust_penalty(x, q=0.4, epsilon=0.1):
    """
    (|x| + epsilon)^q, elementwise; scalars in, scalar out.
    """
    result = np.power(np.abs(np.asarray(x, dtype=np.float64)) + epsilon, q)
    if np.ndim(result) == 0:
        return float(result)
    return result


def pyramid_distillation_loss(scale_depths, final_depth, q=0.4, epsilon=0.1):
    """
    Sum over scales of the mean robust penalty between the final depth (a
    fixed pseudo-label) and each scale's depth upsampled to full resolution.

    Raises
    ------
    InvalidTarget
        if a scale is larger than the final depth map.
    """
    height, width = final_depth.shape
    label = final_depth.plane(0).astype(np.float64)
    total = 0.0
    for scale in scale_depths:
        upsampled = upsample(scale, height, width).plane(0).astype(np.float64)
        total += float(robust_penalty(label - upsampled, q, epsilon).mean())
    return total


def total_loss(target, synth_static, synth_dynamic, disp, scale_depths, final_depth,  # pylint: disable=too-many-arguments
               config=None, smoothness_weight=1.0):
    """
    Training objective without the distillation-consistency term:
    adaptive photometric + weighted smoothness + pyramid distillation.

    Returns
    -------
    dict
        each term and their sum.
    """
    if config is None:
        config = LossConfig()
    terms = {
        "adaptive_photometric": adaptive_photometric_loss(
            target, synth_static, synth_dynamic, config.alpha_photo),
        "smoothness": edge_aware_smoothness(disp, target),
        "pyramid_distillation": pyramid_distillation_loss(
            scale_depths, final_depth, config.q, config.epsilon),
    }
    terms["total"] = (terms["adaptive_photometric"]
                      + smoothness_weight * terms["smoothness"]
                      + terms["pyramid_distillation"])
    return terms

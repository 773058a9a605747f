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

from engine.grids import ImageGrid
from engine.photometric import (SSIM_C1, SSIM_C2, LossConfig, adaptive_photometric_loss,
                                cost_error, edge_aware_smoothness, l1_error, photometric_loss,
                                pyramid_distillation_loss, robust_penalty, ssim, total_loss)
from utils.errors import (InvalidParameter, InvalidTarget, NoValidPixels, ShapeMismatch,
                          ZeroMeanDisparity)

# SSIM of a constant 0 grid against a constant 1 grid
SSIM_ZERO_ONE = SSIM_C1 / (1.0 + SSIM_C1)


def _constant(value, shape=(5, 6)):
    return ImageGrid.from_array(np.full(shape, value))


def _random(rng, shape=(6, 7)):
    return ImageGrid.from_array(rng.uniform(0.0, 1.0, shape))


def _ssim_oracle(a, b):
    """
    Pixel-by-pixel SSIM over mirrored 3 x 3 windows, single channel.
    """
    pa = np.pad(a, 1, mode="reflect")
    pb = np.pad(b, 1, mode="reflect")
    out = np.zeros(a.shape)
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            wa = pa[i:i + 3, j:j + 3].ravel()
            wb = pb[i:i + 3, j:j + 3].ravel()
            mu_a, mu_b = wa.mean(), wb.mean()
            var_a = (wa * wa).mean() - mu_a ** 2
            var_b = (wb * wb).mean() - mu_b ** 2
            cov = (wa * wb).mean() - mu_a * mu_b
            out[i, j] = ((2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
                         / ((mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (var_a + var_b + SSIM_C2)))
    return out


@pytest.mark.photometric
def test_ssim_identical_is_one(rng):
    grid = _random(rng)
    assert np.allclose(ssim(grid, grid).values, 1.0)


@pytest.mark.photometric
def test_ssim_constant_grids():
    score = ssim(_constant(0.0), _constant(1.0))
    assert np.allclose(score.values, SSIM_ZERO_ONE)
    assert score.values[0, 0] == pytest.approx(9.999e-5, rel=1e-4)


@pytest.mark.photometric
def test_ssim_is_symmetric(rng):
    a, b = _random(rng), _random(rng)
    assert np.array_equal(ssim(a, b).values, ssim(b, a).values)


@pytest.mark.photometric
@pytest.mark.parametrize("seed", range(3))
def test_ssim_matches_window_loop(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.0, 1.0, (6, 7))
    b = rng.uniform(0.0, 1.0, (6, 7))
    score = ssim(ImageGrid.from_array(a), ImageGrid.from_array(b))
    assert np.allclose(score.values, _ssim_oracle(a, b), atol=1e-10)


@pytest.mark.photometric
def test_ssim_validity_and_shapes(rng):
    a = _random(rng)
    validity = np.ones(a.shape, dtype=bool)
    validity[2, 3] = False
    b = _random(rng).with_validity(validity)
    assert np.array_equal(ssim(a, b).validity, validity)
    with pytest.raises(ShapeMismatch):
        ssim(a, _random(rng, (6, 8)))


@pytest.mark.photometric
def test_l1_error_channels():
    a = ImageGrid.from_array(np.zeros((2, 2, 3)))
    b = ImageGrid.from_array(np.stack([np.full((2, 2), v) for v in (0.3, 0.6, 0.9)], axis=2))
    assert np.allclose(l1_error(a, b).values, 0.6)


@pytest.mark.photometric
def test_cost_error_constant_grids():
    cost = cost_error(_constant(0.0), _constant(1.0), alpha_cv=0.4)
    assert np.allclose(cost.values, 0.4 * (1.0 - SSIM_ZERO_ONE) + 0.6)
    assert cost.values[0, 0] == pytest.approx(0.99996, abs=1e-5)

    same = _constant(0.5)
    assert np.allclose(cost_error(same, same).values, 0.0)


@pytest.mark.photometric
def test_photometric_loss_constant_grids():
    loss = photometric_loss(_constant(0.0), _constant(1.0), alpha_photo=0.85)
    assert loss == pytest.approx(0.425 * (1.0 - SSIM_ZERO_ONE) + 0.15)
    assert loss == pytest.approx(0.574958, abs=1e-6)


@pytest.mark.photometric
def test_photometric_loss_without_valid_pixels():
    empty = ImageGrid(np.zeros((3, 3)), np.zeros((3, 3), dtype=bool))
    with pytest.raises(NoValidPixels):
        photometric_loss(empty, _constant(1.0, (3, 3)))


@pytest.mark.photometric
def test_adaptive_loss_never_exceeds_either_branch():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        target, synth_s, synth_d = (_random(rng, (8, 9)) for _ in range(3))
        adaptive = adaptive_photometric_loss(target, synth_s, synth_d)
        single = min(photometric_loss(target, synth_s), photometric_loss(target, synth_d))
        assert adaptive <= single + 1e-9


@pytest.mark.photometric
def test_adaptive_loss_with_identical_branches(rng):
    target, synth = _random(rng), _random(rng)
    assert adaptive_photometric_loss(target, synth, synth) == pytest.approx(
        photometric_loss(target, synth))


@pytest.mark.photometric
def test_smoothness_of_constant_disparity(rng):
    assert edge_aware_smoothness(_constant(0.3, (6, 7)), _random(rng)) == 0.0


@pytest.mark.photometric
def test_smoothness_is_scale_invariant(rng):
    disp = rng.uniform(0.1, 1.0, (6, 7))
    image = _random(rng)
    once = edge_aware_smoothness(ImageGrid.from_array(disp), image)
    twice = edge_aware_smoothness(ImageGrid.from_array(3.0 * disp), image)
    assert twice == pytest.approx(once)


@pytest.mark.photometric
def test_smoothness_matches_loop(rng):
    disp = rng.uniform(0.1, 1.0, (4, 5))
    image = rng.uniform(0.0, 1.0, (4, 5))
    norm = disp / disp.mean()
    grad_x = [abs(norm[i, j + 1] - norm[i, j]) * np.exp(-abs(image[i, j + 1] - image[i, j]))
              for i in range(4) for j in range(4)]
    grad_y = [abs(norm[i + 1, j] - norm[i, j]) * np.exp(-abs(image[i + 1, j] - image[i, j]))
              for i in range(3) for j in range(5)]
    expected = np.mean(grad_x) + np.mean(grad_y)
    result = edge_aware_smoothness(ImageGrid.from_array(disp), ImageGrid.from_array(image))
    assert result == pytest.approx(expected, rel=1e-12)


@pytest.mark.photometric
def test_smoothness_zero_mean():
    with pytest.raises(ZeroMeanDisparity):
        edge_aware_smoothness(_constant(0.0), _constant(0.5))


@pytest.mark.photometric
def test_robust_penalty():
    assert robust_penalty(0.0) == pytest.approx(0.3981072, abs=1e-7)
    assert robust_penalty(-0.9) == pytest.approx(1.0)
    values = robust_penalty(np.array([0.0, 0.9]))
    assert values.shape == (2,)
    assert values[1] == pytest.approx(1.0)


@pytest.mark.photometric
def test_pyramid_distillation():
    final = _constant(1.0, (8, 8))
    scales = [_constant(1.0, shape) for shape in ((1, 1), (2, 2), (4, 4), (8, 8))]
    assert pyramid_distillation_loss(scales, final) == pytest.approx(1.5924, abs=1e-4)

    final = _constant(1.9, (4, 4))
    assert pyramid_distillation_loss([_constant(1.0, (2, 2))], final) == pytest.approx(1.0)

    with pytest.raises(InvalidTarget):
        pyramid_distillation_loss([_constant(1.0, (8, 8))], final)


@pytest.mark.photometric
def test_total_loss_terms(rng):
    target, synth_s, synth_d = (_random(rng) for _ in range(3))
    disp = ImageGrid.from_array(rng.uniform(0.1, 1.0, target.shape))
    final = ImageGrid.from_array(rng.uniform(1.0, 5.0, target.shape))
    terms = total_loss(target, synth_s, synth_d, disp, [final], final, smoothness_weight=0.5)
    assert set(terms) == {"adaptive_photometric", "smoothness", "pyramid_distillation", "total"}
    assert terms["total"] == pytest.approx(terms["adaptive_photometric"]
                                           + 0.5 * terms["smoothness"]
                                           + terms["pyramid_distillation"])
    assert terms["pyramid_distillation"] == pytest.approx(0.1 ** 0.4)


@pytest.mark.photometric
@pytest.mark.parametrize("changes", [
    {"alpha_cv": 1.5}, {"alpha_photo": -0.1}, {"q": 0.0}, {"epsilon": -1.0},
])
def test_loss_config_validation(changes):
    with pytest.raises(InvalidParameter):
        LossConfig(**changes)


def _upsample_oracle(src, height, width):
    """
    Corner-aligned bilinear upsampling, one target pixel at a time.
    """
    rows, cols = src.shape
    out = np.zeros((height, width))
    for i in range(height):
        for j in range(width):
            y = i * (rows - 1) / (height - 1) if height > 1 else 0.0
            x = j * (cols - 1) / (width - 1) if width > 1 else 0.0
            y0 = min(int(np.floor(y)), max(rows - 2, 0))
            x0 = min(int(np.floor(x)), max(cols - 2, 0))
            y1 = min(y0 + 1, rows - 1)
            x1 = min(x0 + 1, cols - 1)
            fy, fx = y - y0, x - x0
            out[i, j] = ((1 - fy) * ((1 - fx) * src[y0, x0] + fx * src[y0, x1])
                         + fy * ((1 - fx) * src[y1, x0] + fx * src[y1, x1]))
    return out


@pytest.mark.photometric
@pytest.mark.parametrize("seed", range(3))
def test_cost_error_matches_loop(seed):
    rng = np.random.default_rng(seed)
    warped = rng.uniform(0.0, 1.0, (8, 8))
    target = rng.uniform(0.0, 1.0, (8, 8))
    similarity = _ssim_oracle(warped, target)
    expected = np.zeros((8, 8))
    for i in range(8):
        for j in range(8):
            expected[i, j] = (0.4 * (1.0 - similarity[i, j])
                              + 0.6 * abs(warped[i, j] - target[i, j]))
    cost = cost_error(ImageGrid.from_array(warped), ImageGrid.from_array(target), alpha_cv=0.4)
    assert np.allclose(cost.values, expected, atol=1e-10)


@pytest.mark.photometric
@pytest.mark.parametrize("seed", range(3))
def test_photometric_loss_matches_loop(seed):
    rng = np.random.default_rng(seed)
    target = rng.uniform(0.0, 1.0, (8, 8))
    synth = rng.uniform(0.0, 1.0, (8, 8))
    similarity = _ssim_oracle(target, synth)
    total = 0.0
    for i in range(8):
        for j in range(8):
            total += (0.425 * (1.0 - similarity[i, j])
                      + 0.15 * abs(target[i, j] - synth[i, j]))
    loss = photometric_loss(ImageGrid.from_array(target), ImageGrid.from_array(synth), 0.85)
    assert loss == pytest.approx(total / 64, abs=1e-10)


@pytest.mark.photometric
@pytest.mark.parametrize("seed", range(3))
def test_adaptive_loss_matches_loop(seed):
    rng = np.random.default_rng(seed)
    target, synth_s, synth_d = (rng.uniform(0.0, 1.0, (8, 8)) for _ in range(3))
    ssim_s = _ssim_oracle(target, synth_s)
    ssim_d = _ssim_oracle(target, synth_d)
    total = 0.0
    for i in range(8):
        for j in range(8):
            best_ssim = max(ssim_s[i, j], ssim_d[i, j])
            best_l1 = min(abs(target[i, j] - synth_s[i, j]), abs(target[i, j] - synth_d[i, j]))
            total += 0.425 * (1.0 - best_ssim) + 0.15 * best_l1
    loss = adaptive_photometric_loss(ImageGrid.from_array(target), ImageGrid.from_array(synth_s),
                                     ImageGrid.from_array(synth_d), 0.85)
    assert loss == pytest.approx(total / 64, abs=1e-10)


@pytest.mark.photometric
def test_adaptive_loss_with_exact_dynamic_synthesis(rng):
    target, synth_s = _random(rng, (8, 8)), _random(rng, (8, 8))
    assert adaptive_photometric_loss(target, synth_s, target) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.photometric
def test_losses_are_invariant_to_horizontal_flip(rng):
    target, synth_s, synth_d = (_random(rng, (8, 9)) for _ in range(3))
    flipped = [grid.flip_horizontal() for grid in (target, synth_s, synth_d)]

    assert np.allclose(cost_error(flipped[1], flipped[0]).values,
                       cost_error(synth_s, target).values[:, ::-1], atol=1e-12)
    assert photometric_loss(flipped[0], flipped[1]) == pytest.approx(
        photometric_loss(target, synth_s), abs=1e-12)
    assert adaptive_photometric_loss(*flipped) == pytest.approx(
        adaptive_photometric_loss(target, synth_s, synth_d), abs=1e-12)


@pytest.mark.photometric
@pytest.mark.parametrize("seed", range(3))
def test_pyramid_distillation_matches_loop(seed):
    rng = np.random.default_rng(seed)
    final = rng.uniform(1.0, 10.0, (8, 8))
    levels = [rng.uniform(1.0, 10.0, shape) for shape in ((1, 1), (2, 3), (4, 4), (5, 8), (8, 8))]
    expected = 0.0
    for level in levels:
        upsampled = _upsample_oracle(level, 8, 8)
        penalties = [(abs(final[i, j] - upsampled[i, j]) + 0.1) ** 0.4
                     for i in range(8) for j in range(8)]
        expected += sum(penalties) / len(penalties)
    loss = pyramid_distillation_loss([ImageGrid.from_array(level) for level in levels],
                                     ImageGrid.from_array(final), q=0.4, epsilon=0.1)
    assert loss == pytest.approx(expected, rel=1e-10)

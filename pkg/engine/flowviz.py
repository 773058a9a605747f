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

Middlebury colour-wheel rendering of flow fields: hue encodes direction,
saturation encodes magnitude relative to the largest valid magnitude.
"""

import numpy as np

# segment lengths: red-yellow, yellow-green, green-cyan, cyan-blue,
# blue-magenta, magenta-red
_SEGMENTS = (15, 6, 4, 11, 13, 6)


def make_colorwheel():
    """
    55 x 3 colour wheel with values in [0, 255].
    """
    wheel = np.zeros((sum(_SEGMENTS), 3))
    col = 0
    for index, length in enumerate(_SEGMENTS):
        ramp = np.floor(255 * np.arange(length) / length)
        rising, full = (index // 2 + 1) % 3, (index // 2) % 3
        if index % 2 == 0:
            wheel[col:col + length, full] = 255
            wheel[col:col + length, rising] = ramp
        else:
            wheel[col:col + length, full] = 255 - ramp
            wheel[col:col + length, rising] = 255
        col += length
    return wheel


def flow_to_rgb(flow, max_magnitude=None):
    """
    Colour-code a flow field; invalid pixels are black.

    Parameters
    ----------
    flow : FlowField
    max_magnitude : float, optional
        normalisation radius; the largest valid magnitude by default.

    Returns
    -------
    numpy.ndarray
        H x W x 3 uint8.
    """
    u = np.where(flow.validity, flow.u, 0.0).astype(np.float64)
    v = np.where(flow.validity, flow.v, 0.0).astype(np.float64)
    radius = np.where(flow.validity, flow.magnitude(), 0.0)
    if max_magnitude is None:
        max_magnitude = radius.max() if radius.size else 0.0
    if max_magnitude > 0:
        u = u / max_magnitude
        v = v / max_magnitude
        radius = radius / max_magnitude

    wheel = make_colorwheel()
    n_cols = wheel.shape[0]
    angle = np.arctan2(-v, -u) / np.pi
    position = (angle + 1) / 2 * (n_cols - 1)
    k0 = np.floor(position).astype(int)
    k1 = (k0 + 1) % n_cols
    frac = (position - k0)[..., None]
    colour = ((1 - frac) * wheel[k0] + frac * wheel[k1]) / 255.0

    inside = (radius <= 1)[..., None]
    colour = np.where(inside, 1 - radius[..., None] * (1 - colour), colour * 0.75)
    rgb = np.floor(255 * colour).astype(np.uint8)
    rgb[~flow.validity] = 0
    return rgb

#!/usr/bin/env python3
# Copyright 2026 The moimit Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Regenerates the bundled sample data under data/.

* sample_clip.kp: a synthetic 17-keypoint clip (Human3.6M ordering) of a
  standing person waving the right arm, 90 frames at 30 fps.
* sinusoid_reference.txt / sinusoid_shifted_reference.txt: one period of a
  two-joint sinusoid on the 7-joint chain (same formula as
  moimit::sinusoid_reference), with phase 0 and 0.5 rad.
"""

import math
import pathlib

import numpy as np

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def sample_clip(frames=90, fps=30.0, lift=0.05):
    rest = np.array([
        [0.00, 0.00, 0.95],   # 0 hip
        [-0.12, 0.00, 0.95],  # 1 right hip
        [-0.12, 0.02, 0.50],  # 2 right knee
        [-0.12, 0.00, 0.08],  # 3 right foot
        [0.12, 0.00, 0.95],   # 4 left hip
        [0.12, 0.02, 0.50],   # 5 left knee
        [0.12, 0.00, 0.08],   # 6 left foot
        [0.00, 0.00, 1.20],   # 7 spine
        [0.00, 0.00, 1.45],   # 8 thorax
        [0.00, 0.05, 1.55],   # 9 neck / nose
        [0.00, 0.00, 1.70],   # 10 head
        [0.18, 0.00, 1.45],   # 11 left shoulder
        [0.20, 0.00, 1.17],   # 12 left elbow
        [0.20, 0.00, 0.92],   # 13 left wrist
        [-0.18, 0.00, 1.45],  # 14 right shoulder
        [0.0, 0.0, 0.0],      # 15 right elbow (animated)
        [0.0, 0.0, 0.0],      # 16 right wrist (animated)
    ])
    out = []
    for t in range(frames):
        w = 2.0 * math.pi * t / frames
        abduct = 0.9 + 0.35 * math.sin(w)
        flex = 0.4 + 0.25 * math.sin(w + 0.7)
        elbow_bend = 0.8 + 0.4 * math.sin(2.0 * w)
        down = np.array([0.0, 0.0, -1.0])
        upper_dir = rot_x(flex) @ rot_z(0.0) @ (
            np.array([[math.cos(abduct), 0, math.sin(abduct)], [0, 1, 0],
                      [-math.sin(abduct), 0, math.cos(abduct)]]) @ down)
        fore_dir = rot_x(elbow_bend) @ upper_dir
        kp = rest.copy()
        kp[15] = kp[14] + 0.28 * upper_dir
        kp[16] = kp[15] + 0.25 * fore_dir / np.linalg.norm(fore_dir)
        kp[:, 2] += lift + 0.01 * math.sin(w)  # slight body bob
        out.append(kp)
    return fps, out


def sinusoid(frames=200, phase=0.0, amplitude=0.5):
    nominal = [0.0, 0.6, 0.0, -1.2, 0.0, 0.6, 0.0]
    rows = []
    for t in range(frames):
        w = 2.0 * math.pi * t / frames + phase
        q = list(nominal)
        q[1] += amplitude * math.sin(w)
        q[3] += amplitude * math.sin(w + 0.5 * math.pi)
        rows.append(q)
    return rows


def write_reference(path, rows, dt=1.0 / 240.0):
    with open(path, "w") as f:
        f.write(f"dt={dt!r} n_joints=7 n_frames={len(rows)}\n")
        for q in rows:
            f.write(" ".join(repr(v) for v in q) + "\n")


def main():
    fps, clip = sample_clip()
    with open(DATA / "sample_clip.kp", "w") as f:
        f.write(f"fps={fps!r} n_keypoints=17\n")
        for kp in clip:
            f.write(" ".join(repr(float(round(v, 6))) for v in kp.reshape(-1)) + "\n")
    write_reference(DATA / "sinusoid_reference.txt", sinusoid())
    write_reference(DATA / "sinusoid_shifted_reference.txt", sinusoid(phase=0.5))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
# Copyright 2026 The ertalign Authors.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes the shipped landmark schemas and 3D face models into data/.

Coordinates are millimetres in the camera-aligned model frame: x towards the
image right, y down, z away from the camera. "left" names the image-left side.
"""

import argparse
import math
import pathlib


def unit(v):
    n = math.sqrt(sum(c * c for c in v))
    return tuple(c / n for c in v)


def mirror_x(p):
    return (-p[0], p[1], p[2])


def face24():
    parts = ["left_brow", "right_brow", "left_eye", "right_eye", "nose", "mouth_top",
             "mouth_bottom", "left_ear", "right_ear", "chin"]
    # name, part, point, normal (left side or midline)
    left = [
        ("brow_outer", "brow", (-45, -40, 5), (-0.4, -0.1, -0.9)),
        ("brow_center", "brow", (-30, -47, -3), (-0.1, -0.2, -0.97)),
        ("brow_inner", "brow", (-12, -42, -8), (0.0, -0.1, -1.0)),
        ("eye_outer", "eye", (-43, -25, 8), (-0.35, 0.0, -0.94)),
        ("eye_pupil", "eye", (-31, -25, -2), (0.0, 0.0, -1.0)),
        ("eye_inner", "eye", (-19, -25, 3), (0.1, 0.0, -1.0)),
    ]
    rows = []
    for group in (left[:3], left[3:]):
        for name, part, p, n in group:
            rows.append(("left_" + name, "left_" + part, p, n))
        for name, part, p, n in reversed(group):
            rows.append(("right_" + name, "right_" + part, mirror_x(p), mirror_x(n)))
    rows += [
        ("nose_left", "nose", (-15, 18, -12), (-0.4, 0.2, -0.9)),
        ("nose_tip", "nose", (0, 12, -30), (0.0, 0.1, -1.0)),
        ("nose_right", "nose", (15, 18, -12), (0.4, 0.2, -0.9)),
        ("mouth_left", "mouth_top", (-24, 40, -5), (-0.4, 0.0, -0.92)),
        ("mouth_upper", "mouth_top", (0, 34, -14), (0.0, 0.0, -1.0)),
        ("mouth_right", "mouth_top", (24, 40, -5), (0.4, 0.0, -0.92)),
        ("mouth_lower", "mouth_bottom", (0, 48, -12), (0.0, 0.2, -0.98)),
        ("left_ear_top", "left_ear", (-72, -20, 45), (-0.9, 0.0, -0.1)),
        ("left_ear_lobe", "left_ear", (-68, 15, 40), (-0.9, 0.1, -0.1)),
        ("right_ear_top", "right_ear", (72, -20, 45), (0.9, 0.0, -0.1)),
        ("right_ear_lobe", "right_ear", (68, 15, 40), (0.9, 0.1, -0.1)),
        ("chin", "chin", (0, 75, -8), (0.0, 0.4, -0.92)),
    ]
    distinct = [True] * len(rows)
    return parts, rows, distinct


def face68():
    parts = ["jaw", "left_brow", "right_brow", "nose_bridge", "nose_base", "left_eye",
             "right_eye", "mouth_outer", "mouth_inner"]
    rows = []
    # Jaw: 17 points on a U-shaped contour from the left ear to the right ear.
    for i in range(17):
        a = math.pi * (i / 16.0)
        x = -70 * math.cos(a)
        y = -10 + 85 * math.sin(a) ** 0.8
        z = 45 * math.cos(a) ** 2 - 5
        n = unit((x / 70.0, 0.3 * math.sin(a), -0.6))
        rows.append(("jaw_%02d" % i, "jaw", (x, y, z), n))
    brow = [(-52, -38, 8), (-44, -45, 0), (-33, -48, -4), (-22, -47, -7), (-11, -43, -9)]
    for i, p in enumerate(brow):
        rows.append(("left_brow_%d" % i, "left_brow", p, unit((p[0] / 120.0, -0.1, -1))))
    for i, p in enumerate(reversed(brow)):
        q = mirror_x(p)
        rows.append(("right_brow_%d" % i, "right_brow", q, unit((q[0] / 120.0, -0.1, -1))))
    for i, (y, z) in enumerate([(-30, -12), (-18, -20), (-6, -26), (4, -31)]):
        rows.append(("nose_bridge_%d" % i, "nose_bridge", (0, y, z), (0.0, -0.2, -0.98)))
    base = [(-13, 18, -13), (-7, 20, -18), (0, 21, -21), (7, 20, -18), (13, 18, -13)]
    for i, p in enumerate(base):
        rows.append(("nose_base_%d" % i, "nose_base", p, unit((p[0] / 30.0, 0.3, -1))))
    eye = [(-43, -25, 8), (-37, -29, 2), (-29, -29, 0), (-19, -25, 3), (-29, -21, 1),
           (-37, -21, 2)]
    eye_names = ["outer", "upper_outer", "upper_inner", "inner", "lower_inner", "lower_outer"]
    for name, p in zip(eye_names, eye):
        rows.append(("left_eye_" + name, "left_eye", p, unit((p[0] / 150.0, 0, -1))))
    # The right eye runs inner -> outer so that index 45 is its outer corner.
    right_order = [3, 2, 1, 0, 5, 4]
    for k in right_order:
        q = mirror_x(eye[k])
        rows.append(("right_eye_" + eye_names[k], "right_eye", q, unit((q[0] / 150.0, 0, -1))))
    outer = [(-24, 40, -5), (-15, 35, -11), (-6, 33, -14), (0, 34, -14), (6, 33, -14),
             (15, 35, -11), (24, 40, -5), (15, 47, -10), (6, 49, -12), (0, 49, -12),
             (-6, 49, -12), (-15, 47, -10)]
    for i, p in enumerate(outer):
        rows.append(("mouth_outer_%02d" % i, "mouth_outer", p, unit((p[0] / 60.0, 0, -1))))
    inner = [(-20, 40, -7), (-6, 38, -13), (0, 38, -13), (6, 38, -13), (20, 40, -7),
             (6, 42, -12), (0, 42, -12), (-6, 42, -12)]
    for i, p in enumerate(inner):
        rows.append(("mouth_inner_%d" % i, "mouth_inner", p, unit((p[0] / 60.0, 0, -1))))
    distinct = [not name.startswith("jaw_") or name in ("jaw_08",) for name, *_ in rows]
    return parts, rows, distinct


def mirror_ids(rows):
    out = []
    for i, (name, _, p, _) in enumerate(rows):
        # Pair by mirrored position: the landmark closest to (-x, y, z).
        target = mirror_x(p)
        best = min(range(len(rows)),
                   key=lambda j: sum((a - b) ** 2 for a, b in zip(rows[j][2], target)))
        out.append(best if abs(p[0]) > 1e-9 else i)
    assert all(out[out[i]] == i for i in range(len(out))), "mirror map is not an involution"
    return out


def write(stem, parts, rows, distinct, out_dir):
    part_id = {p: i for i, p in enumerate(parts)}
    mirror = mirror_ids(rows)
    schema = ["# part <id> <name>"]
    schema += ["part %d %s" % (i, p) for i, p in enumerate(parts)]
    schema.append("# landmark <name> <part> <distinct> <mirror>")
    for i, (name, part, _, _) in enumerate(rows):
        schema.append("landmark %s %d %d %d" % (name, part_id[part], int(distinct[i]), mirror[i]))
    (out_dir / (stem + ".schema")).write_text("\n".join(schema) + "\n")
    model = ["# point <name> X Y Z nx ny nz <distinct>"]
    for i, (name, _, p, n) in enumerate(rows):
        n = unit(n)
        model.append("point %s %s %s %s %.6f %.6f %.6f %d" % (
            name, repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
            n[0], n[1], n[2], int(distinct[i])))
    (out_dir / (stem + ".model3d")).write_text("\n".join(model) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write("face24", *face24(), out)
    write("face68", *face68(), out)


if __name__ == "__main__":
    main()

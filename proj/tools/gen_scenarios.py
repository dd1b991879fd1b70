#!/usr/bin/env python3
# Copyright 2026 The hpf Authors
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

"""Writes the bundled scenario files into scenarios/."""

import json
import math
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "scenarios"

START_WAIT = 6.0  # s the leader stands still before walking


def r(x):
    return round(x, 6)


def polyline_script(points, speed, t0):
    """Timed waypoints walking the polyline at constant speed from t0."""
    wps = [{"t": 0.0, "x": points[0][0], "y": points[0][1]}]
    t = t0
    wps.append({"t": t, "x": points[0][0], "y": points[0][1]})
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        t += math.hypot(x1 - x0, y1 - y0) / speed
        wps.append({"t": r(t), "x": r(x1), "y": r(y1)})
    return wps


def s_curve_points(step=0.1):
    # Heading rises to +theta_max and back over one hump, then mirrors:
    # lead-in 2 m, two 5.5 m humps, lead-out 2 m (15 m in total).
    lead, hump, theta_max = 2.0, 5.5, math.radians(50.0)
    total = 2 * lead + 2 * hump
    pts = [(2.0, 0.0)]
    x, y, s = 2.0, 0.0, 0.0
    while s < total - 1e-9:
        h = min(step, total - s)
        mid = s + 0.5 * h
        if lead <= mid < lead + hump:
            th = theta_max * math.sin(math.pi * (mid - lead) / hump)
        elif lead + hump <= mid < lead + 2 * hump:
            th = -theta_max * math.sin(math.pi * (mid - lead - hump) / hump)
        else:
            th = 0.0
        x += h * math.cos(th)
        y += h * math.sin(th)
        s += h
        pts.append((r(x), r(y)))
    return pts


def leader(wps, seed=101):
    return {"id": 1, "role": "leader", "appearance_seed": seed, "waypoints": wps}


def write(name, doc):
    doc = {"name": name, **doc}
    (OUT / f"{name}.json").write_text(json.dumps(doc, indent=2) + "\n")


def main():
    OUT.mkdir(exist_ok=True)

    write("straight", {
        "duration": 35.0,
        "dt": 0.05,
        "seed": 11,
        "agents": [leader(polyline_script([(2.0, 0.0), (14.0, 0.0)], 0.6, START_WAIT))],
    })

    write("s_curve", {
        "duration": 42.0,
        "dt": 0.05,
        "seed": 7,
        "agents": [leader(polyline_script(s_curve_points(), 0.6, START_WAIT))],
    })

    walls = [{"a": [-1.0, 1.5], "b": [16.0, 1.5]}, {"a": [-1.0, -1.5], "b": [16.0, -1.5]}]
    write("corridor_crossing", {
        "duration": 35.0,
        "dt": 0.05,
        "seed": 3,
        "agents": [
            leader(polyline_script([(2.0, 0.0), (14.0, 0.0)], 0.6, START_WAIT)),
            {"id": 2, "role": "pedestrian", "appearance_seed": 202, "waypoints": [
                {"t": 0.0, "x": 4.3, "y": -1.25},
                {"t": 11.0, "x": 4.3, "y": -1.25},
                {"t": 13.5, "x": 4.3, "y": 1.25},
            ]},
        ],
        "obstacles": walls,
    })

    write("sharp_turn_fov_loss", {
        "duration": 35.0,
        "dt": 0.05,
        "seed": 5,
        "agents": [
            leader(polyline_script([(2.0, 0.0), (7.0, 0.0), (7.0, 6.0)], 0.7, START_WAIT)),
            {"id": 2, "role": "pedestrian", "appearance_seed": 303, "waypoints": [
                {"t": 0.0, "x": 7.8, "y": -1.0},
            ]},
        ],
    })

    write("obstacle_stop", {
        "duration": 45.0,
        "dt": 0.05,
        "seed": 9,
        "agents": [
            leader(polyline_script([(2.0, 0.0), (8.0, 0.0), (8.0, 6.0)], 0.6, START_WAIT)),
            {"id": 2, "role": "pedestrian", "appearance_seed": 404, "waypoints": [
                {"t": 0.0, "x": 6.2, "y": -1.2},
                {"t": 14.0, "x": 6.2, "y": -1.2},
                {"t": 15.2, "x": 6.2, "y": 0.0},
                {"t": 24.0, "x": 6.2, "y": 0.0},
                {"t": 25.2, "x": 6.2, "y": -1.2},
            ]},
        ],
    })


if __name__ == "__main__":
    main()

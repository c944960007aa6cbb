#!/usr/bin/env python3
"""Generates data/town.json: two signalised junctions on an east-west arterial.

Run from the repository root:  python3 tools/gen_town.py > data/town.json
"""
import json
import math

LANE_HW = 1.75          # lane half width
SHOULDER = 1.0          # paved shoulder outside each lane
ROAD_HW = 2 * LANE_HW + SHOULDER
JUNCTION = 14.0         # junction half size
SIDEWALK = 2.5          # sidewalk depth
CROSSWALK_AT = 16.0     # crosswalk centre, distance from junction centre
CROSSWALK_W = 4.0
STOP_AT = 19.0          # stop line distance from junction centre
R_RIGHT = 10.0          # right-turn radius on lane centres
R_LEFT = R_RIGHT + 2 * LANE_HW

X_MIN, X_MAX = -170.0, 290.0
Y_MIN, Y_MAX = -120.0, 120.0
JUNCTIONS = {"A": 0.0, "B": 150.0}   # centres on y = 0

# Light cycles (red, green, offset); red phase first in each period.
CYCLE_EW = (22.0, 18.0, 18.0)
CYCLE_NS = (22.0, 18.0, 38.0)
B_SHIFT = 10.0


def r(v):
    return round(v, 6)


def pt(x, y):
    return [r(x), r(y)]


def octagon(cx):
    j, w = JUNCTION, ROAD_HW
    pts = [(w, j), (-w, j), (-j, w), (-j, -w), (-w, -j), (w, -j), (j, -w), (j, w)]
    return [pt(cx + x, y) for x, y in pts]


def rect(x0, y0, x1, y1):
    return [pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1)]


def arc_poses(cx, cy, radius, a0, a1, heading_sign, n=6):
    """Poses along an arc from angle a0 to a1 (degrees, about centre)."""
    out = []
    for k in range(n + 1):
        a = a0 + (a1 - a0) * k / n
        x = cx + radius * math.cos(math.radians(a))
        y = cy + radius * math.sin(math.radians(a))
        yaw = a + 90.0 * heading_sign
        yaw = (yaw + 180.0) % 360.0 - 180.0
        out.append([r(x), r(y), r(yaw)])
    return out


def main():
    roads = [{"id": "arterial", "centerline": [pt(X_MIN, 0), pt(X_MAX, 0)], "half_width": ROAD_HW}]
    for name, cx in JUNCTIONS.items():
        roads.append({"id": f"cross_{name}", "centerline": [pt(cx, Y_MIN), pt(cx, Y_MAX)],
                      "half_width": ROAD_HW})

    junctions = [{"id": n, "polygon": octagon(cx)} for n, cx in JUNCTIONS.items()]

    # Sidewalk strips along every road arm, outside the junction squares.
    sidewalks = []
    xs = [X_MIN] + sorted(v for c in JUNCTIONS.values() for v in (c - JUNCTION, c + JUNCTION)) + [X_MAX]
    for x0, x1 in zip(xs[0::2], xs[1::2]):
        sidewalks.append({"polygon": rect(x0, ROAD_HW, x1, ROAD_HW + SIDEWALK)})
        sidewalks.append({"polygon": rect(x0, -ROAD_HW - SIDEWALK, x1, -ROAD_HW)})
    for cx in JUNCTIONS.values():
        for y0, y1 in ((Y_MIN, -JUNCTION), (JUNCTION, Y_MAX)):
            sidewalks.append({"polygon": rect(cx + ROAD_HW, y0, cx + ROAD_HW + SIDEWALK, y1)})
            sidewalks.append({"polygon": rect(cx - ROAD_HW - SIDEWALK, y0, cx - ROAD_HW, y1)})

    # One crosswalk per junction arm; a and b are the outer sidewalk edges.
    crosswalks = []
    edge = ROAD_HW + SIDEWALK
    for name, cx in JUNCTIONS.items():
        for arm, (dx, dy) in {"w": (-1, 0), "e": (1, 0), "s": (0, -1), "n": (0, 1)}.items():
            mx, my = cx + dx * CROSSWALK_AT, dy * CROSSWALK_AT
            if dx != 0:
                a, b = pt(mx, -edge), pt(mx, edge)
            else:
                a, b = pt(cx - edge, my), pt(cx + edge, my)
            crosswalks.append({"id": f"{name}_{arm}", "a": a, "b": b, "width": CROSSWALK_W,
                               "sidewalk_depth": SIDEWALK})

    # Lights sit at the stop line on the right edge of each approach lane.
    lights = []
    for name, cx in JUNCTIONS.items():
        shift = B_SHIFT if name == "B" else 0.0
        ew = [CYCLE_EW[0], CYCLE_EW[1], CYCLE_EW[2] + shift]
        ns = [CYCLE_NS[0], CYCLE_NS[1], (CYCLE_NS[2] + shift) % 40.0]
        side = ROAD_HW + 0.5
        approaches = {
            "eb": (cx - STOP_AT, -side, 0.0, ew),
            "wb": (cx + STOP_AT, side, 180.0, ew),
            "nb": (cx + side, -STOP_AT, 90.0, ns),
            "sb": (cx - side, STOP_AT, -90.0, ns),
        }
        for appr, (x, y, yaw, cyc) in approaches.items():
            lights.append({"id": f"{name}_{appr}", "position": pt(x, y), "facing_yaw": yaw,
                           "red": cyc[0], "green": cyc[1], "offset": cyc[2]})

    # Straight traffic lanes with stop lines before each junction.
    def stops_for(lane_start, direction, coord_of_junction, appr):
        out = []
        for name, c in coord_of_junction.items():
            s = (c - STOP_AT - lane_start) if direction > 0 else (lane_start - (c + STOP_AT))
            out.append({"s": r(s), "light": f"{name}_{appr}"})
        return sorted(out, key=lambda e: e["s"])

    lanes = [
        {"id": "arterial_eb", "polyline": [pt(X_MIN, -LANE_HW), pt(X_MAX, -LANE_HW)],
         "stop_lines": stops_for(X_MIN, +1, JUNCTIONS, "eb")},
        {"id": "arterial_wb", "polyline": [pt(X_MAX, LANE_HW), pt(X_MIN, LANE_HW)],
         "stop_lines": stops_for(X_MAX, -1, JUNCTIONS, "wb")},
    ]
    for name, cx in JUNCTIONS.items():
        lanes.append({"id": f"cross_{name}_nb", "polyline": [pt(cx + LANE_HW, Y_MIN), pt(cx + LANE_HW, Y_MAX)],
                      "stop_lines": [{"s": r(-STOP_AT - Y_MIN), "light": f"{name}_nb"}]})
        lanes.append({"id": f"cross_{name}_sb", "polyline": [pt(cx - LANE_HW, Y_MAX), pt(cx - LANE_HW, Y_MIN)],
                      "stop_lines": [{"s": r(Y_MAX - STOP_AT), "light": f"{name}_sb"}]})

    ax, bx = JUNCTIONS["A"], JUNCTIONS["B"]
    h = LANE_HW
    trajectories = [
        {"name": "traj1_straight", "eval": True,
         "poses": [[-80.0, -h, 0.0], [180.0, -h, 0.0]]},
        # eastbound, right turn at A to southbound
        {"name": "traj2_right", "eval": True,
         "poses": [[-140.0, -h, 0.0]]
         + arc_poses(ax - h - R_RIGHT, -h - R_RIGHT, R_RIGHT, 90.0, 0.0, -1)
         + [[ax - h, -40.0, -90.0]]},
        # westbound, left turn at B to southbound
        {"name": "traj3_left", "eval": True,
         "poses": [[270.0, h, 180.0]]
         + arc_poses(bx + R_LEFT - h, h - R_LEFT, R_LEFT, 90.0, 180.0, 1)
         + [[bx - h, -30.0, -90.0]]},
        # northbound, left turn at A to westbound
        {"name": "traj4_short", "eval": True,
         "poses": [[ax + h, -60.0, 90.0]]
         + arc_poses(ax + h - R_LEFT, h - R_LEFT, R_LEFT, 0.0, 90.0, 1)
         + [[-45.0, h, 180.0]]},
        # training routes (not used for evaluation)
        {"name": "train_left", "eval": False,
         "poses": [[bx + h, -100.0, 90.0]]
         + arc_poses(bx + h - R_LEFT, h - R_LEFT, R_LEFT, 0.0, 90.0, 1)
         + [[90.0, h, 180.0]]},
        {"name": "train_right", "eval": False,
         "poses": [[ax - h, 100.0, -90.0]]
         + arc_poses(ax - h - R_RIGHT, h + R_RIGHT, R_RIGHT, 0.0, -90.0, -1)
         + [[-60.0, h, 180.0]]},
    ]

    doc = {
        "schema_version": 1,
        "name": "town_two_junctions",
        "lane_half_width": LANE_HW,
        "bounds": [X_MIN - 10, Y_MIN - 10, X_MAX + 10, Y_MAX + 10],
        "roads": roads,
        "junctions": junctions,
        "sidewalks": sidewalks,
        "crosswalks": crosswalks,
        "lights": lights,
        "lanes": lanes,
        "trajectories": trajectories,
    }
    print(json.dumps(doc, indent=1))


if __name__ == "__main__":
    main()

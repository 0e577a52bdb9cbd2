#!/usr/bin/env python3
"""Generate the demonstration corpus: 26 handwriting-style shapes, 7 demos each.

Each shape is a hand-designed control polyline smoothed by corner cutting;
every demonstration jitters the control points, applies a small random
rotation/scale and adds low-frequency path noise, then resamples to a fixed
number of points. Output is one CSV per shape (``demo,t,y,z``) plus the
shape-to-concept label map. Fully deterministic for a given seed.

Usage: python3 scripts/make_corpus.py [--out data/lasa] [--seed 20240]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from conceptlearn.dataset import resample_arclength  # noqa: E402


def arc(cx, cy, r_x, r_y, deg_from, deg_to, n=24):
    th = np.radians(np.linspace(deg_from, deg_to, n))
    return np.stack([cx + r_x * np.cos(th), cy + r_y * np.sin(th)], axis=1)


def pts(*pairs):
    return np.array(pairs, dtype=float)


def wave(x0, x1, amp, periods, n=25, tilt=0.0, taper=0.0):
    x = np.linspace(x0, x1, n)
    phase = (x - x0) / (x1 - x0)
    y = amp * (1.0 - taper * phase) * np.sin(2.0 * np.pi * periods * phase)
    y += tilt * (x - x0)
    return np.stack([x, y], axis=1)


def shape_controls() -> dict:
    """Control polylines, one stroke per shape, roughly 10 units across."""
    s = {}
    s["Line"] = pts((-10.0, -2.0), (-5.0, -1.0), (0.0, 0.0))
    s["Angle"] = pts((-8.0, 7.0), (-6.6, 3.0), (-6.0, 1.0), (-4.0, 0.6), (0.0, 0.0))
    s["Sine"] = wave(-10.0, 0.0, 3.2, 1.0, n=21)
    s["Snake"] = wave(-10.0, 0.0, 2.1, 2.5, n=31)
    s["Worm"] = wave(-10.0, 0.0, 1.1, 1.0, n=21, tilt=0.12, taper=-0.8)
    s["CShape"] = arc(-5.0, 0.0, 4.6, 4.6, 70.0, 290.0)
    s["Sharpc"] = arc(-5.0, 0.0, 3.1, 4.9, 55.0, 305.0)
    s["GShape"] = np.vstack([
        arc(-5.0, 0.0, 4.4, 4.6, 75.0, 330.0),
        pts((-2.4, -1.6), (-3.4, -0.6), (-4.6, -0.8)),
    ])
    s["JShape"] = np.vstack([
        pts((-2.0, 7.0), (-2.2, 3.0), (-2.5, -0.8)),
        arc(-4.6, -1.2, 2.2, 2.6, -10.0, -175.0, n=14),
    ])
    s["JShape_2"] = np.vstack([
        pts((-1.0, 6.5), (-1.8, 2.5), (-2.4, -0.4)),
        arc(-5.2, -0.8, 3.0, 3.4, -15.0, -200.0, n=16),
    ])
    s["Khamesh"] = pts((-9.0, 5.0), (-7.2, 2.0), (-6.2, 4.0), (-5.0, 1.0),
                       (-3.6, 3.2), (-2.2, 0.2), (-1.2, 1.6), (0.0, 0.0))
    s["Leaf_1"] = np.vstack([
        pts((-0.2, 0.4), (-3.0, 1.9), (-6.0, 2.3), (-8.6, 1.3), (-9.6, 0.0)),
        pts((-8.6, -1.1), (-6.0, -1.7), (-3.0, -1.3), (0.0, 0.0)),
    ])
    s["Leaf_2"] = np.vstack([
        pts((-0.2, 0.5), (-2.4, 2.8), (-5.0, 3.4), (-7.4, 2.2), (-8.2, 0.2)),
        pts((-7.4, -1.9), (-5.0, -2.9), (-2.4, -2.3), (0.0, 0.3)),
    ])
    s["LShape"] = pts((-8.0, 8.0), (-8.1, 4.0), (-8.0, 1.0), (-7.5, 0.0),
                      (-6.5, -0.3), (-3.0, -0.2), (0.0, 0.0))
    s["NShape"] = pts((-9.0, -4.0), (-8.9, 0.0), (-8.8, 4.5), (-6.6, 0.4),
                      (-4.4, -4.3), (-4.2, 0.0), (-4.0, 4.5))
    s["PShape"] = np.vstack([
        pts((-5.8, -4.5), (-6.0, 0.0), (-6.2, 4.0)),
        arc(-4.4, 3.9, 2.1, 1.9, 150.0, -150.0, n=16),
    ])
    s["RShape"] = np.vstack([
        pts((-6.0, -4.5), (-6.2, 0.0), (-6.4, 4.2)),
        arc(-4.7, 4.0, 1.9, 1.7, 150.0, -150.0, n=14),
        pts((-5.4, 1.6), (-3.8, -1.6), (-2.6, -4.4)),
    ])
    s["Saeghe"] = pts((-7.0, 6.0), (-4.6, 2.6), (-5.9, 2.2), (-2.9, -2.2),
                      (-4.0, -2.6), (-0.6, -5.6))
    s["Spoon"] = np.vstack([
        pts((-9.6, 4.6), (-7.0, 2.9), (-4.2, 1.1), (-2.4, -0.4)),
        arc(-2.9, -2.1, 1.8, 1.8, 70.0, -250.0, n=16),
    ])
    s["Sshape"] = np.vstack([
        arc(-4.4, 3.4, 2.6, 2.2, 40.0, 200.0, n=14),
        arc(-5.2, -1.4, 2.8, 2.4, 20.0, -160.0, n=14),
    ])
    s["Trapezoid"] = pts((-9.0, -3.5), (-7.2, 3.4), (-6.6, 3.7), (-3.4, 3.7),
                         (-2.8, 3.4), (-1.0, -3.5))
    s["WShape"] = pts((-9.2, 5.0), (-6.9, -4.2), (-4.6, 2.6), (-2.3, -4.2),
                      (0.0, 5.0))
    s["Zshape"] = pts((-9.0, 4.4), (-5.0, 4.5), (-1.6, 4.4), (-8.3, -3.9),
                      (-4.5, -4.0), (-0.6, -3.9))
    s["heee"] = np.vstack([
        pts((-6.2, 0.6), (-4.2, 1.9), (-2.9, 0.8), (-3.5, -0.8), (-5.6, -1.5)),
        pts((-7.7, -0.5), (-8.5, 1.7), (-7.1, 3.5), (-4.1, 3.9), (-1.7, 2.7),
            (-0.5, 0.7)),
    ])
    s["BendedLine"] = pts((-9.0, 3.6), (-6.8, 1.2), (-4.6, -1.4), (-2.2, -0.4),
                          (0.0, 0.6))
    s["DoubleBendedLine"] = pts((-9.0, 4.0), (-7.4, 1.2), (-6.0, -1.0),
                                (-4.4, 0.8), (-3.0, 2.0), (-1.4, 0.6),
                                (0.0, -0.6))
    return s


CONCEPT_MERGES = {
    "DoubleBendedLine": "BendedLine",
    "Sharpc": "CShape",
    "JShape_2": "JShape",
    "Leaf_1": "Leaf",
    "Leaf_2": "Leaf",
    "heee": "Heee",
    "Zshape": "ZShape",
}


def concept_of(shape: str) -> str:
    return CONCEPT_MERGES.get(shape, shape)


def chaikin(points: np.ndarray, iterations: int = 4) -> np.ndarray:
    """Corner-cutting smoothing; keeps the endpoints."""
    p = np.asarray(points, dtype=float)
    for _ in range(iterations):
        q = p[:-1] * 0.75 + p[1:] * 0.25
        r = p[:-1] * 0.25 + p[1:] * 0.75
        mid = np.empty((2 * (len(p) - 1), 2))
        mid[0::2] = q
        mid[1::2] = r
        p = np.vstack([p[:1], mid, p[-1:]])
    return p


def smooth_noise(rng, n, amp, window=61):
    raw = rng.normal(0.0, 1.0, size=(n + window, 2))
    kernel = np.ones(window) / window
    out = np.stack([np.convolve(raw[:, k], kernel, mode="valid")[:n]
                    for k in range(2)], axis=1)
    return out * amp * np.sqrt(window)


def make_demo(controls: np.ndarray, rng, num_points: int) -> np.ndarray:
    jig = controls + rng.normal(0.0, 0.12, size=controls.shape)
    path = chaikin(jig)
    center = path.mean(axis=0)
    angle = rng.uniform(-0.06, 0.06)
    scale = rng.uniform(0.93, 1.07)
    rot = np.array([[np.cos(angle), -np.sin(angle)],
                    [np.sin(angle), np.cos(angle)]])
    path = (path - center) @ rot.T * scale + center
    path = resample_arclength(path, num_points)
    path += smooth_noise(rng, num_points, amp=0.035)
    return path


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/lasa")
    ap.add_argument("--labels", default="data/concepts.csv")
    ap.add_argument("--seed", type=int, default=20240)
    ap.add_argument("--demos", type=int, default=7)
    ap.add_argument("--points", type=int, default=1000)
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    controls = shape_controls()
    shapes = sorted(controls)
    for si, shape in enumerate(shapes):
        lines = ["demo,t,y,z"]
        for di in range(args.demos):
            rng = np.random.default_rng(
                np.random.SeedSequence(args.seed, spawn_key=(si, di)))
            path = make_demo(controls[shape], rng, args.points)
            for t in range(args.points):
                lines.append(f"{di},{t},{path[t, 0]:.6f},{path[t, 1]:.6f}")
        (out / f"{shape}.csv").write_text("\n".join(lines) + "\n",
                                          encoding="utf-8")
    labels_path = Path(args.labels)
    labels_path.parent.mkdir(parents=True, exist_ok=True)
    rows = ["shape,concept"] + [f"{s},{concept_of(s)}" for s in shapes]
    labels_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    concepts = sorted({concept_of(s) for s in shapes})
    print(f"wrote {len(shapes)} shapes x {args.demos} demos -> {out}")
    print(f"label map with {len(concepts)} concepts -> {labels_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

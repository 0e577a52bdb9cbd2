#!/usr/bin/env python3
"""Generate the small test corpus: 3 shapes x 6 demos, 200 points each.

Same interchange format as the main corpus, tiny enough for fast tests
and the example configuration. Deterministic for a given seed.

Usage: python3 scripts/make_toy_corpus.py [--out data/toy]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from make_corpus import make_demo, pts, wave  # noqa: E402


def toy_controls() -> dict:
    return {
        "arch": pts((-8.0, 0.0), (-6.5, 3.2), (-4.0, 4.6), (-1.5, 3.2),
                    (0.0, 0.0)),
        "zig": pts((-8.0, 4.0), (-5.4, -3.0), (-2.6, 4.0), (0.0, -3.0)),
        "wave": wave(-8.0, 0.0, 2.4, 1.5, n=19),
    }


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/toy")
    ap.add_argument("--labels", default="data/toy_concepts.csv")
    ap.add_argument("--seed", type=int, default=515)
    ap.add_argument("--demos", type=int, default=6)
    ap.add_argument("--points", type=int, default=200)
    args = ap.parse_args(argv)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    controls = toy_controls()
    for si, shape in enumerate(sorted(controls)):
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
    rows = ["shape,concept"] + [f"{s},{s}" for s in sorted(controls)]
    labels_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    print(f"wrote {len(controls)} shapes x {args.demos} demos -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Emit all bound-versus-simulation figure data as CSV.

Writes fig2 (predator maximum with all three upper-bound variants),
fig3 (log prey minimum), fig4 (log predator minimum) and fig5 (prey
maximum) curves over 50 log-spaced m in [0.01, 5] for the four standard
parameter panels.  The a = lam = 0.1 panel sits outside the proven box
and is evaluated in forced mode.
"""

import argparse
import sys
from pathlib import Path

from cyclebound.harness import DEFAULT_PANELS, emit_figures
from cyclebound.simulator import SimConfig


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("figures"))
    parser.add_argument("--points", type=int, default=50)
    parser.add_argument(
        "--panel",
        action="append",
        metavar="A,LAMBDA",
        help=f"panels to emit (default: {DEFAULT_PANELS})",
    )
    args = parser.parse_args()

    panels = None
    if args.panel:
        panels = [tuple(float(v) for v in spec.split(",")) for spec in args.panel]
    import numpy as np

    paths = emit_figures(
        "all",
        args.out,
        panels=panels,
        m_values=np.geomspace(0.01, 5.0, args.points),
        cfg=SimConfig.from_env(),
    )
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())

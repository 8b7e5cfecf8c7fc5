"""Regenerate the full catalogue of preset stability maps.

Writes one CSV and one PGM per map into the output directory.  The dn
presets are swept at all three catalogued heat-content ratios, the bulk
variant presets at each variant index.
"""

import argparse
import dataclasses
import os
import time

from cplstab.sweep import (
    FIG4_VARIANTS,
    FIG6_VARIANTS,
    FIG89_RATIOS,
    preset_sweep,
    run_sweep,
    write_csv,
    write_pgm,
)


def catalogue():
    yield "fig3", preset_sweep("fig3")
    for k in range(len(FIG4_VARIANTS)):
        yield f"fig4_v{k}", preset_sweep("fig4", variant=k)
    yield "fig5", preset_sweep("fig5")
    for k in range(len(FIG6_VARIANTS)):
        yield f"fig6_v{k}", preset_sweep("fig6", variant=k)
    for name in ("fig8", "fig9"):
        for ratio in FIG89_RATIOS:
            yield f"{name}_r{ratio:g}", preset_sweep(name, r=ratio)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="figures", help="output directory")
    parser.add_argument("--only", default="", help="substring filter on map names")
    parser.add_argument("--n-minus", type=int, default=None)
    parser.add_argument("--n-plus", type=int, default=None)
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    for name, spec in catalogue():
        if args.only and args.only not in name:
            continue
        if args.n_minus is not None:
            spec = dataclasses.replace(spec, n_minus=args.n_minus)
        if args.n_plus is not None:
            spec = dataclasses.replace(spec, n_plus=args.n_plus)
        start = time.monotonic()
        field = run_sweep(spec)
        write_csv(field, os.path.join(args.out, name + ".csv"))
        write_pgm(field, os.path.join(args.out, name + ".pgm"))
        stable = int((field.classification == "stable").sum())
        print(f"{name:14s} {stable:6d}/{field.classification.size} stable cells"
              f"  ({time.monotonic() - start:5.1f} s)")


if __name__ == "__main__":
    main()

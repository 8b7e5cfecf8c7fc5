"""Spot-audit the normal-mode scan against the matrix eigenproblem.

Draws random parameter points per scheme, skips the marginal band where a
finite matrix cannot decide, and counts verdict disagreements.  Exits
nonzero on any disagreement, so the script doubles as a regression probe
for larger samples than the test suite runs.
"""

import argparse
import sys
import time
import warnings

import numpy as np

from cplstab import (
    SCHEMES,
    DimensionlessParams,
    ScanSettings,
    UnconfirmedRootWarning,
    assemble,
    eigen_spectrum,
    normal_mode_verdict,
    update_matrix,
)


def draw(rng, name):
    if name.startswith("one-way"):
        d, beta = 10.0 ** rng.uniform(-2.0, 2.0, size=2)
        return DimensionlessParams(0.0, float(d), 0.0, float(beta), 1.0)
    if name.startswith("dn"):
        dp, dm, r = 10.0 ** rng.uniform(-2.0, 2.0, size=3)
        return DimensionlessParams(float(dp), float(dm), 0.0, 0.0, float(r))
    dp, dm, bp, bm = 10.0 ** rng.uniform(-2.0, 2.0, size=4)
    return DimensionlessParams(float(dp), float(dm), float(bp), float(bm), 1.0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=50, help="points per scheme")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--n", type=int, default=60, help="cells per domain")
    parser.add_argument("--margin", type=float, default=5e-3,
                        help="skip draws with lambda_max this close to 1")
    args = parser.parse_args()

    total = 0
    start = time.monotonic()
    for name, scheme in SCHEMES.items():
        rng = np.random.default_rng(seed=args.seed)
        done = bad = 0
        while done < args.points:
            p = draw(rng, name)
            pair = assemble(scheme, p, args.n, args.n)
            lam = eigen_spectrum(update_matrix(pair)).lambda_max
            if abs(lam - 1.0) <= args.margin:
                continue
            done += 1
            settings = ScanSettings(radius_max=max(10.0, 1.5 * lam + 1.0))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", UnconfirmedRootWarning)
                verdict = normal_mode_verdict(scheme, p, scan=settings)
            if verdict != (lam <= 1.0):
                bad += 1
                print(f"  disagree: lambda_max={lam:.6f} at {p}")
        total += bad
        print(f"{name:22s} {done:4d} points, {bad} disagreements")
    print(f"total: {total} disagreements ({time.monotonic() - start:.1f} s)")
    return 1 if total else 0


if __name__ == "__main__":
    sys.exit(main())

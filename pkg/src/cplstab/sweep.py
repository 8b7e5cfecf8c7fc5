"""Stability maps over two dimensionless parameters.

A sweep fixes three of the five groups, varies the remaining two on a grid,
and records the spectral radius and its classification per cell.  Output is
a flat CSV (x fastest, y ascending) and optionally a plain PGM rendering of
the spectral radius with 2.0 mapped to full scale.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import assembly, spectral
from .errors import ParameterDomainError
from .params import DimensionlessParams

AXIS_NAMES = ("d_plus", "d_minus", "beta_plus", "beta_minus", "r")

DEFAULT_LO = 1e-2
DEFAULT_HI = 1e3
DEFAULT_POINTS = 101
DEFAULT_N_MINUS = 20
DEFAULT_N_PLUS = 10


@dataclass(frozen=True)
class Axis:
    """One swept parameter with its sampling."""

    name: str
    lo: float
    hi: float
    points: int
    scale: str = "log"

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ParameterDomainError(f"unknown axis {self.name!r}")
        if self.scale not in ("log", "linear"):
            raise ParameterDomainError(f"unknown axis scale {self.scale!r}")
        if self.points < 2:
            raise ParameterDomainError("an axis needs at least 2 points")
        if not (0.0 < self.lo <= self.hi) and self.scale == "log":
            raise ParameterDomainError("log axis needs 0 < lo <= hi")
        if not (self.lo <= self.hi):
            raise ParameterDomainError("axis needs lo <= hi")

    def values(self):
        if self.scale == "log":
            return np.logspace(np.log10(self.lo), np.log10(self.hi), self.points)
        return np.linspace(self.lo, self.hi, self.points)


def default_axis(name):
    return Axis(name, DEFAULT_LO, DEFAULT_HI, DEFAULT_POINTS, "log")


@dataclass(frozen=True)
class SweepSpec:
    scheme: assembly.SchemeSpec
    axis_x: Axis
    axis_y: Axis
    fixed: dict
    n_minus: int = DEFAULT_N_MINUS
    n_plus: int = DEFAULT_N_PLUS
    tol: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.axis_x.name == self.axis_y.name:
            raise ParameterDomainError("the two axes must differ")
        remaining = set(AXIS_NAMES) - {self.axis_x.name, self.axis_y.name}
        given = set(self.fixed)
        if given != remaining:
            raise ParameterDomainError(
                f"fixed values must cover exactly {sorted(remaining)}, got {sorted(given)}"
            )
        if self.n_minus < 1 or self.n_plus < 1:
            raise ParameterDomainError("domain sizes must be at least 1")
        if not (self.tol > 0.0):
            raise ParameterDomainError("tol must be positive")


@dataclass
class StabilityField:
    """Sweep result: lambda_max and class per cell, row-major in y."""

    x_values: np.ndarray
    y_values: np.ndarray
    lambda_max: np.ndarray  # shape (len(y_values), len(x_values))
    classification: np.ndarray  # same shape, strings
    warning_count: int
    metadata: dict = field(default_factory=dict)


def _evaluate_point(spec, values):
    p = DimensionlessParams(**values)
    pair = assembly.assemble(spec.scheme, p, spec.n_minus, spec.n_plus)
    m = spectral.update_matrix(pair)
    spectrum = spectral.eigen_spectrum(m)
    return spectrum.lambda_max


def run_sweep(spec):
    """Evaluate the grid; failed cells become NaN with class 'failed'."""
    xs = spec.axis_x.values()
    ys = spec.axis_y.values()
    ny, nx = ys.shape[0], xs.shape[0]
    lam = np.full((ny, nx), np.nan)
    cls = np.full((ny, nx), "failed", dtype="<U8")
    warning_count = 0

    def point(index):
        iy, ix = divmod(index, nx)
        values = dict(spec.fixed)
        values[spec.axis_x.name] = float(xs[ix])
        values[spec.axis_y.name] = float(ys[iy])
        try:
            return _evaluate_point(spec, values)
        except Exception:
            return None

    workers = int(os.environ.get("CPLSTAB_WORKERS", "1"))
    indices = range(ny * nx)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(point, indices))
    else:
        results = [point(i) for i in indices]
    for index, value in zip(indices, results):
        iy, ix = divmod(index, nx)
        if value is None:
            warning_count += 1
            continue
        lam[iy, ix] = value
        cls[iy, ix] = spectral.classify(value, spec.tol).value
    metadata = {
        "scheme": assembly.scheme_name(spec.scheme),
        "axis_x": spec.axis_x.name,
        "axis_y": spec.axis_y.name,
        "fixed": dict(spec.fixed),
        "n_minus": spec.n_minus,
        "n_plus": spec.n_plus,
        "tol": spec.tol,
        "seed": spec.seed,
        "version": "0.1.0",
    }
    return StabilityField(xs, ys, lam, cls, warning_count, metadata)


# --- writers ---


def _repr_float(value):
    return repr(float(value))


def write_csv(field_result, path):
    """Flat CSV: header names the axes, rows walk x fastest with y ascending."""
    f = field_result
    lines = [f"{f.metadata['axis_x']},{f.metadata['axis_y']},lambda_max,class"]
    for iy, yv in enumerate(f.y_values):
        for ix, xv in enumerate(f.x_values):
            lines.append(f"{_repr_float(xv)},{_repr_float(yv)},"
                         f"{_repr_float(f.lambda_max[iy, ix])},{f.classification[iy, ix]}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def write_pgm(field_result, path):
    """Plain PGM (P2) of lambda_max: 2.0 and above map to 255, NaN to 0.

    Row 0 holds the largest y so the image reads like the plots.
    """
    f = field_result
    lam = f.lambda_max
    ny, nx = lam.shape
    pixels = np.zeros((ny, nx), dtype=int)
    finite = np.isfinite(lam)
    clipped = np.minimum(lam[finite], 2.0)
    pixels[finite] = np.floor(255.0 * clipped / 2.0).astype(int)
    tokens_per_row = [
        " ".join(str(v) for v in pixels[iy])
        for iy in range(ny - 1, -1, -1)
    ]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("P2\n")
        fh.write(f"{nx} {ny}\n")
        fh.write("255\n")
        for row in tokens_per_row:
            # keep plain-format lines short for strict readers
            tokens = row.split(" ")
            line = []
            length = 0
            for token in tokens:
                if length and length + 1 + len(token) > 68:
                    fh.write(" ".join(line))
                    fh.write("\n")
                    line, length = [], 0
                line.append(token)
                length += len(token) + (1 if length else 0)
            if line:
                fh.write(" ".join(line))
                fh.write("\n")


# --- presets mirroring the reference stability maps ---


def _bulk_minus_plane(scheme_name_, beta_plus, d_plus):
    return SweepSpec(
        scheme=assembly.SCHEMES[scheme_name_],
        axis_x=default_axis("d_minus"),
        axis_y=default_axis("beta_minus"),
        fixed={"beta_plus": beta_plus, "d_plus": d_plus, "r": 1.0},
    )


def _bulk_plus_plane(scheme_name_, beta_minus, d_minus):
    return SweepSpec(
        scheme=assembly.SCHEMES[scheme_name_],
        axis_x=default_axis("d_plus"),
        axis_y=default_axis("beta_plus"),
        fixed={"beta_minus": beta_minus, "d_minus": d_minus, "r": 1.0},
    )


def _dn_plane(scheme_name_, r):
    axis = Axis("d_minus", 0.05, 1.0, 41, "linear")
    return SweepSpec(
        scheme=assembly.SCHEMES[scheme_name_],
        axis_x=axis,
        axis_y=Axis("d_plus", 0.05, 1.0, 41, "linear"),
        fixed={"beta_minus": 0.0, "beta_plus": 0.0, "r": r},
    )


# fig4/fig6 variants step the fixed parameters through coarser grids;
# fig8/fig9 step the heat-content ratio
FIG4_VARIANTS = ((2.375, 9.025), (4.875, 38.025), (9.875, 156.025))
FIG6_VARIANTS = ((0.012188, 38.025), (0.024688, 156.025), (0.049688, 632.025))
FIG89_RATIOS = (2000.0, 1.0, 5e-4)


def preset_sweep(name, scheme="bulk-explicit-flux", variant=0, r=1.0):
    """Named parameter planes; see the README for the catalogue."""
    if name == "fig3":
        return _bulk_minus_plane(scheme, 1.125, 2.025)
    if name == "fig4":
        beta_plus, d_plus = FIG4_VARIANTS[variant]
        return _bulk_minus_plane(scheme, beta_plus, d_plus)
    if name == "fig5":
        return _bulk_plus_plane(scheme, 0.005938, 9.025)
    if name == "fig6":
        beta_minus, d_minus = FIG6_VARIANTS[variant]
        return _bulk_plus_plane(scheme, beta_minus, d_minus)
    if name == "fig8":
        return _dn_plane("dn-explicit", r)
    if name == "fig9":
        return _dn_plane("dn-implicit", r)
    raise ParameterDomainError(f"unknown preset {name!r}")


PRESET_NAMES = ("fig3", "fig4", "fig5", "fig6", "fig8", "fig9")

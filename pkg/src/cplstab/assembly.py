"""Monolithic update pairs A T^{n+1} = B T^n for the coupling scheme family.

Cells are ordered with the negative domain first, most negative cell first,
so the interface sits between indices n_minus-1 and n_minus.  The far ends of
both domains are homogeneous Dirichlet: the out-of-range neighbor is dropped
while the diagonal keeps its interior value.

Bulk interface rows (theta, gamma in {0, 1} pick the flux time levels):

    A row n_minus-1:  [-d_minus, d_minus + theta*beta_minus + 1, -gamma*beta_minus]
    A row n_minus:    [-gamma*beta_plus, d_plus + theta*beta_plus + 1, -d_plus]
    B 2x2 block:      [[1-(1-theta)*beta_minus, (1-gamma)*beta_minus],
                       [(1-gamma)*beta_plus,    1-(1-theta)*beta_plus]]

The sequential variant zeroes the negative row's A coupling and moves it to B
(the negative domain steps first against the lagged positive state).  The
Dirichlet-Neumann schemes carry a shared interface node at index n_minus with
weight (1+r)/2; the one-way scheme keeps only the negative domain with the
interface flux folded into its last row.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterDomainError, SchemeError

BULK = "bulk"
DIRICHLET_NEUMANN = "dirichlet_neumann"
EXPLICIT = "explicit"
IMPLICIT = "implicit"
SIMULTANEOUS = "simultaneous"
SEQUENTIAL = "sequential"
TWO_WAY = "two_way"
ONE_WAY_NEGATIVE = "one_way_negative"
DIRICHLET = "dirichlet"
REFLECTIVE = "reflective"


@dataclass(frozen=True)
class SchemeSpec:
    """A point in the scheme family; invalid combinations are rejected."""

    interface: str
    integrator: str
    theta: int = 0
    gamma: int = 0
    formulation: str = SIMULTANEOUS
    direction: str = TWO_WAY

    def __post_init__(self):
        if self.interface not in (BULK, DIRICHLET_NEUMANN):
            raise SchemeError(f"unknown interface {self.interface!r}")
        if self.integrator not in (EXPLICIT, IMPLICIT):
            raise SchemeError(f"unknown integrator {self.integrator!r}")
        if self.theta not in (0, 1) or self.gamma not in (0, 1):
            raise SchemeError("theta and gamma must be 0 or 1")
        if self.formulation not in (SIMULTANEOUS, SEQUENTIAL):
            raise SchemeError(f"unknown formulation {self.formulation!r}")
        if self.direction not in (TWO_WAY, ONE_WAY_NEGATIVE):
            raise SchemeError(f"unknown direction {self.direction!r}")
        if self.interface == BULK and self.integrator != IMPLICIT:
            raise SchemeError("bulk interface requires the implicit integrator")
        if self.interface == DIRICHLET_NEUMANN:
            if self.theta != 0 or self.gamma != 0:
                raise SchemeError("Dirichlet-Neumann schemes have no theta/gamma freedom")
            if self.formulation != SIMULTANEOUS or self.direction != TWO_WAY:
                raise SchemeError("Dirichlet-Neumann schemes are simultaneous and two-way")
        if self.formulation == SEQUENTIAL:
            if self.interface != BULK or self.direction != TWO_WAY:
                raise SchemeError("sequential formulation is defined for two-way bulk coupling")
        if self.direction == ONE_WAY_NEGATIVE:
            if self.interface != BULK or self.gamma != 0:
                raise SchemeError("one-way coupling is a bulk scheme with gamma = 0")


# Canonical named variants (theta, gamma select the interface flux levels;
# one-way theta selects explicit vs implicit flux in the boundary row).
SCHEMES = {
    "bulk-explicit-flux": SchemeSpec(BULK, IMPLICIT, theta=0, gamma=0),
    "bulk-partial-flux": SchemeSpec(BULK, IMPLICIT, theta=1, gamma=0),
    "bulk-implicit-flux": SchemeSpec(BULK, IMPLICIT, theta=1, gamma=1),
    "bulk-sequential": SchemeSpec(BULK, IMPLICIT, theta=1, gamma=1, formulation=SEQUENTIAL),
    "dn-explicit": SchemeSpec(DIRICHLET_NEUMANN, EXPLICIT),
    "dn-implicit": SchemeSpec(DIRICHLET_NEUMANN, IMPLICIT),
    "one-way-explicit-flux": SchemeSpec(BULK, IMPLICIT, theta=0, direction=ONE_WAY_NEGATIVE),
    "one-way-implicit-flux": SchemeSpec(BULK, IMPLICIT, theta=1, direction=ONE_WAY_NEGATIVE),
}


def scheme_name(scheme):
    """Canonical name of a scheme, or its repr when unnamed."""
    for name, spec in SCHEMES.items():
        if spec == scheme:
            return name
    return repr(scheme)


@dataclass(frozen=True)
class Layout:
    """How a packed state vector maps onto the two domains."""

    kind: str  # BULK, DIRICHLET_NEUMANN, or ONE_WAY_NEGATIVE
    n_minus: int
    n_plus: int
    sequential: bool = False

    @property
    def n(self):
        if self.kind == DIRICHLET_NEUMANN:
            return self.n_minus + self.n_plus + 1
        if self.kind == ONE_WAY_NEGATIVE:
            return self.n_minus
        return self.n_minus + self.n_plus

    @property
    def has_shared_node(self):
        return self.kind == DIRICHLET_NEUMANN


@dataclass(frozen=True)
class UpdatePair:
    """Dense A and B with A tridiagonal; arrays are frozen after assembly."""

    A: np.ndarray
    B: np.ndarray
    layout: Layout

    def __post_init__(self):
        self.A.setflags(write=False)
        self.B.setflags(write=False)

    @property
    def n(self):
        return self.A.shape[0]


def _check_sizes(n_minus, n_plus=1):
    for name, value in (("n_minus", n_minus), ("n_plus", n_plus)):
        if not isinstance(value, (int, np.integer)) or value < 1:
            raise ParameterDomainError(f"{name} must be an integer >= 1, got {value!r}")


def _check_far_field(far_field, *sizes):
    if far_field not in (DIRICHLET, REFLECTIVE):
        raise ParameterDomainError(f"unknown far-field closure {far_field!r}")
    # with a single cell the far-field row and the interface row coincide
    if far_field == REFLECTIVE and min(sizes) < 2:
        raise ParameterDomainError("reflective far field needs at least 2 cells per domain")


def _backward_euler_block(A, lo, hi, d, far_field, closed_ends):
    """Fill rows lo..hi-1 of A with the implicit interior stencil [-d, 1+2d, -d].

    closed_ends marks which of (first, last) rows sit at the far field; a
    reflective closure there drops one d from the diagonal.
    """
    for i in range(lo, hi):
        A[i, i] = 1.0 + 2.0 * d
        if i > lo:
            A[i, i - 1] = -d
        if i + 1 < hi:
            A[i, i + 1] = -d
    first_closed, last_closed = closed_ends
    if far_field == REFLECTIVE:
        if first_closed:
            A[lo, lo] = 1.0 + d
        if last_closed:
            A[hi - 1, hi - 1] = 1.0 + d


def assemble_bulk(p, n_minus, n_plus, theta, gamma, formulation=SIMULTANEOUS,
                  far_field=DIRICHLET):
    """Bulk-interface update pair on n_minus + n_plus cells.

    far_field selects the closure at the two outer ends; the reflective option
    exists for conservation checks and is not part of the analyzed family.
    """
    _check_sizes(n_minus, n_plus)
    _check_far_field(far_field, n_minus, n_plus)
    if theta not in (0, 1) or gamma not in (0, 1):
        raise SchemeError("theta and gamma must be 0 or 1")
    if formulation not in (SIMULTANEOUS, SEQUENTIAL):
        raise SchemeError(f"unknown formulation {formulation!r}")
    dm, dp = p.d_minus, p.d_plus
    bm, bp = p.beta_minus, p.beta_plus
    n = n_minus + n_plus
    A = np.zeros((n, n))
    B = np.eye(n)
    im, ip = n_minus - 1, n_minus
    _backward_euler_block(A, 0, n_minus, dm, far_field, (True, False))
    _backward_euler_block(A, n_minus, n, dp, far_field, (False, True))
    # interface rows
    A[im, im] = dm + theta * bm + 1.0
    A[ip, ip] = dp + theta * bp + 1.0
    A[im, ip] = -gamma * bm
    A[ip, im] = -gamma * bp
    B[im, im] = 1.0 - (1.0 - theta) * bm
    B[ip, ip] = 1.0 - (1.0 - theta) * bp
    B[im, ip] = (1.0 - gamma) * bm
    B[ip, im] = (1.0 - gamma) * bp
    if formulation == SEQUENTIAL:
        # negative domain steps first: its coupling to the positive state is lagged
        A[im, ip] = 0.0
        B[im, ip] = bm
    layout = Layout(BULK, n_minus, n_plus, sequential=(formulation == SEQUENTIAL))
    return UpdatePair(A, B, layout)


def assemble_one_way(p, n_minus, flux, far_field=DIRICHLET):
    """One-way coupled negative domain; the positive side acts as forcing only.

    flux is EXPLICIT or IMPLICIT and selects the time level of the interface
    flux in the last row.
    """
    _check_sizes(n_minus)
    _check_far_field(far_field, n_minus)
    if flux not in (EXPLICIT, IMPLICIT):
        raise SchemeError(f"unknown flux level {flux!r}")
    dm, bm = p.d_minus, p.beta_minus
    A = np.zeros((n_minus, n_minus))
    B = np.eye(n_minus)
    _backward_euler_block(A, 0, n_minus, dm, far_field, (True, False))
    if flux == EXPLICIT:
        A[-1, -1] = 1.0 + dm
        B[-1, -1] = 1.0 - bm
    else:
        # summed in bulk-row order so the block-equality contract holds exactly
        A[-1, -1] = dm + bm + 1.0
    layout = Layout(ONE_WAY_NEGATIVE, n_minus, 0)
    return UpdatePair(A, B, layout)


def assemble_dn_explicit(p, n_minus, n_plus):
    """Forward-Euler Dirichlet-Neumann pair with a shared interface node.

    A is the identity apart from the interface weight (1+r)/2; B carries the
    explicit stencils and the flux-balance interface row.
    """
    _check_sizes(n_minus, n_plus)
    dm, dp, r = p.d_minus, p.d_plus, p.r
    n = n_minus + n_plus + 1
    k = n_minus  # shared node
    A = np.eye(n)
    A[k, k] = (1.0 + r) / 2.0
    B = np.zeros((n, n))
    for i in range(n):
        if i == k:
            continue
        d = dm if i < k else dp
        B[i, i] = 1.0 - 2.0 * d
        if i - 1 >= 0:
            B[i, i - 1] = d
        if i + 1 < n:
            B[i, i + 1] = d
    B[k, k] = (1.0 + r) / 2.0 - dm - dp * r
    B[k, k - 1] = dm
    B[k, k + 1] = dp * r
    return UpdatePair(A, B, Layout(DIRICHLET_NEUMANN, n_minus, n_plus))


def assemble_dn_implicit(p, n_minus, n_plus):
    """Backward-Euler Dirichlet-Neumann pair with a shared interface node.

    The interface row closes the negative solve with the positive flux taken
    at the old time level, so A splits into two independent blocks: the
    negative domain plus interface node, and the positive domain whose first
    row sees the old interface value through B.
    """
    _check_sizes(n_minus, n_plus)
    dm, dp, r = p.d_minus, p.d_plus, p.r
    n = n_minus + n_plus + 1
    k = n_minus
    A = np.zeros((n, n))
    B = np.eye(n)
    _backward_euler_block(A, 0, n_minus, dm, DIRICHLET, (True, False))
    A[k - 1, k] = -dm  # the negative stencil continues into the shared node
    for i in range(k, n):
        A[i, i] = 1.0 + 2.0 * dp
        if i > k + 1:
            A[i, i - 1] = -dp
        if i + 1 < n:
            A[i, i + 1] = -dp
    # interface row: negative flux implicit, positive flux lagged into B
    A[k, k] = (1.0 + r) / 2.0 + dm
    A[k, k - 1] = -dm
    A[k, k + 1] = 0.0
    B[k, k] = (1.0 + r) / 2.0 - dp * r
    B[k, k + 1] = dp * r
    # first positive row: Dirichlet value from the interface taken explicitly
    A[k + 1, k + 1] = dp + 1.0
    if k + 2 < n:
        A[k + 1, k + 2] = -dp
    B[k + 1, k] = dp
    B[k + 1, k + 1] = 1.0 - dp
    return UpdatePair(A, B, Layout(DIRICHLET_NEUMANN, n_minus, n_plus))


def assemble(scheme, p, n_minus, n_plus):
    """Build the update pair for any SchemeSpec."""
    if scheme.direction == ONE_WAY_NEGATIVE:
        flux = IMPLICIT if scheme.theta == 1 else EXPLICIT
        return assemble_one_way(p, n_minus, flux)
    if scheme.interface == DIRICHLET_NEUMANN:
        if scheme.integrator == EXPLICIT:
            return assemble_dn_explicit(p, n_minus, n_plus)
        return assemble_dn_implicit(p, n_minus, n_plus)
    return assemble_bulk(p, n_minus, n_plus, scheme.theta, scheme.gamma, scheme.formulation)


def write_dense_csv(matrix, path):
    """Dump a matrix as dense CSV, row-major, 17 significant digits."""
    matrix = np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.atleast_2d(matrix):
            fh.write(",".join("%.17g" % v for v in row))
            fh.write("\n")

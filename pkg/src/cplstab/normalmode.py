"""Normal-mode (GKS-style) stability analysis on the semi-infinite lattice.

A temporal mode T_j^n = A^n kappa^j solves the interior stencil when kappa
satisfies kappa^2 - 2(1+s)kappa + 1 = 0 with s = (1 - 1/A)/(2d) for the
backward-Euler interior and s = (A - 1)/(2d) for the forward-Euler interior.
The two roots multiply to one; the decaying branch (modulus <= 1) enters the
interface conditions, and eliminating the mode amplitudes leaves a scalar
residual whose roots with |A| > 1 are the growing modes.  `gks_scan` locates
those roots on an annulus grid and polishes them with a damped Newton
iteration.
"""

import cmath
import warnings
from dataclasses import dataclass

import numpy as np

from .assembly import BULK, DIRICHLET_NEUMANN, EXPLICIT, ONE_WAY_NEGATIVE, SEQUENTIAL
from .errors import (
    KappaPoleWarning,
    MarginalModeWarning,
    ParameterDomainError,
    SchemeError,
    SingularityError,
    UnconfirmedRootWarning,
)

ADMISSIBLE_TOL = 1e-12


@dataclass(frozen=True)
class ModeSolution:
    """A temporal root with its decaying spatial factors.

    kappa_minus_inv is the per-cell decay away from the interface into the
    negative domain; kappa_plus the same for the positive domain.  admissible
    records whether both have modulus at most 1 + 1e-12.
    """

    A: complex
    kappa_plus: complex
    kappa_minus_inv: complex
    admissible: bool


@dataclass(frozen=True)
class ScanSettings:
    radius_max: float = 10.0
    n_radial: int = 64
    n_angular: int = 256
    refine_tol: float = 1e-10

    def __post_init__(self):
        if not (self.radius_max > 1.0):
            raise ParameterDomainError("radius_max must exceed 1")
        if self.n_radial < 16 or self.n_angular < 16:
            raise ParameterDomainError("scan grids need at least 16 points per direction")
        if not (self.refine_tol >= 0.0):
            raise ParameterDomainError("refine_tol must be nonnegative")


def _kappa_from_s(s):
    """Smaller-modulus root of kappa^2 - 2(1+s)kappa + 1 = 0, vectorized.

    The roots multiply to one, so the small root is the reciprocal of the
    large one; forming it that way avoids the cancellation in 1 + s - sqrt.
    """
    s = np.asarray(s, dtype=complex)
    root = np.sqrt(s * s + 2.0 * s)
    center = 1.0 + s
    plus, minus = center + root, center - root
    big = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    return 1.0 / big


def kappa_root(A, d):
    """Decaying spatial root for the backward-Euler interior at temporal root A.

    A may be the infinity token (the s = 1/(2d) limit).  When both roots sit
    on the unit circle the branch choice is ambiguous and a MarginalModeWarning
    is raised alongside the smaller root.
    """
    if not (d > 0.0):
        raise ParameterDomainError(f"d must be positive, got {d!r}")
    A = complex(A)
    if A == 0j:
        raise ParameterDomainError("A must be nonzero")
    if cmath.isinf(A):
        s = 1.0 / (2.0 * d) + 0j
    else:
        s = (1.0 - 1.0 / A) / (2.0 * d)
    root = cmath.sqrt(s * s + 2.0 * s)
    center = 1.0 + s
    plus, minus = center + root, center - root
    k_large = plus if abs(plus) >= abs(minus) else minus
    k_small = 1.0 / k_large
    if (abs(k_large) - abs(k_small) <= 1e-12 * max(1.0, abs(k_small))
            and abs(k_small - k_large) > 1e-12
            and abs(abs(k_small) - 1.0) <= 1e-12):
        warnings.warn("both spatial roots lie on the unit circle; returning one of them",
                      MarginalModeWarning)
    return k_small


# --- scalar residuals ---


def _decay_terms(A, d, backward):
    """(kappa, d*(1 - kappa)) for the decaying branch; zero stencil when d = 0."""
    if d == 0.0:
        return np.zeros_like(A), np.zeros_like(A)
    s = (1.0 - 1.0 / A) / (2.0 * d) if backward else (A - 1.0) / (2.0 * d)
    kappa = _kappa_from_s(s)
    return kappa, d * (1.0 - kappa)


def _one_way_kappa(A, p, theta):
    """Spatial factor fixed by the one-way boundary row (not branch-selected)."""
    dm, bm = p.d_minus, p.beta_minus
    if theta == 1:
        return (1.0 - 1.0 / A + bm + dm) / dm
    return (1.0 + dm + (bm - 1.0) / A) / dm


def _bulk_pair_residual(p, A):
    """The two coupled-interface residuals of the explicit-flux bulk scheme."""
    km_inv, _ = _decay_terms(A, p.d_minus, True)
    kp, _ = _decay_terms(A, p.d_plus, True)
    r_minus = ((1.0 - 1.0 / A)
               - (p.beta_minus / A) * (kp / km_inv - 1.0)
               + p.d_minus * (1.0 - km_inv))
    r_plus = ((1.0 - 1.0 / A)
              - p.d_plus * (kp - 1.0)
              + (p.beta_plus / A) * (1.0 - km_inv / kp))
    return r_minus, r_plus


def _residual_functions(scheme, p):
    """Vectorized (residual, magnitude-scale) callables used by the scan.

    The scale callable bounds the natural size of the residual's terms so the
    polish criterion |f| <= tol * scale stays meaningful for large beta.
    """
    if scheme.direction == ONE_WAY_NEGATIVE:
        if not (p.d_minus > 0.0):
            raise ParameterDomainError("one-way analysis requires d_minus > 0")
        dm, theta = p.d_minus, scheme.theta

        # the interior residual has a pole where the boundary factor kappa
        # vanishes, and that pole can sit within a grid cell of the root;
        # multiplying through by kappa clears it without moving any root
        def f(A):
            kappa = _one_way_kappa(A, p, theta)
            return kappa * (1.0 - 1.0 / A) - dm * (kappa - 1.0) ** 2

        def scale(A):
            kappa = _one_way_kappa(A, p, theta)
            return np.abs(kappa) * np.abs(1.0 - 1.0 / A) + dm * (np.abs(kappa) + 1.0) ** 2 + 1.0

        return f, scale

    if scheme.interface == DIRICHLET_NEUMANN and scheme.integrator == EXPLICIT:
        dm, dp, r = p.d_minus, p.d_plus, p.r

        def f(A):
            _, em = _decay_terms(A, dm, False)
            _, ep = _decay_terms(A, dp, False)
            return (A - 1.0) * (1.0 + r) + 2.0 * em + 2.0 * r * ep

        def scale(A):
            _, em = _decay_terms(A, dm, False)
            _, ep = _decay_terms(A, dp, False)
            return np.abs((A - 1.0) * (1.0 + r)) + 2.0 * np.abs(em) + 2.0 * r * np.abs(ep) + 1.0

        return f, scale

    if scheme.interface == DIRICHLET_NEUMANN:
        dm, dp, r = p.d_minus, p.d_plus, p.r
        w = (1.0 + r) / 2.0

        def f(A):
            _, ep = _decay_terms(A, dp, True)
            _, em = _decay_terms(A, dm, True)
            left = w * (A - 1.0) + A * em
            bracket = A * (1.0 + ep) - (1.0 - dp)
            return (left + dp * r) * bracket - dp * dp * r

        def scale(A):
            _, ep = _decay_terms(A, dp, True)
            _, em = _decay_terms(A, dm, True)
            left = w * (A - 1.0) + A * em
            bracket = A * (1.0 + ep) - (1.0 - dp)
            return np.abs(left + dp * r) * np.abs(bracket) + dp * dp * r + 1.0

        return f, scale

    # bulk interface, backward-Euler interiors
    dm, dp = p.d_minus, p.d_plus
    bm, bp = p.beta_minus, p.beta_plus
    theta, gamma = scheme.theta, scheme.gamma
    sequential = scheme.formulation == SEQUENTIAL

    def factors(A):
        _, em = _decay_terms(A, dm, True)
        _, ep = _decay_terms(A, dp, True)
        f_minus = A * (1.0 + theta * bm + em) - 1.0 + (1.0 - theta) * bm
        f_plus = A * (1.0 + theta * bp + ep) - 1.0 + (1.0 - theta) * bp
        weight = (1.0 - gamma) + gamma * A
        cross = weight if sequential else weight * weight
        return f_minus, f_plus, cross

    def f(A):
        f_minus, f_plus, cross = factors(A)
        return f_minus * f_plus - bm * bp * cross

    def scale(A):
        f_minus, f_plus, cross = factors(A)
        return np.abs(f_minus) * np.abs(f_plus) + bm * bp * np.abs(cross) + 1.0

    return f, scale


def dispersion_residual(scheme, p, A):
    """Interface residual(s) of the normal-mode ansatz at temporal root A.

    For the explicit-flux bulk scheme this returns the pair of coupled
    residuals (negative row, positive row); every other scheme eliminates the
    amplitudes into a single determinant residual.  A = 0 and A = 1 are
    singular points of the reduction.
    """
    A = complex(A)
    if A == 0j or A == 1 + 0j:
        raise SingularityError(f"dispersion relation is singular at A = {A}")
    if scheme.direction == ONE_WAY_NEGATIVE:
        if not (p.d_minus > 0.0):
            raise ParameterDomainError("one-way analysis requires d_minus > 0")
        kappa = complex(_one_way_kappa(np.asarray(A, dtype=complex), p, scheme.theta))
        return (1.0 - 1.0 / A) - p.d_minus * (kappa - 2.0 + 1.0 / kappa)
    if (scheme.interface == BULK
            and scheme.theta == 0 and scheme.gamma == 0
            and scheme.formulation != SEQUENTIAL
            and p.d_minus > 0.0 and p.d_plus > 0.0):
        r_minus, r_plus = _bulk_pair_residual(p, np.asarray(A, dtype=complex))
        return complex(r_minus), complex(r_plus)
    f, _ = _residual_functions(scheme, p)
    return complex(f(np.asarray(A, dtype=complex)))


# --- root scan ---


def _mode_from_root(scheme, p, A):
    if scheme.direction == ONE_WAY_NEGATIVE:
        km_inv = complex(_one_way_kappa(np.asarray(A, dtype=complex), p, scheme.theta))
        kp = 0j
    else:
        backward = not (scheme.interface == DIRICHLET_NEUMANN and scheme.integrator == EXPLICIT)
        km_inv = complex(_decay_terms(np.asarray(A, dtype=complex), p.d_minus, backward)[0])
        kp = complex(_decay_terms(np.asarray(A, dtype=complex), p.d_plus, backward)[0])
    admissible = (abs(kp) <= 1.0 + ADMISSIBLE_TOL
                  and abs(km_inv) <= 1.0 + ADMISSIBLE_TOL)
    return ModeSolution(complex(A), kp, km_inv, admissible)


def _local_minima(values):
    padded = np.pad(values, ((1, 1), (0, 0)), constant_values=np.inf)
    down = values <= padded[:-2]
    up = values <= padded[2:]
    left = values <= np.roll(values, 1, axis=1)
    right = values <= np.roll(values, -1, axis=1)
    return down & up & left & right


def _extra_newton_step(f, z, fz):
    # one undamped step after acceptance drives the residual from the
    # acceptance band down to roundoff (quadratic convergence)
    if fz == 0:
        return z
    h = 1e-7 * max(1.0, abs(z))
    fp = complex(f(np.asarray(z + h, dtype=complex)))
    fm = complex(f(np.asarray(z - h, dtype=complex)))
    deriv = (fp - fm) / (2.0 * h)
    if deriv == 0 or not np.isfinite(abs(deriv)):
        return z
    trial = z - fz / deriv
    ft = complex(f(np.asarray(trial, dtype=complex)))
    if np.isfinite(abs(ft)) and abs(ft) < abs(fz):
        return trial
    return z


def _newton_polish(f, scale, z, tol, max_iter=60):
    for _ in range(max_iter):
        fz = complex(f(np.asarray(z, dtype=complex)))
        if not np.isfinite(abs(fz)):
            return None
        if abs(fz) <= tol * float(scale(np.asarray(z, dtype=complex))):
            return _extra_newton_step(f, z, fz)
        h = 1e-7 * max(1.0, abs(z))
        fp = complex(f(np.asarray(z + h, dtype=complex)))
        fm = complex(f(np.asarray(z - h, dtype=complex)))
        deriv = (fp - fm) / (2.0 * h)
        if deriv == 0 or not np.isfinite(abs(deriv)):
            return None
        step = fz / deriv
        damping = 1.0
        while damping > 1.0 / 64.0:
            trial = z - damping * step
            ft = complex(f(np.asarray(trial, dtype=complex)))
            if np.isfinite(abs(ft)) and abs(ft) < abs(fz):
                break
            damping /= 2.0
        else:
            return None
        z = z - damping * step
    fz = complex(f(np.asarray(z, dtype=complex)))
    if np.isfinite(abs(fz)) and abs(fz) <= tol * float(scale(np.asarray(z, dtype=complex))):
        return _extra_newton_step(f, z, fz)
    return None


def _analytic_seeds(scheme, p):
    # the one-way residuals are polynomial in A, so their roots are known in
    # closed form; seeding them guarantees the polish step sees roots that sit
    # too close to the unit circle for the grid to isolate
    if scheme.direction != ONE_WAY_NEGATIVE or not (p.d_minus > 0.0):
        return []
    beta, d = p.beta_minus, p.d_minus
    if scheme.theta == 0.0:
        seeds = one_way_explicit_roots(beta, d)
    else:
        denom = beta - d + beta * beta
        seeds = [] if denom == 0.0 else [(beta - d) / denom]
    return [complex(a) for a in seeds if abs(a) > 1.0 and np.isfinite(a)]


def gks_scan(scheme, p, scan=None):
    """Growing normal modes of a scheme: residual roots with |A| > 1.

    Scans |f| on an annulus grid just outside the unit circle, polishes every
    local minimum by damped Newton, and keeps the distinct polished roots that
    grow and whose spatial factors decay into both domains.  Candidates that
    fail to converge are reported through UnconfirmedRootWarning rather than
    silently dropped.
    """
    if scan is None:
        scan = ScanSettings()
    f, scale = _residual_functions(scheme, p)
    # geometric spacing packs rows near the unit circle, where growing modes
    # first appear
    inner = np.geomspace(1e-6, scan.radius_max - 1.0, scan.n_radial)
    # one overshoot row beyond radius_max certifies minima on the outermost
    # real row; without it, annulus truncation mints fake edge candidates
    radii = 1.0 + np.append(inner, inner[-1] * (inner[-1] / inner[-2]))
    angles = np.linspace(0.0, 2.0 * np.pi, scan.n_angular, endpoint=False)
    grid = radii[:, None] * np.exp(1j * angles)[None, :]
    with np.errstate(all="ignore"):
        magnitude = np.abs(f(grid)) / np.maximum(scale(grid).real, 1e-300)
    magnitude = np.where(np.isfinite(magnitude), magnitude, np.inf)
    minima = _local_minima(magnitude) & np.isfinite(magnitude)
    minima[-1, :] = False
    order = np.argsort(magnitude[minima], kind="stable")
    candidates = list(_analytic_seeds(scheme, p)) + list(grid[minima][order])
    roots = []
    unconfirmed = 0
    with np.errstate(all="ignore"):
        for z0 in candidates:
            z = _newton_polish(f, scale, complex(z0), scan.refine_tol)
            if z is None:
                # minima hugging the unit circle are marginal-band artifacts,
                # not missed growing roots
                if abs(z0) > 1.0 + 1e-4:
                    unconfirmed += 1
                continue
            if abs(z) <= 1.0 + 1e-7:
                continue
            if any(abs(z - known) <= 1e-6 for known in roots):
                continue
            roots.append(z)
    if unconfirmed:
        warnings.warn(f"{unconfirmed} scan candidate(s) did not converge under polishing",
                      UnconfirmedRootWarning)
    modes = [_mode_from_root(scheme, p, z) for z in roots]
    modes = [m for m in modes if m.admissible]
    modes.sort(key=lambda m: (-abs(m.A), m.A.real, m.A.imag))
    return modes


def normal_mode_verdict(scheme, p, scan=None):
    """True when the normal-mode analysis finds no growing admissible mode.

    The forward-Euler Dirichlet-Neumann scheme is judged by its interior von
    Neumann condition d <= 1/2 on both sides (independent of r); its interface
    scan adds no further restriction and serves only as a consistency check.
    """
    if scheme.interface == DIRICHLET_NEUMANN and scheme.integrator == EXPLICIT:
        return p.d_minus <= 0.5 and p.d_plus <= 0.5
    return len(gks_scan(scheme, p, scan)) == 0


# --- closed forms for the one-way schemes ---


def one_way_explicit_roots(beta, d):
    """Both temporal roots of the explicit-flux one-way boundary mode.

    The discriminant (beta - d)^2 + 4 beta^2 d is nonnegative, so the roots
    are always real.
    """
    if not (d > 0.0):
        raise ParameterDomainError(f"d must be positive, got {d!r}")
    if not (beta >= 0.0):
        raise ParameterDomainError(f"beta must be nonnegative, got {beta!r}")
    disc = (beta - d) ** 2 + 4.0 * beta * beta * d
    big = (beta + d + np.sqrt(disc)) / (2.0 * d)
    # the roots multiply to beta(1 - beta)/d; dividing by the large root
    # avoids the cancellation in (beta + d) - sqrt(disc) near beta = 0 or 1
    return big, beta * (1.0 - beta) / (d * big)


def one_way_explicit_bound(d):
    """Largest stable beta of the explicit-flux one-way scheme: 1 + sqrt(1 + 2d)."""
    if not (d > 0.0):
        raise ParameterDomainError(f"d must be positive, got {d!r}")
    return 1.0 + np.sqrt(1.0 + 2.0 * d)


def beljaars_bound(d):
    """Empirical stability margin 2 + sqrt(d)^1.1 used operationally."""
    if not (d >= 0.0):
        raise ParameterDomainError(f"d must be nonnegative, got {d!r}")
    return 2.0 + np.sqrt(d) ** 1.1


def one_way_implicit_mode(beta, d):
    """Closed-form boundary mode of the implicit-flux one-way scheme.

    The spatial factor d/(d - beta) passes through a pole at beta = d, where
    the temporal root collapses to 0; the mode is admissible exactly when
    beta >= 2d, and an admissible root never grows.
    """
    if not (d > 0.0):
        raise ParameterDomainError(f"d must be positive, got {d!r}")
    if not (beta >= 0.0):
        raise ParameterDomainError(f"beta must be nonnegative, got {beta!r}")
    if beta == d:
        warnings.warn("spatial factor has a pole at beta = d; temporal root is 0",
                      KappaPoleWarning)
        return ModeSolution(0j, 0j, complex(np.inf), False)
    km_inv = d / (d - beta)
    denom = beta - d + beta * beta
    if denom == 0.0:
        a = complex(np.inf)
    else:
        a = complex((beta - d) / denom)
    admissible = abs(km_inv) <= 1.0 + ADMISSIBLE_TOL
    return ModeSolution(a, 0j, complex(km_inv), admissible)

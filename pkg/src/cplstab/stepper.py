"""Time stepping for the coupled schemes, monolithic and partitioned.

The monolithic route solves the assembled system A T^{n+1} = B T^n directly.
The partitioned route advances each domain with its own tridiagonal solve and
exchanges interface data exactly as the scheme prescribes (lagged, fresh, or
through a small interface system); for every scheme in the family the two
routes produce the same update up to roundoff, which the test suite pins.

Growth rates come from least-squares fits of log norms; long runs renormalize
each step and accumulate the log so that unstable schemes cannot overflow.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import assembly
from .errors import DecayFloorWarning, ParameterDomainError, SingularMatrixError
from .assembly import (
    BULK,
    DIRICHLET_NEUMANN,
    EXPLICIT,
    IMPLICIT,
    ONE_WAY_NEGATIVE,
    SEQUENTIAL,
)


@dataclass(frozen=True)
class State:
    """Cell temperatures of both domains plus the shared node when present."""

    t_minus: np.ndarray
    t_plus: np.ndarray
    shared_node: float = None
    step_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "t_minus", np.asarray(self.t_minus, dtype=float))
        object.__setattr__(self, "t_plus", np.asarray(self.t_plus, dtype=float))
        if not (np.isfinite(self.t_minus).all() and np.isfinite(self.t_plus).all()):
            raise ParameterDomainError("state has non-finite entries")
        if self.shared_node is not None and not np.isfinite(self.shared_node):
            raise ParameterDomainError("shared node value is non-finite")


def pack_state(state, layout):
    """Flatten a State into the vector ordering used by the matrices."""
    if layout.kind == ONE_WAY_NEGATIVE:
        return state.t_minus.copy()
    if layout.kind == DIRICHLET_NEUMANN:
        if state.shared_node is None:
            raise ParameterDomainError("Dirichlet-Neumann state needs a shared node value")
        return np.concatenate([state.t_minus, [state.shared_node], state.t_plus])
    return np.concatenate([state.t_minus, state.t_plus])


def unpack_state(vector, layout, step_index):
    nm = layout.n_minus
    if layout.kind == ONE_WAY_NEGATIVE:
        return State(vector, np.empty(0), step_index=step_index)
    if layout.kind == DIRICHLET_NEUMANN:
        return State(vector[:nm], vector[nm + 1:], shared_node=float(vector[nm]),
                     step_index=step_index)
    return State(vector[:nm], vector[nm:], step_index=step_index)


def state_norm(state):
    parts = [state.t_minus, state.t_plus]
    if state.shared_node is not None:
        parts.append(np.array([state.shared_node]))
    values = np.concatenate([np.abs(p) for p in parts if p.size])
    return float(values.max()) if values.size else 0.0


def random_state(layout, seed=0):
    """Unit-infinity-norm random initial state for growth experiments."""
    rng = np.random.default_rng(seed=seed)
    vector = rng.standard_normal(layout.n)
    vector /= np.abs(vector).max()
    return unpack_state(vector, layout, 0)


@dataclass
class Trajectory:
    """Raw states of a run; norms[k] is the infinity norm of states[k]."""

    states: list = field(default_factory=list)
    norms: np.ndarray = None

    @classmethod
    def from_states(cls, states):
        return cls(states=list(states),
                   norms=np.array([state_norm(s) for s in states]))


# --- tridiagonal solves ---


def _as_bands(a):
    if isinstance(a, tuple):
        sub, diag, sup = (np.asarray(v, dtype=float) for v in a)
    else:
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ParameterDomainError(f"matrix must be square, got shape {a.shape}")
        if np.count_nonzero(np.triu(a, 2) + np.tril(a, -2)):
            raise ParameterDomainError("matrix is not tridiagonal")
        sub, diag, sup = np.diag(a, -1), np.diag(a).copy(), np.diag(a, 1)
    n = diag.shape[0]
    if sub.shape[0] != n - 1 or sup.shape[0] != n - 1:
        raise ParameterDomainError("band lengths inconsistent with the diagonal")
    return sub, diag, sup


def _thomas(sub, diag, sup, rhs, pivot_floor):
    n = diag.shape[0]
    c = np.empty(n - 1) if n > 1 else np.empty(0)
    x = np.empty(n)
    piv = diag[0]
    if abs(piv) < pivot_floor:
        raise SingularMatrixError("zero pivot in tridiagonal elimination")
    x[0] = rhs[0] / piv
    for i in range(1, n):
        c[i - 1] = sup[i - 1] / piv
        piv = diag[i] - sub[i - 1] * c[i - 1]
        if abs(piv) < pivot_floor:
            raise SingularMatrixError("zero pivot in tridiagonal elimination")
        x[i] = (rhs[i] - sub[i - 1] * x[i - 1]) / piv
    for i in range(n - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return x


def tridiagonal_solve(a, rhs):
    """Solve a tridiagonal system given as a dense matrix or (sub, diag, sup).

    Diagonally dominant systems run through the Thomas algorithm; anything
    else falls back to a pivoted band solve.
    """
    sub, diag, sup = _as_bands(a)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    if rhs.shape[0] != n:
        raise ParameterDomainError("rhs length does not match the matrix")
    row_abs = np.abs(diag).copy()
    row_abs[1:] += np.abs(sub)
    row_abs[:-1] += np.abs(sup)
    scale = row_abs.max()
    if scale == 0.0:
        raise SingularMatrixError("zero matrix")
    pivot_floor = 1e-14 * scale
    dominant = np.abs(diag) >= row_abs - np.abs(diag)
    if dominant.all():
        return _thomas(sub, diag, sup, rhs, pivot_floor)
    ab = np.zeros((3, n))
    ab[1] = diag
    if n > 1:
        ab[0, 1:] = sup
        ab[2, :-1] = sub
    try:
        return scipy.linalg.solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as err:
        raise SingularMatrixError(f"banded solve failed: {err}") from err


# --- monolithic stepping ---


def step_monolithic(pair, state):
    """One step of A T^{n+1} = B T^n through the assembled pair."""
    vector = pack_state(state, pair.layout)
    if vector.shape[0] != pair.n:
        raise ParameterDomainError("state size does not match the update pair")
    rhs = pair.B @ vector
    x = tridiagonal_solve(pair.A, rhs)
    return unpack_state(x, pair.layout, state.step_index + 1)


def run_monolithic(pair, state, steps):
    """Trajectory of `steps` monolithic updates, raw states recorded."""
    states = [state]
    for _ in range(steps):
        state = step_monolithic(pair, state)
        states.append(state)
    return Trajectory.from_states(states)


# --- partitioned stepping ---


def _be_bands(n, d, interface_diag, interface_at_end):
    """Backward-Euler bands with a custom diagonal on the interface row."""
    sub = np.full(n - 1, -d)
    sup = np.full(n - 1, -d)
    diag = np.full(n, 1.0 + 2.0 * d)
    diag[-1 if interface_at_end else 0] = interface_diag
    return sub, diag, sup


def _step_bulk_partitioned(p, n_minus, n_plus, theta, gamma, formulation, state):
    dm, dp = p.d_minus, p.d_plus
    bm, bp = p.beta_minus, p.beta_plus
    tm, tp = state.t_minus, state.t_plus
    bands_m = _be_bands(n_minus, dm, 1.0 + dm + theta * bm, True)
    bands_p = _be_bands(n_plus, dp, 1.0 + dp + theta * bp, False)
    rhs_m = tm.copy()
    rhs_p = tp.copy()
    if formulation == SEQUENTIAL:
        # negative domain first against the lagged positive interface value
        rhs_m[-1] = (1.0 - (1.0 - theta) * bm) * tm[-1] + bm * tp[0]
        new_m = tridiagonal_solve(bands_m, rhs_m)
        rhs_p[0] = ((1.0 - (1.0 - theta) * bp) * tp[0]
                    + gamma * bp * new_m[-1] + (1.0 - gamma) * bp * tm[-1])
        new_p = tridiagonal_solve(bands_p, rhs_p)
        return State(new_m, new_p, step_index=state.step_index + 1)
    rhs_m[-1] = (1.0 - (1.0 - theta) * bm) * tm[-1] + (1.0 - gamma) * bm * tp[0]
    rhs_p[0] = (1.0 - (1.0 - theta) * bp) * tp[0] + (1.0 - gamma) * bp * tm[-1]
    if gamma == 0:
        new_m = tridiagonal_solve(bands_m, rhs_m)
        new_p = tridiagonal_solve(bands_p, rhs_p)
        return State(new_m, new_p, step_index=state.step_index + 1)
    # simultaneous fresh exchange: eliminate the two interface unknowns first
    u_m = tridiagonal_solve(bands_m, rhs_m)
    u_p = tridiagonal_solve(bands_p, rhs_p)
    e_m = np.zeros(n_minus)
    e_m[-1] = bm
    e_p = np.zeros(n_plus)
    e_p[0] = bp
    v_m = tridiagonal_solve(bands_m, e_m)
    v_p = tridiagonal_solve(bands_p, e_p)
    det = 1.0 - v_m[-1] * v_p[0]
    if abs(det) < 1e-14:
        raise SingularMatrixError("interface coupling system is singular")
    a = (u_m[-1] + v_m[-1] * u_p[0]) / det
    b = (u_p[0] + v_p[0] * u_m[-1]) / det
    new_m = u_m + b * v_m
    new_p = u_p + a * v_p
    return State(new_m, new_p, step_index=state.step_index + 1)


def _step_dn_explicit(p, n_minus, n_plus, state):
    dm, dp, r = p.d_minus, p.d_plus, p.r
    tm, tp, ts = state.t_minus, state.t_plus, state.shared_node
    # positive domain sees the old interface value as a Dirichlet condition
    padded_p = np.concatenate([[ts], tp, [0.0]])
    new_p = tp + dp * (padded_p[2:] - 2.0 * tp + padded_p[:-2])
    padded_m = np.concatenate([[0.0], tm, [ts]])
    new_m = tm + dm * (padded_m[2:] - 2.0 * tm + padded_m[:-2])
    w = (1.0 + r) / 2.0
    new_s = ((w - dm - dp * r) * ts + dm * tm[-1] + dp * r * tp[0]) / w
    return State(new_m, new_p, shared_node=float(new_s), step_index=state.step_index + 1)


def _step_dn_implicit(p, n_minus, n_plus, state):
    dm, dp, r = p.d_minus, p.d_plus, p.r
    tm, tp, ts = state.t_minus, state.t_plus, state.shared_node
    w = (1.0 + r) / 2.0
    # negative domain plus interface node; the positive flux enters lagged
    sub = np.full(n_minus, -dm)
    sup = np.full(n_minus, -dm)
    diag = np.full(n_minus + 1, 1.0 + 2.0 * dm)
    diag[-1] = w + dm
    rhs = np.concatenate([tm, [(w - dp * r) * ts + dp * r * tp[0]]])
    solved = tridiagonal_solve((sub, diag, sup), rhs)
    new_m, new_s = solved[:-1], solved[-1]
    # positive domain against the old interface value; independent of the above
    bands_p = _be_bands(n_plus, dp, 1.0 + dp, False)
    rhs_p = tp.copy()
    rhs_p[0] = dp * ts + (1.0 - dp) * tp[0]
    new_p = tridiagonal_solve(bands_p, rhs_p)
    return State(new_m, new_p, shared_node=float(new_s), step_index=state.step_index + 1)


def _step_one_way(p, n_minus, theta, state):
    dm, bm = p.d_minus, p.beta_minus
    tm = state.t_minus
    rhs = tm.copy()
    if theta == 1:
        bands = _be_bands(n_minus, dm, 1.0 + dm + bm, True)
    else:
        bands = _be_bands(n_minus, dm, 1.0 + dm, True)
        rhs[-1] = (1.0 - bm) * tm[-1]
    new_m = tridiagonal_solve(bands, rhs)
    return State(new_m, np.empty(0), step_index=state.step_index + 1)


def step_partitioned(scheme, p, n_minus, n_plus, state):
    """One step through per-domain solves and explicit interface exchanges."""
    if scheme.direction == ONE_WAY_NEGATIVE:
        if state.t_minus.shape[0] != n_minus:
            raise ParameterDomainError("state size does not match n_minus")
        return _step_one_way(p, n_minus, scheme.theta, state)
    if state.t_minus.shape[0] != n_minus or state.t_plus.shape[0] != n_plus:
        raise ParameterDomainError("state sizes do not match the domain sizes")
    if scheme.interface == DIRICHLET_NEUMANN:
        if state.shared_node is None:
            raise ParameterDomainError("Dirichlet-Neumann state needs a shared node value")
        if scheme.integrator == EXPLICIT:
            return _step_dn_explicit(p, n_minus, n_plus, state)
        return _step_dn_implicit(p, n_minus, n_plus, state)
    return _step_bulk_partitioned(p, n_minus, n_plus, scheme.theta, scheme.gamma,
                                  scheme.formulation, state)


def run_partitioned(scheme, p, n_minus, n_plus, state, steps):
    states = [state]
    for _ in range(steps):
        state = step_partitioned(scheme, p, n_minus, n_plus, state)
        states.append(state)
    return Trajectory.from_states(states)


# --- growth rates ---


def growth_rate(trajectory, burn_in=50):
    """Per-step amplification exp(slope) fitted to log norms after burn-in.

    Norms that underflow to exact zero end the fit window early with a
    warning; the estimate then comes from the surviving prefix.
    """
    norms = np.asarray(trajectory.norms, dtype=float)
    if norms.shape[0] < burn_in + 10:
        raise ParameterDomainError(
            f"need at least burn_in + 10 = {burn_in + 10} recorded norms, got {norms.shape[0]}"
        )
    window = norms[burn_in:]
    zero = np.nonzero(window == 0.0)[0]
    if zero.size:
        warnings.warn("trajectory norms reached zero; fitting the surviving prefix",
                      DecayFloorWarning)
        window = window[:zero[0]]
        if window.shape[0] < 2:
            return 0.0
    steps = np.arange(window.shape[0])
    slope = np.polyfit(steps, np.log(window), 1)[0]
    return float(np.exp(slope))


def power_growth_rate(pair, steps=250, burn_in=50, seed=0):
    """Growth rate from a renormalized run; safe for strongly unstable pairs.

    Each step renormalizes the state to unit norm and accumulates the log of
    the amplification, so only the logs grow.
    """
    if steps < burn_in + 10:
        raise ParameterDomainError(f"need steps >= burn_in + 10 = {burn_in + 10}")
    layout = pair.layout
    state = random_state(layout, seed=seed)
    vector = pack_state(state, layout)
    log_norms = np.empty(steps)
    sub, diag, sup = np.diag(pair.A, -1), np.diag(pair.A).copy(), np.diag(pair.A, 1)
    total = 0.0
    count = steps
    for k in range(steps):
        rhs = pair.B @ vector
        vector = tridiagonal_solve((sub, diag, sup), rhs)
        gain = np.abs(vector).max()
        if gain == 0.0:
            warnings.warn("iterate collapsed to zero; fitting the surviving prefix",
                          DecayFloorWarning)
            count = k
            break
        total += np.log(gain)
        log_norms[k] = total
        vector = vector / gain
    if count - burn_in < 2:
        return 0.0
    window = log_norms[burn_in:count]
    slope = np.polyfit(np.arange(window.shape[0]), window, 1)[0]
    return float(np.exp(slope))

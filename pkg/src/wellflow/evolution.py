"""Time propagation of states and observables.

The default propagator ("exp") applies the exact exponential of the
vectorized generator with scipy's expm_multiply, which is accurate to
machine precision at these norms; the alternative ("rk") integrates the
master equation with an adaptive high-order explicit Runge-Kutta scheme.
Every recorded time carries diagnostics: trace deviation, smallest
eigenvalue and the population sitting at the truncation edge (leakage).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .fockspace import hermitian_part, validate_density_matrix
from .generator import LindbladGenerator, apply_dual, superoperator_sparse, \
    unvectorize, vectorize
from .model import current_operator

TRACE_FLAG_TOL = 1e-8
_RK_RTOL = 1e-10
_RK_ATOL = 1e-12
_IMAG_TOL = 1e-10


class IntegrationError(RuntimeError):
    """Adaptive integration failed to meet its tolerance."""


@dataclass(frozen=True)
class Trajectory:
    """Expectation values and health diagnostics along a time grid.

    ``flagged`` marks records whose trace deviation exceeds 1e-8; they are
    kept (not repaired) so a failing run stays visible.
    """

    times: np.ndarray
    expectations: dict
    trace_dev: np.ndarray
    min_eig: np.ndarray
    leakage: np.ndarray
    flagged: np.ndarray
    states: np.ndarray | None = None


def _check_grid(t_grid: np.ndarray) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1:
        raise ValueError("time grid must be a 1-d array")
    if t[0] != 0.0:
        raise ValueError(f"time grid must start at 0, got {t[0]}")
    if t.size > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("time grid must be strictly increasing")
    return t


def _propagate_exp(L, v0: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Exact exponential action over the grid; uniform grids in one call."""
    if t.size == 1:
        return v0[None, :].copy()
    dt = np.diff(t)
    if np.allclose(dt, dt[0], rtol=1e-12, atol=0.0):
        return spla.expm_multiply(L, v0, start=t[0], stop=t[-1],
                                  num=t.size, endpoint=True)
    out = np.empty((t.size, v0.size), dtype=complex)
    out[0] = v0
    v = v0
    for k, step in enumerate(dt):
        v = spla.expm_multiply(L * step, v)
        out[k + 1] = v
    return out


def _propagate_rk(L, v0: np.ndarray, t: np.ndarray) -> np.ndarray:
    if t.size == 1:
        return v0[None, :].copy()
    sol = solve_ivp(lambda _t, v: L @ v, (t[0], t[-1]), v0, method="DOP853",
                    t_eval=t, rtol=_RK_RTOL, atol=_RK_ATOL)
    if not sol.success:
        reached = sol.t[-1] if sol.t.size else t[0]
        raise IntegrationError(
            f"adaptive integration failed near t={reached}: {sol.message}")
    return sol.y.T.astype(complex)


def evolve(gen: LindbladGenerator, rho0: np.ndarray, t_grid,
           method: str = "exp", observables: dict | None = None,
           store_states: bool = False) -> Trajectory:
    """Propagate ``rho0`` over ``t_grid`` and record observables.

    Parameters
    ----------
    gen : LindbladGenerator
    rho0 : density matrix matching the generator's basis
    t_grid : strictly increasing times starting at 0
    method : "exp" (exact exponential, default) or "rk" (adaptive DOP853)
    observables : name -> operator map recorded at every time; defaults to
        the current operator under the name "J"
    store_states : keep the full states in the returned trajectory
    """
    t = _check_grid(t_grid)
    validate_density_matrix(rho0, "rho0")
    if rho0.shape != (gen.basis.dim, gen.basis.dim):
        raise ValueError("rho0 dimension does not match the generator basis")
    if observables is None:
        observables = {"J": current_operator(gen.basis)}
    for name, op in observables.items():
        if op.shape != rho0.shape:
            raise ValueError(f"observable {name!r} has mismatched shape")

    L = superoperator_sparse(gen)
    if method == "exp":
        vs = _propagate_exp(L, vectorize(rho0), t)
    elif method == "rk":
        vs = _propagate_rk(L, vectorize(rho0), t)
    else:
        raise ValueError(f"unknown method {method!r}; use 'exp' or 'rk'")

    dim = gen.basis.dim
    edge = gen.basis.edge_indices()
    nt = t.size
    trace_dev = np.empty(nt)
    min_eig = np.empty(nt)
    leak = np.empty(nt)
    values = {name: np.empty(nt, dtype=complex) for name in observables}
    states = np.empty((nt, dim, dim), dtype=complex) if store_states else None
    for k in range(nt):
        rho = unvectorize(vs[k], dim)
        if store_states:
            states[k] = rho
        trace_dev[k] = abs(np.trace(rho) - 1.0)
        min_eig[k] = np.linalg.eigvalsh(hermitian_part(rho)).min()
        leak[k] = float(np.real(np.diag(rho)[edge].sum()))
        for name, op in observables.items():
            values[name][k] = np.trace(rho @ op)
    return Trajectory(times=t, expectations=values, trace_dev=trace_dev,
                      min_eig=min_eig, leakage=leak,
                      flagged=trace_dev > TRACE_FLAG_TOL, states=states)


def expectation(rho: np.ndarray, x: np.ndarray):
    """tr(rho X); collapses to a real float when the imaginary part is dust."""
    if rho.shape != x.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {x.shape}")
    val = complex(np.trace(rho @ x))
    if abs(val.imag) < _IMAG_TOL:
        return val.real
    return val


def current_slope(gen: LindbladGenerator, rho0: np.ndarray) -> float:
    """Initial growth rate of the mean current: tr(rho0 L*[J]).

    For a balanced Fock state the hamiltonian contribution cancels exactly
    and the value is carried by the dissipator alone.
    """
    j = current_operator(gen.basis)
    val = complex(np.trace(rho0 @ apply_dual(gen, j)))
    if abs(val.imag) > _IMAG_TOL:
        raise ValueError(f"current slope came out complex: {val!r}")
    return val.real

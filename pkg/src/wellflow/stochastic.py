"""Gaussian white-noise unraveling of the singular-coupling dynamics.

Each trajectory evolves a state vector with the random hamiltonian
H + lam * sum_i xi_i(t) V_i, where the xi are white noises with covariance
<xi_i(t) xi_j(s)> = G_ij delta(t - s) and the V_i are the four hermitian
couplings.  One step of length dt is a Strang splitting

    psi  <-  exp(-i H dt/2) exp(-i lam sum_i dW_i V_i) exp(-i H dt/2) psi

with correlated increments dW ~ N(0, G dt); the exact exponential of the
noise increment is the Stratonovich-consistent (physical-limit) choice.
Averaging the trajectories reproduces the singular-coupling Lindblad
evolution whose Kossakowski matrix is G times the calibrated factor
(:data:`NOISE_KOSSAKOWSKI_FACTOR`).

Trajectories are independent work items; bit-reproducibility comes from a
counter-based Philox stream keyed by (master seed, trajectory index) and a
fixed reduction order, so results do not depend on how work is scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .evolution import TRACE_FLAG_TOL, Trajectory
from .fockspace import FockBasis, hermitian_part, validate_density_matrix
from .generator import hermitian_couplings
from .model import ModelParams, bose_hubbard_hamiltonian, current_operator

# dissipator strength per unit noise covariance, measured by
# calibrate_noise and frozen; the unraveling and the singular-coupling
# generator share the same G with no extra factor.
NOISE_KOSSAKOWSKI_FACTOR = 1.0

_CHUNK = 1024
_KICK_TOL = 1e-16
_KICK_MAX_TERMS = 30
_BRANCH_CUT = 1e-12


class StepSizeError(RuntimeError):
    """dt vs dt/2 ensemble means disagree beyond the declared tolerance."""


class CalibrationError(RuntimeError):
    """The noise-to-dissipator calibration fit failed or disagrees."""


@dataclass(frozen=True)
class NoiseConfig:
    """White-noise covariance and sampling plan for one ensemble."""

    G: np.ndarray
    dt: float
    seed: int
    trajectories: int
    channel_mask: tuple | None = None

    def __post_init__(self):
        G = np.array(self.G, dtype=float)
        if G.shape != (4, 4):
            raise ValueError(f"noise covariance must be 4x4, got {G.shape}")
        if np.abs(G - G.T).max() > 1e-12:
            raise ValueError("noise covariance must be symmetric")
        if np.linalg.eigvalsh(0.5 * (G + G.T)).min() < -1e-10:
            raise ValueError("noise covariance must be positive semidefinite")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.trajectories < 1:
            raise ValueError(
                f"trajectory count must be >= 1, got {self.trajectories}")
        if not 0 <= int(self.seed) < 2 ** 63:
            raise ValueError("seed must be a non-negative 63-bit integer")
        if self.channel_mask is not None:
            mask = tuple(bool(b) for b in self.channel_mask)
            if len(mask) != 4:
                raise ValueError("channel_mask must list 4 booleans")
            object.__setattr__(self, "channel_mask", mask)
        G.setflags(write=False)
        object.__setattr__(self, "G", G)


@dataclass(frozen=True)
class EnsembleResult:
    """Noise-averaged trajectory with its Monte Carlo uncertainty."""

    trajectory: Trajectory
    stderr: np.ndarray
    trajectories: int
    seed: int


def _symmetric_sqrt(G: np.ndarray) -> np.ndarray:
    """PSD square root via eigendecomposition; tolerates zero modes."""
    w, q = np.linalg.eigh(G)
    w = np.clip(w, 0.0, None)
    return (q * np.sqrt(w)) @ q.T


def _noise_kick(psi: np.ndarray, vops: np.ndarray, dw: np.ndarray,
                lam: float) -> np.ndarray:
    """Apply exp(-i lam sum_c dw[c] V_c) columnwise by an adaptive series.

    psi is (dim, B), vops is (n_ch, dim, dim), dw is (n_ch, B).  The
    increment norms are small (lam * |dW| * |V|), so a short series
    reaches machine precision.
    """
    phi = psi.copy()
    term = psi
    k = 1
    while True:
        vt = np.tensordot(vops, term, axes=([2], [0]))
        term = (-1j * lam / k) * np.einsum("cb,cib->ib", dw, vt)
        phi += term
        if np.abs(term).max() < _KICK_TOL or k >= _KICK_MAX_TERMS:
            break
        k += 1
    return phi


def _branch_vectors(rho0: np.ndarray):
    """Spectral branches of the initial state for the vector unraveling."""
    w, q = np.linalg.eigh(hermitian_part(rho0))
    keep = w > _BRANCH_CUT
    weights = w[keep]
    vecs = q[:, keep]
    return vecs, weights / weights.sum()


def _grid_plan(t_grid: np.ndarray, dt: float):
    """Substep counts and lengths per grid interval (nearest divisor of dt)."""
    plan = []
    for delta in np.diff(t_grid):
        n = max(1, int(round(delta / dt)))
        plan.append((n, delta / n))
    return plan


def _current_per_trajectory(psi: np.ndarray, J: np.ndarray, weights: np.ndarray):
    """Branch-weighted <J> of every trajectory in the batch."""
    per_col = np.einsum("ib,ib->b", psi.conj(), J @ psi).real
    return per_col.reshape(-1, weights.size) @ weights


def run_ensemble(basis: FockBasis, p: ModelParams, noise: NoiseConfig,
                 rho0: np.ndarray, t_grid,
                 step_check_tol: float | None = None) -> EnsembleResult:
    """Average M noisy unitary trajectories over the time grid.

    Records the mean current, its standard error (sample std / sqrt(M))
    and the diagnostics of the noise-averaged state.  Increments are drawn
    at dt/2 resolution and summed pairwise for the dt integration; with
    ``step_check_tol`` set, the same underlying path is also integrated at
    dt/2, and a disagreement of the mean current at the final time beyond
    the tolerance raises :class:`StepSizeError`.  The returned result
    always comes from the dt path, so the check never perturbs it.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 1 or t[0] != 0.0 or (
            t.size > 1 and not np.all(np.diff(t) > 0)):
        raise ValueError("time grid must start at 0 and increase strictly")
    validate_density_matrix(rho0, "rho0")
    if rho0.shape != (basis.dim, basis.dim):
        raise ValueError("rho0 dimension does not match basis")

    dim = basis.dim
    H = bose_hubbard_hamiltonian(basis, p)
    J = current_operator(basis)
    vops = np.stack(hermitian_couplings(basis))
    sqrt_g = _symmetric_sqrt(noise.G)
    if noise.channel_mask is not None:
        sqrt_g = np.where(np.array(noise.channel_mask)[:, None], sqrt_g, 0.0)

    plan = _grid_plan(t, noise.dt)
    half_cache = {}
    for _, dt_k in plan:
        for step in (dt_k, dt_k / 2):
            if step not in half_cache:
                half_cache[step] = expm(-1j * H * (step / 2))

    vecs, weights = _branch_vectors(rho0)
    r = weights.size
    sqrt_w = np.sqrt(weights)
    nt = t.size
    M = noise.trajectories
    check = step_check_tol is not None

    sum_j = np.zeros(nt)
    sum_j2 = np.zeros(nt)
    sum_rho = np.zeros((nt, dim, dim), dtype=complex)
    sum_j_fine = np.zeros(nt) if check else None

    for m0 in range(0, M, _CHUNK):
        mm = min(_CHUNK, M - m0)
        rngs = [np.random.Generator(np.random.Philox(key=[noise.seed, m0 + i]))
                for i in range(mm)]
        psi = np.tile(vecs, (1, mm)).astype(complex)
        psi_f = psi.copy() if check else None

        def accumulate(state, k):
            per_traj = _current_per_trajectory(state, J, weights)
            sum_j[k] += per_traj.sum()
            sum_j2[k] += (per_traj ** 2).sum()
            weighted = state * np.tile(sqrt_w, state.shape[1] // r)
            sum_rho[k] += weighted @ weighted.conj().T

        accumulate(psi, 0)
        if check:
            sum_j_fine[0] += _current_per_trajectory(psi_f, J, weights).sum()
        for k, (nsub, dt_k) in enumerate(plan):
            uh = half_cache[dt_k]
            uh_f = half_cache[dt_k / 2]
            z = np.empty((2 * nsub, 4, mm))
            for i, rng in enumerate(rngs):
                z[:, :, i] = rng.normal(size=(2 * nsub, 4))
            scale = np.sqrt(dt_k / 2)
            for s in range(nsub):
                dw = sqrt_g @ ((z[2 * s] + z[2 * s + 1]) * scale)
                psi = uh @ _noise_kick(uh @ psi, vops,
                                       np.repeat(dw, r, axis=1), p.lam)
                psi /= np.linalg.norm(psi, axis=0, keepdims=True)
                if check:
                    for half in (2 * s, 2 * s + 1):
                        dwf = sqrt_g @ (z[half] * scale)
                        psi_f = uh_f @ _noise_kick(uh_f @ psi_f, vops,
                                                   np.repeat(dwf, r, axis=1),
                                                   p.lam)
                        psi_f /= np.linalg.norm(psi_f, axis=0, keepdims=True)
            accumulate(psi, k + 1)
            if check:
                sum_j_fine[k + 1] += _current_per_trajectory(
                    psi_f, J, weights).sum()

    mean_j = sum_j / M
    if M > 1:
        var = np.maximum(sum_j2 / M - mean_j ** 2, 0.0) * M / (M - 1)
        sem = np.sqrt(var / M)
    else:
        sem = np.zeros(nt)

    if check:
        dev = abs(mean_j[-1] - sum_j_fine[-1] / M)
        if dev > step_check_tol:
            raise StepSizeError(
                f"dt vs dt/2 ensemble means differ by {dev:.3e} at t={t[-1]} "
                f"(tolerance {step_check_tol:.3e})")

    edge = basis.edge_indices()
    trace_dev = np.empty(nt)
    min_eig = np.empty(nt)
    leak = np.empty(nt)
    for k in range(nt):
        rho = sum_rho[k] / M
        trace_dev[k] = abs(np.trace(rho) - 1.0)
        min_eig[k] = np.linalg.eigvalsh(hermitian_part(rho)).min()
        leak[k] = float(np.real(np.diag(rho)[edge].sum()))
    traj = Trajectory(times=t, expectations={"J": mean_j.astype(complex)},
                      trace_dev=trace_dev, min_eig=min_eig, leakage=leak,
                      flagged=trace_dev > TRACE_FLAG_TOL, states=None)
    return EnsembleResult(trajectory=traj, stderr=sem, trajectories=M,
                          seed=int(noise.seed))


def calibrate_noise(G: np.ndarray, convention_probe: bool = False,
                    seed: int = 20240901, trajectories: int = 50000,
                    lam: float = 0.5, t_max: float = 2.0,
                    n_steps: int = 16) -> float:
    """Measure the dissipator strength produced by unit noise covariance.

    Runs a micro-ensemble on a two-level toy (the n_max = 1 single-well
    truncation, where the position coupling a + a^dag is exactly sigma_x)
    driven by one noise channel of variance G[0, 0].  The population
    imbalance decays as exp(-2 f lam^2 g t); a log-linear fit of the decay
    rate returns f, the factor relating the white-noise covariance to the
    singular-coupling Kossakowski normalisation.  With ``convention_probe``
    the fit must agree with the frozen :data:`NOISE_KOSSAKOWSKI_FACTOR`
    to 25 percent.
    """
    G = np.asarray(G, dtype=float)
    if G.shape != (4, 4) or np.abs(G - G.T).max() > 1e-12:
        raise ValueError("G must be a real symmetric 4x4 matrix")
    if np.linalg.eigvalsh(G).min() < -1e-10:
        raise ValueError("G must be positive semidefinite")
    g = float(G[0, 0])
    if not g > 0:
        raise CalibrationError("calibration needs G[0, 0] > 0 for a signal")

    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    vops = sigma_x[None, :, :]
    dt = t_max / n_steps
    scale = np.sqrt(g * dt)
    t = dt * np.arange(1, n_steps + 1)
    mean_sz = np.zeros(n_steps)

    for m0 in range(0, trajectories, _CHUNK):
        mm = min(_CHUNK, trajectories - m0)
        rngs = [np.random.Generator(np.random.Philox(key=[seed, m0 + i]))
                for i in range(mm)]
        z = np.empty((n_steps, 1, mm))
        for i, rng in enumerate(rngs):
            z[:, 0, i] = rng.normal(size=n_steps)
        psi = np.zeros((2, mm), dtype=complex)
        psi[0] = 1.0
        for s in range(n_steps):
            psi = _noise_kick(psi, vops, z[s] * scale, lam)
            psi /= np.linalg.norm(psi, axis=0, keepdims=True)
            mean_sz[s] += (np.abs(psi[0]) ** 2 - np.abs(psi[1]) ** 2).sum()
    mean_sz /= trajectories

    if np.any(mean_sz <= 0):
        raise CalibrationError(
            "calibration signal crossed zero; shorten t_max or raise M")
    rate = -float(np.dot(t, np.log(mean_sz)) / np.dot(t, t))
    if rate <= 0:
        raise CalibrationError(f"fitted decay rate {rate:.3e} is not positive")
    factor = rate / (2.0 * lam ** 2 * g)
    if convention_probe and abs(factor - NOISE_KOSSAKOWSKI_FACTOR) > 0.25:
        raise CalibrationError(
            f"calibrated factor {factor:.4f} disagrees with the frozen "
            f"convention {NOISE_KOSSAKOWSKI_FACTOR}")
    return factor

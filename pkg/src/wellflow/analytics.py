"""Closed-form current slopes and numeric-vs-analytic comparison records.

These formulas are evaluated independently of the generator assembly (only
the bath transforms are shared), so agreement with the numeric engine is a
meaningful two-route check rather than a tautology.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import EXPONENTIAL, CorrelationModel, fourier_c
from .evolution import current_slope
from .generator import LindbladGenerator
from .model import ModelParams, bohr_frequencies

_DEGENERATE_FLOOR = 1e-30


@dataclass(frozen=True)
class SlopeReport:
    """Numeric slope against its closed-form target.

    ``degenerate`` marks comparisons whose analytic target is (numerically)
    zero, where only the absolute deviation is informative.
    """

    numeric: float
    analytic: float
    abs_dev: float
    rel_dev: float
    degenerate: bool
    analytic_large_n: float | None = None


def _require_exponential(model: CorrelationModel) -> None:
    if model.kind != EXPONENTIAL:
        raise ValueError("weak-coupling slope formulas need an "
                         "exponential-kind correlation model")


def slope_weak_exact(N: int, p: ModelParams, model: CorrelationModel) -> float:
    """Exact weak-coupling slope at the balanced Fock state with filling N.

    2 lam^2 [ (N+1)^2 Im h31(w_N) + N^2 Im h24(-w_{N-1}) ], with the h
    entries formed from the Fourier transforms of the correlations.
    """
    _require_exponential(model)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    freqs = bohr_frequencies(p, N + 1)
    w_n = freqs[N].omega
    w_nm1 = freqs[N - 1].omega
    cp = fourier_c(model, w_n)
    h13 = cp[0, 2] + cp[1, 3] + 1j * (cp[1, 2] - cp[0, 3])
    h31 = np.conj(h13)
    cm = fourier_c(model, -w_nm1)
    h24 = cm[0, 2] + cm[1, 3] + 1j * (cm[0, 3] - cm[1, 2])
    return float(2.0 * p.lam ** 2 * ((N + 1) ** 2 * h31.imag
                                     + N ** 2 * h24.imag))


def slope_weak_largeN(p: ModelParams, model: CorrelationModel) -> float:
    """Large-filling, fast-bath limit of the weak-coupling slope:
    2 lam^2 mu Re(G14 - G23) / U^2."""
    _require_exponential(model)
    dg = (model.G[0, 3] - model.G[1, 2]).real
    return float(2.0 * p.lam ** 2 * model.mu * dg / p.U ** 2)


def slope_weak_lorentzian(N: int, p: ModelParams,
                          model: CorrelationModel) -> float:
    """Intermediate large-N diagnostic keeping the Lorentzian at w_N:
    8 lam^2 N^2 mu Re(G14 - G23) / (mu^2 + w_N^2)."""
    _require_exponential(model)
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    w_n = bohr_frequencies(p, N + 1)[N].omega
    dg = (model.G[0, 3] - model.G[1, 2]).real
    return float(8.0 * p.lam ** 2 * N ** 2 * model.mu * dg
                 / (model.mu ** 2 + w_n ** 2))


def slope_singular(N: int, lam: float, G: np.ndarray) -> float:
    """Singular-coupling slope at filling N for Kossakowski matrix G:
    2 lam^2 [ (2N+1) Im(G31 + G42) + Re(G14 - G23) ].

    For real symmetric G the first term vanishes and the slope is
    independent of N and of every trap parameter.
    """
    G = np.asarray(G, dtype=complex)
    if G.shape != (4, 4):
        raise ValueError(f"G must be 4x4, got {G.shape}")
    if np.abs(G - G.conj().T).max() > 1e-12:
        raise ValueError("G must be hermitian")
    bracket = (2 * N + 1) * (G[2, 0] + G[3, 1]).imag + (G[0, 3] - G[1, 2]).real
    return float(2.0 * lam ** 2 * bracket)


def compare(gen: LindbladGenerator, rho0: np.ndarray,
            analytic: float, analytic_large_n: float | None = None) -> SlopeReport:
    """Evaluate the numeric slope and pack the deviation record."""
    numeric = current_slope(gen, rho0)
    abs_dev = abs(numeric - analytic)
    rel_dev = abs_dev / max(abs(analytic), 1e-300)
    return SlopeReport(numeric=numeric, analytic=analytic, abs_dev=abs_dev,
                       rel_dev=rel_dev,
                       degenerate=abs(analytic) < _DEGENERATE_FLOOR,
                       analytic_large_n=analytic_large_n)

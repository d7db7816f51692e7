"""Bath correlation models and their frequency-domain transforms.

Two families are supported.  The exponential family has two-point functions
G_ij * exp(-mu t) for t >= 0, extended to negative times by hermiticity,
G_ij(-t) = conj(G_ji(t)); its Fourier transform is the Lorentzian
c(w) = 2 mu G / (mu^2 + w^2) for hermitian G.  The delta family is the
white-noise limit with G_ij(t) = G_ij delta(t), for which c(w) = G at every
frequency and the principal-value (Hilbert) transform vanishes.

Positivity of G is enforced at construction: it is what guarantees a
completely positive reduced dynamics downstream.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EXPONENTIAL = "exponential"
DELTA = "delta"

_G_HERM_TOL = 1e-12
_G_EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class CorrelationModel:
    """Bath two-point-function family with coupling-strength matrix G.

    ``kind`` is "exponential" (decay rate ``mu`` = 1/tau_E required) or
    "delta" (``mu`` must be omitted; G must additionally be real symmetric,
    as produced by classical stochastic noise).
    """

    kind: str
    G: np.ndarray
    mu: float | None = None

    def __post_init__(self):
        if self.kind not in (EXPONENTIAL, DELTA):
            raise ValueError(f"unknown correlation kind {self.kind!r}")
        G = np.array(self.G, dtype=complex)
        if G.shape != (4, 4):
            raise ValueError(f"G must be 4x4, got shape {G.shape}")
        herm = np.abs(G - G.conj().T).max()
        if herm > _G_HERM_TOL:
            raise ValueError(f"G not hermitian: max |G - G^dag| = {herm:.3e}")
        lo = np.linalg.eigvalsh(0.5 * (G + G.conj().T)).min()
        if lo < _G_EIG_FLOOR:
            raise ValueError(f"G not positive semidefinite: min eig {lo:.3e}")
        if self.kind == DELTA:
            if np.abs(G.imag).max() > _G_HERM_TOL:
                raise ValueError("delta-kind G must be real symmetric")
            if self.mu is not None:
                raise ValueError("delta-kind model takes no decay rate mu")
        else:
            if self.mu is None or not self.mu > 0:
                raise ValueError(f"exponential kind needs mu > 0, got {self.mu!r}")
        G.setflags(write=False)
        object.__setattr__(self, "G", G)


@dataclass(frozen=True)
class SpectralMatrix:
    """Fourier and Hilbert transforms of the correlations at one frequency."""

    omega: float
    c: np.ndarray
    s: np.ndarray


def fourier_c(model: CorrelationModel, omega: float) -> np.ndarray:
    """Fourier transform c(omega) = int dt exp(-i omega t) G(t).

    Computed from the hermitian/anti-hermitian split of G so that it is
    the exact transform of the declared negative-time extension, whatever
    dust G carries off hermiticity.
    """
    if model.kind == DELTA:
        return model.G.copy()
    G = model.G
    gh = 0.5 * (G + G.conj().T)
    ga = 0.5 * (G - G.conj().T)
    denom = model.mu ** 2 + omega ** 2
    return (2.0 * model.mu * gh - 2j * omega * ga) / denom


def hilbert_s(model: CorrelationModel, omega: float) -> np.ndarray:
    """Principal-value transform s(omega) = (1/2pi) PV int c(w)/(w - omega) dw.

    Closed forms: zero for the delta kind (flat c against an odd kernel);
    -(gh*omega + i*ga*mu) / (mu^2 + omega^2) for the exponential kind.
    """
    if model.kind == DELTA:
        return np.zeros((4, 4), dtype=complex)
    G = model.G
    gh = 0.5 * (G + G.conj().T)
    ga = 0.5 * (G - G.conj().T)
    denom = model.mu ** 2 + omega ** 2
    return -(gh * omega + 1j * ga * model.mu) / denom


def spectral_matrix(model: CorrelationModel, omega: float) -> SpectralMatrix:
    return SpectralMatrix(omega=float(omega),
                          c=fourier_c(model, omega),
                          s=hilbert_s(model, omega))


def equal_coupling_model(kind: str, g_diag: float,
                         mu: float | None = None) -> CorrelationModel:
    """Model of an environment acting identically on both wells.

    The well-2 coupling operators coincide with the well-1 ones, so the
    strength matrix repeats its upper-left 2x2 block across wells:
    G13 = G11, G24 = G22, G14 = G12, G23 = G21.  Any such model drives zero
    current.  A fixed cross strength g_diag/2 keeps the check nontrivial.
    """
    if not g_diag > 0:
        raise ValueError(f"g_diag must be > 0, got {g_diag}")
    block = np.array([[g_diag, 0.5 * g_diag],
                      [0.5 * g_diag, g_diag]])
    G = np.tile(block, (2, 2))
    return CorrelationModel(kind=kind, G=G, mu=mu)

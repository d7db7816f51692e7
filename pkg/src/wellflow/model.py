"""Two-well Bose-Hubbard Hamiltonian, transport observables and the
single-well transition frequencies used by the weak-coupling construction.

Units: hbar = 1; every coefficient shares one energy unit and time is its
inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fockspace import FockBasis, annihilator, number_operator


class AsymmetricTrapError(ValueError):
    """Raised when an operation requires equal well depths but eps1 != eps2."""


@dataclass(frozen=True)
class ModelParams:
    """System and coupling parameters.

    T is the tunneling amplitude, U > 0 the on-site repulsion, eps1/eps2
    the well depths and lam the dimensionless system-environment coupling
    (assumed small; not enforced).
    """

    T: float
    U: float
    eps1: float
    eps2: float
    lam: float

    def __post_init__(self):
        if self.U <= 0:
            raise ValueError(f"U must be > 0, got {self.U}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.lam < 0:
            raise ValueError(f"lam must be >= 0, got {self.lam}")

    @property
    def symmetric(self) -> bool:
        return self.eps1 == self.eps2


@dataclass(frozen=True)
class BohrFrequency:
    """Single-well transition energy n -> n+1 of the tunneling-free spectrum."""

    n: int
    omega: float


def single_well_frequency(eps: float, U: float, n: int) -> float:
    """Transition energy n -> n+1 of one well with depth eps: eps + U + 2*U*n."""
    return eps + U + 2.0 * U * n


def bohr_frequencies(p: ModelParams, n_max: int) -> list[BohrFrequency]:
    """Ladder of transition energies omega_n, n = 0 .. n_max-1.

    Only defined for a symmetric trap, where both wells share one ladder;
    an asymmetric trap must go through the diagonal-Kossakowski path of the
    generator module instead.
    """
    if not p.symmetric:
        raise AsymmetricTrapError(
            f"eps1={p.eps1} != eps2={p.eps2}: no common frequency ladder")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return [BohrFrequency(n, single_well_frequency(p.eps1, p.U, n))
            for n in range(n_max)]


def bose_hubbard_hamiltonian(basis: FockBasis, p: ModelParams) -> np.ndarray:
    """H = -T (a1^dag a2 + a2^dag a1) + U (n1^2 + n2^2) + eps1 n1 + eps2 n2."""
    a1 = annihilator(basis, 1)
    a2 = annihilator(basis, 2)
    n1 = number_operator(basis, 1)
    n2 = number_operator(basis, 2)
    hop = a1.conj().T @ a2 + a2.conj().T @ a1
    return -p.T * hop + p.U * (n1 @ n1 + n2 @ n2) + p.eps1 * n1 + p.eps2 * n2


def current_operator(basis: FockBasis) -> np.ndarray:
    """Particle flow between the wells: J = i (a1^dag a2 - a2^dag a1)."""
    a1 = annihilator(basis, 1)
    a2 = annihilator(basis, 2)
    return 1j * (a1.conj().T @ a2 - a2.conj().T @ a1)


def barycenter_operator(basis: FockBasis, N: int) -> np.ndarray:
    """Occupation imbalance Z = (n1 - n2) / (2N) for per-well filling N.

    N is a user-supplied normalisation label; it does not restrict which
    states the operator may act on.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return (number_operator(basis, 1) - number_operator(basis, 2)) / (2.0 * N)


def closed_current_derivative(basis: FockBasis, p: ModelParams, N: int) -> float:
    """<N,N| i[H, J] |N,N>: the closed-system current derivative.

    Vanishes identically for any T, U, eps1, eps2; kept as an executable
    check.  N = n_max is rejected because the matrix elements of J at the
    cutoff are truncated.
    """
    if not 0 <= N <= basis.n_max - 1:
        raise ValueError(
            f"N={N} is at or beyond the truncation edge (n_max={basis.n_max})")
    H = bose_hubbard_hamiltonian(basis, p)
    J = current_operator(basis)
    comm = 1j * (H @ J - J @ H)
    k = basis.index(N, N)
    val = comm[k, k]
    return float(val.real)

"""Truncated two-mode bosonic operator algebra.

Everything lives on the product of two single-well Fock ladders, each cut
off at a per-well occupation ``n_max``.  Operators are dense complex numpy
arrays; the basis ordering is row major with the well-1 occupation as the
slow index, so |n1, n2> sits at flat index ``n1 * (n_max + 1) + n2``.

Truncation makes the canonical commutator [a, a^dag] = 1 fail in the last
ladder rung only; callers that evolve states are expected to monitor the
population at the cutoff (see :func:`FockBasis.edge_indices`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class FockBasis:
    """Index bookkeeping for the truncated two-well Fock space."""

    n_max: int

    def __post_init__(self):
        if not isinstance(self.n_max, (int, np.integer)) or isinstance(self.n_max, bool):
            raise ValueError(f"n_max must be an integer, got {self.n_max!r}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** 2

    def index(self, n1: int, n2: int) -> int:
        """Flat index of |n1, n2>."""
        if not (0 <= n1 <= self.n_max and 0 <= n2 <= self.n_max):
            raise ValueError(
                f"occupations ({n1}, {n2}) outside 0..{self.n_max}")
        return n1 * (self.n_max + 1) + n2

    def occupations(self, k: int) -> tuple[int, int]:
        """Inverse of :meth:`index`."""
        if not 0 <= k < self.dim:
            raise ValueError(f"flat index {k} outside 0..{self.dim - 1}")
        return divmod(k, self.n_max + 1)

    def edge_indices(self) -> np.ndarray:
        """Flat indices of states with either well at the cutoff occupation."""
        idx = [k for k in range(self.dim)
               if self.n_max in self.occupations(k)]
        return np.array(idx, dtype=int)


def _ladder(n_levels: int) -> np.ndarray:
    a = np.zeros((n_levels, n_levels), dtype=complex)
    for n in range(1, n_levels):
        a[n - 1, n] = np.sqrt(n)
    return a


def _embed(basis: FockBasis, single: np.ndarray, well: int) -> np.ndarray:
    eye = np.eye(basis.n_max + 1, dtype=complex)
    if well == 1:
        return np.kron(single, eye)
    if well == 2:
        return np.kron(eye, single)
    raise ValueError(f"well must be 1 or 2, got {well!r}")


def annihilator(basis: FockBasis, well: int) -> np.ndarray:
    """Annihilation operator of the selected well, identity on the other."""
    return _embed(basis, _ladder(basis.n_max + 1), well)


def creator(basis: FockBasis, well: int) -> np.ndarray:
    """Creation operator of the selected well."""
    return annihilator(basis, well).conj().T


def number_operator(basis: FockBasis, well: int) -> np.ndarray:
    """Occupation operator of one well.

    Built directly from the integer occupation labels so its diagonal is
    float-exact; a^dag a agrees with it only up to the rounding of the
    sqrt(n) products.
    """
    if well not in (1, 2):
        raise ValueError(f"well must be 1 or 2, got {well!r}")
    occ = [basis.occupations(k)[well - 1] for k in range(basis.dim)]
    return np.diag(np.array(occ, dtype=complex))


def number_projector(basis: FockBasis, well: int, n: int) -> np.ndarray:
    """Projector onto occupation ``n`` of one well, identity on the other."""
    if not 0 <= n <= basis.n_max:
        raise ValueError(f"occupation {n} outside 0..{basis.n_max}")
    p = np.zeros((basis.n_max + 1, basis.n_max + 1), dtype=complex)
    p[n, n] = 1.0
    return _embed(basis, p, well)


def identity(basis: FockBasis) -> np.ndarray:
    return np.eye(basis.dim, dtype=complex)


def fock_state(basis: FockBasis, n1: int, n2: int) -> np.ndarray:
    """Pure-state density matrix |n1, n2><n1, n2|."""
    k = basis.index(n1, n2)
    rho = np.zeros((basis.dim, basis.dim), dtype=complex)
    rho[k, k] = 1.0
    return rho


def hermitian_part(x: np.ndarray) -> np.ndarray:
    return 0.5 * (x + x.conj().T)


def validate_density_matrix(rho: np.ndarray, name: str = "rho") -> None:
    """Raise ValueError unless ``rho`` is a valid state.

    Checks hermiticity (1e-12), unit trace (1e-12) and spectrum bounded
    below by -1e-10.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    herm = np.abs(rho - rho.conj().T).max()
    if herm > HERMITICITY_TOL:
        raise ValueError(f"{name} not hermitian: max |rho - rho^dag| = {herm:.3e}")
    tdev = abs(np.trace(rho) - 1.0)
    if tdev > TRACE_TOL:
        raise ValueError(f"{name} trace deviates from 1 by {tdev:.3e}")
    lo = np.linalg.eigvalsh(hermitian_part(rho)).min()
    if lo < EIGENVALUE_FLOOR:
        raise ValueError(f"{name} has negative eigenvalue {lo:.3e}")

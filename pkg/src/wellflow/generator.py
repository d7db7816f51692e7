"""Assembly of the GKSL generator in the two Markovian limits.

A generator is a hamiltonian (plus optional environment-induced shift) and
a list of Kossakowski blocks.  Each block pairs a 4-vector of Kraus
operators with a hermitian positive-semidefinite 4x4 coefficient matrix h,
and contributes

    D[rho]  = lam^2 sum_ij h_ij ( A_j^dag rho A_i - 1/2 {A_i A_j^dag, rho} )
    D*[X]   = lam^2 sum_ij h_ij ( A_i  X  A_j^dag - 1/2 {A_i A_j^dag, X} )

to the Schroedinger and dual (Heisenberg) dissipators respectively.

Weak-coupling limit: one block per single-well transition n -> n+1, Kraus
vector (P_n a1 x 1, a1^dag P_n x 1, 1 x P_n a2, 1 x a2^dag P_n), sparse h
built from the Fourier transforms of the bath correlations at +/- the
transition frequency.  The rotating-wave average leaves the (1,3) entries
evaluated at +omega_n and the (2,4) entries at -omega_n, with no mixing
between the two sectors.

Singular-coupling limit: a single block whose Kraus vector is
(a1, a1^dag, a2, a2^dag) and whose full h is the congruence image of the
constant Kossakowski matrix G under the change of Kraus basis from the
hermitian couplings (a+a^dag, i(a-a^dag), ...).  The hermitian-coupling
representation with coefficient matrix G itself generates the identical
superoperator; construction verifies this on probe states and fails
loudly on disagreement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .environment import DELTA, CorrelationModel, fourier_c, hilbert_s
from .fockspace import FockBasis, annihilator, number_projector
from .model import AsymmetricTrapError, ModelParams, bohr_frequencies, \
    bose_hubbard_hamiltonian, single_well_frequency

_H_HERM_TOL = 1e-12
_H_EIG_FLOOR = -1e-10
_REP_AGREEMENT_TOL = 1e-10
_SUPEROP_DIM_GUARD = 100

# change of Kraus basis from the hermitian couplings
# (a1+a1^dag, i(a1-a1^dag), a2+a2^dag, i(a2-a2^dag)) to (a1, a1^dag, a2, a2^dag):
# V_i = sum_p S[i, p] curlyV_p
_S_BASIS = np.array([[1, 1, 0, 0],
                     [1j, -1j, 0, 0],
                     [0, 0, 1, 1],
                     [0, 0, 1j, -1j]], dtype=complex)


@dataclass(frozen=True)
class KossakowskiBlock:
    """One Kraus 4-vector with its coefficient matrix.

    ``omega`` labels the block: a float for a symmetric-trap transition
    frequency, a (well-1, well-2) frequency pair on the asymmetric path,
    or None in the singular limit.
    """

    omega: object
    h: np.ndarray
    kraus: tuple

    def __post_init__(self):
        h = np.array(self.h, dtype=complex)
        if h.shape != (4, 4):
            raise ValueError(f"h must be 4x4, got {h.shape}")
        herm = np.abs(h - h.conj().T).max()
        if herm > _H_HERM_TOL:
            raise ValueError(
                f"Kossakowski block {self.omega!r} not hermitian ({herm:.3e})")
        lo = np.linalg.eigvalsh(0.5 * (h + h.conj().T)).min()
        if lo < _H_EIG_FLOOR:
            raise ValueError(
                f"Kossakowski block {self.omega!r} not PSD: min eig {lo:.3e}")
        if len(self.kraus) != 4:
            raise ValueError("each block carries exactly 4 Kraus operators")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "kraus", tuple(self.kraus))


@dataclass(frozen=True)
class LindbladGenerator:
    """Assembled GKSL generator; immutable and reusable across threads."""

    basis: FockBasis
    hamiltonian: np.ndarray
    lam: float
    blocks: tuple
    lamb_shift: np.ndarray | None = None
    _terms: tuple = field(init=False, repr=False, compare=False)
    _kernel: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        dim = self.basis.dim
        if self.hamiltonian.shape != (dim, dim):
            raise ValueError("hamiltonian dimension does not match basis")
        # flatten the blocks into sandwich terms with lam^2 folded in, and
        # accumulate the anticommutator kernel sum_ij h_ij A_i A_j^dag
        terms = []
        kernel = np.zeros((dim, dim), dtype=complex)
        w = self.lam ** 2
        for blk in self.blocks:
            for i in range(4):
                ai = blk.kraus[i]
                for j in range(4):
                    hij = blk.h[i, j]
                    if hij == 0:
                        continue
                    ajd = blk.kraus[j].conj().T
                    terms.append((w * hij, ai, ajd))
                    kernel += (w * hij) * (ai @ ajd)
        object.__setattr__(self, "_terms", tuple(terms))
        kernel.setflags(write=False)
        object.__setattr__(self, "_kernel", kernel)

    @property
    def effective_hamiltonian(self) -> np.ndarray:
        if self.lamb_shift is None:
            return self.hamiltonian
        return self.hamiltonian + self.lamb_shift

    def kraus_operators(self):
        """Yield (label, matrix) pairs across all blocks."""
        for blk in self.blocks:
            for i, op in enumerate(blk.kraus):
                yield (blk.omega, i + 1), op


def _weak_h_matrix(model: CorrelationModel, omega: float) -> np.ndarray:
    """Sparse-pattern coefficient matrix of one weak-coupling block.

    The (1,3) sector is built from c at +omega, the (2,4) sector from c at
    -omega; the lower off-diagonals are the displayed conjugates h31 =
    conj(h13), h42 = conj(h24).
    """
    cp = fourier_c(model, omega)
    cm = fourier_c(model, -omega)
    h = np.zeros((4, 4), dtype=complex)
    h[0, 0] = cp[0, 0] + cp[1, 1] + 1j * (cp[1, 0] - cp[0, 1])
    h[0, 2] = cp[0, 2] + cp[1, 3] + 1j * (cp[1, 2] - cp[0, 3])
    h[2, 0] = np.conj(h[0, 2])
    h[2, 2] = cp[2, 2] + cp[3, 3] + 1j * (cp[3, 2] - cp[2, 3])
    h[1, 1] = cm[0, 0] + cm[1, 1] + 1j * (cm[0, 1] - cm[1, 0])
    h[1, 3] = cm[0, 2] + cm[1, 3] + 1j * (cm[0, 3] - cm[1, 2])
    h[3, 1] = np.conj(h[1, 3])
    h[3, 3] = cm[2, 2] + cm[3, 3] + 1j * (cm[2, 3] - cm[3, 2])
    return h


def _weak_k_matrix(model: CorrelationModel, omega: float) -> np.ndarray:
    """Lamb-shift coefficients: same linear map applied to the Hilbert
    transform instead of the Fourier transform."""
    sp_ = hilbert_s(model, omega)
    sm = hilbert_s(model, -omega)
    k = np.zeros((4, 4), dtype=complex)
    k[0, 0] = sp_[0, 0] + sp_[1, 1] + 1j * (sp_[1, 0] - sp_[0, 1])
    k[0, 2] = sp_[0, 2] + sp_[1, 3] + 1j * (sp_[1, 2] - sp_[0, 3])
    k[2, 0] = np.conj(k[0, 2])
    k[2, 2] = sp_[2, 2] + sp_[3, 3] + 1j * (sp_[3, 2] - sp_[2, 3])
    k[1, 1] = sm[0, 0] + sm[1, 1] + 1j * (sm[0, 1] - sm[1, 0])
    k[1, 3] = sm[0, 2] + sm[1, 3] + 1j * (sm[0, 3] - sm[1, 2])
    k[3, 1] = np.conj(k[1, 3])
    k[3, 3] = sm[2, 2] + sm[3, 3] + 1j * (sm[2, 3] - sm[3, 2])
    return k


def _ladder_kraus(basis: FockBasis, n: int) -> tuple:
    """Kraus 4-vector of the transition n -> n+1 in either well."""
    p1a1 = number_projector(basis, 1, n) @ annihilator(basis, 1)
    p2a2 = number_projector(basis, 2, n) @ annihilator(basis, 2)
    return (p1a1, p1a1.conj().T, p2a2, p2a2.conj().T)


def weak_coupling_generator(basis: FockBasis, p: ModelParams,
                            model: CorrelationModel,
                            include_lamb: bool = False) -> LindbladGenerator:
    """Weak-coupling (rotating-wave) generator for a symmetric trap.

    One Kossakowski block per ladder transition n = 0 .. n_max-1; the
    topmost raising transition out of the truncated space is dropped, so
    states never leak outside the basis by construction.  The hamiltonian
    keeps the full tunneling term; only the dissipator is built on the
    tunneling-free spectrum.
    """
    if not p.symmetric:
        raise AsymmetricTrapError(
            "weak_coupling_generator needs eps1 == eps2; use "
            "asymmetric_weak_coupling_generator for a tilted trap")
    blocks = []
    lamb = np.zeros((basis.dim, basis.dim), dtype=complex) if include_lamb else None
    for bf in bohr_frequencies(p, basis.n_max):
        kraus = _ladder_kraus(basis, bf.n)
        h = _weak_h_matrix(model, bf.omega)
        blocks.append(KossakowskiBlock(omega=bf.omega, h=h, kraus=kraus))
        if include_lamb:
            k = _weak_k_matrix(model, bf.omega)
            for i in range(4):
                for j in range(4):
                    if k[i, j] != 0:
                        lamb += (p.lam ** 2 * k[i, j]) * (
                            kraus[i] @ kraus[j].conj().T)
    return LindbladGenerator(basis=basis,
                             hamiltonian=bose_hubbard_hamiltonian(basis, p),
                             lam=p.lam, blocks=tuple(blocks), lamb_shift=lamb)


def asymmetric_weak_coupling_generator(basis: FockBasis, p: ModelParams,
                                       model: CorrelationModel) -> LindbladGenerator:
    """Weak-coupling generator for a tilted trap (eps1 != eps2).

    The rotating-wave average over incommensurate per-well ladders kills
    every cross-well Kossakowski entry, so each block keeps only the
    diagonal of h, with the well-1 entries evaluated on the well-1 ladder
    and likewise for well 2.  The wells then dissipate independently and
    no current can be generated.
    """
    if p.symmetric:
        raise ValueError(
            "trap is symmetric; call weak_coupling_generator instead")
    blocks = []
    for n in range(basis.n_max):
        w1 = single_well_frequency(p.eps1, p.U, n)
        w2 = single_well_frequency(p.eps2, p.U, n)
        h1 = _weak_h_matrix(model, w1)
        h2 = _weak_h_matrix(model, w2)
        h = np.diag([h1[0, 0], h1[1, 1], h2[2, 2], h2[3, 3]])
        blocks.append(KossakowskiBlock(omega=(w1, w2), h=h,
                                       kraus=_ladder_kraus(basis, n)))
    return LindbladGenerator(basis=basis,
                             hamiltonian=bose_hubbard_hamiltonian(basis, p),
                             lam=p.lam, blocks=tuple(blocks), lamb_shift=None)


def hermitian_couplings(basis: FockBasis) -> list:
    """The four hermitian system-side coupling operators."""
    a1 = annihilator(basis, 1)
    a2 = annihilator(basis, 2)
    return [a1 + a1.conj().T, 1j * (a1 - a1.conj().T),
            a2 + a2.conj().T, 1j * (a2 - a2.conj().T)]


def _probe_states(dim: int, count: int = 2) -> list:
    """Deterministic hermitian probe matrices for representation checks."""
    rng = np.random.Generator(np.random.Philox(key=20240640))
    probes = []
    for _ in range(count):
        x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        probes.append(0.5 * (x + x.conj().T))
    return probes


def _dissipator_once(terms, rho: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho)
    for coef, ai, ajd in terms:
        k = ai @ ajd
        out += coef * (ajd @ rho @ ai - 0.5 * (k @ rho + rho @ k))
    return out


def singular_coupling_generator(basis: FockBasis, p: ModelParams,
                                model: CorrelationModel) -> LindbladGenerator:
    """Singular-coupling generator from a delta-correlated model.

    The constant Kossakowski matrix equals G in the hermitian-coupling
    Kraus basis; the stored block uses the ladder basis (a1, a1^dag, a2,
    a2^dag) with the congruence image h = S^T G conj(S).  Both are the
    same superoperator; equality is asserted on probe states.
    """
    if model.kind != DELTA:
        raise ValueError(
            f"singular coupling needs a delta-kind model, got {model.kind!r}")
    G = fourier_c(model, 0.0)  # constant in omega
    h = _S_BASIS.T @ G @ np.conj(_S_BASIS)
    a1 = annihilator(basis, 1)
    a2 = annihilator(basis, 2)
    kraus = (a1, a1.conj().T, a2, a2.conj().T)
    block = KossakowskiBlock(omega=None, h=h, kraus=kraus)

    herm = hermitian_couplings(basis)
    terms_ladder = [(h[i, j], kraus[i], kraus[j].conj().T)
                    for i in range(4) for j in range(4)]
    terms_herm = [(G[i, j], herm[i], herm[j].conj().T)
                  for i in range(4) for j in range(4)]
    for rho in _probe_states(basis.dim):
        d1 = _dissipator_once(terms_ladder, rho)
        d2 = _dissipator_once(terms_herm, rho)
        dev = np.abs(d1 - d2).max()
        if dev > _REP_AGREEMENT_TOL:
            raise RuntimeError(
                "singular-coupling representations disagree: "
                f"ladder vs hermitian Kraus basis differ by {dev:.3e}")

    return LindbladGenerator(basis=basis,
                             hamiltonian=bose_hubbard_hamiltonian(basis, p),
                             lam=p.lam, blocks=(block,), lamb_shift=None)


def apply_schrodinger(gen: LindbladGenerator, rho: np.ndarray) -> np.ndarray:
    """Generator action on a state: -i[H + H_shift, rho] + D[rho]."""
    if rho.shape != (gen.basis.dim, gen.basis.dim):
        raise ValueError(f"state shape {rho.shape} does not match basis "
                         f"dimension {gen.basis.dim}")
    heff = gen.effective_hamiltonian
    out = -1j * (heff @ rho - rho @ heff)
    for coef, ai, ajd in gen._terms:
        out += coef * (ajd @ rho @ ai)
    out -= 0.5 * (gen._kernel @ rho + rho @ gen._kernel)
    return out


def apply_dual(gen: LindbladGenerator, x: np.ndarray) -> np.ndarray:
    """Dual (Heisenberg) action on an observable: +i[H + H_shift, X] + D*[X]."""
    if x.shape != (gen.basis.dim, gen.basis.dim):
        raise ValueError(f"observable shape {x.shape} does not match basis "
                         f"dimension {gen.basis.dim}")
    heff = gen.effective_hamiltonian
    out = 1j * (heff @ x - x @ heff)
    for coef, ai, ajd in gen._terms:
        out += coef * (ai @ x @ ajd)
    out -= 0.5 * (gen._kernel @ x + x @ gen._kernel)
    return out


def superoperator_sparse(gen: LindbladGenerator, dual: bool = False) -> sp.csr_matrix:
    """Column-stacking matrix of the generator as a sparse CSR operator.

    vec() stacks columns (Fortran order), so vec(A rho B) =
    (B^T kron A) vec(rho).
    """
    dim = gen.basis.dim
    eye = sp.identity(dim, dtype=complex, format="csr")
    heff = sp.csr_matrix(gen.effective_hamiltonian)
    sign = 1j if dual else -1j
    L = sign * (sp.kron(eye, heff) - sp.kron(heff.T, eye))
    for coef, ai, ajd in gen._terms:
        ai_s = sp.csr_matrix(ai)
        ajd_s = sp.csr_matrix(ajd)
        if dual:
            L = L + coef * sp.kron(ajd_s.T, ai_s)
        else:
            L = L + coef * sp.kron(ai_s.T, ajd_s)
    kern = sp.csr_matrix(gen._kernel)
    L = L - 0.5 * (sp.kron(eye, kern) + sp.kron(kern.T, eye))
    return L.tocsr()


def superoperator_matrix(gen: LindbladGenerator, dual: bool = False,
                         allow_large: bool = False,
                         dim_guard: int = _SUPEROP_DIM_GUARD) -> np.ndarray:
    """Dense column-stacking matrix of the generator.

    Guarded at basis dimension 100 by default (a 10^4 x 10^4 dense complex
    matrix); pass allow_large=True to override.
    """
    if gen.basis.dim > dim_guard and not allow_large:
        raise ValueError(
            f"dense superoperator at dim={gen.basis.dim} exceeds the guard "
            f"({dim_guard}); pass allow_large=True to override")
    return superoperator_sparse(gen, dual=dual).toarray()


def vectorize(mat: np.ndarray) -> np.ndarray:
    """Column-stacking vec."""
    return np.asarray(mat).flatten(order="F")


def unvectorize(vec_: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vec_).reshape((dim, dim), order="F")

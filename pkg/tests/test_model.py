import numpy as np
import pytest

from wellflow import (AsymmetricTrapError, FockBasis, ModelParams,
                      barycenter_operator, bohr_frequencies,
                      bose_hubbard_hamiltonian, closed_current_derivative,
                      current_operator, fock_state, number_operator)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(T=0.1, U=0.0, eps1=0, eps2=0, lam=0.1)
    with pytest.raises(ValueError):
        ModelParams(T=-0.1, U=1.0, eps1=0, eps2=0, lam=0.1)
    with pytest.raises(ValueError):
        ModelParams(T=0.1, U=1.0, eps1=0, eps2=0, lam=-1)


def test_hamiltonian_diagonal_without_tunneling():
    basis = FockBasis(3)
    p = ModelParams(T=0.0, U=1.3, eps1=0.2, eps2=-0.4, lam=0.0)
    h = bose_hubbard_hamiltonian(basis, p)
    assert np.abs(h - np.diag(np.diag(h))).max() == 0.0
    for k in range(basis.dim):
        n1, n2 = basis.occupations(k)
        expected = p.U * (n1 ** 2 + n2 ** 2) + p.eps1 * n1 + p.eps2 * n2
        assert h[k, k].real == pytest.approx(expected, abs=1e-14)


def test_doubly_occupied_energy():
    basis = FockBasis(3)
    p = ModelParams(T=0.0, U=1.0, eps1=0.0, eps2=0.0, lam=0.0)
    h = bose_hubbard_hamiltonian(basis, p)
    k = basis.index(2, 2)
    assert h[k, k].real == pytest.approx(8.0)


def test_hamiltonian_is_hermitian_and_conserves_total_number():
    basis = FockBasis(4)
    p = ModelParams(T=0.37, U=1.1, eps1=0.3, eps2=-0.2, lam=0.05)
    h = bose_hubbard_hamiltonian(basis, p)
    assert np.abs(h - h.conj().T).max() < 1e-12
    ntot = number_operator(basis, 1) + number_operator(basis, 2)
    assert np.abs(h @ ntot - ntot @ h).max() == 0.0


def test_current_operator_structure():
    basis = FockBasis(5)
    j = current_operator(basis)
    assert np.abs(j - j.conj().T).max() < 1e-14
    assert abs(np.trace(j)) == 0.0
    for n in range(basis.n_max + 1):
        k = basis.index(n, n)
        assert j[k, k] == 0.0
    # nonzero elements conserve total number and hop a single particle
    for r in range(basis.dim):
        for c in range(basis.dim):
            if j[r, c] != 0:
                m1, m2 = basis.occupations(r)
                n1, n2 = basis.occupations(c)
                assert m1 + m2 == n1 + n2
                assert abs(m1 - n1) == 1


def test_current_is_proportional_to_barycenter_velocity():
    # i [H, Z] = (T / N) J away from the truncation edge
    basis = FockBasis(5)
    p = ModelParams(T=0.3, U=1.0, eps1=0.5, eps2=0.5, lam=0.0)
    n_fill = 2
    h = bose_hubbard_hamiltonian(basis, p)
    z = barycenter_operator(basis, n_fill)
    j = current_operator(basis)
    velocity = 1j * (h @ z - z @ h)
    bulk = np.array([k for k in range(basis.dim)
                     if basis.n_max not in basis.occupations(k)])
    sub = np.ix_(bulk, bulk)
    assert np.abs(velocity[sub] - (p.T / n_fill) * j[sub]).max() < 1e-13


def test_barycenter_is_diagonal_and_balanced():
    basis = FockBasis(4)
    z = barycenter_operator(basis, 2)
    assert np.abs(z - np.diag(np.diag(z))).max() == 0.0
    assert z[basis.index(3, 1), basis.index(3, 1)].real == pytest.approx(0.5)
    assert z[basis.index(2, 2), basis.index(2, 2)] == 0.0
    for well in (1, 2):
        n = number_operator(basis, well)
        assert np.abs(z @ n - n @ z).max() == 0.0
    with pytest.raises(ValueError):
        barycenter_operator(basis, 0)


def test_bohr_frequency_ladder():
    p = ModelParams(T=0.0, U=1.0, eps1=0.5, eps2=0.5, lam=0.0)
    freqs = bohr_frequencies(p, 4)
    assert [f.n for f in freqs] == [0, 1, 2, 3]
    assert freqs[2].omega == pytest.approx(5.5)
    gaps = np.diff([f.omega for f in freqs])
    assert np.allclose(gaps, 2.0 * p.U, atol=1e-14)
    p0 = ModelParams(T=0.0, U=1.0, eps1=0.0, eps2=0.0, lam=0.0)
    assert bohr_frequencies(p0, 1)[0].omega == pytest.approx(1.0)


def test_bohr_frequencies_need_symmetric_trap():
    p = ModelParams(T=0.0, U=1.0, eps1=0.1, eps2=0.2, lam=0.0)
    with pytest.raises(AsymmetricTrapError):
        bohr_frequencies(p, 3)


def test_closed_system_current_derivative_vanishes():
    basis = FockBasis(5)
    p = ModelParams(T=0.3, U=1.0, eps1=0.5, eps2=0.5, lam=0.0)
    assert abs(closed_current_derivative(basis, p, 2)) < 1e-12
    tilted = ModelParams(T=0.2, U=0.7, eps1=0.1, eps2=0.9, lam=0.0)
    assert abs(closed_current_derivative(basis, tilted, 1)) < 1e-12
    with pytest.raises(ValueError):
        closed_current_derivative(basis, p, basis.n_max)


def test_current_vanishes_in_balanced_states(basis):
    j = current_operator(basis)
    for n in range(basis.n_max + 1):
        rho = fock_state(basis, n, n)
        assert abs(np.trace(rho @ j)) == 0.0

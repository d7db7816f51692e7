import numpy as np
import pytest

from conftest import canonical_g
from wellflow import (CalibrationError, CorrelationModel, FockBasis,
                      ModelParams, NOISE_KOSSAKOWSKI_FACTOR, NoiseConfig,
                      StepSizeError, calibrate_noise, evolve, fock_state,
                      run_ensemble, weak_coupling_generator)


def small_setup():
    basis = FockBasis(3)
    p = ModelParams(T=0.01, U=1.0, eps1=0.5, eps2=0.5, lam=0.05)
    rho0 = fock_state(basis, 1, 1)
    return basis, p, rho0


def test_noise_config_validation():
    good = canonical_g()
    NoiseConfig(G=good, dt=0.01, seed=1, trajectories=10)
    with pytest.raises(ValueError, match="symmetric"):
        bad = good.copy()
        bad[0, 1] = 0.9
        NoiseConfig(G=bad, dt=0.01, seed=1, trajectories=10)
    with pytest.raises(ValueError, match="semidefinite"):
        NoiseConfig(G=-np.eye(4), dt=0.01, seed=1, trajectories=10)
    with pytest.raises(ValueError, match="dt"):
        NoiseConfig(G=good, dt=0.0, seed=1, trajectories=10)
    with pytest.raises(ValueError, match="trajectory"):
        NoiseConfig(G=good, dt=0.01, seed=1, trajectories=0)
    with pytest.raises(ValueError, match="seed"):
        NoiseConfig(G=good, dt=0.01, seed=-4, trajectories=10)
    with pytest.raises(ValueError, match="channel_mask"):
        NoiseConfig(G=good, dt=0.01, seed=1, trajectories=10,
                    channel_mask=(True, False))


def test_zero_noise_reproduces_closed_evolution():
    basis, p, rho0 = small_setup()
    grid = np.linspace(0.0, 0.5, 6)
    noise = NoiseConfig(G=np.zeros((4, 4)), dt=0.01, seed=3, trajectories=4)
    result = run_ensemble(basis, p, noise, rho0, grid)
    closed = weak_coupling_generator(
        basis, p, CorrelationModel("exponential", np.zeros((4, 4)), mu=1.0))
    reference = evolve(closed, rho0, grid)
    dev = np.abs(result.trajectory.expectations["J"].real
                 - reference.expectations["J"].real).max()
    assert dev < 1e-10
    assert np.abs(result.stderr).max() < 1e-14


def test_ensemble_is_deterministic_per_seed():
    basis, p, rho0 = small_setup()
    grid = np.linspace(0.0, 0.2, 3)
    noise = NoiseConfig(G=canonical_g(), dt=0.02, seed=42, trajectories=64)
    a = run_ensemble(basis, p, noise, rho0, grid)
    b = run_ensemble(basis, p, noise, rho0, grid)
    assert np.array_equal(a.trajectory.expectations["J"],
                          b.trajectory.expectations["J"])
    assert np.array_equal(a.stderr, b.stderr)
    other = NoiseConfig(G=canonical_g(), dt=0.02, seed=43, trajectories=64)
    c = run_ensemble(basis, p, other, rho0, grid)
    assert not np.array_equal(a.trajectory.expectations["J"],
                              c.trajectory.expectations["J"])


def test_each_trajectory_stays_normalized():
    basis, p, rho0 = small_setup()
    grid = np.linspace(0.0, 0.3, 4)
    noise = NoiseConfig(G=canonical_g(), dt=0.01, seed=7, trajectories=32)
    result = run_ensemble(basis, p, noise, rho0, grid)
    assert result.trajectory.trace_dev.max() < 1e-12
    assert result.trajectory.min_eig.min() > -1e-12
    assert not result.trajectory.flagged.any()


def test_error_scaling_with_trajectory_count():
    basis, p, rho0 = small_setup()
    grid = np.linspace(0.0, 0.5, 6)
    small = NoiseConfig(G=canonical_g(), dt=0.01, seed=11, trajectories=1000)
    large = NoiseConfig(G=canonical_g(), dt=0.01, seed=11, trajectories=4000)
    sem_small = run_ensemble(basis, p, small, rho0, grid).stderr[-1]
    sem_large = run_ensemble(basis, p, large, rho0, grid).stderr[-1]
    assert 1.7 < sem_small / sem_large < 2.3


def test_step_halving_check_passes_and_fails():
    basis, p, rho0 = small_setup()
    grid = np.linspace(0.0, 0.4, 5)
    noise = NoiseConfig(G=canonical_g(), dt=0.02, seed=13, trajectories=400)
    unchecked = run_ensemble(basis, p, noise, rho0, grid)
    sem = unchecked.stderr[-1]
    checked = run_ensemble(basis, p, noise, rho0, grid, step_check_tol=sem)
    assert np.array_equal(checked.trajectory.expectations["J"],
                          unchecked.trajectory.expectations["J"])
    with pytest.raises(StepSizeError):
        run_ensemble(basis, p, noise, rho0, grid, step_check_tol=1e-18)


def test_masking_all_channels_matches_zero_noise():
    basis, p, rho0 = small_setup()
    grid = np.linspace(0.0, 0.3, 4)
    masked = NoiseConfig(G=canonical_g(), dt=0.01, seed=5, trajectories=8,
                         channel_mask=(False, False, False, False))
    silent = NoiseConfig(G=np.zeros((4, 4)), dt=0.01, seed=5, trajectories=8)
    a = run_ensemble(basis, p, masked, rho0, grid)
    b = run_ensemble(basis, p, silent, rho0, grid)
    assert np.abs(a.trajectory.expectations["J"]
                  - b.trajectory.expectations["J"]).max() < 1e-14


def test_mixed_initial_state_averages_branch_currents():
    basis, p, _ = small_setup()
    grid = np.linspace(0.0, 0.2, 3)
    noise = NoiseConfig(G=canonical_g(), dt=0.02, seed=17, trajectories=16)
    rho_a = fock_state(basis, 1, 1)
    rho_b = fock_state(basis, 2, 1)
    mix = 0.5 * rho_a + 0.5 * rho_b
    j_mix = run_ensemble(basis, p, noise, mix, grid) \
        .trajectory.expectations["J"].real
    j_a = run_ensemble(basis, p, noise, rho_a, grid) \
        .trajectory.expectations["J"].real
    j_b = run_ensemble(basis, p, noise, rho_b, grid) \
        .trajectory.expectations["J"].real
    assert np.abs(j_mix - 0.5 * (j_a + j_b)).max() < 1e-12


def test_grid_validation_and_state_checks():
    basis, p, rho0 = small_setup()
    noise = NoiseConfig(G=canonical_g(), dt=0.01, seed=1, trajectories=2)
    with pytest.raises(ValueError, match="start at 0"):
        run_ensemble(basis, p, noise, rho0, np.array([0.1, 0.2]))
    with pytest.raises(ValueError, match="hermitian"):
        bad = rho0.copy()
        bad[0, 1] = 0.5
        run_ensemble(basis, p, noise, bad, np.array([0.0, 0.1]))


def test_calibration_recovers_unit_factor():
    factor = calibrate_noise(canonical_g(), trajectories=20000, seed=101)
    assert factor == pytest.approx(NOISE_KOSSAKOWSKI_FACTOR, abs=0.05)
    probed = calibrate_noise(canonical_g(), convention_probe=True,
                             trajectories=20000, seed=101)
    assert probed == factor


def test_calibration_reproducible_across_seeds():
    f1 = calibrate_noise(canonical_g(), trajectories=50000, seed=5)
    f2 = calibrate_noise(canonical_g(), trajectories=50000, seed=6)
    assert abs(f1 - f2) < 0.01


def test_calibration_needs_signal():
    dead = np.zeros((4, 4))
    with pytest.raises(CalibrationError, match="signal"):
        calibrate_noise(dead)

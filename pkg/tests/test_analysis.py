from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swingid.analysis import (CONTINUOUS, DISCRETE, BoundReport,
                              corollary2_bound, relative_error,
                              spectral_distance, spectrum, theorem1_bound,
                              to_continuous)
from swingid.model import build_continuous, build_discrete
from swingid.sim import DT_BASE

from conftest import (grid_models, single_gen_model, systems_for,
                      two_gen_model)


# ---------------------------------------------------------------- to_continuous

def test_identity_maps_to_null_dynamics():
    assert np.array_equal(to_continuous(np.eye(4), 0.3), np.zeros((4, 4)))


def test_inverts_forward_euler():
    rng = np.random.default_rng(0)
    a_d = rng.standard_normal((4, 4))
    dt = 1.0 / 60.0
    assert np.allclose(to_continuous(np.eye(4) + dt * a_d, dt), a_d, atol=1e-12)


def test_roundtrip_on_two_generator_model():
    cont, disc = systems_for(two_gen_model(), DT_BASE)
    assert np.allclose(to_continuous(disc.a, disc.dt), cont.a_d, atol=1e-12)


def test_to_continuous_rejects_bad_dt():
    with pytest.raises(ValueError, match="dt"):
        to_continuous(np.eye(2), 0.0)


@given(grid_models(), st.floats(min_value=1e-4, max_value=1.0, allow_nan=False))
@settings(max_examples=40)
def test_roundtrip_property(model, dt):
    cont, disc = systems_for(model, dt)
    assert np.allclose(to_continuous(disc.a, dt), cont.a_d, atol=1e-9)


# --------------------------------------------------------------- relative_error

def test_relative_error_trivial_values():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert relative_error(a, a) == 0.0
    assert relative_error(np.zeros((2, 2)), a) == 1.0
    assert relative_error(2.0 * a, a) == pytest.approx(1.0)


def test_relative_error_rejects_zero_reference():
    with pytest.raises(ValueError, match="zero norm"):
        relative_error(np.eye(2), np.zeros((2, 2)))


# ------------------------------------------------------------------ bounds

def test_bound_collapses_without_noise():
    _, disc = systems_for(single_gen_model(sigma=0.0), DT_BASE)
    report = theorem1_bound(disc, 100, 0.1, 5, seed=0)
    assert report.rhs == 0.0


def test_bound_scales_inversely_with_epsilon():
    _, disc = systems_for(single_gen_model(sigma=0.01), DT_BASE)
    a = theorem1_bound(disc, 200, 0.1, 10, seed=1)
    b = theorem1_bound(disc, 200, 0.05, 10, seed=1)
    # identical seed means identical Monte Carlo expectations
    assert b.trace_sigma0_mean == a.trace_sigma0_mean
    assert b.rhs == pytest.approx(2.0 * a.rhs)


def test_bound_rhs_assembled_from_reported_expectations():
    _, disc = systems_for(single_gen_model(sigma=0.01), DT_BASE)
    T, eps = 200, 0.1
    report = theorem1_bound(disc, T, eps, 10, seed=2)
    b_norm = np.max(disc.b_diag)
    expected = b_norm / (eps * math.sqrt(T - 1)) * math.sqrt(
        report.trace_sigma0_mean * report.inv_norm_mean)
    assert report.rhs == pytest.approx(expected, rel=1e-12)


def test_bound_validates_arguments():
    _, disc = systems_for(single_gen_model(), DT_BASE)
    with pytest.raises(ValueError, match="2N\\+2"):
        theorem1_bound(disc, 4, 0.1, 5, seed=0)
    with pytest.raises(ValueError, match="epsilon"):
        theorem1_bound(disc, 100, 1.5, 5, seed=0)
    with pytest.raises(ValueError, match="n_trials"):
        theorem1_bound(disc, 100, 0.1, 0, seed=0)


def _expectations(trace=2.0, inv=3.0, n_trials=7):
    return BoundReport(epsilon=0.1, rhs=1.0, trace_sigma0_mean=trace,
                       inv_norm_mean=inv, n_trials=n_trials, which=DISCRETE)


def test_corollary_collapses_without_noise():
    report = corollary2_bound(np.zeros(3), np.ones(3), 0.05, 100, 0.1,
                              _expectations())
    assert report.rhs == 0.0
    assert report.which == CONTINUOUS


def test_corollary_depends_only_on_observation_window():
    exp = _expectations()
    a = corollary2_bound([0.01], [2.0], 0.05, 101, 0.1, exp)
    b = corollary2_bound([0.01], [2.0], 0.025, 201, 0.1, exp)
    assert a.rhs == pytest.approx(b.rhs)


def test_corollary_consistent_with_theorem_for_single_generator():
    # at N=1 the two bounds differ exactly by the time step factor
    sigma_p, m, dt, T, eps = 0.01, 2.0, 0.05, 500, 0.1
    exp = _expectations(trace=1.7, inv=4.2)
    cor = corollary2_bound([sigma_p], [m], dt, T, eps, exp)
    b_norm = sigma_p / m * math.sqrt(dt)
    thm_rhs = b_norm / (eps * math.sqrt(T - 1)) * math.sqrt(
        exp.trace_sigma0_mean * exp.inv_norm_mean)
    assert cor.rhs == pytest.approx(thm_rhs / dt)


def test_bound_report_validation():
    with pytest.raises(ValueError, match="epsilon"):
        BoundReport(epsilon=0.0, rhs=1.0, trace_sigma0_mean=1.0,
                    inv_norm_mean=1.0, n_trials=1, which=DISCRETE)
    with pytest.raises(ValueError, match="rhs"):
        BoundReport(epsilon=0.1, rhs=-1.0, trace_sigma0_mean=1.0,
                    inv_norm_mean=1.0, n_trials=1, which=DISCRETE)
    with pytest.raises(ValueError, match="tag"):
        BoundReport(epsilon=0.1, rhs=1.0, trace_sigma0_mean=1.0,
                    inv_norm_mean=1.0, n_trials=1, which="OTHER")


# --------------------------------------------------------------------- spectrum

def test_spectrum_single_generator():
    report = spectrum(np.array([[0.0, 1.0], [0.0, -1.0]]))
    assert sorted(ev.real for ev in report.eigenvalues) == [-1.0, 0.0]
    assert report.critical == (-1.0 + 0.0j,)


def test_spectrum_two_generator_difference_mode():
    # the antisymmetric mode solves z^2 + z + 2 = 0
    cont, _ = systems_for(two_gen_model(), DT_BASE)
    report = spectrum(cont.a_d)
    expected_pair = (-1.0 + 1j * math.sqrt(7.0)) / 2.0
    assert len(report.critical) == 2
    crit = sorted(report.critical, key=lambda z: z.imag)
    assert crit[1] == pytest.approx(expected_pair, abs=1e-9)
    assert crit[0] == pytest.approx(expected_pair.conjugate(), abs=1e-9)
    all_evs = sorted(report.eigenvalues, key=lambda z: (z.real, z.imag))
    assert all_evs[0] == pytest.approx(-1.0 + 0.0j, abs=1e-9)
    assert all_evs[-1] == pytest.approx(0.0 + 0.0j, abs=1e-9)


def test_spectrum_rejects_non_finite():
    with pytest.raises(ValueError, match="finite"):
        spectrum(np.array([[np.nan, 0.0], [0.0, 1.0]]))


@given(grid_models())
@settings(max_examples=40)
def test_spectrum_contains_zero_mode_and_conjugate_pairs(model):
    cont, _ = systems_for(model, DT_BASE)
    report = spectrum(cont.a_d)
    assert len(report.eigenvalues) == 2 * model.n_gen
    assert min(abs(ev) for ev in report.eigenvalues) < 1e-9
    evs = np.array(report.eigenvalues)
    complex_evs = evs[np.abs(evs.imag) > 1e-12]
    for ev in complex_evs:
        assert np.min(np.abs(complex_evs - ev.conjugate())) < 1e-9


def test_spectrum_zero_mode_tol_excludes_slow_modes():
    a_d = np.diag([0.0, -1e-8, -1.0])
    report = spectrum(a_d, zero_mode_tol=1e-9)
    assert report.critical == (-1e-8 + 0.0j,)
    # a coarser tolerance reclassifies the slow mode as the zero mode
    report = spectrum(a_d, zero_mode_tol=1e-6)
    assert report.critical == (-1.0 + 0.0j,)


# -------------------------------------------------------------- spectral_distance

def test_spectral_distance_identical_and_permuted():
    eigs = [0.0 + 0.0j, -1.0 + 2.0j, -1.0 - 2.0j]
    assert spectral_distance(eigs, eigs) == 0.0
    assert spectral_distance(eigs, eigs[::-1]) == 0.0


def test_spectral_distance_simple_pair():
    assert spectral_distance([0.0, -1.0], [0.0, -1.1]) == pytest.approx(0.05)


def test_spectral_distance_rejects_length_mismatch():
    with pytest.raises(ValueError, match="equal length"):
        spectral_distance([0.0], [0.0, 1.0])


@given(st.lists(st.complex_numbers(max_magnitude=10.0, allow_nan=False,
                                   allow_infinity=False),
                min_size=1, max_size=6),
       st.randoms(use_true_random=False))
@settings(max_examples=40)
def test_spectral_distance_permutation_invariant(eigs, rnd):
    shuffled = eigs.copy()
    rnd.shuffle(shuffled)
    assert spectral_distance(eigs, shuffled) == pytest.approx(0.0, abs=1e-12)

"""Forward solvers: memory-kernel, broadband limit, discrete-bath oracle."""

from __future__ import annotations

import math

import numpy as np
import pytest

import photon_store as ps
from photon_store.errors import BandTooNarrow, GridMismatch, NonFiniteState

PI = math.pi


# ------------------------------------------------------------ InitialState


def test_initial_state_constructors():
    vac = ps.InitialState.vacuum()
    assert vac.g_amp == 0.0 and vac.e_amp == 0.0 and vac.x_amp == 0.0
    seeded = ps.InitialState.matched(0.002)
    assert abs(seeded.e_amp) == pytest.approx(math.sqrt(0.002), rel=1e-12)


def test_initial_state_rejects_superunit_norm():
    with pytest.raises(ValueError):
        ps.InitialState(g_amp=1.0, e_amp=1.0, x_amp=0.0)


# ----------------------------------------------------- memory-kernel solver


def test_matched_storage_reflects_nothing(pulse, design_for, grid):
    params, des = design_for(1.6716, 0.002)
    traj = ps.simulate_nonmarkovian(
        pulse, des.drive, params, ps.InitialState.matched(params.rho_offset), grid
    )
    assert ps.storage_metrics(traj).reflected < 1e-12


def test_unseeded_atom_reflects_part_of_the_photon(pulse, design_for, grid):
    # same drive, but the atom starts in the ground state
    params, des = design_for(1.6716, 0.002)
    traj = ps.simulate_nonmarkovian(
        pulse, des.drive, params, ps.InitialState.vacuum(), grid
    )
    assert ps.storage_metrics(traj).reflected == pytest.approx(
        0.0014690441284026714, rel=1e-6
    )


def test_simulator_rejects_mismatched_drive(pulse, design_for, grid):
    params, des = design_for(1.6716, 0.002)
    with pytest.raises(GridMismatch):
        ps.simulate_nonmarkovian(
            pulse, des.drive[:-5], params, ps.InitialState.vacuum(), grid
        )


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_runaway_state_raises_with_timestamp(pulse, make_params, grid):
    params = make_params(2.0, 0.002)
    wild = np.full(grid.times.size, 1e200 + 0j)
    with pytest.raises(NonFiniteState) as err:
        ps.simulate_nonmarkovian(
            pulse, wild, params, ps.InitialState.vacuum(), grid
        )
    assert "t =" in str(err.value)


def test_zero_input_stays_in_vacuum(make_params, grid):
    params = make_params(2.0, 0.002)
    silent = ps.InputPulse(
        duration=PI,
        _value=lambda t: 0.0 * t,
        _d1=lambda t: 0.0 * t,
        _d2=lambda t: 0.0 * t,
    )
    traj = ps.simulate_nonmarkovian(
        silent,
        np.zeros(grid.times.size, complex),
        params,
        ps.InitialState.vacuum(),
        grid,
    )
    assert np.max(np.abs(traj.g)) == 0.0
    assert np.max(np.abs(traj.phi_out)) == 0.0


def test_emission_accumulator_matches_impulse_convolution(
    pulse, design_for, grid
):
    params, des = design_for(2.0, 0.002)
    traj = ps.simulate_nonmarkovian(
        pulse, des.drive, params, ps.InitialState.matched(params.rho_offset), grid
    )
    model = ps.SpectralModel.from_params(params)
    k = round(1.2 / grid.dt)
    t = grid.times
    direct = np.trapezoid(
        model.impulse_response(t[k] - t[: k + 1]) * traj.g[: k + 1], dx=grid.dt
    )
    assert abs(traj.y_out[k] - direct) < 1e-7


def test_design_and_simulation_agree_on_final_excited_population(
    pulse, design_for, grid
):
    # lossless run: the quadrature route and the solver route for the
    # stored population close to within solver error
    params, des = design_for(2.0, 0.002, gamma_L=0.0)
    traj = ps.simulate_nonmarkovian(
        pulse, des.drive, params, ps.InitialState.matched(params.rho_offset), grid
    )
    assert abs(des.rho_ee[-1] - abs(traj.e[-1]) ** 2) < 1e-6


# -------------------------------------------------------- broadband solver


def test_broadband_round_trip_stores_perfectly(pulse, make_params, grid):
    params = make_params(25.0, 0.0075)
    des = ps.design_drive_markovian(pulse, params, grid)
    traj = ps.simulate_markovian(
        pulse, des.drive, params, ps.InitialState.matched(params.rho_offset), grid
    )
    assert ps.storage_metrics(traj).reflected < 1e-12
    # the broadband solver emits at the rate the cavity holds
    np.testing.assert_array_equal(
        traj.y_out, math.sqrt(params.big_gamma) * traj.g
    )


def test_broadband_limit_closes_simulation_gap(pulse, design_for, grid):
    # with a very wide bath both solvers agree on the cavity history
    params, des = design_for(400.0, 0.0075)
    seed = ps.InitialState.matched(params.rho_offset)
    full = ps.simulate_nonmarkovian(pulse, des.drive, params, seed, grid)
    rate = ps.simulate_markovian(pulse, des.drive, params, seed, grid)
    assert np.max(np.abs(full.g - rate.g)) < 0.02


# ------------------------------------------------------ discrete-bath oracle


def test_bath_comb_geometry(make_params):
    params = make_params(2.0, 0.002)
    model = ps.SpectralModel.from_params(params)
    bath = ps.discretize_bath(model, n_modes=500, band_halfwidth=40.0)
    assert bath.n_modes == 500
    assert bath.mode_spacing == pytest.approx(2.0 * 40.0 / 500, rel=1e-12)
    f = bath.frequencies
    assert f[0] == pytest.approx(-40.0 + 0.5 * bath.mode_spacing, rel=1e-12)
    np.testing.assert_allclose(f, -f[::-1], atol=1e-12)
    np.testing.assert_allclose(
        bath.weights,
        model.coupling(f) * math.sqrt(bath.mode_spacing),
        rtol=1e-12,
    )
    # comb quadrature reproduces the band-limited spectral weight
    assert bath.density_capture() == pytest.approx(1.0, rel=1e-6)


def test_narrow_band_is_rejected(pulse, make_params, grid):
    params = make_params(2.0, 0.002)
    bath = ps.discretize_bath(
        ps.SpectralModel.from_params(params), n_modes=100, band_halfwidth=1.0
    )
    with pytest.raises(BandTooNarrow):
        ps.initial_modes(pulse, bath, grid)


def test_initial_modes_are_normalized(pulse, make_params, grid):
    params = make_params(2.0, 0.002)
    bath = ps.discretize_bath(
        ps.SpectralModel.from_params(params), n_modes=500, band_halfwidth=40.0
    )
    modes, capture = ps.initial_modes(pulse, bath, grid)
    assert float(np.sum(np.abs(modes) ** 2)) == pytest.approx(1.0, rel=1e-12)
    assert 0.999 < capture <= 1.0


def test_oracle_matches_reduced_solver(pulse, design_for, grid):
    params, des = design_for(2.0, 0.002)
    seed = ps.InitialState.matched(params.rho_offset)
    reduced = ps.simulate_nonmarkovian(pulse, des.drive, params, seed, grid)
    bath = ps.discretize_bath(
        ps.SpectralModel.from_params(params), n_modes=500, band_halfwidth=40.0
    )
    run = ps.simulate_discrete_bath(pulse, des.drive, params, seed, bath, grid)
    assert np.max(np.abs(run.trajectory.g - reduced.g)) < 1e-4


def test_oracle_conserves_probability_without_loss(pulse, design_for, grid):
    params, des = design_for(2.0, 0.002, gamma_L=0.0)
    seed = ps.InitialState.matched(params.rho_offset)
    bath = ps.discretize_bath(
        ps.SpectralModel.from_params(params), n_modes=500, band_halfwidth=40.0
    )
    run = ps.simulate_discrete_bath(pulse, des.drive, params, seed, bath, grid)
    tr = run.trajectory
    total = (
        abs(tr.g[-1]) ** 2
        + abs(tr.e[-1]) ** 2
        + abs(tr.x[-1]) ** 2
        + float(np.sum(np.abs(run.final_modes) ** 2))
    )
    assert total == pytest.approx(1.0 + params.rho_offset, abs=1e-8)


def test_oracle_accounts_for_the_whole_excitation(pulse, design_for, grid):
    # design-route stored population plus simulated residuals add up to
    # the photon plus the initial seed
    params, des = design_for(2.0, 0.002, gamma_L=0.0)
    seed = ps.InitialState.matched(params.rho_offset)
    bath = ps.discretize_bath(
        ps.SpectralModel.from_params(params), n_modes=500, band_halfwidth=40.0
    )
    run = ps.simulate_discrete_bath(pulse, des.drive, params, seed, bath, grid)
    tr = run.trajectory
    total = (
        des.rho_ee[-1]
        + abs(tr.g[-1]) ** 2
        + abs(tr.x[-1]) ** 2
        + float(np.sum(np.abs(run.final_modes) ** 2))
    )
    assert total == pytest.approx(1.0 + params.rho_offset, abs=1e-4)


def test_reconstructed_output_tracks_the_reduced_envelope(
    pulse, design_for, grid
):
    # use the unseeded run so the output envelope is visibly nonzero
    params, des = design_for(2.0, 0.002)
    seed = ps.InitialState.vacuum()
    reduced = ps.simulate_nonmarkovian(pulse, des.drive, params, seed, grid)
    bath = ps.discretize_bath(
        ps.SpectralModel.from_params(params), n_modes=500, band_halfwidth=40.0
    )
    run = ps.simulate_discrete_bath(pulse, des.drive, params, seed, bath, grid)
    rebuilt = ps.reconstruct_output(
        bath, run.final_modes, grid.span, np.array([grid.span])
    )[0]
    reference = reduced.phi_out[-1]
    assert np.sign(rebuilt.real) == np.sign(reference.real)
    assert abs(rebuilt - reference) < 0.05 * abs(reference)


# ------------------------------------------------------------ summary stats


def test_storage_metrics_fields(pulse, design_for, grid):
    params, des = design_for(1.6716, 0.002)
    traj = ps.simulate_nonmarkovian(
        pulse, des.drive, params, ps.InitialState.matched(params.rho_offset), grid
    )
    m = ps.storage_metrics(traj)
    assert m.reflected == pytest.approx(
        float(np.trapezoid(np.abs(traj.phi_out) ** 2, dx=grid.dt)), rel=1e-12
    )
    assert m.final_excited == pytest.approx(abs(traj.e[-1]) ** 2, rel=1e-12)
    assert m.final_cavity == pytest.approx(abs(traj.g[-1]) ** 2, rel=1e-12)
    assert m.peak_intermediate == pytest.approx(
        float(np.max(np.abs(traj.x) ** 2)), rel=1e-12
    )
    assert set(m.as_dict()) == {
        "reflected",
        "final_excited",
        "final_cavity",
        "peak_intermediate",
    }
    # most of the photon ends up stored
    assert m.final_excited > 0.9

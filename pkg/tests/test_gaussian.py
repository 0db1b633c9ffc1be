"""Core Gaussian-state algebra against closed forms and the Fock oracle."""

import json
import math

import numpy as np
import pytest

from sqdisp.gaussian import (
    DegenerateStateError,
    DisplacementParams,
    GaussianState,
    SqueezeParams,
    UnphysicalStateError,
    beam_splitter,
    beam_splitter_symplectic,
    displace,
    is_physical,
    lossy_channel,
    negativity,
    photon_number,
    principal_axes,
    r_for_squeezing_db,
    reference_covariance_eq1,
    squeeze,
    squeeze_symplectic,
    squeezing_level_db,
    state_from_json,
    state_to_json,
    symplectic_form,
    tensor,
    thermal,
    vacuum,
    wigner_grid,
)

R_6P4_DB = r_for_squeezing_db(6.4)


def random_state(rng, num_modes=1):
    """Physical state from a random chain of core operations."""
    state = thermal(rng.uniform(0.0, 1.0))
    state = squeeze(state, 0, SqueezeParams(rng.uniform(0.0, 1.2), rng.uniform(0.0, 2 * math.pi)))
    state = displace(state, 0, DisplacementParams(rng.uniform(0.0, 4.0), rng.uniform(0.0, 2 * math.pi)))
    for _ in range(num_modes - 1):
        extra = squeeze(thermal(rng.uniform(0.0, 0.5)), 0, SqueezeParams(rng.uniform(0.0, 0.8)))
        state = tensor(state, extra)
    return state


class TestConstruction:
    def test_vacuum_single_mode(self):
        state = vacuum(1)
        assert np.array_equal(state.mean, np.zeros(2))
        assert np.array_equal(state.cov, 0.25 * np.eye(2))

    def test_vacuum_two_modes_is_tensor_of_vacua(self):
        assert np.array_equal(vacuum(2).cov, 0.25 * np.eye(4))
        assert np.array_equal(vacuum(2).cov, tensor(vacuum(1), vacuum(1)).cov)

    def test_vacuum_rejects_zero_modes(self):
        with pytest.raises(ValueError):
            vacuum(0)

    def test_thermal_zero_is_vacuum(self):
        assert np.array_equal(thermal(0.0).cov, vacuum(1).cov)

    def test_thermal_one_photon_covariance(self):
        assert np.allclose(thermal(1.0).cov, np.diag([0.75, 0.75]), atol=1e-15)

    def test_thermal_photon_number(self):
        assert photon_number(thermal(0.5), 0) == pytest.approx(0.5, abs=1e-12)

    def test_thermal_rejects_negative_occupation(self):
        with pytest.raises(ValueError):
            thermal(-0.1)

    def test_asymmetric_covariance_rejected(self):
        cov = 0.25 * np.eye(2)
        cov[0, 1] = 1e-3
        with pytest.raises(ValueError):
            GaussianState(1, np.zeros(2), cov)

    def test_indefinite_covariance_rejected(self):
        with pytest.raises(UnphysicalStateError):
            GaussianState(1, np.zeros(2), np.diag([0.25, -0.05]))

    def test_states_are_immutable(self):
        state = vacuum(1)
        with pytest.raises(ValueError):
            state.cov[0, 0] = 1.0


class TestSqueeze:
    def test_squeezing_level_matches_requested_decibels(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(R_6P4_DB, 0.0))
        assert squeezing_level_db(state, 0) == pytest.approx(6.4, abs=1e-12)

    def test_zero_squeezing_is_identity(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.0, 1.7))
        assert np.allclose(state.cov, vacuum(1).cov, atol=1e-15)

    def test_phi_zero_squeezes_q(self, fock):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.5, 0.0))
        assert np.allclose(state.cov, np.diag([0.25 * math.e**-1, 0.25 * math.e]), atol=1e-14)
        s_op = fock.squeeze_op(0.5, 0.0)
        rho = s_op @ fock.vacuum_dm() @ s_op.conj().T
        _, cov = fock.quadrature_stats(rho)
        assert np.allclose(state.cov, cov, atol=1e-10)

    @pytest.mark.parametrize("r,phi", [(0.3, 1.1), (0.8, 4.0), (0.6, 3 * math.pi / 2)])
    def test_general_phase_matches_fock_oracle(self, fock, r, phi):
        state = squeeze(vacuum(1), 0, SqueezeParams(r, phi))
        s_op = fock.squeeze_op(r, phi)
        rho = s_op @ fock.vacuum_dm() @ s_op.conj().T
        mean, cov = fock.quadrature_stats(rho)
        assert np.allclose(state.mean, mean, atol=1e-10)
        assert np.allclose(state.cov, cov, atol=1e-10)

    def test_antisqueezed_axis_sits_at_gamma_from_p(self):
        # gamma = -phi/2 = 45 degrees: the long axis lies halfway between q and p
        params = SqueezeParams(0.7, phi=-math.pi / 2)
        assert math.degrees(params.gamma_angle) % 180 == pytest.approx(45.0)
        state = squeeze(vacuum(1), 0, params)
        _, v_max, angle = principal_axes(state, 0)
        assert angle == pytest.approx(math.pi / 4, abs=1e-12)
        assert v_max == pytest.approx(0.25 * math.exp(2 * 0.7), abs=1e-12)

    def test_mode_out_of_range(self):
        with pytest.raises(ValueError):
            squeeze(vacuum(1), 1, SqueezeParams(0.1))

    def test_negative_r_rejected(self):
        with pytest.raises(ValueError):
            SqueezeParams(-0.1)


class TestDisplace:
    def test_zero_displacement_is_identity(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.4, 1.0))
        out = displace(state, 0, DisplacementParams(0.0, 2.2))
        assert np.array_equal(out.mean, state.mean)
        assert np.array_equal(out.cov, state.cov)

    def test_covariance_untouched_bitwise(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(R_6P4_DB, 3 * math.pi / 2))
        out = displace(state, 0, DisplacementParams(15.0, math.radians(135.0)))
        assert np.array_equal(out.cov, state.cov)
        assert squeezing_level_db(out, 0) == pytest.approx(squeezing_level_db(state, 0), abs=1e-12)

    def test_theta_is_measured_from_p_axis(self):
        out = displace(vacuum(1), 0, DisplacementParams(2.0, 0.0))
        assert np.allclose(out.mean, [0.0, 2.0], atol=1e-15)
        out = displace(vacuum(1), 0, DisplacementParams(2.0, math.pi / 2))
        assert np.allclose(out.mean, [2.0, 0.0], atol=1e-15)

    def test_photon_number_gain_is_alpha_squared(self):
        out = displace(vacuum(1), 0, DisplacementParams(2.0, math.pi / 2))
        assert photon_number(out, 0) == pytest.approx(4.0, abs=1e-12)

    def test_matches_fock_oracle(self, fock):
        mag, theta = 1.5, math.radians(135.0)
        state = displace(squeeze(vacuum(1), 0, SqueezeParams(0.5, 1.0)), 0,
                         DisplacementParams(mag, theta))
        alpha = mag * (math.sin(theta) + 1j * math.cos(theta))
        s_op = fock.squeeze_op(0.5, 1.0)
        d_op = fock.displace_op(alpha)
        rho = d_op @ s_op @ fock.vacuum_dm() @ s_op.conj().T @ d_op.conj().T
        mean, cov = fock.quadrature_stats(rho)
        assert np.allclose(state.mean, mean, atol=1e-9)
        assert np.allclose(state.cov, cov, atol=1e-9)


class TestBeamSplitter:
    def test_vacuum_is_invariant(self):
        out = beam_splitter(vacuum(2), 0, 1, 0.5)
        assert np.allclose(out.cov, vacuum(2).cov, atol=1e-15)
        assert np.allclose(out.mean, 0.0)

    def test_transmitted_coherent_photon_number(self):
        coherent = displace(vacuum(1), 0, DisplacementParams(10.0, 0.9))
        out = beam_splitter(tensor(coherent, vacuum(1)), 0, 1, 0.99)
        assert photon_number(out, 0) == pytest.approx(99.0, abs=1e-10)
        assert photon_number(out, 1) == pytest.approx(1.0, abs=1e-10)

    def test_energy_conserved(self):
        rng = np.random.default_rng(11)
        for _ in range(8):
            state = random_state(rng, num_modes=2)
            t = rng.uniform(0.0, 1.0)
            mixed = beam_splitter(state, 0, 1, t)
            before = photon_number(state, 0) + photon_number(state, 1)
            after = photon_number(mixed, 0) + photon_number(mixed, 1)
            assert after == pytest.approx(before, abs=1e-10)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            beam_splitter(vacuum(2), 0, 0, 0.5)
        with pytest.raises(ValueError):
            beam_splitter(vacuum(2), 0, 1, 1.5)
        with pytest.raises(ValueError):
            beam_splitter(vacuum(2), 0, 1, -0.1)

    def test_symplectic_property(self):
        omega = symplectic_form(2)
        for t in (0.0, 0.21, 0.5, 0.99, 1.0):
            s = beam_splitter_symplectic(t, 2, 0, 1)
            assert np.allclose(s @ omega @ s.T, omega, atol=1e-12)
        for r, phi in [(0.0, 0.0), (0.7, 2.2), (1.4, 5.0)]:
            s = squeeze_symplectic(SqueezeParams(r, phi))
            assert np.allclose(s @ symplectic_form(1) @ s.T, symplectic_form(1), atol=1e-12)


class TestLossyChannel:
    def test_unit_efficiency_is_identity(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.6, 0.3))
        out = lossy_channel(state, 0, 1.0)
        assert np.allclose(out.cov, state.cov, atol=1e-15)

    def test_thermal_halves_occupation(self):
        out = lossy_channel(thermal(1.0), 0, 0.5)
        assert np.allclose(out.cov, thermal(0.5).cov, atol=1e-14)

    def test_squeezing_drop_matches_closed_form(self):
        # eta*v + (1-eta)*0.25 applied to the 6.4 dB squeezed variance
        eta = 10.0 ** (-0.018)
        state = squeeze(vacuum(1), 0, SqueezeParams(R_6P4_DB, 0.0))
        out = lossy_channel(state, 0, eta)
        v_expected = eta * 0.25 * 10.0**-0.64 + (1.0 - eta) * 0.25
        expected_level = -10.0 * math.log10(v_expected / 0.25)
        assert squeezing_level_db(out, 0) == pytest.approx(expected_level, abs=1e-12)
        assert 6.4 - expected_level == pytest.approx(0.5561655558603196, abs=1e-12)

    def test_matches_beam_splitter_with_vacuum_ancilla(self):
        rng = np.random.default_rng(5)
        state = random_state(rng)
        eta = 0.73
        via_channel = lossy_channel(state, 0, eta)
        via_splitter = beam_splitter(tensor(state, vacuum(1)), 0, 1, eta).reduced([0])
        assert np.allclose(via_channel.cov, via_splitter.cov, atol=1e-13)
        assert np.allclose(via_channel.mean, via_splitter.mean, atol=1e-13)

    def test_photon_number_scaling_for_zero_mean(self):
        state = squeeze(thermal(0.4), 0, SqueezeParams(0.7, 1.0))
        n0 = photon_number(state, 0)
        out = lossy_channel(state, 0, 0.31)
        assert photon_number(out, 0) == pytest.approx(0.31 * n0, abs=1e-12)

    def test_invalid_efficiency(self):
        for eta in (0.0, -0.2, 1.01):
            with pytest.raises(ValueError):
                lossy_channel(vacuum(1), 0, eta)


class TestScalars:
    def test_vacuum_level_zero(self):
        assert squeezing_level_db(vacuum(1), 0) == pytest.approx(0.0, abs=1e-14)

    def test_level_from_minimum_eigenvalue(self):
        state = GaussianState(1, np.zeros(2), np.diag([0.25 * 10**-0.64, 0.25 * 10**0.64]))
        assert squeezing_level_db(state, 0) == pytest.approx(6.4, abs=1e-12)

    def test_thermal_level_is_negative(self):
        assert squeezing_level_db(thermal(1.0), 0) == pytest.approx(-10 * math.log10(3), abs=1e-12)

    def test_photon_number_vacuum(self):
        assert photon_number(vacuum(1), 0) == pytest.approx(0.0, abs=1e-15)

    def test_photon_number_squeezed(self, fock):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.8, 2.0))
        assert photon_number(state, 0) == pytest.approx(math.sinh(0.8) ** 2, abs=1e-12)
        s_op = fock.squeeze_op(0.8, 2.0)
        rho = s_op @ fock.vacuum_dm() @ s_op.conj().T
        assert photon_number(state, 0) == pytest.approx(
            fock.normal_moment(rho, 1, 1).real, abs=1e-8
        )

    def test_photon_number_additivity(self):
        r, mag = 0.74, math.sqrt(200.0)
        state = displace(squeeze(vacuum(1), 0, SqueezeParams(r, 3.0)), 0,
                         DisplacementParams(mag, 1.2))
        assert photon_number(state, 0) == pytest.approx(200.0 + math.sinh(r) ** 2, abs=1e-10)

    def test_purity_of_pure_states(self):
        rng = np.random.default_rng(3)
        for _ in range(6):
            state = displace(
                squeeze(vacuum(1), 0, SqueezeParams(rng.uniform(0, 1.2), rng.uniform(0, 6))),
                0,
                DisplacementParams(rng.uniform(0, 3), rng.uniform(0, 6)),
            )
            assert float(np.linalg.det(state.mode_cov(0))) == pytest.approx(0.0625, abs=1e-12)

    def test_uncertainty_relation_on_op_outputs(self):
        rng = np.random.default_rng(17)
        for _ in range(8):
            state = beam_splitter(random_state(rng, 2), 0, 1, rng.uniform(0, 1))
            state = lossy_channel(state, 0, rng.uniform(0.3, 1.0))
            assert is_physical(state, tol=1e-10)


class TestNegativity:
    def test_vacuum_not_entangled(self):
        assert negativity(vacuum(2)) == 0.0

    @pytest.mark.parametrize("r", [0.0, 0.25, 0.5, 1.0])
    def test_split_squeezed_vacuum_analytic(self, r):
        split = beam_splitter(tensor(squeeze(vacuum(1), 0, SqueezeParams(r)), vacuum(1)), 0, 1, 0.5)
        expected = max(0.0, (math.exp(r) - 1.0) / 2.0)
        assert negativity(split) == pytest.approx(expected, abs=1e-12)

    def test_value_at_half(self):
        split = beam_splitter(tensor(squeeze(vacuum(1), 0, SqueezeParams(0.5)), vacuum(1)), 0, 1, 0.5)
        assert negativity(split) == pytest.approx(0.3243606353500641, abs=1e-12)

    def test_matches_partial_transpose_spectrum(self):
        # independent route: smallest |eigenvalue| of i*Omega*sigma_pt
        rng = np.random.default_rng(23)
        for _ in range(6):
            state = beam_splitter(random_state(rng, 2), 0, 1, 0.5)
            sigma = 4.0 * state.cov
            flip = np.diag([1.0, 1.0, 1.0, -1.0])
            sigma_pt = flip @ sigma @ flip
            nu = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(2) @ sigma_pt)))[0]
            expected = max(0.0, (1.0 - nu) / (2.0 * nu))
            assert negativity(state) == pytest.approx(expected, abs=1e-10)

    def test_separable_products_have_zero_negativity(self):
        rng = np.random.default_rng(29)
        for _ in range(6):
            state = tensor(random_state(rng), random_state(rng))
            assert negativity(state) == 0.0

    def test_invariant_under_displacement_sweep(self):
        base = squeeze(vacuum(1), 0, SqueezeParams(R_6P4_DB, 3 * math.pi / 2))
        reference = None
        for theta in (math.radians(45.0), math.radians(135.0)):
            for alpha_sq in np.linspace(0.0, 500.0, 21):
                disp = displace(base, 0, DisplacementParams(math.sqrt(alpha_sq), theta))
                split = beam_splitter(tensor(disp, vacuum(1)), 0, 1, 0.5)
                value = negativity(split)
                reference = value if reference is None else reference
                assert value == pytest.approx(reference, abs=1e-12)

    def test_single_mode_rejected(self):
        with pytest.raises(ValueError):
            negativity(vacuum(1))

    def test_unphysical_covariance_raises(self):
        state = GaussianState(2, np.zeros(4), 0.1 * np.eye(4))
        with pytest.raises(UnphysicalStateError):
            negativity(state)


class TestWigner:
    def test_vacuum_peak_value(self):
        grid = wigner_grid(vacuum(1), (-0.0, 0.0), (0.0, 0.0), 2)
        assert grid[0, 0] == pytest.approx(1.0 / (2.0 * math.pi * 0.25), rel=1e-12)

    def test_peak_follows_displacement(self):
        state = displace(vacuum(1), 0, DisplacementParams(2.0, math.pi / 2))
        qs = np.linspace(-4, 4, 81)
        grid = wigner_grid(state, (-4, 4), (-4, 4), 81)
        ip, iq = np.unravel_index(np.argmax(grid), grid.shape)
        assert qs[iq] == pytest.approx(2.0, abs=0.11)
        assert qs[ip] == pytest.approx(0.0, abs=0.11)

    def test_normalisation(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.8, 1.1))
        width = 6.0 * math.sqrt(float(np.max(np.linalg.eigvalsh(state.mode_cov(0)))))
        res = 401
        grid = wigner_grid(state, (-width, width), (-width, width), res)
        step = 2.0 * width / (res - 1)
        assert float(grid.sum()) * step**2 == pytest.approx(1.0, abs=1e-3)

    def test_one_over_e_contour_is_principal_ellipse(self):
        state = squeeze(vacuum(1), 0, SqueezeParams(0.7, -math.pi / 2))
        v_min, v_max, angle = principal_axes(state, 0)
        peak = 1.0 / (2.0 * math.pi * math.sqrt(v_min * v_max))
        for lam, axis_angle in ((v_max, angle), (v_min, angle + math.pi / 2)):
            radius = math.sqrt(2.0 * lam)
            point_q = radius * math.sin(axis_angle)
            point_p = radius * math.cos(axis_angle)
            grid = wigner_grid(state, (point_q, point_q), (point_p, point_p), 2)
            assert grid[0, 0] == pytest.approx(peak / math.e, rel=1e-9)

    def test_degenerate_covariance_raises(self):
        state = vacuum(1)
        squeezed_flat = GaussianState(1, np.zeros(2), np.diag([1e-14, 0.25]))
        with pytest.raises(DegenerateStateError):
            wigner_grid(squeezed_flat, (-1, 1), (-1, 1), 11)
        with pytest.raises(ValueError):
            wigner_grid(state, (-1, 1), (-1, 1), 1)


class TestReferenceCovariance:
    def test_zero_squeezing_blocks(self):
        ref = reference_covariance_eq1(0.0, 1.3)
        assert np.allclose(ref[:2, :2], np.eye(2), atol=1e-15)
        assert np.allclose(ref[:2, 2:], np.zeros((2, 2)), atol=1e-15)

    def test_phi_zero_diagonal(self):
        r = 0.6
        ref = reference_covariance_eq1(r, 0.0)
        assert ref[0, 0] == pytest.approx(0.5 * (math.exp(-2 * r) + 1.0), abs=1e-14)
        assert ref[1, 1] == pytest.approx(0.5 * (math.exp(2 * r) + 1.0), abs=1e-14)
        assert ref[0, 1] == 0.0

    @pytest.mark.parametrize("r,phi", [(0.3, 1.1), (1.2, 5.9), (0.74, 3 * math.pi / 2)])
    def test_matches_symplectic_composition(self, r, phi):
        split = beam_splitter(
            tensor(squeeze(vacuum(1), 0, SqueezeParams(r, phi)), vacuum(1)), 0, 1, 0.5
        )
        assert np.max(np.abs(4.0 * split.cov - reference_covariance_eq1(r, phi))) <= 1e-12

    def test_grid_equivalence(self):
        worst = 0.0
        for r in np.linspace(0.0, 1.5, 20):
            for phi in np.linspace(0.0, 2 * math.pi, 20, endpoint=False):
                split = beam_splitter(
                    tensor(squeeze(vacuum(1), 0, SqueezeParams(r, phi)), vacuum(1)), 0, 1, 0.5
                )
                worst = max(worst, float(np.max(np.abs(4.0 * split.cov - reference_covariance_eq1(r, phi)))))
        assert worst <= 1e-12


class TestSerialization:
    def test_round_trip(self):
        rng = np.random.default_rng(31)
        state = beam_splitter(random_state(rng, 2), 0, 1, 0.37)
        text = state_to_json(state)
        payload = json.loads(text)
        assert payload["convention"] == "vacuum-0.25"
        assert len(payload["cov"]) == 16
        back = state_from_json(text)
        assert np.array_equal(back.mean, state.mean)
        assert np.array_equal(back.cov, state.cov)

    def test_unknown_convention_rejected(self):
        payload = json.loads(state_to_json(vacuum(1)))
        payload["convention"] = "vacuum-1"
        with pytest.raises(ValueError):
            state_from_json(json.dumps(payload))

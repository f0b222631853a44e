"""Tests for the Gaussian-state core: states, unitaries, channels, homodyne."""

import numpy as np
import pytest

from qndsim import gaussian
from qndsim.gaussian import (
    SymplecticMatrix,
    beam_splitter,
    displace,
    homodyne,
    loss_channel,
    min_uncertainty_eigenvalue,
    omega,
    phase_rotate,
    squeeze,
    vacuum_state,
)

TOL = 1e-12
MINUS_5_DB = 10.0 ** (-0.5)  # 0.31623, squeezed variance 5 dB below shot


def rng(seed=0):
    return np.random.default_rng(seed)


class TestVacuum:
    def test_single_mode(self):
        state = vacuum_state(1)
        assert np.array_equal(state.cov, np.eye(2))
        assert np.array_equal(state.mean, np.zeros(2))

    def test_two_modes(self):
        state = vacuum_state(2)
        assert np.array_equal(state.cov, np.eye(4))

    def test_uncertainty_saturated(self):
        # vacuum sits exactly on the physicality boundary
        ev = np.linalg.eigvalsh(vacuum_state(2).cov + 1j * omega(2))
        assert abs(ev[0]) < 1e-12
        assert min_uncertainty_eigenvalue(vacuum_state(2)) == pytest.approx(0.0, abs=1e-12)

    def test_rejects_zero_modes(self):
        with pytest.raises(ValueError):
            vacuum_state(0)


class TestSqueeze:
    def test_minus_five_db(self):
        state = squeeze(vacuum_state(1), 0, gaussian.squeeze_parameter_from_db(-5.0))
        assert state.cov[0, 0] == pytest.approx(MINUS_5_DB, abs=1e-9)
        assert state.cov[1, 1] == pytest.approx(1.0 / MINUS_5_DB, abs=1e-9)

    def test_zero_is_identity(self):
        state = squeeze(vacuum_state(2), 1, 0.0)
        assert np.allclose(state.cov, np.eye(4), atol=TOL)

    def test_unit_r_closed_form(self):
        state = squeeze(vacuum_state(1), 0, 1.0)
        assert state.cov[0, 0] == pytest.approx(np.exp(-2.0), abs=1e-12)

    def test_negative_r_antisqueezes_x(self):
        state = squeeze(vacuum_state(1), 0, -0.3)
        assert state.cov[0, 0] > 1.0

    def test_angle_rotates_axis(self):
        x_sq = squeeze(vacuum_state(1), 0, 0.7, angle=0.0)
        p_sq = squeeze(vacuum_state(1), 0, 0.7, angle=np.pi / 2)
        assert p_sq.cov[1, 1] == pytest.approx(x_sq.cov[0, 0], abs=1e-12)
        assert p_sq.cov[0, 0] == pytest.approx(x_sq.cov[1, 1], abs=1e-12)


class TestDisplace:
    def test_mean_shift(self):
        state = displace(vacuum_state(1), 0, 2.0, 0.0)
        assert np.allclose(state.mean, [2.0, 0.0])
        assert np.array_equal(state.cov, np.eye(2))

    def test_zero_shift_identity(self):
        base = squeeze(vacuum_state(2), 0, 0.4)
        state = displace(base, 1, 0.0, 0.0)
        assert np.array_equal(state.mean, base.mean)
        assert np.array_equal(state.cov, base.cov)

    def test_excited_power_above_shot_noise(self):
        # coherent excitation raises mean-square power, variances stay at 1
        state = displace(vacuum_state(2), 0, 10.0, 0.0)
        power_db = 10 * np.log10(state.mean[0] ** 2 + state.cov[0, 0])
        assert power_db > 0.0
        assert np.allclose(np.diag(state.cov), 1.0)


class TestBeamSplitter:
    def test_zero_reflectivity_identity(self):
        base = displace(squeeze(vacuum_state(2), 0, 0.5), 1, 1.0, 2.0)
        state = beam_splitter(base, 0, 1, 0.0)
        assert np.allclose(state.cov, base.cov, atol=TOL)
        assert np.allclose(state.mean, base.mean, atol=TOL)

    def test_full_reflectivity_swaps_modes(self):
        base = squeeze(vacuum_state(2), 0, 0.5)
        state = beam_splitter(base, 0, 1, 1.0)
        # mode 1 now carries the squeezing, up to the sign convention
        assert state.cov[2, 2] == pytest.approx(base.cov[0, 0], abs=TOL)
        assert state.cov[0, 0] == pytest.approx(1.0, abs=TOL)

    @pytest.mark.parametrize("reflectivity", [0.1, 0.3, 0.5, 0.9])
    def test_pass_through_vacuum(self, reflectivity):
        state = beam_splitter(vacuum_state(2), 0, 1, reflectivity)
        assert np.allclose(state.cov, np.eye(4), atol=TOL)

    @pytest.mark.parametrize("reflectivity", [-0.1, 1.1])
    def test_rejects_bad_reflectivity(self, reflectivity):
        with pytest.raises(ValueError):
            beam_splitter(vacuum_state(2), 0, 1, reflectivity)

    def test_rejects_bad_signs(self):
        with pytest.raises(ValueError):
            beam_splitter(vacuum_state(2), 0, 1, 0.5, signs=(1, 1, 1, 1))

    def test_composition_inverse(self):
        base = displace(squeeze(vacuum_state(2), 0, 0.8), 0, 1.5, -0.5)
        fwd = beam_splitter(base, 0, 1, 0.3)
        # the transposed sign pattern undoes the default convention
        back = beam_splitter(fwd, 0, 1, 0.3, signs=(1, -1, 1, 1))
        assert np.allclose(back.cov, base.cov, atol=1e-12)
        assert np.allclose(back.mean, base.mean, atol=1e-12)

    @pytest.mark.parametrize("reflectivity", [0.2, 0.5, 0.8])
    def test_passive_invariance(self, reflectivity):
        # photon-number conservation: trace(cov - I) is preserved
        base = squeeze(squeeze(vacuum_state(2), 0, 0.6), 1, -0.3)
        state = beam_splitter(base, 0, 1, reflectivity)
        before = np.trace(base.cov - np.eye(4))
        after = np.trace(state.cov - np.eye(4))
        assert after == pytest.approx(before, abs=1e-12)


class TestPhaseRotate:
    def test_zero_identity(self):
        base = squeeze(vacuum_state(1), 0, 0.5)
        state = phase_rotate(base, 0, 0.0)
        assert np.allclose(state.cov, base.cov, atol=TOL)

    def test_quarter_turn_swaps_variances(self):
        base = squeeze(vacuum_state(1), 0, 0.5)
        state = phase_rotate(base, 0, np.pi / 2)
        assert state.cov[0, 0] == pytest.approx(base.cov[1, 1], abs=TOL)
        assert state.cov[1, 1] == pytest.approx(base.cov[0, 0], abs=TOL)

    def test_quarter_turn_direction(self):
        # x -> p and p -> -x on the means
        state = phase_rotate(displace(vacuum_state(1), 0, 1.0, 2.0), 0, np.pi / 2)
        assert np.allclose(state.mean, [2.0, -1.0], atol=TOL)

    @pytest.mark.parametrize("a,b", [(0.3, 0.4), (1.0, -0.5), (2.0, 2.0)])
    def test_group_property(self, a, b):
        base = squeeze(vacuum_state(1), 0, 0.7)
        two_step = phase_rotate(phase_rotate(base, 0, a), 0, b)
        one_step = phase_rotate(base, 0, a + b)
        assert np.allclose(two_step.cov, one_step.cov, atol=1e-12)

    def test_passive_invariance(self):
        base = squeeze(vacuum_state(2), 0, 0.6)
        state = phase_rotate(base, 0, 1.1)
        assert np.trace(state.cov - np.eye(4)) == pytest.approx(
            np.trace(base.cov - np.eye(4)), abs=1e-12
        )


class TestLossChannel:
    def test_unit_transmission_identity(self):
        base = squeeze(vacuum_state(2), 0, 0.5)
        state = loss_channel(base, 0, 1.0)
        assert np.allclose(state.cov, base.cov, atol=TOL)

    def test_squeezed_variance_closed_form(self):
        base = squeeze(vacuum_state(1), 0, gaussian.squeeze_parameter_from_db(-5.0))
        state = loss_channel(base, 0, 0.93)
        assert state.cov[0, 0] == pytest.approx(0.93 * MINUS_5_DB + 0.07, abs=1e-9)

    @pytest.mark.parametrize("eta", [0.1, 0.5, 0.93])
    def test_vacuum_fixed_point(self, eta):
        state = loss_channel(vacuum_state(2), 1, eta)
        assert np.allclose(state.cov, np.eye(4), atol=TOL)

    @pytest.mark.parametrize("eta", [0.0, -0.2, 1.2])
    def test_rejects_bad_transmission(self, eta):
        with pytest.raises(ValueError):
            loss_channel(vacuum_state(1), 0, eta)

    def test_mean_scaling(self):
        state = loss_channel(displace(vacuum_state(1), 0, 2.0, -1.0), 0, 0.64)
        assert np.allclose(state.mean, [1.6, -0.8], atol=TOL)

    @pytest.mark.parametrize("eta", [0.3, 0.7, 0.99])
    def test_keeps_states_physical(self, eta):
        # strongly squeezed and correlated state stays physical under loss
        state = squeeze(vacuum_state(2), 0, 1.5)
        state = beam_splitter(state, 0, 1, 0.5)
        lossy = loss_channel(state, 0, eta)
        assert min_uncertainty_eigenvalue(lossy) >= -1e-9
        gaussian.assert_physical(lossy)


def _epr_pair(r):
    """Two orthogonally squeezed vacua on a 50:50 splitter."""
    state = squeeze(vacuum_state(2), 0, r, angle=0.0)
    state = squeeze(state, 1, r, angle=np.pi / 2)
    return beam_splitter(state, 0, 1, 0.5)


class TestHomodyne:
    def test_product_state_no_conditioning(self):
        out = homodyne(vacuum_state(2), 0, 0.0, rng(1))
        assert out.reduced_state.n_modes == 1
        assert np.allclose(out.reduced_state.cov, np.eye(2), atol=TOL)
        assert np.allclose(out.reduced_state.mean, 0.0, atol=TOL)

    def test_outcome_distribution_standard_normal(self):
        values = [homodyne(vacuum_state(2), 0, 0.0, rng(i)).value for i in range(4000)]
        values = np.asarray(values)
        assert abs(values.mean()) < 5.0 / np.sqrt(4000)
        assert values.var() == pytest.approx(1.0, abs=0.15)

    def test_epr_conditional_variance_below_one(self):
        r = gaussian.squeeze_parameter_from_db(-5.0)
        out = homodyne(_epr_pair(r), 0, 0.0, rng(3))
        assert out.reduced_state.cov[0, 0] < 1.0

    def test_epr_conditional_matches_direct_schur(self):
        # independent route: build the 4x4 covariance with raw numpy and
        # condition on x of mode 0 by the Schur complement
        r = gaussian.squeeze_parameter_from_db(-5.0)
        v0 = np.diag([np.exp(-2 * r), np.exp(2 * r), np.exp(2 * r), np.exp(-2 * r)])
        half = np.sqrt(0.5)
        mix = np.kron(np.array([[half, half], [-half, half]]), np.eye(2))
        v = mix @ v0 @ mix.T
        keep = [2, 3]
        expected = v[np.ix_(keep, keep)] - np.outer(v[keep, 0], v[keep, 0]) / v[0, 0]

        out = homodyne(_epr_pair(r), 0, 0.0, rng(4))
        assert np.allclose(out.reduced_state.cov, expected, atol=1e-10)

    def test_reduced_cov_outcome_independent(self):
        r = gaussian.squeeze_parameter_from_db(-5.0)
        a = homodyne(_epr_pair(r), 0, 0.0, rng(10))
        b = homodyne(_epr_pair(r), 0, 0.0, rng(11))
        assert a.value != b.value
        assert np.array_equal(a.reduced_state.cov, b.reduced_state.cov)

    def test_conditional_mean_averages_to_marginal(self):
        # averaging the conditional mean over outcomes recovers the
        # unconditioned marginal mean to Monte Carlo accuracy
        state = displace(_epr_pair(0.5), 1, 1.0, 0.5)
        n = 3000
        g = rng(7)
        means = np.array([homodyne(state, 0, 0.0, g).reduced_state.mean for _ in range(n)])
        scatter = means.std(axis=0) / np.sqrt(n)
        assert np.all(np.abs(means.mean(axis=0) - [1.0, 0.5]) < 5 * scatter + 1e-9)

    def test_angle_selects_quadrature(self):
        state = squeeze(vacuum_state(2), 0, 1.0)  # Var(x)=e^-2, Var(p)=e^2
        values = [homodyne(state, 0, np.pi / 2, rng(i)).value for i in range(2000)]
        assert np.var(values) == pytest.approx(np.exp(2.0), rel=0.15)

    def test_efficiency_degrades_conditioning(self):
        r = gaussian.squeeze_parameter_from_db(-5.0)
        ideal = homodyne(_epr_pair(r), 0, 0.0, rng(5))
        lossy = homodyne(_epr_pair(r), 0, 0.0, rng(5), efficiency=0.5)
        assert lossy.reduced_state.cov[0, 0] > ideal.reduced_state.cov[0, 0]

    def test_dark_noise_widens_outcomes_not_cov(self):
        dark = 0.5
        a = homodyne(_epr_pair(0.5), 0, 0.0, rng(6))
        b = homodyne(_epr_pair(0.5), 0, 0.0, rng(6), dark_variance=dark)
        # readout noise rides on the value; the optical conditioning is untouched
        assert not np.isclose(a.value, b.value)
        assert np.allclose(a.reduced_state.cov, b.reduced_state.cov, atol=1e-12)

    def test_zero_variance_no_division_error(self):
        # x of mode 0 perfectly squeezed: conditioning must not blow up
        state = squeeze(vacuum_state(2), 0, 20.0)
        out = homodyne(state, 0, 0.0, rng(8))
        assert np.isfinite(out.value)
        gaussian.assert_physical(out.reduced_state, tol=1e-6)

    def test_single_mode_rejected(self):
        with pytest.raises(ValueError):
            homodyne(vacuum_state(1), 0, 0.0, rng(9))


class TestSymplecticMatrix:
    @pytest.mark.parametrize(
        "builder",
        [
            lambda: SymplecticMatrix.rotation(2, 0, 0.7),
            lambda: SymplecticMatrix.squeezer(2, 1, 0.9, 0.3),
            lambda: SymplecticMatrix.beam_splitter(2, 0, 1, 0.3),
            lambda: SymplecticMatrix.beam_splitter(3, 2, 0, 0.8, signs=(-1, -1, 1, -1)),
            lambda: SymplecticMatrix.sum_gate(1.5),
        ],
    )
    def test_constructions_are_symplectic(self, builder):
        s = builder()
        om = omega(s.n_modes)
        assert np.abs(s.matrix @ om @ s.matrix.T - om).max() < 1e-12

    def test_rejects_non_symplectic(self):
        with pytest.raises(ValueError):
            SymplecticMatrix(np.diag([2.0, 1.0, 1.0, 1.0]))

    def test_sum_gate_action(self):
        s = SymplecticMatrix.sum_gate(1.0)
        state = s.apply(displace(vacuum_state(2), 0, 3.0, 0.0))
        assert state.mean[2] == pytest.approx(3.0)  # x2 picked up x1
        assert state.cov[2, 2] == pytest.approx(2.0)

    def test_rejects_negative_gain(self):
        with pytest.raises(ValueError):
            SymplecticMatrix.sum_gate(-0.5)


class TestPhysicality:
    def test_asymmetric_cov_rejected(self):
        state = vacuum_state(1)
        state.cov[0, 1] = 0.5
        with pytest.raises(ValueError):
            gaussian.assert_physical(state)

    def test_unphysical_cov_rejected(self):
        state = vacuum_state(1)
        state.cov = np.diag([0.1, 0.1])  # violates the uncertainty bound
        with pytest.raises(ValueError):
            gaussian.assert_physical(state)

    def test_db_conversions_roundtrip(self):
        for db in (-10.0, -5.0, 0.0, 3.01):
            assert gaussian.variance_to_db(gaussian.db_to_variance(db)) == pytest.approx(db)

    def test_squeeze_parameter_from_db(self):
        r = gaussian.squeeze_parameter_from_db(-5.0)
        assert np.exp(-2 * r) == pytest.approx(MINUS_5_DB, abs=1e-12)

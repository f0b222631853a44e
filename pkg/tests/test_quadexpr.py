"""Tests for the analytic input-output relations and moment computation."""

import numpy as np
import pytest

from qndsim.quadexpr import (
    LinearQuadExpr,
    QuadratureMap,
    commutator_check,
    finite_squeezing_map,
    ideal_qnd_map,
    max_coefficient_difference,
    moments_from_map,
)

R_GOLDEN = 0.3819660112501051  # gain exactly 1
R_GRID = [0.05, 0.1, 0.25, R_GOLDEN, 0.5, 0.75, 0.9, 1.0]
MINUS_5_DB_R = 0.25 * np.log(10.0)  # e**(-2r) = 10**-0.5


class TestIdealMap:
    def test_zero_gain_identity(self):
        qmap = ideal_qnd_map(0.0)
        for key, label in (
            ("x1_out", "x1_in"),
            ("p1_out", "p1_in"),
            ("x2_out", "x2_in"),
            ("p2_out", "p2_in"),
        ):
            assert qmap[key].terms == {label: 1.0}

    def test_unit_gain_coupling(self):
        assert ideal_qnd_map(1.0)["x2_out"].coefficient("x1_in") == 1.0

    def test_gain_15_back_action(self):
        assert ideal_qnd_map(1.5)["p1_out"].coefficient("p2_in") == -1.5

    def test_rejects_negative_gain(self):
        with pytest.raises(ValueError):
            ideal_qnd_map(-1.0)


class TestFiniteSqueezingMap:
    def test_r_one_is_identity_without_ancillas(self):
        qmap = finite_squeezing_map(1.0, 0.5, 0.5)
        assert max_coefficient_difference(qmap, ideal_qnd_map(0.0)) == 0.0
        assert not any("A0" in l or "B0" in l for l in qmap.labels())

    def test_quarter_reflectivity_coefficients(self):
        qmap = finite_squeezing_map(0.25, 0.0, 0.0)
        assert qmap["x2_out"].coefficient("x1_in") == pytest.approx(1.5, abs=1e-12)
        assert qmap["x1_out"].coefficient("xA0") == pytest.approx(
            -np.sqrt(0.75 / 1.25), abs=1e-12
        )

    def test_infinite_squeezing_limit(self):
        r = 69.0  # e**-r ~ 1e-30
        qmap = finite_squeezing_map(R_GOLDEN, r, r)
        assert max_coefficient_difference(qmap, ideal_qnd_map(1.0)) < 1e-12

    @pytest.mark.parametrize("R", [0.0, -0.2, 1.0001])
    def test_rejects_out_of_range(self, R):
        with pytest.raises(ValueError):
            finite_squeezing_map(R, 0.0, 0.0)

    @pytest.mark.parametrize("R", R_GRID)
    def test_gain_identity(self, R):
        qmap = finite_squeezing_map(R, 0.3, 0.7)
        expected = 1.0 / np.sqrt(R) - np.sqrt(R)
        assert qmap["x2_out"].coefficient("x1_in") == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("R", [r for r in R_GRID if r < 1.0])
    def test_noise_asymmetry(self, R):
        # probe-output ancilla noise is sqrt(R) times the signal-output noise
        qmap = finite_squeezing_map(R, 0.4, 0.4)
        signal = abs(qmap["x1_out"].coefficient("xA0"))
        probe = abs(qmap["x2_out"].coefficient("xA0"))
        assert probe == pytest.approx(np.sqrt(R) * signal, abs=1e-12)
        assert abs(qmap["p1_out"].coefficient("pB0")) == pytest.approx(
            np.sqrt(R) * abs(qmap["p2_out"].coefficient("pB0")), abs=1e-12
        )

    @pytest.mark.parametrize("R", R_GRID)
    def test_sector_mirror_symmetry(self, R):
        # x and p sectors are images under (1<->2, x<->p, A<->B)
        qmap = finite_squeezing_map(R, 0.33, 0.33)
        assert qmap["p2_out"].coefficient("pB0") == pytest.approx(
            qmap["x1_out"].coefficient("xA0") * -1.0, abs=1e-12
        )
        assert qmap["p1_out"].coefficient("p2_in") == pytest.approx(
            -qmap["x2_out"].coefficient("x1_in"), abs=1e-12
        )


class TestMoments:
    def test_ideal_unit_gain_probe_variance(self):
        _, cov = moments_from_map(ideal_qnd_map(1.0))
        assert cov[2, 2] == pytest.approx(2.0, abs=1e-12)  # +3.01 dB

    def test_finite_squeezing_signal_variance(self):
        qmap = finite_squeezing_map(R_GOLDEN, MINUS_5_DB_R, MINUS_5_DB_R)
        _, cov = moments_from_map(qmap)
        assert cov[0, 0] == pytest.approx(1.1414213562373095, abs=1e-9)

    def test_vacuum_ancilla_probe_variance(self):
        qmap = finite_squeezing_map(R_GOLDEN, 0.0, 0.0)
        _, cov = moments_from_map(qmap)
        assert cov[2, 2] == pytest.approx(2.1708203932499368, abs=1e-9)

    def test_coherent_means_leave_variances(self):
        qmap = ideal_qnd_map(1.5)
        mean, cov = moments_from_map(qmap, means={"x1_in": 4.0, "p2_in": -2.0})
        _, cov0 = moments_from_map(qmap)
        assert np.allclose(cov, cov0, atol=1e-12)
        # mean ordering (x1, p1, x2, p2)
        assert np.allclose(mean, [4.0, 3.0, 6.0, -2.0], atol=1e-12)

    def test_variance_overrides(self):
        expr = LinearQuadExpr({"x1_in": 2.0, "xA0": 1.0})
        assert expr.variance({"xA0": 0.25}) == pytest.approx(4.25)


class TestCommutatorCheck:
    def test_ideal_map_passes(self):
        for gain in (0.0, 1.0, 1.5, 7.3):
            assert commutator_check(ideal_qnd_map(gain)).passed

    def test_finite_squeezing_passes(self):
        report = commutator_check(finite_squeezing_map(0.25, 0.5, 0.5))
        assert report.passed
        assert report.worst_defect < 1e-12

    def test_tampered_map_fails(self):
        qmap = finite_squeezing_map(0.25, 0.5, 0.5)
        bad = QuadratureMap(dict(qmap.exprs))
        # break the x-side gain while the p side keeps 1.5
        terms = dict(bad["x2_out"].terms)
        terms["x1_in"] = 1.6
        bad.exprs["x2_out"] = LinearQuadExpr(terms)
        assert not commutator_check(bad).passed

    def test_commutator_values(self):
        qmap = finite_squeezing_map(0.5, 0.2, 0.9)
        assert qmap["x1_out"].commutator(qmap["p1_out"]) == pytest.approx(2.0, abs=1e-12)
        assert qmap["x1_out"].commutator(qmap["p2_out"]) == pytest.approx(0.0, abs=1e-12)


class TestPrettyPrinter:
    def test_one_line_per_output(self):
        text = finite_squeezing_map(0.25, 0.1, 0.1).pretty()
        lines = text.splitlines()
        assert len(lines) == 4
        assert lines[0].startswith("x1_out = ")
        assert "xA0" in lines[0]

    def test_missing_output_rejected(self):
        with pytest.raises(ValueError):
            QuadratureMap({"x1_out": LinearQuadExpr({"x1_in": 1.0})})

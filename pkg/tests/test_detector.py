"""Unit tests for the loss + time-multiplexed click-counting chain."""

import json
import math

import numpy as np
import pytest

from photon_catalysis.analysis import g2
from photon_catalysis.catalysis import BeamSplitter, CatalysisConfig, pcoc_state
from photon_catalysis.detector import (ClickDistribution,
                                       JointClickDistribution, LossChannel,
                                       TMDConfig, apply_loss, g2_from_clicks,
                                       joint_output_distribution, joint_to_csv,
                                       joint_to_json, tmd_click_distribution)
from photon_catalysis.fock import (PhotonNumberDistribution, make_coherent,
                                   number_distribution)

RNG = np.random.default_rng(20230817)


def thermal(mean: float, size: int = 90) -> PhotonNumberDistribution:
    p = (mean / (1 + mean)) ** np.arange(size) / (1 + mean)
    return PhotonNumberDistribution(tuple(p / p.sum()))


def random_distribution(size: int = 12) -> PhotonNumberDistribution:
    p = RNG.random(size)
    return PhotonNumberDistribution(tuple(p / p.sum()))


class TestLoss:
    def test_unit_efficiency_is_identity(self):
        d = random_distribution()
        out = apply_loss(d, LossChannel(1.0))
        assert np.array_equal(out.probabilities, d.probabilities)

    def test_zero_efficiency_gives_vacuum(self):
        out = apply_loss(random_distribution(), LossChannel(0.0))
        assert out.probabilities[0] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("eta", [0.2, 0.5, 0.8])
    def test_mean_scales_linearly(self, eta):
        d = random_distribution()
        n = np.arange(d.size)
        before = float(np.sum(n * np.asarray(d.probabilities)))
        out = apply_loss(d, LossChannel(eta))
        after = float(np.sum(n * np.asarray(out.probabilities)))
        assert after == pytest.approx(eta * before, rel=1e-12)

    def test_single_photon_splits_binomially(self):
        d = PhotonNumberDistribution((0.0, 1.0))
        out = apply_loss(d, LossChannel(0.7))
        assert out.probabilities[0] == pytest.approx(0.3, abs=1e-15)
        assert out.probabilities[1] == pytest.approx(0.7, abs=1e-15)

    @pytest.mark.parametrize("eta", [0.2, 0.5, 0.8])
    def test_true_g2_invariant(self, eta):
        state, _ = pcoc_state(CatalysisConfig(1.1, BeamSplitter(0.4), 1))
        d = number_distribution(state)
        assert g2(apply_loss(d, LossChannel(eta))) == pytest.approx(
            g2(d), abs=1e-11)

    def test_eta_validation(self):
        with pytest.raises(ValueError):
            LossChannel(1.2)


class TestClickCounting:
    def test_vacuum_never_clicks(self):
        d = PhotonNumberDistribution((1.0,))
        c = tmd_click_distribution(d, TMDConfig(1.0, 8))
        assert c.probabilities[0] == 1.0

    def test_single_photon_ideal(self):
        d = PhotonNumberDistribution((0.0, 1.0))
        c = tmd_click_distribution(d, TMDConfig(1.0, 8))
        assert c.probabilities[1] == 1.0

    def test_two_photons_collide_one_in_eight(self):
        d = PhotonNumberDistribution((0.0, 0.0, 1.0))
        c = tmd_click_distribution(d, TMDConfig(1.0, 8))
        assert c.probabilities[1] == 0.125
        assert c.probabilities[2] == 0.875

    @pytest.mark.parametrize("bins", [2, 8, 64])
    def test_click_distribution_normalized(self, bins):
        c = tmd_click_distribution(random_distribution(), TMDConfig(0.6, bins))
        assert float(np.sum(c.probabilities)) == pytest.approx(1.0, abs=1e-12)

    def test_single_bin_is_click_no_click_dichotomy(self):
        d = random_distribution()
        lossy = apply_loss(d, LossChannel(0.4))
        c = tmd_click_distribution(d, TMDConfig(0.4, 1))
        assert c.probabilities[0] == pytest.approx(lossy.probabilities[0],
                                                   abs=1e-12)
        assert c.probabilities[1] == pytest.approx(
            1.0 - lossy.probabilities[0], abs=1e-12)

    def test_clicks_capped_by_photons_and_bins(self):
        d = PhotonNumberDistribution((0.0, 0.0, 0.0, 1.0))
        c = tmd_click_distribution(d, TMDConfig(1.0, 8))
        assert np.all(c.probabilities[4:] == 0.0)


class TestClickG2:
    @pytest.mark.parametrize("eta", [1.0, 0.37, 0.1])
    def test_coherent_estimator_is_exact(self, eta):
        d = number_distribution(make_coherent(1.3))
        cfg = TMDConfig(eta, 8)
        c = tmd_click_distribution(d, cfg)
        assert g2_from_clicks(c, cfg) == pytest.approx(1.0, abs=1e-9)

    def test_single_photon_never_coincides(self):
        d = PhotonNumberDistribution((0.0, 1.0))
        cfg = TMDConfig(0.5, 8)
        assert g2_from_clicks(tmd_click_distribution(d, cfg), cfg) == 0.0

    def test_thermal_closed_forms(self):
        """Thermal light through B bins gives geometric-series click moments:
        E[m] = B(1 - 1/(1+mu/B)) and
        E[m(m-1)] = B(B-1)(1 - 2/(1+mu/B) + 1/(1+2mu/B)),
        so the mean-1 ideal estimator is exactly 9/5 and the eta=0.1 one 81/41.
        """
        d = thermal(1.0)
        ideal = TMDConfig(1.0, 8)
        assert g2_from_clicks(tmd_click_distribution(d, ideal), ideal) \
            == pytest.approx(9 / 5, abs=1e-9)
        lossy = TMDConfig(0.1, 8)
        assert g2_from_clicks(tmd_click_distribution(d, lossy), lossy) \
            == pytest.approx(81 / 41, abs=1e-9)
        # the detection-chain default eta brings the estimate within 0.05 of
        # the true thermal value 2; the lossless estimate does not
        assert abs(81 / 41 - 2.0) < 0.05

    @pytest.mark.parametrize("r2", [0.2, 0.5, 0.8])
    def test_many_bins_approach_true_value(self, r2):
        state, _ = pcoc_state(CatalysisConfig(math.sqrt(1.11),
                                              BeamSplitter(r2), 1))
        d = number_distribution(state)
        true = g2(d)
        cfg = TMDConfig(0.1, 64)
        est = g2_from_clicks(tmd_click_distribution(d, cfg), cfg)
        assert abs(est - true) / true < 0.01

    def test_needs_two_bins(self):
        d = random_distribution()
        cfg = TMDConfig(1.0, 1)
        c = tmd_click_distribution(d, cfg)
        with pytest.raises(ValueError):
            g2_from_clicks(c, cfg)

    def test_bin_count_mismatch_rejected(self):
        c = tmd_click_distribution(random_distribution(), TMDConfig(1.0, 8))
        with pytest.raises(ValueError):
            g2_from_clicks(c, TMDConfig(1.0, 16))


class TestJoint:
    def test_no_interference_factorizes(self):
        """r2=0 leaves the product input product; clicks factorize too."""
        j = joint_output_distribution(
            CatalysisConfig(1.0, BeamSplitter(0.0), 1),
            TMDConfig(0.8), TMDConfig(0.6))
        p = j.probabilities
        marg1, marg2 = p.sum(axis=1), p.sum(axis=0)
        assert np.abs(p - np.outer(marg1, marg2)).max() < 1e-12

    def test_catalyst_arm_single_click_at_zero_reflectivity(self):
        j = joint_output_distribution(
            CatalysisConfig(1.0, BeamSplitter(0.0), 1),
            TMDConfig(1.0), TMDConfig(1.0))
        marg2 = j.probabilities.sum(axis=0)
        assert np.all(marg2[[0] + list(range(2, marg2.size))] == 0.0)
        assert marg2[1] == pytest.approx(1.0, abs=1e-12)

    def test_dead_detectors_click_nowhere(self):
        j = joint_output_distribution(
            CatalysisConfig(1.0, BeamSplitter(0.3), 1),
            TMDConfig(0.0), TMDConfig(0.0))
        assert j.probabilities[0, 0] == pytest.approx(1.0, abs=1e-12)

    def test_normalized(self):
        j = joint_output_distribution(
            CatalysisConfig(math.sqrt(1.11), BeamSplitter(0.37), 1),
            TMDConfig(0.7), TMDConfig(0.4))
        assert float(j.probabilities.sum()) == pytest.approx(1.0, abs=1e-10)

    def test_single_photon_suppression_dip(self):
        vals = {}
        for r2 in (0.45, 0.5, 0.55):
            j = joint_output_distribution(
                CatalysisConfig(math.sqrt(1.11), BeamSplitter(r2), 1),
                TMDConfig(1.0), TMDConfig(1.0))
            vals[r2] = j.probabilities[1, 1]
        assert vals[0.5] < vals[0.45]
        assert vals[0.5] < vals[0.55]


class TestJointExports:
    def make(self):
        return joint_output_distribution(
            CatalysisConfig(1.0, BeamSplitter(0.3), 1),
            TMDConfig(1.0, 2), TMDConfig(1.0, 2))

    def test_csv(self):
        text = joint_to_csv(self.make())
        lines = text.rstrip("\n").split("\n")
        assert lines[0] == "i,j,p"
        assert len(lines) == 1 + 3 * 3
        i, j, p = lines[1].split(",")
        assert (i, j) == ("0", "0")
        assert "e" in p

    def test_json_parses_and_matches(self):
        j = self.make()
        doc = json.loads(joint_to_json(j))
        got = np.array(doc["probabilities"])
        assert np.abs(got - j.probabilities).max() < 1e-9

    def test_validation(self):
        with pytest.raises(ValueError):
            ClickDistribution(np.array([0.5, 0.5]), bins=8)
        with pytest.raises(ValueError):
            JointClickDistribution(np.zeros(3))
        with pytest.raises(ValueError):
            TMDConfig(0.5, 0)

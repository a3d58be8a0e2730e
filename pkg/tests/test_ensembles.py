"""Equilibrium sampling, equivariance and channel measurements."""

import numpy as np
import pytest

from pilotwave import (Channel, MeasurementScenario, NonRelField,
                       PhysicsInvariantViolated, channel_exclusivity_check,
                       equivariance_test, run_measurement, sample_density)
from pilotwave.ensembles import classify_endpoints, exact_bin_masses


def make_scenario(p1=0.7, drift=1.0, final_time=1.0):
    return MeasurementScenario(channels=[
        Channel(np.sqrt(p1), -1.0, 0.0, 0.5, -drift),
        Channel(np.sqrt(1.0 - p1), 1.0, 0.0, 0.5, drift),
    ], final_time=final_time)


class TestSampling:
    def test_single_gaussian_moments(self):
        f = NonRelField.gaussian_1d(1.0, [(1.0, 2.0, 0.0, 0.8)])
        n = 100_000
        ens = sample_density(f, 0.0, n, seed=3)
        assert abs(np.mean(ens.positions) - 2.0) <= 4.0 * 0.8 / np.sqrt(n)
        assert abs(np.var(ens.positions) - 0.64) <= 0.1 * 0.64

    def test_disjoint_equal_gaussians_split_half(self):
        w = np.sqrt(0.5)
        f = NonRelField.gaussian_1d(1.0, [(w, -5.0, 0.0, 0.4),
                                          (w, 5.0, 0.0, 0.4)])
        n = 40_000
        ens = sample_density(f, 0.0, n, seed=9)
        frac_left = np.mean(ens.positions < 0.0)
        assert abs(frac_left - 0.5) <= 3.0 * np.sqrt(0.25 / n)

    def test_single_sample_reproducible(self):
        f = NonRelField.gaussian_1d(1.0, [(1.0, 0.0, 0.0, 1.0)])
        a = sample_density(f, 0.0, 1, seed=42)
        b = sample_density(f, 0.0, 1, seed=42)
        assert a.positions[0] == b.positions[0]

    def test_rejects_nonpositive_n(self):
        f = NonRelField.gaussian_1d(1.0, [(1.0, 0.0, 0.0, 1.0)])
        with pytest.raises(ValueError):
            sample_density(f, 0.0, 0, seed=1)


class TestEquivariance:
    def test_single_gaussian(self):
        f = NonRelField.gaussian_1d(1.0, [(1.0, 0.0, 0.0, 0.7)])
        tau = 2.0 * 0.7**2
        l1 = equivariance_test(f, 0.0, tau, n=100_000, bins=50, seed=4)
        assert l1 <= 0.02

    def test_degenerate_window_equals_sampling_noise(self):
        f = NonRelField.gaussian_1d(1.0, [(1.0, 0.0, 0.0, 0.7)])
        n, bins = 20_000, 50
        l1 = equivariance_test(f, 0.0, 0.0 + 1e-12, n=n, bins=bins, seed=4)
        # pure multinomial noise, roughly sqrt(bins/n) up to a constant
        assert l1 <= 4.0 * np.sqrt(bins / n)

    def test_exact_masses_sum_to_one(self):
        f = NonRelField.gaussian_1d(1.0, [(1.0, 0.0, 0.0, 0.7)])
        window = f.sampling_window(1.0)
        edges = np.linspace(window[0][0], window[0][1], 51)
        masses = exact_bin_masses(f, 1.0, edges)
        assert np.sum(masses) == pytest.approx(1.0, abs=1e-6)


class TestMeasurement:
    def test_invalid_weights_rejected(self):
        with pytest.raises(PhysicsInvariantViolated):
            MeasurementScenario(channels=[
                Channel(1.0, -1.0, 0.0, 0.5, -1.0),
                Channel(1.0, 1.0, 0.0, 0.5, 1.0)])

    def test_duplicate_drifts_rejected(self):
        with pytest.raises(PhysicsInvariantViolated):
            MeasurementScenario(channels=[
                Channel(np.sqrt(0.5), -1.0, 0.0, 0.5, 1.0),
                Channel(np.sqrt(0.5), 1.0, 0.0, 0.5, 1.0)])

    def test_single_channel_is_certain(self):
        sc = MeasurementScenario(channels=[Channel(1.0, 0.0, 0.0, 0.5, 0.5)],
                                 final_time=2.0)
        out = run_measurement(sc, 400, seed=2)
        assert out.frequencies[0] == 1.0
        assert out.unresolved == 0

    def test_symmetric_channels_split_evenly(self):
        sc = make_scenario(p1=0.5)
        n = 2000
        out = run_measurement(sc, n, seed=6)
        assert abs(out.frequencies[0] - 0.5) <= 3.0 * np.sqrt(0.25 / n)

    def test_seed_changes_counts_not_conclusion(self):
        sc = make_scenario(p1=0.7)
        n = 2000
        a = run_measurement(sc, n, seed=1)
        b = run_measurement(sc, n, seed=2)
        assert not np.array_equal(a.counts, b.counts)
        band = 3.0 * np.sqrt(0.21 / n)
        assert abs(a.frequencies[0] - 0.7) <= band
        assert abs(b.frequencies[0] - 0.7) <= band


class TestExclusivity:
    def test_valid_scenario_no_violations(self):
        sc = make_scenario()
        t = sc.final_time
        ys = np.array([-t, t])  # one endpoint per channel center
        report = channel_exclusivity_check(sc, [ys], [t])
        assert report.ok

    def test_overlapping_supports_detected(self):
        # drift gap too small for the supports to separate by final_time
        sc = MeasurementScenario(channels=[
            Channel(np.sqrt(0.5), -1.0, 0.0, 0.5, -0.01),
            Channel(np.sqrt(0.5), 1.0, 0.0, 0.5, 0.01)],
            final_time=1.0)
        report = channel_exclusivity_check(sc, [np.array([0.0])], [1.0])
        assert not report.ok

    def test_empty_snapshot_list(self):
        sc = make_scenario()
        report = channel_exclusivity_check(sc, [], [])
        assert report.ok


class TestEndpointClassification:
    def test_unresolved_counts_gap_points(self):
        sc = make_scenario()
        t = sc.final_time
        ys = np.array([-t, 0.0, t])  # middle point sits between supports
        counts, unresolved = classify_endpoints(sc, ys, t)
        assert counts.tolist() == [1, 1]
        assert unresolved == 1

    def test_invalid_endpoints_are_unresolved(self):
        sc = make_scenario()
        t = sc.final_time
        ys = np.array([-t, t])
        counts, unresolved = classify_endpoints(
            sc, ys, t, invalid=np.array([True, False]))
        assert counts.tolist() == [0, 1]
        assert unresolved == 1

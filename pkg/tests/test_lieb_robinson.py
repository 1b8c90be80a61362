import math

import numpy as np
import pytest

from spinglue.chain import transverse_field_ising
from spinglue.lieb_robinson import (SATURATION_NORM, LRSample, fill_bounds,
                                    fit_lr_constants, lr_commutator_scan,
                                    samples_to_csv, synthetic_samples)


@pytest.fixture(scope="module")
def tfim8_scan():
    h = transverse_field_ising(8, shift_ground_to_zero=False)
    t_grid = [0.0, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6]
    d_grid = [1, 2, 3, 4, 5, 7]
    return lr_commutator_scan(h, 0, (0, 0), t_grid, d_grid)


class TestScan:
    def test_zero_time_vanishes_exactly(self, tfim8_scan):
        for s in tfim8_scan:
            if s.t == 0.0:
                assert s.commutator_norm == 0.0

    def test_outside_light_cone_is_tiny(self, tfim8_scan):
        # boundary-to-boundary probe at short time: frozen pilot threshold
        far = [s for s in tfim8_scan if s.distance == 7 and 0 < s.t <= 0.4]
        assert far and all(s.commutator_norm < 1e-3 for s in far)

    def test_monotone_in_time_before_saturation(self, tfim8_scan):
        near = [s for s in tfim8_scan if s.distance == 1 and s.commutator_norm < 1.0]
        near.sort(key=lambda s: s.t)
        norms = [s.commutator_norm for s in near]
        assert all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))

    def test_nonincreasing_in_distance(self, tfim8_scan):
        for t in {s.t for s in tfim8_scan if s.t > 0}:
            row = sorted((s for s in tfim8_scan if s.t == t), key=lambda s: s.distance)
            norms = [s.commutator_norm for s in row]
            assert all(b <= a + 1e-9 for a, b in zip(norms, norms[1:]))

    def test_norm_bounded_by_two(self, tfim8_scan):
        assert all(s.commutator_norm <= 2.0 + 1e-12 for s in tfim8_scan)

    def test_overlapping_supports_rejected(self):
        h = transverse_field_ising(4, shift_ground_to_zero=False)
        with pytest.raises(ValueError, match="disjoint"):
            lr_commutator_scan(h, 0, (0, 0), [0.1], [0])


class TestFit:
    def test_synthetic_round_trip(self):
        samples = synthetic_samples(v=1.3, kappa=2.7, amplitude=2.0,
                                    t_grid=[0.05, 0.1, 0.2, 0.4], d_grid=[1, 2, 3, 4])
        fit = fit_lr_constants(samples, saturation=np.inf, fit_floor_ratio=0.0)
        assert abs(fit.v - 1.3) < 1e-6
        assert abs(fit.kappa_lr - 2.7) < 1e-6
        assert abs(math.exp(fit.log_amplitude) - 2.0) < 1e-6
        assert fit.residual < 1e-9

    def test_inflated_bound_dominates(self, tfim8_scan):
        fit = fit_lr_constants(tfim8_scan)
        pre = [s for s in tfim8_scan if 0 < s.commutator_norm < SATURATION_NORM]
        assert pre
        for s in pre:
            assert fit.bound(s.t, s.distance, inflation=0.1) >= s.commutator_norm

    def test_all_zero_norms_rejected(self):
        samples = [LRSample(t=0.0, distance=d, commutator_norm=0.0) for d in range(1, 12)]
        with pytest.raises(ValueError, match="zero"):
            fit_lr_constants(samples)

    def test_single_distance_rejected(self):
        samples = synthetic_samples(v=1.0, kappa=2.0, amplitude=1.0,
                                    t_grid=np.linspace(0.05, 0.5, 12), d_grid=[3])
        with pytest.raises(ValueError, match="degenerate"):
            fit_lr_constants(samples, saturation=np.inf)

    def test_too_few_samples_rejected(self):
        samples = synthetic_samples(v=1.0, kappa=2.0, amplitude=1.0,
                                    t_grid=[0.1, 0.2], d_grid=[1, 2, 3])
        with pytest.raises(ValueError, match="need >= 10"):
            fit_lr_constants(samples, saturation=np.inf)


class TestCsv:
    def test_columns_and_rows(self, tfim8_scan):
        fit = fit_lr_constants(tfim8_scan)
        filled = fill_bounds(tfim8_scan, fit)
        text = samples_to_csv(filled)
        lines = text.strip().split("\r\n")
        assert lines[0] == "t,distance,commutator_norm,bound_value"
        assert len(lines) == len(tfim8_scan) + 1
        assert all(len(line.split(",")) == 4 for line in lines[1:])

import math

import numpy as np
import pytest

from rfiqkd import devices
from rfiqkd.core import ChannelState


def rotate_about_z(dirs, alpha):
    c, s = math.cos(alpha), math.sin(alpha)
    rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]])
    return dirs @ rot.T


class TestClickProbability:
    def test_aligned_perfect_channel(self):
        dev = devices.ideal_params()
        q = devices.click_probability(dev, ChannelState(1, 1), "Z", "+", "Z", "+")
        assert q == pytest.approx(0.5)

    def test_anti_aligned(self):
        dev = devices.ideal_params()
        q = devices.click_probability(dev, ChannelState(1, 0), "Z", "+", "Z", "-")
        assert q == pytest.approx(0.0, abs=1e-15)

    def test_unbiased_bases(self):
        dev = devices.ideal_params()
        for state in (ChannelState(1, 1), ChannelState(0.3, 0.2)):
            q = devices.click_probability(dev, state, "X", "+", "Z", "+")
            assert q == pytest.approx(0.25)

    def test_weight_sum_is_nine_for_sign_pairs(self, rng):
        # antipodal unit sign pairs make every block average 1/4 per cell
        for _ in range(10):
            dirs = devices._ideal_directions()
            prep = rotate_about_z(dirs, rng.uniform(0, 2 * math.pi))
            meas = rotate_about_z(dirs, rng.uniform(0, 2 * math.pi))
            dev = devices.DeviceParams(prep_dirs=prep, meas_dirs=meas)
            l1 = rng.uniform(-1, 1)
            l2 = rng.uniform(-(1 + l1) / 2, (1 + l1) / 2)
            q = devices.click_weight_matrix(dev, ChannelState(l1, l2))
            assert q.sum() == pytest.approx(9.0, abs=1e-12)


def test_ideal_directions():
    dev = devices.ideal_params()
    assert dev.prep_dirs[devices.basis_index("X", "+")].tolist() == [1, 0, 0]
    assert dev.meas_dirs[devices.basis_index("Y", "-")].tolist() == [0, -1, 0]
    assert (dev.prep_eff == 1).all() and (dev.meas_eff == 1).all()


class TestClickDistribution:
    def test_perfect_channel_zeros(self):
        dev = devices.ideal_params()
        p = devices.click_distribution(dev, ChannelState(1, 1))
        assert p.sum() == pytest.approx(1.0)
        anti = [(0, 1), (1, 0), (2, 3), (3, 2), (4, 5), (5, 4)]
        for i, j in anti:
            assert p[i, j] == pytest.approx(0.0, abs=1e-15)
        assert np.count_nonzero(p < 1e-15) == 6

    def test_uninformative_channel_is_uniform(self):
        dev = devices.ideal_params()
        p = devices.click_distribution(dev, ChannelState(0, 0))
        assert np.allclose(p, 1.0 / 36.0)

    def test_correlator_matrix_is_identity(self):
        p = devices.click_distribution(devices.ideal_params(), ChannelState(1, 1))
        blocks = p.reshape(3, 2, 3, 2)
        same = blocks[:, 0, :, 0] + blocks[:, 1, :, 1]
        diff = blocks[:, 0, :, 1] + blocks[:, 1, :, 0]
        corr = (same - diff) / (same + diff)
        assert np.allclose(corr, np.eye(3), atol=1e-12)

    def test_frame_rotation_invariance(self, rng):
        # rotating every equatorial direction on both sides by the same
        # angle leaves the distribution unchanged
        dev = devices.ideal_params()
        state = ChannelState(0.7, 0.5)
        base = devices.click_distribution(dev, state)
        alpha = rng.uniform(0, 2 * math.pi)
        rotated = devices.DeviceParams(
            prep_dirs=rotate_about_z(dev.prep_dirs, alpha),
            meas_dirs=rotate_about_z(dev.meas_dirs, alpha),
        )
        assert np.abs(devices.click_distribution(rotated, state) - base).max() < 1e-12

    def test_all_zero_weights_rejected(self):
        dev = devices.DeviceParams(
            prep_dirs=devices._ideal_directions(),
            meas_dirs=devices._ideal_directions(),
            prep_eff=np.full(6, 1e-300),
            meas_eff=np.full(6, 1e-300),
        )
        with pytest.raises(ValueError):
            devices.click_distribution(dev, ChannelState(0, 0))


class TestOptics:
    def test_ideal_half_wave_plate_makes_diagonal(self):
        spec = devices.ideal_optics()
        v = devices.bloch_from_optics(spec, "Y", "+")
        assert v.as_array() == pytest.approx([0, 1, 0], abs=1e-12)
        v = devices.bloch_from_optics(spec, "Y", "-")
        assert v.as_array() == pytest.approx([0, -1, 0], abs=1e-12)

    def test_ideal_quarter_wave_plate_makes_circular(self):
        spec = devices.ideal_optics()
        v = devices.bloch_from_optics(spec, "Z", "+").as_array()
        assert abs(abs(v[2]) - 1.0) < 1e-12 and abs(v[0]) < 1e-12 and abs(v[1]) < 1e-12

    def test_ideal_optics_reproduce_ideal_params(self):
        built = devices.params_from_optics(devices.ideal_optics())
        ideal = devices.ideal_params()
        assert np.abs(built.prep_dirs - ideal.prep_dirs).max() < 1e-12
        assert np.abs(built.meas_dirs - ideal.meas_dirs).max() < 1e-12

    def test_imperfect_retardance_tilts_but_keeps_norm(self):
        spec = devices.OpticsSpec(
            hwp_retardance=0.535, qwp_retardance=0.25, pbs_extinction_db=math.inf
        )
        v = devices.bloch_from_optics(spec, "Y", "+").as_array()
        # cross-checked against a direct 2x2 Jones propagation
        jones = devices.waveplate_jones(0.535, 22.5) @ np.array([1.0, 0.0])
        sx = abs(jones[0]) ** 2 - abs(jones[1]) ** 2
        sy = 2 * (jones[0].conjugate() * jones[1]).real
        sz = 2 * (jones[0].conjugate() * jones[1]).imag
        assert v == pytest.approx([sx, sy, sz], abs=1e-12)
        assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
        assert abs(v[1]) < 1.0
        assert v[2] != 0.0

    def test_extinction_shortens(self):
        spec = devices.OpticsSpec(pbs_extinction_db=13.0)
        v = devices.bloch_from_optics(spec, "X", "+").as_array()
        eps = 10 ** (-1.3)
        assert np.linalg.norm(v) == pytest.approx((1 - eps) / (1 + eps), abs=1e-12)
        assert v == pytest.approx([(1 - eps) / (1 + eps), 0, 0], abs=1e-12)

    def test_sides_can_differ(self):
        import dataclasses

        spec = devices.OpticsSpec()
        dev = devices.params_from_optics(
            spec, dataclasses.replace(spec, pbs_extinction_db=math.inf)
        )
        assert np.linalg.norm(dev.prep_dirs, axis=1).max() < 1.0
        assert np.linalg.norm(dev.meas_dirs, axis=1) == pytest.approx(np.ones(6), abs=1e-12)


class TestPacking:
    def test_round_trip_identity(self):
        dev = devices.ideal_params()
        again = devices.unpack_params(devices.pack_params(dev))
        assert np.abs(again.prep_dirs - dev.prep_dirs).max() < 1e-14
        assert np.abs(again.meas_dirs - dev.meas_dirs).max() < 1e-14
        assert np.array_equal(again.prep_eff, dev.prep_eff)
        assert np.array_equal(again.meas_eff, dev.meas_eff)

    def test_round_trip_random_unit_vectors(self, rng):
        dirs = rng.normal(size=(6, 3))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        dirs[4] = [0, 0, 1]
        dirs[5] = [0, 0, -1]
        dev = devices.DeviceParams(
            prep_dirs=dirs, meas_dirs=dirs[::-1].copy(),
            prep_eff=rng.uniform(0.5, 2, 6), meas_eff=rng.uniform(0.5, 2, 6),
        )
        again = devices.unpack_params(devices.pack_params(dev))
        assert np.abs(again.prep_dirs - dev.prep_dirs).max() < 1e-14
        assert np.abs(again.meas_dirs - dev.meas_dirs).max() < 1e-14

    def test_key_basis_preparations_not_in_vector(self):
        vec = devices.pack_params(devices.ideal_params())
        assert vec.shape == (32,)
        bumped = vec.copy()
        bumped[0:20] += 0.17  # move every free angle
        dev = devices.unpack_params(bumped)
        assert np.array_equal(dev.prep_dirs[4], [0, 0, 1])
        assert np.array_equal(dev.prep_dirs[5], [0, 0, -1])

    def test_single_azimuth_perturbation_moves_one_direction(self):
        vec = devices.pack_params(devices.ideal_params())
        vec[1] += 0.01  # azimuth of the first preparation
        dev = devices.unpack_params(vec)
        ideal = devices.ideal_params()
        moved = np.linalg.norm(dev.prep_dirs - ideal.prep_dirs, axis=1) > 1e-12
        assert moved.tolist() == [True, False, False, False, False, False]
        assert np.abs(dev.meas_dirs - ideal.meas_dirs).max() < 1e-15

    def test_pack_rejects_short_vectors(self):
        dev = devices.params_from_optics(devices.OpticsSpec())
        with pytest.raises(ValueError):
            devices.pack_params(dev)


class TestSerialization:
    def test_json_round_trip(self):
        dev = devices.params_from_optics(devices.OpticsSpec())
        again = devices.DeviceParams.loads(dev.dumps())
        assert np.array_equal(again.prep_dirs, dev.prep_dirs)
        assert np.array_equal(again.meas_dirs, dev.meas_dirs)
        assert np.array_equal(again.prep_eff, dev.prep_eff)

    def test_validation(self):
        with pytest.raises(ValueError):
            devices.DeviceParams(
                prep_dirs=np.ones((6, 3)), meas_dirs=devices._ideal_directions()
            )
        with pytest.raises(ValueError):
            devices.DeviceParams(
                prep_dirs=devices._ideal_directions(),
                meas_dirs=devices._ideal_directions(),
                prep_eff=np.zeros(6),
            )

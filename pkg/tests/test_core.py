import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rfiqkd import core
from conftest import random_channel_state


class TestBinaryEntropy:
    def test_degenerate_and_uniform(self):
        assert core.binary_entropy(0.0) == 0.0
        assert core.binary_entropy(1.0) == 0.0
        assert core.binary_entropy(0.5) == 1.0

    def test_near_bb84_threshold(self):
        # frozen from a 40-digit evaluation of the closed form
        assert core.binary_entropy(0.11) == pytest.approx(0.4999159581645280, abs=1e-12)
        assert 1.0 - 2.0 * core.binary_entropy(0.11) == pytest.approx(0.0, abs=2e-4)

    def test_domain_error(self):
        with pytest.raises(ValueError):
            core.binary_entropy(-0.01)
        with pytest.raises(ValueError):
            core.binary_entropy(1.01)

    @given(st.floats(min_value=0.0, max_value=1.0))
    def test_symmetry_and_range(self, x):
        h = core.binary_entropy(x)
        assert 0.0 <= h <= 1.0
        assert h == pytest.approx(core.binary_entropy(1.0 - x), abs=1e-12)


class TestChannelState:
    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            core.ChannelState(1.2, 0.0)
        with pytest.raises(ValueError):
            core.ChannelState(0.0, 0.8)  # 2*0.8 > 1 + 0

    def test_density_bell_state(self):
        rho = core.channel_density(core.ChannelState(1.0, 1.0))
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        assert np.allclose(rho, np.outer(v, v), atol=1e-15)

    def test_density_mixed_and_classical(self):
        assert np.allclose(core.channel_density(core.ChannelState(0, 0)), np.eye(4) / 4)
        assert np.allclose(
            core.channel_density(core.ChannelState(1, 0)), np.diag([0.5, 0, 0, 0.5])
        )

    def test_eigenvalues_closed_form(self):
        assert core.channel_eigenvalues(core.ChannelState(1, 1)) == (0, 0, 0, 1)
        assert core.channel_eigenvalues(core.ChannelState(0, 0)) == (0.25,) * 4
        e = core.channel_eigenvalues(core.ChannelState(0.8, 0.8))
        assert e == pytest.approx((0.05, 0.05, 0.05, 0.85), abs=1e-15)

    def test_eigenvalues_match_eigendecomposition(self, rng):
        for _ in range(100):
            st_ = core.ChannelState(*random_channel_state(rng))
            closed = np.sort(core.channel_eigenvalues(st_))
            numeric = np.sort(np.linalg.eigvalsh(core.channel_density(st_)))
            assert np.abs(closed - numeric).max() < 1e-12


class TestUsableEntropy:
    def test_reference_points(self):
        assert core.usable_entropy(core.ChannelState(1, 1)) == 1.0
        assert core.usable_entropy(core.ChannelState(1, 0)) == pytest.approx(0.0, abs=1e-12)
        # the dephased state equals the state itself here, so the relative
        # entropy must vanish (a sign flip in the closed form would give -2)
        assert core.usable_entropy(core.ChannelState(0, 0)) == pytest.approx(0.0, abs=1e-12)
        assert core.usable_entropy(core.ChannelState(0.8, 0.8)) == pytest.approx(
            0.6214109137647074, abs=1e-12
        )

    def test_matches_relative_entropy(self, rng):
        for _ in range(200):
            st_ = core.ChannelState(*random_channel_state(rng))
            rho = core.channel_density(st_)
            oracle = core.relative_entropy(rho, core.key_basis_dephase(rho))
            assert core.usable_entropy(st_) == pytest.approx(oracle, abs=1e-9)

    def test_even_in_lambda2(self, rng):
        for _ in range(50):
            l1, l2 = random_channel_state(rng)
            a = core.usable_entropy(core.ChannelState(l1, l2))
            b = core.usable_entropy(core.ChannelState(l1, -l2))
            assert a == b  # exact, not approximate

    def test_monotone_in_lambda2(self):
        for l1 in np.linspace(0.0, 1.0, 9):
            values = [
                core.usable_entropy(core.ChannelState(float(l1), float(l2)))
                for l2 in np.linspace(0.0, (1.0 + l1) / 2.0, 30)
            ]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


class TestRelativeEntropy:
    def test_self_is_zero(self, rng):
        rho = core.random_density(rng)
        assert core.relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_bell_vs_mixed(self):
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        bell = np.outer(v, v).astype(complex)
        assert core.relative_entropy(bell, np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)

    def test_consistency_with_usable_entropy(self):
        st_ = core.ChannelState(0.5, 0.3)
        rho = core.channel_density(st_)
        assert core.relative_entropy(rho, core.key_basis_dephase(rho)) == pytest.approx(
            core.usable_entropy(st_), abs=1e-12
        )

    def test_support_violation_is_infinite(self):
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        bell = np.outer(v, v).astype(complex)
        other = np.diag([0.0, 0.5, 0.5, 0.0]).astype(complex)
        assert core.relative_entropy(bell, other) == math.inf


class TestDephasing:
    def test_diagonal_unchanged(self):
        rho = np.diag([0.4, 0.3, 0.2, 0.1]).astype(complex)
        assert np.array_equal(core.key_basis_dephase(rho), rho)

    def test_bell_projector(self):
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        bell = np.outer(v, v).astype(complex)
        assert np.allclose(core.key_basis_dephase(bell), np.diag([0.5, 0, 0, 0.5]))

    def test_kills_channel_corner(self):
        st_ = core.ChannelState(0.6, 0.4)
        dephased = core.key_basis_dephase(core.channel_density(st_))
        assert np.allclose(dephased, core.channel_density(core.ChannelState(0.6, 0.0)))

    def test_idempotent_and_trace_preserving(self, rng):
        rho = core.random_density(rng)
        once = core.key_basis_dephase(rho)
        assert np.allclose(core.key_basis_dephase(once), once, atol=1e-15)
        assert np.trace(once) == pytest.approx(1.0, abs=1e-12)


class TestChannelProjection:
    def test_bell_and_mixed(self):
        v = np.array([1, 0, 0, 1]) / math.sqrt(2)
        bell = np.outer(v, v).astype(complex)
        st_ = core.project_to_channel(bell)
        assert (st_.lambda1, st_.lambda2) == pytest.approx((1.0, 1.0), abs=1e-12)
        st_ = core.project_to_channel(np.eye(4, dtype=complex) / 4)
        assert (st_.lambda1, st_.lambda2) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_output_has_channel_form(self, rng):
        rho = core.random_density(rng)
        projected = core.channel_project_matrix(rho)
        model = core.channel_density(core.project_to_channel(rho))
        assert np.abs(projected - model).max() < 1e-9

    def test_projection_never_gains_entropy(self, rng):
        for _ in range(100):
            rho = core.random_density(rng)
            bound = core.relative_entropy(rho, core.key_basis_dephase(rho))
            assert core.usable_entropy(core.project_to_channel(rho)) <= bound + 1e-9

    def test_commutes_with_key_dephase(self, rng):
        rho = core.random_density(rng)
        st_full = core.project_to_channel(rho)
        st_dephased = core.project_to_channel(core.key_basis_dephase(rho))
        assert st_dephased.lambda1 == pytest.approx(st_full.lambda1, abs=1e-12)
        assert st_dephased.lambda2 == pytest.approx(0.0, abs=1e-12)


class TestSuperOperatorProperties:
    def test_monotonicity_under_projection(self, rng):
        for _ in range(100):
            rho = core.random_density(rng)
            reduced = core.channel_project_matrix(rho)
            s_before = core.relative_entropy(rho, core.key_basis_dephase(rho))
            s_after = core.relative_entropy(reduced, core.key_basis_dephase(reduced))
            assert s_before >= s_after - 1e-9

    def test_commutation_with_key_dephase(self, rng):
        for _ in range(50):
            rho = core.random_density(rng)
            for op in (core.SIGMA_DIFF_Z, core.SIGMA_XX):
                a = core.key_basis_dephase(core.dephase_in_eigenbasis(rho, op))
                b = core.dephase_in_eigenbasis(core.key_basis_dephase(rho), op)
                assert np.abs(a - b).max() < 1e-12


def test_check_density_rejects_bad_matrices():
    with pytest.raises(ValueError):
        core.check_density(np.eye(4) * 0.5)  # trace 2
    bad = np.eye(4, dtype=complex) / 4
    bad[0, 1] = 0.5
    with pytest.raises(ValueError):
        core.check_density(bad)


def test_bloch_vector_norm_guard():
    with pytest.raises(ValueError):
        core.BlochVector(1.0, 1.0, 0.0)
    v = core.BlochVector(0.6, 0.0, 0.8)
    assert v.norm() == pytest.approx(1.0)

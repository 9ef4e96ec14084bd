"""Backend equivalence: the compiled kernel, the numpy fallback, and the
plain module composition must all agree."""

import numpy as np
import pytest

from rfiqkd import _kernel_py, devices, estimation, kernel
from rfiqkd.core import ChannelState, usable_entropy


def random_vector(rng):
    x = np.empty(34)
    x[0] = rng.uniform(-1, 1)
    x[1] = rng.uniform(-(1 + x[0]) / 2, (1 + x[0]) / 2)
    x[2:22:2] = rng.uniform(0, np.pi, 10)
    x[3:22:2] = rng.uniform(-np.pi, np.pi, 10)
    x[22:34] = rng.uniform(0.1, 10.0, 12)
    return x


def test_backends_agree_on_constraints(rng):
    for _ in range(50):
        x = random_vector(rng)
        a = kernel.model_constraints(x)
        b = _kernel_py.model_constraints(x)
        assert np.abs(a - b).max() < 1e-12


def test_backends_agree_on_penalty(rng):
    lo = np.concatenate([rng.uniform(-1, 0, 21), [0.0, 0.0]])
    hi = lo + np.concatenate([rng.uniform(0, 1, 21), [np.inf, np.inf]])
    for _ in range(50):
        x = random_vector(rng)
        a = kernel.penalty_value(x, lo, hi, 123.0)
        b = _kernel_py.penalty_value(x, lo, hi, 123.0)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_backends_agree_on_entropy(rng):
    for _ in range(100):
        l1 = rng.uniform(-1, 1)
        l2 = rng.uniform(-(1 + l1) / 2, (1 + l1) / 2)
        assert kernel.usable_entropy_raw(l1, l2) == pytest.approx(
            _kernel_py.usable_entropy_raw(l1, l2), abs=1e-14
        )
        assert kernel.usable_entropy_raw(l1, l2) == pytest.approx(
            usable_entropy(ChannelState(l1, l2)), abs=1e-12
        )


def test_kernel_matches_module_composition(rng):
    for _ in range(20):
        x = random_vector(rng)
        f = kernel.model_constraints(x)
        dev = devices.unpack_params(x[2:])
        p = devices.click_distribution(dev, ChannelState(x[0], x[1]))
        m_like = p  # constraint formulas are scale invariant
        blocks = m_like.reshape(3, 2, 3, 2)
        same = blocks[:, 0, :, 0] + blocks[:, 1, :, 1]
        diff = blocks[:, 0, :, 1] + blocks[:, 1, :, 0]
        assert np.abs(f[0:9] - ((same - diff) / (same + diff)).ravel()).max() < 1e-12
        assert np.abs(f[9:15] - p.sum(axis=1)).max() < 1e-12
        assert np.abs(f[15:21] - p.sum(axis=0)).max() < 1e-12
        assert f[21] == pytest.approx(1 + x[0] - 2 * x[1], abs=1e-14)
        assert f[22] == pytest.approx(1 + x[0] + 2 * x[1], abs=1e-14)


def test_kernel_matches_pseudocount_constraints(rng):
    # same values as running the estimation formulas on scaled model counts
    x = random_vector(rng)
    f = kernel.model_constraints(x)
    dev = devices.unpack_params(x[2:])
    p = devices.click_distribution(dev, ChannelState(x[0], x[1]))
    m = estimation.CountMatrix(np.rint(p * 1e9).astype(np.int64))
    cs = estimation.constraints(m)
    assert np.abs(f[:21] - cs.values_vector()).max() < 1e-4


def test_penalty_matches_interval_arithmetic(rng):
    x = random_vector(rng)
    f = kernel.model_constraints(x)
    lo = f - 0.02
    hi = f - 0.01  # every constraint violated from above by 0.01
    expected = kernel.usable_entropy_raw(x[0], x[1]) + 50.0 * 23 * 0.01**2
    assert kernel.penalty_value(x, lo, hi, 50.0) == pytest.approx(expected, rel=1e-9)


def test_backend_name_exposed():
    assert kernel.BACKEND in ("cython", "python")
    assert kernel.N_PARAMS == 34
    assert kernel.N_CONSTRAINTS == 23

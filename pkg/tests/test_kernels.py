import os
import subprocess
import sys

import numpy as np
import pytest

from ringsqueeze import _accel, kernels

needs_numba = pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")


def _newton_args(rng, swap=False):
    x0 = rng.normal(size=4) * 0.3
    gam = np.array([1.0, 1.0 + 0.01 * rng.random()])
    delta = rng.normal(size=2) * 0.3
    dre, dim = rng.normal(size=2), rng.normal(size=2)
    args = [x0, gam, delta, dre, dim]
    if swap:
        args = [x0[[2, 3, 0, 1]], gam[::-1].copy(), delta[::-1].copy(), dre[::-1].copy(), dim[::-1].copy()]
    return args + [0.05, 0.08, 1e-13, 60, 40]


def _eigen_inputs(rng, n=6):
    lam = -rng.random(n) - 0.2 + 1j * rng.normal(size=n)
    V = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    K = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return lam, V, K


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_pump_newton_paths_agree(seed):
    args = _newton_args(np.random.default_rng(seed))
    a = kernels._pump_newton_nb(*args)
    b = kernels._pump_newton_np(*args)
    assert a[1] == b[1] == kernels.NEWTON_CONVERGED
    assert np.allclose(a[0], b[0], rtol=1e-12, atol=1e-14)
    assert a[2] < 1e-13 and b[2] < 1e-13


def test_pump_newton_exchange_symmetry():
    rng = np.random.default_rng(11)
    a = kernels._pump_newton_np(*_newton_args(rng))
    b = kernels._pump_newton_np(*_newton_args(np.random.default_rng(11), swap=True))
    assert np.allclose(a[0], b[0][[2, 3, 0, 1]], rtol=1e-10, atol=1e-13)


def test_residual_jacobian_by_finite_differences():
    rng = np.random.default_rng(3)
    x = rng.normal(size=4)
    args = (np.array([1.0, 1.1]), np.array([0.2, -0.4]), rng.normal(size=2), rng.normal(size=2), 0.07, 0.05)
    r0, jac = kernels._pump_residual(x, *args)
    h = 1e-7
    for k in range(4):
        dx = np.zeros(4)
        dx[k] = h
        rp, _ = kernels._pump_residual(x + dx, *args)
        rm, _ = kernels._pump_residual(x - dx, *args)
        assert np.allclose((rp - rm) / (2 * h), jac[:, k], rtol=1e-6, atol=1e-8)


@needs_numba
@pytest.mark.parametrize("seed", range(3))
def test_eigen_sum_paths_agree(seed):
    lam, V, K = _eigen_inputs(np.random.default_rng(seed))
    om = np.linspace(0, 3, 11)
    for j in range(3):
        a = kernels._spectrum_sums_nb(lam, V, K, j, om)
        b = kernels._spectrum_sums_np(lam, V, K, j, om)
        for x, y in zip(a, b):
            assert np.allclose(x, y, rtol=1e-12, atol=1e-12)
    assert np.allclose(kernels._photon_sums_nb(lam, V, K), kernels._photon_sums_np(lam, V, K), rtol=1e-12)


def test_dispatch_follows_flag():
    expect = _accel.USE_NUMBA
    assert (kernels.pump_newton is kernels._pump_newton_nb) == expect
    assert (kernels.spectrum_sums is kernels._spectrum_sums_nb) == expect


_PROBE = (
    "from ringsqueeze import _accel, kernels, pipeline\n"
    "from ringsqueeze.model import baseline_config\n"
    "print(_accel.USE_NUMBA, kernels.pump_newton is kernels._pump_newton_np)\n"
    "print(repr(pipeline.extremes_at_zero(baseline_config())))\n"
)


def _probe(flag):
    env = dict(os.environ)
    env.pop("RINGSQUEEZE_DISABLE_NUMBA", None)
    if flag is not None:
        env["RINGSQUEEZE_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True)
    first, second = out.stdout.strip().splitlines()
    return first, eval(second)


def test_env_flag_selects_numpy_and_results_agree():
    first, numpy_result = _probe("1")
    assert first == "False True"
    if _accel.NUMBA_AVAILABLE:
        first, numba_result = _probe(None)
        assert first == "True False"
        assert numba_result == pytest.approx(numpy_result, rel=1e-11)
    assert _probe("0")[0] == ("True False" if _accel.NUMBA_AVAILABLE else "False True")

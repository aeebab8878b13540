"""Compare the numba and numpy implementations of the hot kernels.

    python benchmarks/bench_kernels.py --repeat 200

Both variants are imported directly from ``ringsqueeze.kernels`` so the
RINGSQUEEZE_DISABLE_NUMBA flag does not matter here. Results are checked for
agreement before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from ringsqueeze import kernels, pipeline, spectrum
from ringsqueeze.model import baseline_config


def _inputs():
    op = pipeline.operating_point(baseline_config())
    eig = spectrum.eigendecompose(op.drift)
    K = spectrum._kernel_weights(eig)
    omegas = np.linspace(0.0, 4 * op.rates.gamma_bar[2], 201)
    newton_args = (
        np.array([0.3, -0.4, 0.3, -0.4]),
        np.array([1.0, 1.001]),
        np.array([-0.12, -0.12]),
        np.array([0.0, 0.0]),
        np.array([0.9, 0.9]),
        0.05,
        0.05,
        1e-12,
        60,
        40,
    )
    return eig, K, omegas, newton_args


def _time(fn, repeat: int) -> float:
    fn()  # warm-up / compile
    t = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t) / repeat


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=100)
    args = ap.parse_args()

    eig, K, omegas, nargs = _inputs()
    lam, V = eig.lambdas, eig.V
    cases = {
        "pump_newton": (lambda: kernels._pump_newton_nb(*nargs), lambda: kernels._pump_newton_np(*nargs)),
        "spectrum_sums[201]": (
            lambda: kernels._spectrum_sums_nb(lam, V, K, 1, omegas),
            lambda: kernels._spectrum_sums_np(lam, V, K, 1, omegas),
        ),
        "photon_sums": (lambda: kernels._photon_sums_nb(lam, V, K), lambda: kernels._photon_sums_np(lam, V, K)),
    }
    print(f"{'kernel':<22}{'numba (us)':>14}{'numpy (us)':>14}{'speed-up':>10}  max |diff|")
    for name, (nb, py) in cases.items():
        a, b = nb(), py()
        a = a if isinstance(a, tuple) else (a,)
        b = b if isinstance(b, tuple) else (b,)
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(a, b))
        t_nb = _time(nb, args.repeat)
        t_np = _time(py, args.repeat)
        print(f"{name:<22}{t_nb * 1e6:>14.2f}{t_np * 1e6:>14.2f}{t_np / t_nb:>10.1f}  {diff:.2e}")


if __name__ == "__main__":
    main()

"""One operating point end to end: pump state, drift matrix, spectrum, photon numbers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fluctuation, pump, spectrum
from .model import ModeRates, SystemConfig, derive_rates


@dataclass(frozen=True)
class OperatingPoint:
    cfg: SystemConfig
    rates: ModeRates
    detunings: tuple[float, float]
    steady: pump.PumpSteadyState
    R: fluctuation.DetuningParams
    drift: fluctuation.DriftMatrix
    stability: fluctuation.StabilityReport


def operating_point(cfg: SystemConfig, rates: ModeRates | None = None) -> OperatingPoint:
    """Resolve detunings, solve the pump state and build the drift matrix for ``cfg``."""
    rates = rates if rates is not None else derive_rates(cfg)
    deltas, steady = pump.resolve_operating_point(cfg, rates)
    R = fluctuation.detuning_params(cfg, *deltas)
    drift = fluctuation.build_drift_matrix(steady, R, rates, cfg.lambda_coeff, cfg.toggles)
    return OperatingPoint(cfg, rates, deltas, steady, R, drift, fluctuation.stability(drift))


def spectrum_at(op: OperatingPoint, mode: str | None = None, omegas=None, thetas=None) -> spectrum.SpectrumResult:
    grid = op.cfg.spectrum
    mode = grid.mode if mode is None else mode
    omegas = grid.omegas() if omegas is None else omegas
    thetas = grid.thetas if thetas is None else thetas
    return spectrum.spectrum_for(op.drift, op.rates, mode, thetas, omegas)


def photons_at(op: OperatingPoint) -> spectrum.PhotonNumbers:
    return spectrum.photon_numbers(spectrum.eigendecompose(op.drift))


def extremes_at_zero(cfg: SystemConfig, rates: ModeRates | None = None, mode: str | None = None) -> tuple[float, float]:
    """(s_min, s_max) at zero sideband frequency, linear units."""
    op = operating_point(cfg, rates)
    res = spectrum_at(op, mode, omegas=np.zeros(1), thetas=())
    return float(res.s_min[0]), float(res.s_max[0])

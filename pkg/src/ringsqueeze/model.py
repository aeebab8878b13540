"""Physical parameter model: configuration, units and decay rates.

All quantities are stored in SI units with angular frequencies in rad/s.
Mode-indexed tuples follow the frequency order ``(m, p1, s, p2, n)``.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

import numpy as np
from scipy.constants import c as C_LIGHT

from .errors import ConfigError

MODES = ("m", "p1", "s", "p2", "n")
MODE_INDEX = {name: i for i, name in enumerate(MODES)}
PUMPS = (1, 3)
SIDEBANDS = (0, 2, 4)

TWO_PI = 2.0 * math.pi


def dbm_to_watt(dbm: float) -> float:
    return 1e-3 * 10.0 ** (dbm / 10.0)


def watt_to_dbm(watt: float) -> float:
    if watt <= 0:
        return -math.inf
    return 10.0 * math.log10(watt / 1e-3)


def expand_frequencies(omega_s: float, fsr: float, dispersion: float) -> tuple[float, ...]:
    """Five cold-cavity frequencies around ``omega_s``.

    Uses omega_mu = omega_s + mu*fsr + mu**2*dispersion/2 for mu = -2..2, so
    that (omega_p2 - omega_s) - (omega_s - omega_p1) equals ``dispersion``.
    """
    return tuple(omega_s + mu * fsr + 0.5 * mu * mu * dispersion for mu in range(-2, 3))


@dataclass(frozen=True)
class ProcessToggles:
    spm: bool = True
    xpm: bool = True
    dp_sfwm: bool = True
    sp_sfwm: bool = True
    bs_fwm: bool = True
    hp_sfwm: bool = True

    NAMES = ("spm", "xpm", "dp_sfwm", "sp_sfwm", "bs_fwm", "hp_sfwm")

    @classmethod
    def all_on(cls) -> "ProcessToggles":
        return cls()

    @classmethod
    def all_off(cls) -> "ProcessToggles":
        return cls(*(False,) * 6)

    @classmethod
    def only(cls, *names: str) -> "ProcessToggles":
        unknown = set(names) - set(cls.NAMES)
        if unknown:
            raise ConfigError("processes", f"unknown process names {sorted(unknown)}")
        return cls(**{n: (n in names) for n in cls.NAMES})

    @classmethod
    def parse(cls, spec: str) -> "ProcessToggles":
        """Parse ``"spm+xpm+dp_sfwm"``, ``"all"`` or ``"none"``."""
        spec = spec.strip().lower()
        if spec == "all":
            return cls.all_on()
        if spec == "none":
            return cls.all_off()
        aliases = {"dp": "dp_sfwm", "sp": "sp_sfwm", "bs": "bs_fwm", "hp": "hp_sfwm"}
        names = [aliases.get(tok.strip(), tok.strip()) for tok in spec.split("+") if tok.strip()]
        return cls.only(*names)

    @classmethod
    def every_combination(cls) -> Iterator["ProcessToggles"]:
        for bits in itertools.product((False, True), repeat=6):
            yield cls(*bits)

    def label(self) -> str:
        on = [n for n in self.NAMES if getattr(self, n)]
        if len(on) == 6:
            return "all"
        return "+".join(on) if on else "none"

    def as_dict(self) -> dict[str, bool]:
        return {n: getattr(self, n) for n in self.NAMES}


# standard ablation set: phase modulation always on, parametric processes varied
STANDARD_ABLATIONS = {
    "DP": ProcessToggles.parse("spm+xpm+dp"),
    "DP+SP": ProcessToggles.parse("spm+xpm+dp+sp"),
    "DP+BS": ProcessToggles.parse("spm+xpm+dp+bs"),
    "all-HP": ProcessToggles.parse("spm+xpm+dp+sp+bs"),
    "all": ProcessToggles.all_on(),
}


@dataclass(frozen=True)
class SpectrumGrid:
    mode: str = "s"
    omega_max: float = TWO_PI * 2e9
    points: int = 201
    thetas: tuple[float, ...] = ()

    def omegas(self) -> np.ndarray:
        return np.linspace(0.0, self.omega_max, self.points)


def _five(value, key: str) -> tuple[float, ...]:
    if isinstance(value, (list, tuple)):
        if len(value) != 5:
            raise ConfigError(key, f"expected 5 per-mode values, got {len(value)}")
        return tuple(float(v) for v in value)
    return (float(value),) * 5


@dataclass(frozen=True)
class SystemConfig:
    """Full physical description of the dual-pumped ring."""

    ring_radius: float
    mode_frequencies: tuple[float, ...]
    loaded_q: tuple[float, ...]
    intrinsic_q: tuple[float, ...]
    lambda_coeff: float
    group_velocity_ring: float
    group_velocity_channel: tuple[float, ...]
    pump_total_power: float
    pump_split: float = 0.5
    detuning_mode: str = "hot_offset"
    detunings: tuple[float, float] = (0.0, 0.0)
    toggles: ProcessToggles = field(default_factory=ProcessToggles)
    coupling_phase: tuple[float, ...] = (0.0,) * 5
    spectrum: SpectrumGrid = field(default_factory=SpectrumGrid)
    ring_circumference: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ring_circumference", TWO_PI * self.ring_radius)
        for name in ("mode_frequencies", "loaded_q", "intrinsic_q", "group_velocity_channel", "coupling_phase"):
            object.__setattr__(self, name, _five(getattr(self, name), name))
        object.__setattr__(self, "detunings", tuple(float(d) for d in self.detunings))
        self.validate()

    def validate(self) -> None:
        if not self.ring_radius > 0:
            raise ConfigError("ring.radius", "must be positive")
        w = self.mode_frequencies
        if not all(math.isfinite(x) and x > 0 for x in w):
            raise ConfigError("modes", "frequencies must be finite and positive")
        if not all(a < b for a, b in zip(w, w[1:])):
            raise ConfigError("modes", "frequencies must be strictly increasing in the order m < p1 < s < p2 < n")
        for j, (ql, qi) in enumerate(zip(self.loaded_q, self.intrinsic_q)):
            if not ql > 0:
                raise ConfigError("q.loaded", f"mode {MODES[j]}: must be positive")
            if not qi >= ql:
                raise ConfigError("q.intrinsic", f"mode {MODES[j]}: intrinsic Q {qi:g} below loaded Q {ql:g}")
        if not self.lambda_coeff >= 0:
            raise ConfigError("lambda.coeff", "must be non-negative")
        if not self.group_velocity_ring > 0 or not all(v > 0 for v in self.group_velocity_channel):
            raise ConfigError("group_index", "group velocities must be positive")
        if not (self.pump_total_power >= 0 and math.isfinite(self.pump_total_power)):
            raise ConfigError("pump.total_power", "must be finite and non-negative")
        if not 0.0 <= self.pump_split <= 1.0:
            raise ConfigError("pump.split", "must lie in [0, 1]")
        if self.detuning_mode not in ("absolute", "hot_offset"):
            raise ConfigError("detuning.mode", f"must be 'absolute' or 'hot_offset', got {self.detuning_mode!r}")
        if len(self.detunings) != 2 or not all(math.isfinite(d) for d in self.detunings):
            raise ConfigError("detuning", "need two finite detunings")
        if self.spectrum.mode not in MODE_INDEX:
            raise ConfigError("spectrum.mode", f"must be one of {MODES}")
        if self.spectrum.points < 1 or not self.spectrum.omega_max >= 0:
            raise ConfigError("spectrum", "need points >= 1 and omega_max >= 0")

    # convenience views -------------------------------------------------
    @property
    def omega(self) -> np.ndarray:
        return np.asarray(self.mode_frequencies)

    @property
    def pump_powers(self) -> tuple[float, float]:
        p = self.pump_total_power
        return p * self.pump_split, p * (1.0 - self.pump_split)

    def replace(self, **changes) -> "SystemConfig":
        changes.pop("ring_circumference", None)
        return dataclasses.replace(self, **changes)

    def with_power_dbm(self, dbm: float) -> "SystemConfig":
        return self.replace(pump_total_power=dbm_to_watt(dbm))

    def with_hot_offsets(self, d1: float, d2: float) -> "SystemConfig":
        return self.replace(detuning_mode="hot_offset", detunings=(d1, d2))


@dataclass(frozen=True)
class ModeRates:
    """Per-mode decay and coupling rates (rad/s)."""

    gamma_bar: np.ndarray
    kappa_channel: np.ndarray
    kappa_phantom: np.ndarray
    coupling_phase: np.ndarray

    def coupling(self, j: int, group_velocity: float) -> complex:
        """Channel coupling constant gamma_J with |gamma_J|^2 / v_J = kappa_channel."""
        return math.sqrt(self.kappa_channel[j] * group_velocity) * complex(
            math.cos(self.coupling_phase[j]), math.sin(self.coupling_phase[j])
        )


def derive_rates(cfg: SystemConfig) -> ModeRates:
    """Decay rates from quality factors: Gamma_bar = omega / (2 Q_loaded)."""
    w = cfg.omega
    g_loaded = w / (2.0 * np.asarray(cfg.loaded_q))
    g_int = w / (2.0 * np.asarray(cfg.intrinsic_q))
    kappa_ph = 2.0 * g_int
    kappa_ch = 2.0 * (g_loaded - g_int)
    gamma_bar = (kappa_ch + kappa_ph) / 2.0
    arrays = [gamma_bar, kappa_ch, kappa_ph, np.asarray(cfg.coupling_phase, dtype=float)]
    for a in arrays:
        a.setflags(write=False)
    return ModeRates(*arrays)


# --------------------------------------------------------------------------
# config file ingestion
# --------------------------------------------------------------------------

# key -> (canonical quantity, multiplier into SI / rad/s)
_SCALAR_KEYS: dict[str, tuple[str, float]] = {
    "ring.radius_um": ("radius", 1e-6),
    "ring.radius_m": ("radius", 1.0),
    "ring.group_index": ("ng_ring", 1.0),
    "ring.group_velocity_m_s": ("v_ring", 1.0),
    "modes.lambda_s_nm": ("lambda_s", 1e-9),
    "modes.freq_s_thz": ("omega_s", TWO_PI * 1e12),
    "modes.omega_s_rad_s": ("omega_s", 1.0),
    "modes.fsr_thz": ("fsr", TWO_PI * 1e12),
    "modes.fsr_ghz": ("fsr", TWO_PI * 1e9),
    "modes.fsr_rad_s": ("fsr", 1.0),
    "modes.dispersion_mhz": ("dispersion", TWO_PI * 1e6),
    "modes.dispersion_rad_s": ("dispersion", 1.0),
    "lambda.coeff_hz": ("lambda", TWO_PI),
    "lambda.coeff_rad_s": ("lambda", 1.0),
    "pump.total_power_dbm": ("power_dbm", 1.0),
    "pump.total_power_mw": ("power", 1e-3),
    "pump.total_power_w": ("power", 1.0),
    "pump.split": ("split", 1.0),
    "detuning.p1_mhz": ("d1", TWO_PI * 1e6),
    "detuning.p1_rad_s": ("d1", 1.0),
    "detuning.p2_mhz": ("d2", TWO_PI * 1e6),
    "detuning.p2_rad_s": ("d2", 1.0),
    "spectrum.omega_max_ghz": ("omega_max", TWO_PI * 1e9),
    "spectrum.omega_max_rad_s": ("omega_max", 1.0),
}
_LIST_KEYS: dict[str, tuple[str, float]] = {
    "modes.frequencies_thz": ("omegas", TWO_PI * 1e12),
    "modes.omega_rad_s": ("omegas", 1.0),
    "q.loaded": ("q_loaded", 1.0),
    "q.intrinsic": ("q_int", 1.0),
    "channel.group_index": ("ng_channel", 1.0),
    "channel.group_velocity_m_s": ("v_channel", 1.0),
    "coupling.phase_rad": ("phase", 1.0),
    "spectrum.theta_rad": ("thetas", 1.0),
}
_OTHER_KEYS = {"detuning.mode", "spectrum.mode", "spectrum.points"} | {
    f"processes.{n}" for n in ProcessToggles.NAMES
}

# baseline parameter set, used for every key that a config file omits
DEFAULTS: dict[str, object] = {
    "radius": 113e-6,
    "lambda_s": 1551.9e-9,
    "fsr": TWO_PI * 0.2e12,
    "dispersion": TWO_PI * 3e6,
    "q_loaded": 2e5,
    "q_int": 1e6,
    "lambda": TWO_PI * 0.62,
    "power_dbm": 15.0,
    "split": 0.5,
    "d1": 0.0,
    "d2": 0.0,
    "phase": 0.0,
    "thetas": (),
}


def _flatten(tree: Mapping, prefix: str = "") -> dict[str, object]:
    flat: dict[str, object] = {}
    for k, v in tree.items():
        key = f"{prefix}{k}"
        if isinstance(v, Mapping):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


def loads_config(text: str) -> SystemConfig:
    """Parse config text (flat dotted keys, TOML syntax) into a ``SystemConfig``."""
    try:
        flat = _flatten(tomllib.loads(text))
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(None, f"parse error: {exc}") from exc
    return config_from_mapping(flat)


def load_config(path: str | Path) -> SystemConfig:
    return loads_config(Path(path).read_text(encoding="utf-8"))


def config_from_mapping(flat: Mapping[str, object]) -> SystemConfig:
    q: dict[str, object] = {}
    source: dict[str, str] = {}

    def put(quantity: str, value, key: str):
        if quantity in q:
            raise ConfigError(key, f"conflicts with {source[quantity]}")
        q[quantity] = value
        source[quantity] = key

    for key, raw in flat.items():
        if key in _SCALAR_KEYS:
            quantity, scale = _SCALAR_KEYS[key]
            if isinstance(raw, bool) or not isinstance(raw, (int, float)):
                raise ConfigError(key, f"expected a number, got {raw!r}")
            put(quantity, float(raw) * scale, key)
        elif key in _LIST_KEYS:
            quantity, scale = _LIST_KEYS[key]
            vals = raw if isinstance(raw, list) else [raw]
            if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                raise ConfigError(key, f"expected a number or list of numbers, got {raw!r}")
            scaled = [float(v) * scale for v in vals]
            put(quantity, scaled if isinstance(raw, list) else scaled[0], key)
        elif key in _OTHER_KEYS:
            put(key, raw, key)
        else:
            raise ConfigError(key, "unknown key")

    def get(name):
        return q.get(name, DEFAULTS.get(name))

    for quantity in ("q_loaded", "q_int", "ng_channel", "v_channel", "phase"):
        if isinstance(q.get(quantity), list) and len(q[quantity]) != 5:
            raise ConfigError(source[quantity], f"expected one value or 5 per-mode values, got {len(q[quantity])}")

    if "omegas" in q:
        if any(k in q for k in ("lambda_s", "omega_s", "fsr", "dispersion")):
            raise ConfigError(source["omegas"], "explicit frequencies conflict with (centre, fsr, dispersion) keys")
        if not isinstance(q["omegas"], list) or len(q["omegas"]) != 5:
            raise ConfigError(source["omegas"], "need exactly five frequencies")
        omegas = tuple(q["omegas"])
    else:
        if "omega_s" in q and "lambda_s" in q:
            raise ConfigError(source["omega_s"], f"conflicts with {source['lambda_s']}")
        omega_s = q["omega_s"] if "omega_s" in q else TWO_PI * C_LIGHT / get("lambda_s")
        omegas = expand_frequencies(omega_s, get("fsr"), get("dispersion"))

    radius = get("radius")
    if "v_ring" in q and "ng_ring" in q:
        raise ConfigError(source["v_ring"], f"conflicts with {source['ng_ring']}")
    if "v_ring" in q:
        v_ring = q["v_ring"]
    elif "ng_ring" in q:
        v_ring = C_LIGHT / q["ng_ring"]
    else:
        # free spectral range = v / circumference
        fsr_hz = (omegas[3] - omegas[1]) / (2 * TWO_PI)
        v_ring = fsr_hz * TWO_PI * radius
    if "v_channel" in q and "ng_channel" in q:
        raise ConfigError(source["v_channel"], f"conflicts with {source['ng_channel']}")
    if "v_channel" in q:
        v_channel = q["v_channel"]
    elif "ng_channel" in q:
        ng = q["ng_channel"]
        v_channel = [C_LIGHT / x for x in ng] if isinstance(ng, list) else C_LIGHT / ng
    else:
        v_channel = v_ring

    if "power" in q and "power_dbm" in q:
        raise ConfigError(source["power"], f"conflicts with {source['power_dbm']}")
    power = q["power"] if "power" in q else dbm_to_watt(get("power_dbm"))

    mode = q.get("detuning.mode", "hot_offset")
    if not isinstance(mode, str):
        raise ConfigError("detuning.mode", "must be a string")

    toggles = {}
    for n in ProcessToggles.NAMES:
        val = q.get(f"processes.{n}", True)
        if not isinstance(val, bool):
            raise ConfigError(f"processes.{n}", f"expected true/false, got {val!r}")
        toggles[n] = val

    points = q.get("spectrum.points", SpectrumGrid.points)
    if isinstance(points, bool) or not isinstance(points, int):
        raise ConfigError("spectrum.points", "expected an integer")
    smode = q.get("spectrum.mode", "s")
    thetas = get("thetas")
    spectrum = SpectrumGrid(
        mode=smode,
        omega_max=q.get("omega_max", SpectrumGrid.omega_max),
        points=points,
        thetas=tuple(thetas) if isinstance(thetas, (list, tuple)) else (thetas,),
    )
    return SystemConfig(
        ring_radius=radius,
        mode_frequencies=omegas,
        loaded_q=get("q_loaded"),
        intrinsic_q=get("q_int"),
        lambda_coeff=get("lambda"),
        group_velocity_ring=v_ring,
        group_velocity_channel=v_channel,
        pump_total_power=power,
        pump_split=get("split"),
        detuning_mode=mode,
        detunings=(get("d1"), get("d2")),
        toggles=ProcessToggles(**toggles),
        coupling_phase=get("phase"),
        spectrum=spectrum,
    )


def baseline_config() -> SystemConfig:
    """Baseline Si3N4 ring: R = 113 um, Q = 2e5 loaded, Lam = 2pi x 0.62 rad/s, 15 dBm total pump."""
    return config_from_mapping({})


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(type(v))


def config_to_mapping(cfg: SystemConfig) -> dict[str, object]:
    """Flat SI-unit key map; round-trips exactly through ``config_from_mapping``."""
    flat: dict[str, object] = {
        "ring.radius_m": cfg.ring_radius,
        "ring.group_velocity_m_s": cfg.group_velocity_ring,
        "modes.omega_rad_s": list(cfg.mode_frequencies),
        "q.loaded": list(cfg.loaded_q),
        "q.intrinsic": list(cfg.intrinsic_q),
        "channel.group_velocity_m_s": list(cfg.group_velocity_channel),
        "coupling.phase_rad": list(cfg.coupling_phase),
        "lambda.coeff_rad_s": cfg.lambda_coeff,
        "pump.total_power_w": cfg.pump_total_power,
        "pump.split": cfg.pump_split,
        "detuning.mode": cfg.detuning_mode,
        "detuning.p1_rad_s": cfg.detunings[0],
        "detuning.p2_rad_s": cfg.detunings[1],
    }
    flat.update({f"processes.{k}": v for k, v in cfg.toggles.as_dict().items()})
    flat.update(
        {
            "spectrum.mode": cfg.spectrum.mode,
            "spectrum.omega_max_rad_s": cfg.spectrum.omega_max,
            "spectrum.points": cfg.spectrum.points,
            "spectrum.theta_rad": list(cfg.spectrum.thetas),
        }
    )
    return flat


def dumps_config(cfg: SystemConfig) -> str:
    return "".join(f"{k} = {_toml_value(v)}\n" for k, v in config_to_mapping(cfg).items())

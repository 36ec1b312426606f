"""Experiment configuration: dataclasses, strict YAML loading and validation.

Unknown keys are rejected. All validation problems are collected and reported
together, each prefixed with its dotted field path.
"""

from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import yaml

from .channels import QubitParams
from .linalg import DomainError
from .protocol import BellLabel, Device, InputSpec, calibrate_bell_depolarizing
from .readout import (
    MODES,
    PHASE_PRESERVING,
    PHASE_SENSITIVE,
    DiscriminatorModel,
    calibrate_discriminator,
    excitation_probability_for_discard,
    false_reject_for_discard,
    perfect_discriminator,
)


class ConfigError(DomainError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass
class QubitConfig:
    label: str
    t1: float
    t2: float
    transition_frequency: float | None = None


@dataclass
class DeviceMetadata:
    """Sample constants carried for reference; they do not enter the simulation.

    Rates and couplings are given as x/2pi in Hz.
    """

    resonator_frequencies: list = field(default_factory=lambda: [7.657e9, 9.677e9])
    resonator_kappas: list = field(default_factory=lambda: [2.4e6, 2.5e6])
    bus_resonator_frequency: float = 8.7e9
    max_transition_frequencies: list = field(default_factory=lambda: [6.273e9, 7.373e9, 8.390e9])
    charging_energies: list = field(default_factory=lambda: [0.297e9, 0.303e9, 0.287e9])
    readout_couplings: list = field(default_factory=lambda: [0.260e9, 0.180e9, 0.240e9])
    bus_coupling: float = 0.2e9
    transverse_couplings: list = field(default_factory=lambda: [17e6, 13e6])


def _reference_qubits():
    return [
        QubitConfig("Q1", 2.6e-6, 1.8e-6, 5.114e9),
        QubitConfig("Q2", 2.4e-6, 1.4e-6, 6.004e9),
        QubitConfig("Q3", 2.0e-6, 1.2e-6, 6.766e9),
    ]


@dataclass
class DeviceConfig:
    qubits: list = field(default_factory=_reference_qubits)
    single_qubit_time: float = 12e-9
    cphase_q1q2_time: float = 29.5e-9
    cphase_q2q3_time: float = 37.3e-9
    readout_time: float = 250e-9
    q3_decoheres_during_readout: bool = True
    bell_fidelity: float = 0.93
    bell_depolarizing: float | None = None
    metadata: DeviceMetadata = field(default_factory=DeviceMetadata)


@dataclass
class ThermalConfig:
    phase_sensitive_discard: float = 0.15
    phase_preserving_discard: float = 0.30


@dataclass
class ReadoutConfig:
    phase_sensitive_target: float = 0.908
    phase_preserving_target: float = 0.807
    q3_target: float = 0.879
    integration_time: float = 250e-9
    q3_integration_time: float = 250e-9
    decay_during_readout: bool = True
    perfect: bool = False
    thermal: ThermalConfig = field(default_factory=ThermalConfig)
    models: dict | None = None


@dataclass
class InputConfig:
    name: str
    theta: float
    phi: float = 0.0


def _canonical_inputs():
    return [
        InputConfig("0", 0.0, 0.0),
        InputConfig("1", math.pi, 0.0),
        InputConfig("+", math.pi / 2, 0.0),
        InputConfig("-i", math.pi / 2, -math.pi / 2),
    ]


@dataclass
class ProtocolConfig:
    mode: str = PHASE_SENSITIVE
    remap: str = "phim"
    post_select: str | None = "00"
    inputs: list = field(default_factory=_canonical_inputs)
    shots_per_setting: int = 10_000
    bootstrap: int = 1000


@dataclass
class ExperimentConfig:
    seed: int = 0
    device: DeviceConfig = field(default_factory=DeviceConfig)
    readout: ReadoutConfig = field(default_factory=ReadoutConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)

    # -- derived objects -------------------------------------------------

    @property
    def remap(self) -> BellLabel:
        return BellLabel.parse(self.protocol.remap)

    @property
    def inputs(self) -> list[InputSpec]:
        return [InputSpec(i.theta, i.phi, i.name) for i in self.protocol.inputs]

    def to_device(self) -> Device:
        d = self.device
        qubits = tuple(QubitParams(q.t1, q.t2, q.transition_frequency, q.label) for q in d.qubits)
        dev = Device(
            qubits=qubits,
            single_qubit_time=d.single_qubit_time,
            cphase_q1q2_time=d.cphase_q1q2_time,
            cphase_q2q3_time=d.cphase_q2q3_time,
            readout_time=d.readout_time,
            q3_decoheres_during_readout=d.q3_decoheres_during_readout,
        )
        p = d.bell_depolarizing
        if p is None:
            p = _cached_bell_depolarizing(dev, d.bell_fidelity)
        return dataclasses.replace(dev, bell_depolarizing=p)

    def bell_t1s(self) -> tuple | None:
        if not self.readout.decay_during_readout or self.readout.perfect:
            return None
        return (self.device.qubits[0].t1, self.device.qubits[1].t1)

    def q3_t1s(self) -> tuple | None:
        if not self.readout.decay_during_readout or self.readout.perfect:
            return None
        return (self.device.qubits[2].t1,)

    def readout_model(self, which: str) -> DiscriminatorModel:
        """Discriminator for ``phase_sensitive``, ``phase_preserving`` or ``q3``."""
        r = self.readout
        if which not in MODES + ("q3",):
            raise DomainError(f"unknown readout model {which!r}")
        if r.models and which in r.models:
            return DiscriminatorModel.from_dict(r.models[which])
        if r.perfect:
            mode = PHASE_SENSITIVE if which == "q3" else which
            t = r.q3_integration_time if which == "q3" else r.integration_time
            return perfect_discriminator(mode, 1 if which == "q3" else 2, t)
        if which == "q3":
            key = (r.q3_target, PHASE_SENSITIVE, 1, self.q3_t1s(), r.q3_integration_time)
        else:
            target = r.phase_sensitive_target if which == PHASE_SENSITIVE else r.phase_preserving_target
            key = (target, which, 2, self.bell_t1s(), r.integration_time)
        return _cached_calibration(*key)

    def thermal_model(self) -> tuple[float, float]:
        """(per-qubit excitation probability, false-rejection probability) for the active mode."""
        th = self.readout.thermal
        p = excitation_probability_for_discard(th.phase_sensitive_discard)
        if self.protocol.mode == PHASE_PRESERVING:
            return p, false_reject_for_discard(th.phase_preserving_discard, p)
        return p, 0.0

    def to_dict(self) -> dict:
        return _to_plain(self)


@lru_cache(maxsize=None)
def _cached_calibration(target, mode, num_bits, t1s, integration_time) -> DiscriminatorModel:
    return calibrate_discriminator(target, mode, num_bits, t1s, integration_time)


@lru_cache(maxsize=None)
def _cached_bell_depolarizing(device: Device, target: float) -> float:
    return calibrate_bell_depolarizing(device, target)


# ---------------------------------------------------------------------------
# strict loading
# ---------------------------------------------------------------------------


def _to_plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _to_plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, list):
        return [_to_plain(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _to_plain(v) for k, v in obj.items()}
    return obj


_LIST_ITEMS = {("DeviceConfig", "qubits"): QubitConfig, ("ProtocolConfig", "inputs"): InputConfig}


def _coerce(value, hint, path: str, problems: list[str]):
    origin = typing.get_origin(hint)
    args = typing.get_args(hint)
    if origin is typing.Union or (origin is not None and type(None) in args):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(value, inner[0], path, problems)
    if dataclasses.is_dataclass(hint):
        return _build(hint, value, path, problems)
    if hint is bool:
        if not isinstance(value, bool):
            problems.append(f"{path}: expected true/false, got {value!r}")
        return value
    if hint is int:
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append(f"{path}: expected an integer, got {value!r}")
        return value
    if hint is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{path}: expected a number, got {value!r}")
            return value
        return float(value)
    if hint is str:
        if not isinstance(value, str):
            problems.append(f"{path}: expected a string, got {value!r}")
        return value
    return value


def _build(cls, data, path: str, problems: list[str]):
    if not isinstance(data, dict):
        problems.append(f"{path or '<root>'}: expected a mapping")
        return cls()
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            problems.append(f"{path + '.' if path else ''}{key}: unknown key")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in data:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                problems.append(f"{path + '.' if path else ''}{f.name}: required key missing")
            continue
        sub = f"{path + '.' if path else ''}{f.name}"
        item_cls = _LIST_ITEMS.get((cls.__name__, f.name))
        value = data[f.name]
        if item_cls is not None:
            if not isinstance(value, list):
                problems.append(f"{sub}: expected a list")
                continue
            kwargs[f.name] = [_build(item_cls, v, f"{sub}[{i}]", problems) for i, v in enumerate(value)]
        else:
            kwargs[f.name] = _coerce(value, hints[f.name], sub, problems)
    try:
        return cls(**kwargs)
    except TypeError as exc:  # missing required fields already reported
        problems.append(f"{path or '<root>'}: {exc}")
        return None


def validate(cfg: ExperimentConfig) -> list[str]:
    problems = []
    d = cfg.device
    if len(d.qubits) != 3:
        problems.append("device.qubits: exactly three qubits required")
    for i, q in enumerate(d.qubits):
        p = f"device.qubits[{i}]"
        if not (q.t1 > 0 and q.t2 > 0):
            problems.append(f"{p}: t1 and t2 must be positive")
        elif q.t2 > 2 * q.t1:
            problems.append(f"{p}: t2 must not exceed 2*t1")
    for name in ("single_qubit_time", "cphase_q1q2_time", "cphase_q2q3_time", "readout_time"):
        if not getattr(d, name) > 0:
            problems.append(f"device.{name}: durations must be positive")
    if not 0.25 < d.bell_fidelity <= 1:
        problems.append("device.bell_fidelity: must lie in (0.25, 1]")
    if d.bell_depolarizing is not None and not 0 <= d.bell_depolarizing <= 1:
        problems.append("device.bell_depolarizing: must lie in [0, 1]")
    r = cfg.readout
    for name in ("phase_sensitive_target", "phase_preserving_target", "q3_target"):
        if not 0.5 < getattr(r, name) < 1:
            problems.append(f"readout.{name}: fidelity targets must lie in (0.5, 1)")
    for name in ("integration_time", "q3_integration_time"):
        if not getattr(r, name) > 0:
            problems.append(f"readout.{name}: durations must be positive")
    for name in ("phase_sensitive_discard", "phase_preserving_discard"):
        if not 0 <= getattr(r.thermal, name) < 1:
            problems.append(f"readout.thermal.{name}: must lie in [0, 1)")
    if r.thermal.phase_preserving_discard < r.thermal.phase_sensitive_discard:
        problems.append("readout.thermal.phase_preserving_discard: cannot be below phase_sensitive_discard")
    if r.models is not None:
        for k, v in r.models.items():
            try:
                DiscriminatorModel.from_dict(v)
            except (DomainError, TypeError, KeyError, ValueError) as exc:
                problems.append(f"readout.models.{k}: {exc}")
    pr = cfg.protocol
    if pr.mode not in MODES:
        problems.append(f"protocol.mode: must be one of {MODES}")
    try:
        BellLabel.parse(pr.remap)
    except DomainError:
        problems.append("protocol.remap: must be one of phim, psim, phip, psip")
    if pr.post_select not in (None, "00", "01", "10", "11"):
        problems.append("protocol.post_select: must be a two-bit label or null")
    if pr.mode == PHASE_SENSITIVE and pr.post_select is None:
        problems.append("protocol.post_select: phase_sensitive readout only resolves 00; post-select on it")
    if not pr.inputs:
        problems.append("protocol.inputs: at least one input state required")
    if pr.shots_per_setting < 1:
        problems.append("protocol.shots_per_setting: must be at least 1")
    if pr.bootstrap < 0:
        problems.append("protocol.bootstrap: must be non-negative")
    if not 0 <= cfg.seed < 2**64:
        problems.append("seed: must be a 64-bit unsigned integer")
    return problems


def from_dict(data: dict) -> ExperimentConfig:
    problems: list[str] = []
    cfg = _build(ExperimentConfig, data or {}, "", problems)
    if problems:
        raise ConfigError(problems)
    problems = validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return from_dict(data or {})


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def reference_config(seed: int = 0, **protocol) -> ExperimentConfig:
    """Default device and readout targets; keyword arguments override protocol fields."""
    cfg = ExperimentConfig(seed=seed)
    cfg = dataclasses.replace(cfg, protocol=dataclasses.replace(cfg.protocol, **protocol))
    if problems := validate(cfg):
        raise ConfigError(problems)
    return cfg


def noiseless_config(seed: int = 0, **protocol) -> ExperimentConfig:
    """Infinite coherence, ideal Bell pair, perfect readout, no thermal population."""
    inf = math.inf
    cfg = ExperimentConfig(
        seed=seed,
        device=DeviceConfig(
            qubits=[QubitConfig(f"Q{i}", inf, inf) for i in (1, 2, 3)],
            bell_fidelity=1.0,
            bell_depolarizing=0.0,
        ),
        readout=ReadoutConfig(
            perfect=True,
            decay_during_readout=False,
            thermal=ThermalConfig(0.0, 0.0),
        ),
    )
    cfg = dataclasses.replace(cfg, protocol=dataclasses.replace(cfg.protocol, **protocol))
    if problems := validate(cfg):
        raise ConfigError(problems)
    return cfg

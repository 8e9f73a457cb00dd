"""Simulation configuration: parsing, validation, defaults."""

import dataclasses
import json
from dataclasses import dataclass, field

from ..core import EpochConfig
from ..registry import DepositPolicy


class ConfigParseError(Exception):
    pass


class ConfigValidationError(Exception):
    """Invalid configuration value; `key` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key
        self.message = message


KNOWN_ACTIONS = {
    "publish",
    "publish_multi",
    "spam_pair",
    "flood_copies",
    "epoch_probe",
    "forge_flood",
    "withdraw",
}

TOPOLOGY_KINDS = {"complete", "ring", "random"}
DELAY_KINDS = {"fixed", "uniform"}


def _coerce(data: dict, key: str, kind, default):
    value = data.get(key, default)
    if isinstance(value, bool):
        raise ConfigValidationError(key, "boolean is not a number")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigValidationError(key, f"expected {kind.__name__}, got {value!r}")


@dataclass(frozen=True)
class TopologySpec:
    kind: str = "random"
    avg_degree: float = 4.0

    @classmethod
    def from_dict(cls, data: dict) -> "TopologySpec":
        return cls(
            kind=data.get("kind", "random"),
            avg_degree=float(data.get("avg_degree", 4.0)),
        )

    def to_dict(self) -> dict:
        if self.kind == "random":
            return {"kind": self.kind, "avg_degree": self.avg_degree}
        return {"kind": self.kind}


@dataclass(frozen=True)
class DelaySpec:
    """Per-link delay distribution in seconds: fixed value or uniform range."""

    kind: str = "uniform"
    lo: float = 0.05
    hi: float = 0.3

    @classmethod
    def from_dict(cls, data: dict) -> "DelaySpec":
        kind = data.get("kind", "uniform")
        if kind == "fixed":
            value = float(data.get("value", 0.1))
            return cls(kind="fixed", lo=value, hi=value)
        return cls(kind=kind, lo=float(data.get("lo", 0.05)), hi=float(data.get("hi", 0.3)))

    def to_dict(self) -> dict:
        if self.kind == "fixed":
            return {"kind": "fixed", "value": self.lo}
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}

    def sample(self, rng) -> float:
        if self.kind == "fixed":
            return self.lo
        return rng.uniform(self.lo, self.hi)


@dataclass(frozen=True)
class ScriptEntry:
    time: float
    actor: str
    action: str
    params: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ScriptEntry":
        try:
            return cls(
                time=float(data["time"]),
                actor=str(data["actor"]),
                action=str(data["action"]),
                params=dict(data.get("params", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigValidationError("script", f"bad entry {data!r}: {exc}")

    def to_dict(self) -> dict:
        return {"time": self.time, "actor": self.actor, "action": self.action, "params": self.params}


_TOP_LEVEL_KEYS = {
    "seed",
    "peers",
    "topology",
    "delay",
    "clock_offset",
    "epoch",
    "deposit",
    "commit_window",
    "confirmation_latency",
    "submit_jitter",
    "sync_interval",
    "watch_interval",
    "start_time",
    "duration",
    "tree_depth",
    "extra_identities",
    "mute_detectors",
    "copiers",
    "script",
    "scenario",
    "scenario_name",
}


@dataclass(frozen=True)
class SimConfig:
    seed: int = 0
    peers: int = 20
    topology: TopologySpec = TopologySpec()
    delay: DelaySpec = DelaySpec()
    clock_offset: float = 2.0
    epoch: EpochConfig = EpochConfig(T=30, network_delay=6.0, clock_asynchrony=4.0)
    deposit: DepositPolicy = DepositPolicy()
    commit_window: int = 100
    confirmation_latency: float = 0.5
    submit_jitter: float = 0.05
    sync_interval: float | None = None
    watch_interval: float = 0.25
    start_time: float = 3_000_000.0
    duration: float = 60.0
    tree_depth: int = 20
    extra_identities: dict = field(default_factory=dict)
    mute_detectors: tuple = ()
    copiers: tuple = ()
    script: tuple = ()
    scenario_name: str = "custom"

    @property
    def effective_sync_interval(self) -> float:
        if self.sync_interval is not None:
            return self.sync_interval
        return self.epoch.T / 2

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        for key in data:
            if key not in _TOP_LEVEL_KEYS:
                raise ConfigValidationError(key, "unknown configuration key")
        epoch_data = data.get("epoch", {})
        deposit_data = data.get("deposit", {})
        epoch_t = _coerce(epoch_data, "T", int, 30)
        if epoch_t < 1:
            raise ConfigValidationError("T", "epoch length must be a positive integer")
        network_delay = _coerce(epoch_data, "network_delay", float, 6.0)
        if network_delay < 0:
            raise ConfigValidationError("network_delay", "must be >= 0")
        clock_asynchrony = _coerce(epoch_data, "clock_asynchrony", float, 4.0)
        if clock_asynchrony < 0:
            raise ConfigValidationError("clock_asynchrony", "must be >= 0")
        epoch = EpochConfig(
            T=epoch_t, network_delay=network_delay, clock_asynchrony=clock_asynchrony
        )
        try:
            deposit = DepositPolicy(
                v=int(deposit_data.get("v", 100)),
                f=int(deposit_data.get("f", 10)),
                s=int(deposit_data.get("s", 90)),
                reward_fraction=float(deposit_data.get("reward_fraction", 1.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigValidationError("deposit", str(exc))
        try:
            config = cls(
                seed=int(data.get("seed", 0)),
                peers=int(data.get("peers", 20)),
                topology=TopologySpec.from_dict(data.get("topology", {})),
                delay=DelaySpec.from_dict(data.get("delay", {})),
                clock_offset=float(data.get("clock_offset", 2.0)),
                epoch=epoch,
                deposit=deposit,
                commit_window=int(data.get("commit_window", 100)),
                confirmation_latency=float(data.get("confirmation_latency", 0.5)),
                submit_jitter=float(data.get("submit_jitter", 0.05)),
                sync_interval=(
                    None if data.get("sync_interval") is None else float(data["sync_interval"])
                ),
                watch_interval=float(data.get("watch_interval", 0.25)),
                start_time=float(data.get("start_time", 3_000_000.0)),
                duration=float(data.get("duration", 60.0)),
                tree_depth=int(data.get("tree_depth", 20)),
                extra_identities={
                    str(k): int(v) for k, v in data.get("extra_identities", {}).items()
                },
                mute_detectors=tuple(data.get("mute_detectors", ())),
                copiers=tuple(data.get("copiers", ())),
                script=tuple(ScriptEntry.from_dict(e) for e in data.get("script", ())),
                scenario_name=str(data.get("scenario_name", data.get("scenario", "custom"))),
            )
        except ConfigValidationError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigValidationError("config", str(exc))
        config.validate()
        return config

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "peers": self.peers,
            "topology": self.topology.to_dict(),
            "delay": self.delay.to_dict(),
            "clock_offset": self.clock_offset,
            "epoch": {
                "T": self.epoch.T,
                "network_delay": self.epoch.network_delay,
                "clock_asynchrony": self.epoch.clock_asynchrony,
            },
            "deposit": {
                "v": self.deposit.v,
                "f": self.deposit.f,
                "s": self.deposit.s,
                "reward_fraction": self.deposit.reward_fraction,
            },
            "commit_window": self.commit_window,
            "confirmation_latency": self.confirmation_latency,
            "submit_jitter": self.submit_jitter,
            "sync_interval": self.sync_interval,
            "watch_interval": self.watch_interval,
            "start_time": self.start_time,
            "duration": self.duration,
            "tree_depth": self.tree_depth,
            "extra_identities": dict(self.extra_identities),
            "mute_detectors": list(self.mute_detectors),
            "copiers": list(self.copiers),
            "script": [entry.to_dict() for entry in self.script],
            "scenario_name": self.scenario_name,
        }

    def validate(self) -> None:
        if not 0 <= self.seed < 1 << 64:
            raise ConfigValidationError("seed", "must fit in 64 bits")
        if self.peers < 2:
            raise ConfigValidationError("peers", "need at least 2 peers")
        if self.clock_offset < 0:
            raise ConfigValidationError("clock_offset", "offset half-width must be >= 0")
        if self.commit_window < 1:
            raise ConfigValidationError("commit_window", "must be >= 1")
        if self.confirmation_latency < 0:
            raise ConfigValidationError("confirmation_latency", "must be >= 0")
        if self.submit_jitter < 0:
            raise ConfigValidationError("submit_jitter", "must be >= 0")
        if self.sync_interval is not None and self.sync_interval <= 0:
            raise ConfigValidationError("sync_interval", "must be > 0")
        if self.watch_interval <= 0:
            raise ConfigValidationError("watch_interval", "must be > 0")
        if self.start_time < 0:
            raise ConfigValidationError("start_time", "must be >= 0")
        if self.duration < 0:
            raise ConfigValidationError("duration", "must be >= 0")
        if not 1 <= self.tree_depth <= 32:
            raise ConfigValidationError("tree_depth", "must be between 1 and 32")
        valid_actors = {f"p{i}" for i in range(self.peers)}
        for actor, extra in self.extra_identities.items():
            if actor not in valid_actors:
                raise ConfigValidationError("extra_identities", f"unknown actor {actor!r}")
            if extra < 0:
                raise ConfigValidationError("extra_identities", "count must be >= 0")
        for label, actors in (("mute_detectors", self.mute_detectors), ("copiers", self.copiers)):
            for actor in actors:
                if actor not in valid_actors:
                    raise ConfigValidationError(label, f"unknown actor {actor!r}")
        for i, entry in enumerate(self.script):
            where = f"script[{i}]"
            if entry.time < 0:
                raise ConfigValidationError(f"{where}.time", "must be >= 0")
            if entry.actor not in valid_actors:
                raise ConfigValidationError(f"{where}.actor", f"unknown actor {entry.actor!r}")
            if entry.action not in KNOWN_ACTIONS:
                raise ConfigValidationError(f"{where}.action", f"unknown action {entry.action!r}")

    def with_overrides(self, **changes) -> "SimConfig":
        config = dataclasses.replace(self, **changes)
        config.validate()
        return config


def parse_data(text: str) -> dict:
    """Raw JSON text to a dict, or ConfigParseError."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigParseError("top level must be an object")
    return data


def parse_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}")
    return parse_data(text)

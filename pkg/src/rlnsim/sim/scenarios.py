"""Canned scenario configurations: honest traffic, spam, and the attack stories."""

from .config import ConfigValidationError, SimConfig


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


def _build(name: str, defaults: dict, overrides: dict | None) -> SimConfig:
    data = _merge(defaults, dict(overrides or {}))
    data["scenario_name"] = name
    data.pop("scenario", None)
    return SimConfig.from_dict(data)


def scenario_honest_baseline(overrides: dict | None = None) -> SimConfig:
    """A few peers publish; everything should relay everywhere."""
    overrides = dict(overrides or {})
    publishers = int(overrides.pop("publishers", 2))
    peers = int(overrides.get("peers", 10))
    if not 1 <= publishers < peers:
        raise ConfigValidationError("publishers", "need 1 <= publishers < peers")
    script = [
        {
            "time": 5.0 + i,
            "actor": f"p{i}",
            "action": "publish",
            "params": {"text": f"hello from peer {i}"},
        }
        for i in range(publishers)
    ]
    defaults = {
        "peers": peers,
        "topology": {"kind": "complete"},
        "duration": 20.0,
        "script": script,
    }
    return _build("honest_baseline", defaults, overrides)


def scenario_duplicate_flood(overrides: dict | None = None) -> SimConfig:
    """One legitimate bundle pushed repeatedly down every link."""
    overrides = dict(overrides or {})
    copies = int(overrides.pop("copies", 3))
    defaults = {
        "peers": 10,
        "topology": {"kind": "complete"},
        "duration": 20.0,
        "script": [
            {
                "time": 5.0,
                "actor": "p0",
                "action": "flood_copies",
                "params": {"text": "echo echo", "copies": copies},
            }
        ],
    }
    return _build("duplicate_flood", defaults, overrides)


def scenario_spammer(overrides: dict | None = None) -> SimConfig:
    """One member signs two messages in one epoch; detectors race to slash."""
    overrides = dict(overrides or {})
    identical = bool(overrides.pop("identical", False))
    withdraw_early = bool(overrides.pop("withdraw_early", False))
    text2 = "spam one" if identical else "spam two"
    script = [
        {
            "time": 5.0,
            "actor": "p0",
            "action": "spam_pair",
            "params": {"text1": "spam one", "text2": text2},
        }
    ]
    if withdraw_early:
        script.append({"time": 5.02, "actor": "p0", "action": "withdraw", "params": {}})
    defaults = {
        "peers": 20,
        "topology": {"kind": "random", "avg_degree": 4},
        "duration": 30.0,
        "script": script,
    }
    return _build("spammer", defaults, overrides)


def scenario_spammer_duplicate(overrides: dict | None = None) -> SimConfig:
    overrides = dict(overrides or {})
    overrides["identical"] = True
    config = scenario_spammer(overrides)
    return config.with_overrides(scenario_name="spammer_duplicate")


def scenario_early_withdrawal(overrides: dict | None = None) -> SimConfig:
    overrides = dict(overrides or {})
    overrides["withdraw_early"] = True
    config = scenario_spammer(overrides)
    return config.with_overrides(scenario_name="early_withdrawal")


def scenario_stale_epoch(overrides: dict | None = None) -> SimConfig:
    """A peer back-fills old epochs; only the in-window bundle should travel."""
    overrides = dict(overrides or {})
    depth_back = int(overrides.pop("depth_back", 4))
    if depth_back < 2:
        raise ConfigValidationError("depth_back", "must be >= 2 to include a stale epoch")
    offsets = [-j for j in range(depth_back, 0, -1)]
    defaults = {
        "peers": 10,
        "topology": {"kind": "ring"},
        "delay": {"kind": "fixed", "value": 0.1},
        "clock_offset": 0.0,
        "duration": 15.0,
        "script": [
            {
                "time": 5.0,
                "actor": "p0",
                "action": "epoch_probe",
                "params": {"offsets": offsets + [2], "text_prefix": "backfill "},
            }
        ],
    }
    return _build("stale_epoch", defaults, overrides)


def scenario_invalid_proof(overrides: dict | None = None) -> SimConfig:
    """Forged-proof flood beside honest traffic."""
    overrides = dict(overrides or {})
    forgeries = int(overrides.pop("forgeries", 10))
    defaults = {
        "peers": 20,
        "topology": {"kind": "random", "avg_degree": 4},
        "duration": 30.0,
        "script": [
            {
                "time": 5.0,
                "actor": "p5",
                "action": "forge_flood",
                "params": {"count": forgeries},
            },
            {"time": 6.0, "actor": "p1", "action": "publish", "params": {"text": "still here"}},
            {"time": 7.0, "actor": "p2", "action": "publish", "params": {"text": "all good"}},
        ],
    }
    return _build("invalid_proof", defaults, overrides)


def scenario_slash_race(overrides: dict | None = None) -> SimConfig:
    """Two detectors and a copycat race for one bounty."""
    overrides = dict(overrides or {})
    defaults = {
        "peers": 4,
        "topology": {"kind": "complete"},
        "duration": 30.0,
        "confirmation_latency": 0.4,
        "submit_jitter": 0.1,
        "watch_interval": 0.15,
        "copiers": ["p3"],
        "mute_detectors": ["p3"],
        "script": [
            {
                "time": 5.0,
                "actor": "p0",
                "action": "spam_pair",
                "params": {"text1": "race a", "text2": "race b"},
            }
        ],
    }
    return _build("slash_race", defaults, overrides)


def scenario_multi_registration(overrides: dict | None = None) -> SimConfig:
    """One actor buys k identities and uses the aggregate quota; a known gap."""
    overrides = dict(overrides or {})
    identities = int(overrides.pop("identities", 3))
    spam_pair = bool(overrides.pop("spam_pair", False))
    if identities < 1:
        raise ConfigValidationError("identities", "must be >= 1")
    script = [
        {
            "time": 5.0,
            "actor": "p0",
            "action": "publish_multi",
            "params": {"texts": [f"quota slot {i + 1} of {identities}" for i in range(identities)]},
        }
    ]
    if spam_pair:
        script.append(
            {
                "time": 8.0,
                "actor": "p0",
                "action": "spam_pair",
                "params": {"text1": "burst a", "text2": "burst b"},
            }
        )
    defaults = {
        "peers": 8,
        "topology": {"kind": "complete"},
        "duration": 20.0,
        "extra_identities": {"p0": identities - 1},
        "script": script,
    }
    return _build("multi_registration", defaults, overrides)


SCENARIOS = {
    "honest_baseline": scenario_honest_baseline,
    "duplicate_flood": scenario_duplicate_flood,
    "spammer": scenario_spammer,
    "spammer_duplicate": scenario_spammer_duplicate,
    "early_withdrawal": scenario_early_withdrawal,
    "stale_epoch": scenario_stale_epoch,
    "invalid_proof": scenario_invalid_proof,
    "slash_race": scenario_slash_race,
    "multi_registration": scenario_multi_registration,
}


def from_data(data: dict) -> SimConfig:
    """Config dict to SimConfig, expanding a scenario name when present."""
    if "scenario" in data:
        payload = dict(data)
        name = payload.pop("scenario")
        builder = SCENARIOS.get(name)
        if builder is None:
            known = ", ".join(sorted(SCENARIOS))
            raise ConfigValidationError("scenario", f"unknown scenario {name!r} (known: {known})")
        if "script" in payload:
            raise ConfigValidationError(
                "script", "a scenario config may not also carry an explicit script"
            )
        return builder(payload)
    return SimConfig.from_dict(data)

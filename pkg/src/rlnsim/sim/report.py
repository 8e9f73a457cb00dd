"""Simulation reports: a stable machine form, a human rendering, and a differ.

The machine form is canonical JSON (sorted keys, fixed separators), so
identical runs produce identical bytes and a diff of two reports is
meaningful.
"""

import hashlib
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class SimReport:
    data: dict

    def to_machine_text(self) -> str:
        return json.dumps(self.data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_machine_text(cls, text: str) -> "SimReport":
        return cls(data=json.loads(text))

    def to_human_text(self) -> str:
        d = self.data
        lines = [
            "simulation report",
            f"  scenario: {d['scenario']}",
            f"  seed: {d['seed']}  peers: {d['peers']}  links: {d['links']}"
            f"  duration: {d['duration']}s",
            f"  config digest: {d['config_digest'][:16]}",
            "decisions:",
        ]
        for kind in sorted(d["decisions"]):
            lines.append(f"  {kind:<20} {d['decisions'][kind]}")
        lines.append(f"bundles tracked: {len(d['bundles'])}")
        for bid in sorted(d["bundles"]):
            info = d["bundles"][bid]
            others = sum(1 for name in info["received_by"] if name != info["origin"])
            lines.append(
                f"  {bid[:18]} kind={info['kind']} origin={info['origin']}"
                f" received={others}/{d['peers'] - 1}"
                f" beyond_neighbors={info['beyond_neighbors']}"
            )
        if d["slashes"]:
            lines.append("slashes:")
            for s in d["slashes"]:
                lines.append(
                    f"  {s['slasher']} claimed {s['sk'][:12]} (owner {s['owner']})"
                    f" reward={s['reward']}"
                )
        else:
            lines.append("slashes: none")
        if d["escapes"]:
            lines.append("escapes:")
            for e in d["escapes"]:
                lines.append(
                    f"  {e['actor']} withdrew {e['refund']} before any reveal landed"
                )
        else:
            lines.append("escapes: none")
        reg = d["registry"]
        ok = "ok" if reg["conservation_ok"] else "VIOLATED"
        lines.append(
            f"registry: conservation {ok}; fee_pool={reg['fee_pool']}"
            f" rewards={reg['conservation']['rewards_total']}"
            f" refunds={reg['conservation']['refunds_total']}"
            f" nil_slots={reg['nil_slots']}"
        )
        if reg["balances"]:
            pairs = ", ".join(f"{a}={reg['balances'][a]}" for a in sorted(reg["balances"]))
            lines.append(f"  balances: {pairs}")
        agree = "yes" if d["roots_agree"] else "NO"
        lines.append(f"roots agree with oracle: {agree}")
        if d["script_errors"]:
            lines.append("script errors:")
            for err in d["script_errors"]:
                lines.append(f"  {err['actor']} {err['action']}: {err['error']}")
        return "\n".join(lines) + "\n"


def build_report(sim, until: float) -> SimReport:
    config = sim.config
    n = config.peers
    stats = sim.stats

    bundles = {}
    for bid, info in stats["bundles"].items():
        origin_idx = sim.index[info["origin"]]
        neighbor_names = {sim.names[j] for j in sim.adjacency[origin_idx]}
        received = set(info["received_by"])
        beyond = received - neighbor_names - {info["origin"]}
        bundles[bid] = {
            "origin": info["origin"],
            "kind": info["kind"],
            "epoch": info["epoch"],
            "received_by": sorted(received),
            "relayed_by": sorted(info["relayed_by"]),
            "relay_count": info["relay_count"],
            "coverage": len(received - {info["origin"]}) / (n - 1),
            "beyond_neighbors": len(beyond),
        }

    per_actor_epoch: dict[str, dict[str, int]] = {}
    for msg in stats["messages"]:
        epochs = per_actor_epoch.setdefault(msg["actor"], {})
        key = str(msg["epoch"])
        epochs[key] = epochs.get(key, 0) + 1
    registrations = {name: len(pairs) for name, pairs in sim.identities.items()}

    slashed_sks = {s["sk"] for s in stats["slashes"]}
    detected_sks = {d["sk"] for d in stats["detections"]}
    escapes = [
        {
            "actor": w["actor"],
            "sk": w["sk"],
            "refund": w["refund"],
            "withdraw_time_us": w["time_us"],
            "detected": w["sk"] in detected_sks,
        }
        for w in stats["withdrawals"]
        if w["sk"] in detected_sks and w["sk"] not in slashed_sks
    ]

    registry = sim.registry
    totals = registry.conservation_totals()
    oracle = registry.oracle_root()
    data = {
        "schema": 1,
        "scenario": config.scenario_name,
        "seed": config.seed,
        "peers": n,
        "links": sim.link_count(),
        "topology": config.topology.to_dict(),
        "duration": until,
        "config_digest": hashlib.sha256(
            json.dumps(config.to_dict(), sort_keys=True).encode()
        ).hexdigest(),
        "decisions": dict(stats["decisions"]),
        "bundles": bundles,
        "messages": list(stats["messages"]),
        "aggregate": {
            "messages_per_actor_per_epoch": per_actor_epoch,
            "registrations": registrations,
            "registration_cost": {
                name: count * config.deposit.v for name, count in registrations.items()
            },
        },
        "detections": list(stats["detections"]),
        "slashes": list(stats["slashes"]),
        "reveal_failures": list(stats["reveal_failures"]),
        "withdrawals": list(stats["withdrawals"]),
        "escapes": escapes,
        "script_errors": list(stats["script_errors"]),
        "registry": {
            "conservation": totals,
            "conservation_ok": registry.conservation_holds(),
            "balances": dict(registry.balances),
            "fee_pool": registry.fee_pool,
            "active_members": sum(1 for pk in registry.members if pk is not None),
            "nil_slots": [i for i, pk in enumerate(registry.members) if pk is None],
            "tx_count": len(registry.tx_log),
            "failed_tx_count": sum(1 for r in registry.tx_log if r.status == "failed"),
        },
        "roots_agree": all(peer.tree.root == oracle for peer in sim.peers),
        "final_root": f"{oracle:#066x}",
    }
    return SimReport(data=data)


def reports_equal(a: SimReport, b: SimReport) -> bool:
    return a.data == b.data


def diff_reports(a: SimReport, b: SimReport) -> list[str]:
    """Paths at which the two reports disagree, depth-first, stable order."""
    out: list[str] = []

    def walk(path: str, left, right) -> None:
        if isinstance(left, dict) and isinstance(right, dict):
            for key in sorted(set(left) | set(right)):
                sub = f"{path}.{key}" if path else str(key)
                if key not in left:
                    out.append(f"{sub}: only in second")
                elif key not in right:
                    out.append(f"{sub}: only in first")
                else:
                    walk(sub, left[key], right[key])
        elif isinstance(left, list) and isinstance(right, list):
            if len(left) != len(right):
                out.append(f"{path}: length {len(left)} != {len(right)}")
            else:
                for i, (lv, rv) in enumerate(zip(left, right)):
                    walk(f"{path}[{i}]", lv, rv)
        elif left != right:
            out.append(f"{path}: {left!r} != {right!r}")

    walk("", a.data, b.data)
    return out

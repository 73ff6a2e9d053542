"""Scenario configuration: schema, JSON loading, and validation.

A scenario is one JSON document::

    {
      "name": "...", "unit": "rate"|"volume", "seed": 42,
      "nodes": ["A", "B"],
      "links": [{"id": "AB", "capacity": 50, "subscriber_load": 0, "price": 10}],
      "wfps":  [{"id": "w1", "kind": "establishment", "capacity": 10, "min_profit": 5},
                {"id": "p1", "kind": "individual", "quota": 200, "unused": 200,
                 "fee": 1000, "txn_cap": 10, "price": 31}],
      "users": [{"id": "u", "wfp": "w1", "path": ["AB"], "count": 10, ...}],
      "solver": {"sigma0": 1.0, "epsilon": 1e-6, "max_iters": 100000},
      "sharing": {"alpha": 1.0, "beta": 2.5},
      "mode":   {"kind": "sweep"|"equilibrium"|"quota_sweep"|"ceiling_sweep", ...}
    }

A user entry with ``count`` expands into that many identical profiles with
suffixed ids.  ``validate_scenario`` returns the full list of violations as
strings -- it never raises -- so the CLI can print every problem at once.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .model import LinkState, Topology, Unit, UserProfile, WfpAccount, WfpKind
from .pricing import SolverConfig
from .sharing import SharingParams


class ConfigError(ValueError):
    """Malformed scenario document (wrong shape, not wrong numbers)."""


@dataclass(frozen=True)
class SweepMode:
    """Exogenous price ramp for one side of the market.

    The swept party's price is set to start + t * step at each increment,
    bypassing its solver; the other party still takes one dual step per
    increment.  ``user_growth`` users join at every increment after the first,
    and allocations are either an equal split of provider capacity or each
    user's best response.
    """

    swept_party: str  # "isp" | "wfp"
    start: float
    step: float = 1.0
    count: int = 300
    user_growth: int = 0
    allocation: str = "equal"  # "equal" | "best_response"


@dataclass(frozen=True)
class EquilibriumMode:
    """Tick-driven runs where both sides solve for prices each tick."""

    ticks: int
    user_growth: int = 0
    billing_cycle_ticks: int = 0
    subscriber_loads: dict[str, tuple[float, ...]] = field(default_factory=dict)


@dataclass(frozen=True)
class QuotaSweepMode:
    """Individual-provider sweep over remaining quota at fixed posted prices."""

    usage_steps: int = 20
    txn_volume: float = 10.0


@dataclass(frozen=True)
class CeilingSweepMode:
    """Price sweep repeated at several quota-usage levels (share-ceiling study)."""

    usage_levels: tuple[float, ...] = (0.0, 0.25, 0.5, 0.75)
    price_start: float = 0.0
    price_stop: float = 100.0
    price_step: float = 1.0
    txn_volume: float = 10.0


Mode = SweepMode | EquilibriumMode | QuotaSweepMode | CeilingSweepMode


@dataclass
class ScenarioConfig:
    """Everything a run needs: market population, solver knobs, and the mode."""

    name: str
    unit: Unit = Unit.RATE
    seed: int = 0
    topology: Topology = field(default_factory=Topology)
    wfps: list[WfpAccount] = field(default_factory=list)
    wfp_prices: dict[str, float] = field(default_factory=dict)
    users: list[UserProfile] = field(default_factory=list)
    solver: SolverConfig = field(default_factory=SolverConfig)
    sharing: SharingParams = field(default_factory=SharingParams)
    mode: Mode = field(default_factory=lambda: EquilibriumMode(ticks=1))
    solve_isp: bool = True
    lambda0: float = 0.0
    notes: str = ""


def _require(mapping: dict, key: str, where: str) -> Any:
    if key not in mapping:
        raise ConfigError(f"{where}: missing required key {key!r}")
    return mapping[key]


def _parse_user(entry: dict) -> list[UserProfile]:
    base_id = str(_require(entry, "id", "user"))
    count = int(entry.get("count", 1))
    if count < 1:
        raise ConfigError(f"user {base_id!r}: count must be at least 1")
    profile = UserProfile(
        id=base_id,
        weight=float(entry.get("weight", 1.0)),
        tx_power=float(entry.get("tx_power", 1.0)),
        channel_gain2=float(entry.get("channel_gain2", 1.0)),
        noise_var=float(entry.get("noise_var", 1.0)),
        band=float(entry.get("band", 1.0)),
        budget=float(entry.get("budget", 100.0)),
        x_min=float(entry.get("x_min", 1e-3)),
        x_max=float(entry.get("x_max", 100.0)),
        path=tuple(entry.get("path", ())),
        wfp=str(entry.get("wfp", "")),
    )
    if count == 1:
        return [profile]
    return [replace(profile, id=f"{base_id}{i:03d}") for i in range(1, count + 1)]


def _parse_mode(entry: dict) -> Mode:
    kind = str(_require(entry, "kind", "mode"))
    if kind == "sweep":
        return SweepMode(
            swept_party=str(_require(entry, "swept_party", "mode")),
            start=float(_require(entry, "start", "mode")),
            step=float(entry.get("step", 1.0)),
            count=int(entry.get("count", 300)),
            user_growth=int(entry.get("user_growth", 0)),
            allocation=str(entry.get("allocation", "equal")),
        )
    if kind == "equilibrium":
        loads = {
            str(lid): tuple(float(v) for v in series)
            for lid, series in entry.get("subscriber_loads", {}).items()
        }
        return EquilibriumMode(
            ticks=int(_require(entry, "ticks", "mode")),
            user_growth=int(entry.get("user_growth", 0)),
            billing_cycle_ticks=int(entry.get("billing_cycle_ticks", 0)),
            subscriber_loads=loads,
        )
    if kind == "quota_sweep":
        return QuotaSweepMode(
            usage_steps=int(entry.get("usage_steps", 20)),
            txn_volume=float(entry.get("txn_volume", 10.0)),
        )
    if kind == "ceiling_sweep":
        return CeilingSweepMode(
            usage_levels=tuple(float(v) for v in entry.get("usage_levels", (0.0, 0.25, 0.5, 0.75))),
            price_start=float(entry.get("price_start", 0.0)),
            price_stop=float(entry.get("price_stop", 100.0)),
            price_step=float(entry.get("price_step", 1.0)),
            txn_volume=float(entry.get("txn_volume", 10.0)),
        )
    raise ConfigError(f"mode: unknown kind {kind!r}")


def scenario_from_dict(doc: dict) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed JSON document.

    Shape problems (missing keys, unknown enum values) raise ConfigError;
    numeric problems are left for :func:`validate_scenario` to report.
    """
    if not isinstance(doc, dict):
        raise ConfigError("scenario document must be a JSON object")

    links = {}
    for entry in doc.get("links", []):
        lid = str(_require(entry, "id", "link"))
        links[lid] = LinkState(
            id=lid,
            capacity=float(_require(entry, "capacity", f"link {lid}")),
            subscriber_load=float(entry.get("subscriber_load", 0.0)),
            price=float(entry.get("price", 0.0)),
        )
    topology = Topology(nodes=tuple(doc.get("nodes", ())), links=links)

    wfps: list[WfpAccount] = []
    wfp_prices: dict[str, float] = {}
    for entry in doc.get("wfps", []):
        wid = str(_require(entry, "id", "wfp"))
        kind_raw = str(_require(entry, "kind", f"wfp {wid}"))
        try:
            kind = WfpKind(kind_raw)
        except ValueError as exc:
            raise ConfigError(f"wfp {wid}: unknown kind {kind_raw!r}") from exc
        quota = float(entry.get("quota", 0.0))
        wfps.append(
            WfpAccount(
                id=wid,
                kind=kind,
                capacity=float(entry.get("capacity", 0.0)),
                quota=quota,
                unused=float(entry.get("unused", quota)),
                min_profit=float(entry.get("min_profit", 0.0)),
                fee=float(entry.get("fee", 0.0)),
                settled_share=float(entry.get("settled_share", 0.0)),
                txn_cap=float(entry.get("txn_cap", 0.0)),
            )
        )
        if "price" in entry:
            wfp_prices[wid] = float(entry["price"])

    users: list[UserProfile] = []
    for entry in doc.get("users", []):
        users.extend(_parse_user(entry))

    solver_doc = doc.get("solver", {})
    try:
        solver = SolverConfig(
            sigma0=float(solver_doc.get("sigma0", 1.0)),
            epsilon=float(solver_doc.get("epsilon", 1e-6)),
            max_iters=int(solver_doc.get("max_iters", 100_000)),
            x_floor=float(solver_doc.get("x_floor", 1e-6)),
        )
    except ValueError as exc:
        raise ConfigError(f"solver: {exc}") from exc

    sharing_doc = doc.get("sharing", {})
    try:
        sharing = SharingParams(
            alpha=float(sharing_doc.get("alpha", 1.0)),
            beta=float(sharing_doc.get("beta", 2.5)),
        )
    except ValueError as exc:
        raise ConfigError(f"sharing: {exc}") from exc

    unit_raw = str(doc.get("unit", "rate"))
    try:
        unit = Unit(unit_raw)
    except ValueError as exc:
        raise ConfigError(f"unknown unit {unit_raw!r}") from exc

    return ScenarioConfig(
        name=str(doc.get("name", "scenario")),
        unit=unit,
        seed=int(doc.get("seed", 0)),
        topology=topology,
        wfps=wfps,
        wfp_prices=wfp_prices,
        users=users,
        solver=solver,
        sharing=sharing,
        mode=_parse_mode(_require(doc, "mode", "scenario")),
        solve_isp=bool(doc.get("solve_isp", True)),
        lambda0=float(doc.get("lambda0", 0.0)),
        notes=str(doc.get("notes", "")),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Read and parse one scenario JSON file."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def validate_scenario(cfg: ScenarioConfig) -> list[str]:
    """Collect every constraint violation in the scenario; empty means valid."""
    problems: list[str] = []

    for lid, link in cfg.topology.links.items():
        if link.capacity <= 0.0:
            problems.append(f"link {lid}: capacity must be positive")
        if link.subscriber_load < 0.0:
            problems.append(f"link {lid}: subscriber_load must be non-negative")
        elif link.subscriber_load > link.capacity:
            problems.append(f"link {lid}: subscriber_load exceeds capacity")
        if link.price < 0.0:
            problems.append(f"link {lid}: price must be non-negative")

    wfp_ids = set()
    for w in cfg.wfps:
        if w.id in wfp_ids:
            problems.append(f"wfp {w.id}: duplicate id")
        wfp_ids.add(w.id)
        if w.min_profit < 0.0:
            problems.append(f"wfp {w.id}: min_profit must be non-negative")
        if w.kind is WfpKind.ESTABLISHMENT:
            if w.capacity <= 0.0:
                problems.append(f"wfp {w.id}: capacity must be positive")
        else:
            if w.quota <= 0.0:
                problems.append(f"wfp {w.id}: quota must be positive")
            if not 0.0 <= w.unused <= w.quota:
                problems.append(f"wfp {w.id}: unused must lie in [0, quota]")
            if w.fee < 0.0:
                problems.append(f"wfp {w.id}: fee must be non-negative")
            if w.settled_share < 0.0:
                problems.append(f"wfp {w.id}: settled_share must be non-negative")
            elif w.fee > 0.0 and w.settled_share > w.fee:
                problems.append(f"wfp {w.id}: settled_share exceeds fee")
            if w.txn_cap < 0.0:
                problems.append(f"wfp {w.id}: txn_cap must be non-negative")

    user_ids = set()
    for u in cfg.users:
        if u.id in user_ids:
            problems.append(f"user {u.id}: duplicate id")
        user_ids.add(u.id)
        if u.x_min <= 0.0:
            problems.append(f"user {u.id}: x_min must be positive")
        if u.x_max < u.x_min:
            problems.append(f"user {u.id}: x_max must be at least x_min")
        if u.weight <= 0.0:
            problems.append(f"user {u.id}: weight must be positive")
        if u.budget <= 0.0:
            problems.append(f"user {u.id}: budget must be positive")
        for quantity in ("tx_power", "noise_var", "band"):
            if getattr(u, quantity) <= 0.0:
                problems.append(f"user {u.id}: {quantity} must be positive")
        if u.channel_gain2 < 0.0:
            problems.append(f"user {u.id}: channel_gain2 must be non-negative")
        if u.wfp and u.wfp not in wfp_ids:
            problems.append(f"user {u.id}: unknown wfp {u.wfp!r}")
        for lid in u.path:
            if lid not in cfg.topology.links:
                problems.append(f"user {u.id}: unknown link {lid!r} in path")

    mode = cfg.mode
    if isinstance(mode, SweepMode):
        if mode.swept_party not in ("isp", "wfp"):
            problems.append("mode: swept_party must be 'isp' or 'wfp'")
        if mode.count < 1:
            problems.append("mode: count must be at least 1")
        if mode.step <= 0.0:
            problems.append("mode: step must be positive")
        if mode.user_growth < 0:
            problems.append("mode: user_growth must be non-negative")
        if mode.allocation not in ("equal", "best_response"):
            problems.append("mode: allocation must be 'equal' or 'best_response'")
    elif isinstance(mode, EquilibriumMode):
        if mode.ticks < 1:
            problems.append("mode: ticks must be at least 1")
        if mode.user_growth < 0:
            problems.append("mode: user_growth must be non-negative")
        if mode.billing_cycle_ticks < 0:
            problems.append("mode: billing_cycle_ticks must be non-negative")
        for lid, series in mode.subscriber_loads.items():
            if lid not in cfg.topology.links:
                problems.append(f"mode: subscriber_loads for unknown link {lid!r}")
            elif len(series) < mode.ticks:
                problems.append(f"mode: subscriber_loads for {lid!r} shorter than ticks")
    elif isinstance(mode, QuotaSweepMode):
        if mode.usage_steps < 1:
            problems.append("mode: usage_steps must be at least 1")
        if mode.txn_volume <= 0.0:
            problems.append("mode: txn_volume must be positive")
    elif isinstance(mode, CeilingSweepMode):
        if not mode.usage_levels:
            problems.append("mode: usage_levels must not be empty")
        if any(not 0.0 <= lvl < 1.0 for lvl in mode.usage_levels):
            problems.append("mode: usage_levels must lie in [0, 1)")
        if mode.price_step <= 0.0:
            problems.append("mode: price_step must be positive")
        if mode.price_stop < mode.price_start:
            problems.append("mode: price_stop must be at least price_start")
        if mode.txn_volume <= 0.0:
            problems.append("mode: txn_volume must be positive")

    if isinstance(mode, QuotaSweepMode):
        for w in cfg.wfps:
            if w.kind is WfpKind.INDIVIDUAL and w.id not in cfg.wfp_prices:
                problems.append(f"wfp {w.id}: posted price required for quota sweeps")

    users_by_wfp: dict[str, int] = {}
    for u in cfg.users:
        users_by_wfp[u.wfp] = users_by_wfp.get(u.wfp, 0) + 1
    if isinstance(mode, (SweepMode, QuotaSweepMode, CeilingSweepMode)):
        for w in cfg.wfps:
            if users_by_wfp.get(w.id, 0) == 0:
                problems.append(f"wfp {w.id}: no users assigned")

    return problems

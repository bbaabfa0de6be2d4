"""Scenario files: YAML mappings with a fixed set of fields.

Example::

    scheme: variable
    subscribers: 10
    k: [2, 4, 8]
    rounds: 100
    pool: 100
    attack: intersection
    marked_fraction: 0.0
    trials: 1
    seed: 7
    faults:
      - {round: 50, fault: hss-loss}
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import yaml

from .errors import ScenarioError

SCHEMES = ("baseline", "variable")
ATTACKS = ("intersection", "mark")
FAULTS = ("hss-loss", "ue-mismatch", "replay", "tamper")

_DEFAULTS = {
    "subscribers": 1,
    "k": 4,
    "rounds": 10,
    "pool": 100,
    "attack": "intersection",
    "marked_fraction": 0.0,
    "trials": 1,
    "seed": 0,
    "faults": [],
}
_REQUIRED = ("scheme",)


@dataclass(frozen=True)
class Fault:
    round: int
    fault: str


@dataclass(frozen=True)
class Scenario:
    scheme: str
    subscribers: int = 1
    k: tuple[int, ...] = (4,)
    rounds: int = 10
    pool: int = 100
    attack: str = "intersection"
    marked_fraction: tuple[float, ...] = (0.0,)
    trials: int = 1
    seed: int = 0
    faults: tuple[Fault, ...] = field(default_factory=tuple)

    def expand(self) -> list["Scenario"]:
        """One single-valued scenario per (k, marked_fraction) combination."""
        return [
            replace(self, k=(k,), marked_fraction=(m,))
            for k, m in itertools.product(self.k, self.marked_fraction)
        ]


def _line_of(node, key):
    for k_node, _ in getattr(node, "value", []):
        if k_node.value == key:
            return k_node.start_mark.line + 1
    return None


def _fail(msg, node=None, key=None):
    line = _line_of(node, key) if node is not None and key is not None else None
    where = f"line {line}: " if line else ""
    raise ScenarioError(f"{where}{msg}")


def _as_list(value):
    return list(value) if isinstance(value, list) else [value]


def _int(value, name, node, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(f"{name} must be an integer, got {value!r}", node, name)
    if minimum is not None and value < minimum:
        _fail(f"{name} must be >= {minimum}, got {value}", node, name)
    return value


def parse_scenario(text: str) -> Scenario:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}: " if mark else ""
        raise ScenarioError(f"{where}parse error: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping of field names to values")

    unknown = sorted(set(data) - set(_DEFAULTS) - set(_REQUIRED))
    if unknown:
        _fail(f"unknown field {unknown[0]!r}", node, unknown[0])
    for name in _REQUIRED:
        if name not in data:
            raise ScenarioError(f"missing required field {name!r}")
    values = {**_DEFAULTS, **data}

    scheme = values["scheme"]
    if scheme not in SCHEMES:
        _fail(f"scheme must be one of {SCHEMES}, got {scheme!r}", node, "scheme")
    attack = values["attack"]
    if attack not in ATTACKS:
        _fail(f"attack must be one of {ATTACKS}, got {attack!r}", node, "attack")

    ks = _as_list(values["k"])
    if not ks:
        _fail("k sweep list must be non-empty", node, "k")
    ks = tuple(_int(k, "k", node, 1) for k in ks)

    fractions = _as_list(values["marked_fraction"])
    if not fractions:
        _fail("marked_fraction sweep list must be non-empty", node, "marked_fraction")
    for f in fractions:
        if isinstance(f, bool) or not isinstance(f, (int, float)) or not 0.0 <= f <= 1.0:
            _fail(f"marked_fraction must lie in [0, 1], got {f!r}", node, "marked_fraction")
    fractions = tuple(float(f) for f in fractions)

    rounds = _int(values["rounds"], "rounds", node, 1)
    subscribers = _int(values["subscribers"], "subscribers", node, 1)
    pool = _int(values["pool"], "pool", node, 0)
    trials = _int(values["trials"], "trials", node, 1)
    seed = _int(values["seed"], "seed", node, 0)
    if seed >= 1 << 64:
        _fail("seed must fit in 64 bits", node, "seed")
    if pool < max(ks) - 1:
        _fail(f"pool ({pool}) must supply k-1 = {max(ks) - 1} assistants", node, "pool")

    faults = []
    for entry in values["faults"] or []:
        if not isinstance(entry, dict) or set(entry) != {"round", "fault"}:
            _fail(f"fault entries need exactly 'round' and 'fault', got {entry!r}", node, "faults")
        r = _int(entry["round"], "fault round", node)
        if not 0 <= r < rounds:
            _fail(f"fault round {r} outside [0, {rounds})", node, "faults")
        if entry["fault"] not in FAULTS:
            _fail(f"fault must be one of {FAULTS}, got {entry['fault']!r}", node, "faults")
        if scheme == "baseline":
            _fail("fault injection is only defined for the variable scheme", node, "faults")
        if entry["fault"] == "replay" and r == 0:
            _fail("a replay needs a challenge captured in an earlier round (round >= 1)", node, "faults")
        faults.append(Fault(r, entry["fault"]))

    return Scenario(
        scheme=scheme,
        subscribers=subscribers,
        k=ks,
        rounds=rounds,
        pool=pool,
        attack=attack,
        marked_fraction=fractions,
        trials=trials,
        seed=seed,
        faults=tuple(faults),
    )


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return parse_scenario(fh.read())

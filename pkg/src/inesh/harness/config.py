"""Scenario configuration and its flat ``key = value`` text format.

Example::

    [scenario]
    node_count = 50
    protocol = dsr
    inesh_enabled = true

    [adversary]
    malicious_fraction = 0.1
    # explicit ids win over the fraction; ``id:dropper:p`` makes a dropper
    malicious_nodes = 4, 9:dropper:0.5

    [flows]
    flows = 1-50, 2-49
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

from ..adversary import BLACKHOLE, AttackKind, MaliciousProfile, dropper

PROTOCOLS = ("aodv", "dsr")


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{' at '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class ScenarioConfig:
    node_count: int = 35
    terrain_x_m: float = 500.0
    terrain_y_m: float = 550.0
    range_m: float = 150.0
    max_speed_mps: float = 20.0
    data_rate_pps: float = 4.0
    payload_bytes: int = 512
    control_bits: int = 120
    duration_s: float = 300.0
    seed: int = 1
    protocol: str = "aodv"
    inesh_enabled: bool = False
    trust_threshold: float = 0.5
    trust_init: float = 0.5
    trust_reward: float = 0.1
    trust_penalty: float = 0.2
    malicious_fraction: float = 0.1
    malicious_nodes: tuple[tuple[int, MaliciousProfile], ...] = ()
    # None means the default single flow 1 -> node_count
    flows: tuple[tuple[int, int], ...] | None = None
    _lines: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        validate(self)

    def but(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    @property
    def flow_pairs(self) -> tuple[tuple[int, int], ...]:
        if self.flows is None:
            return ((1, self.node_count),)
        return self.flows

    @property
    def terrain(self) -> tuple[float, float]:
        return (self.terrain_x_m, self.terrain_y_m)


HOME = {
    **{k: "scenario" for k in (
        "node_count", "terrain_x_m", "terrain_y_m", "range_m", "max_speed_mps", "data_rate_pps",
        "payload_bytes", "control_bits", "duration_s", "seed", "protocol", "inesh_enabled",
        "trust_threshold", "trust_init", "trust_reward", "trust_penalty")},
    "malicious_fraction": "adversary",
    "malicious_nodes": "adversary",
    "flows": "flows",
}

INT_KEYS = {"node_count", "payload_bytes", "control_bits", "seed"}
FLOAT_KEYS = {"terrain_x_m", "terrain_y_m", "range_m", "max_speed_mps", "data_rate_pps",
              "duration_s", "trust_threshold", "trust_init", "trust_reward", "trust_penalty",
              "malicious_fraction"}
UNIT_KEYS = {"trust_threshold", "trust_init", "trust_reward", "trust_penalty",
             "malicious_fraction"}
POSITIVE_KEYS = {"node_count", "terrain_x_m", "terrain_y_m", "range_m", "data_rate_pps",
                 "payload_bytes", "control_bits", "duration_s"}


def validate(cfg: ScenarioConfig) -> None:
    def fail(key, msg):
        raise ConfigError(msg, key, cfg._lines.get(key))

    for k in POSITIVE_KEYS:
        if not getattr(cfg, k) > 0:
            fail(k, f"must be positive, got {getattr(cfg, k)}")
    for k in UNIT_KEYS:
        if not 0.0 <= getattr(cfg, k) <= 1.0:
            fail(k, f"must lie in [0, 1], got {getattr(cfg, k)}")
    if not 0.0 <= cfg.max_speed_mps:
        fail("max_speed_mps", f"must be >= 0, got {cfg.max_speed_mps}")
    if not 0 <= cfg.seed < 2 ** 64:
        fail("seed", f"must be a 64-bit unsigned integer, got {cfg.seed}")
    if cfg.protocol not in PROTOCOLS:
        fail("protocol", f"must be one of {', '.join(PROTOCOLS)}, got {cfg.protocol!r}")
    for v, _ in cfg.malicious_nodes:
        if not 1 <= v <= cfg.node_count:
            fail("malicious_nodes", f"node {v} is not in 1..{cfg.node_count}")
    if len({v for v, _ in cfg.malicious_nodes}) != len(cfg.malicious_nodes):
        fail("malicious_nodes", "duplicate node id")
    for s, d in cfg.flows or ():
        for v in (s, d):
            if not 1 <= v <= cfg.node_count:
                fail("flows", f"node {v} is not in 1..{cfg.node_count}")


def parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_malicious(text: str) -> tuple[tuple[int, MaliciousProfile], ...]:
    out = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        parts = tok.split(":")
        node = int(parts[0])
        if len(parts) == 1 or parts[1] == "blackhole" and len(parts) == 2:
            out.append((node, BLACKHOLE))
        elif parts[1] == "dropper" and len(parts) == 3:
            out.append((node, dropper(float(parts[2]))))
        else:
            raise ValueError(f"bad malicious node entry {tok!r}")
    return tuple(out)


def _parse_flows(text: str) -> tuple[tuple[int, int], ...]:
    out = []
    for tok in filter(None, (t.strip() for t in text.split(","))):
        s, _, d = tok.partition("-")
        out.append((int(s), int(d)))
    return tuple(out)


def _convert(key: str, raw: str):
    if key in INT_KEYS:
        return int(raw)
    if key in FLOAT_KEYS:
        return float(raw)
    if key == "inesh_enabled":
        return parse_bool(raw)
    if key == "protocol":
        return raw.lower()
    if key == "malicious_nodes":
        return _parse_malicious(raw)
    if key == "flows":
        return _parse_flows(raw)
    raise KeyError(key)


def parse_sections(text: str, allowed: dict[str, str]) -> dict[str, tuple[str, int]]:
    """Split a document into ``{key: (raw value, line number)}``.

    ``allowed`` maps every legal key to its section.  Keys before the first
    section header belong to whichever section owns them.
    """
    values: dict[str, tuple[str, int]] = {}
    section = None
    sections = set(allowed.values())
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", line=lineno)
            section = line[1:-1].strip()
            if section not in sections:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        key, eq, raw = line.partition("=")
        key = key.strip()
        if not eq:
            raise ConfigError("expected 'key = value'", key or None, lineno)
        if key not in allowed:
            raise ConfigError("unknown key", key, lineno)
        if section is not None and allowed[key] != section:
            raise ConfigError(f"belongs in [{allowed[key]}], not [{section}]", key, lineno)
        if key in values:
            raise ConfigError("duplicate key", key, lineno)
        values[key] = (raw.strip(), lineno)
    return values


def parse_config(text: str) -> ScenarioConfig:
    values = parse_sections(text, HOME)
    kwargs, lines = {}, {}
    for key, (raw, lineno) in values.items():
        try:
            kwargs[key] = _convert(key, raw)
        except ValueError as e:
            raise ConfigError(str(e), key, lineno) from None
        lines[key] = lineno
    return ScenarioConfig(**kwargs, _lines=lines)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _fmt_malicious(entries) -> str:
    toks = []
    for v, p in entries:
        if p.kind is AttackKind.BLACKHOLE:
            toks.append(str(v))
        else:
            toks.append(f"{v}:dropper:{p.drop_probability!r}")
    return ", ".join(toks)


def render_config(cfg: ScenarioConfig) -> str:
    out = ["[scenario]"]
    for key, sec in HOME.items():
        if sec == "scenario":
            out.append(f"{key} = {_fmt(getattr(cfg, key))}")
    out += ["", "[adversary]", f"malicious_fraction = {_fmt(cfg.malicious_fraction)}"]
    if cfg.malicious_nodes:
        out.append(f"malicious_nodes = {_fmt_malicious(cfg.malicious_nodes)}")
    if cfg.flows is not None:
        out += ["", "[flows]", "flows = " + ", ".join(f"{s}-{d}" for s, d in cfg.flows)]
    return "\n".join(out) + "\n"

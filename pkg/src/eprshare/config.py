"""Run configuration: protocol choice, counts, channels, payload, seed.

Counts left as None are resolved from ``check_fraction``:

- first transmission check uses ``ceil(fraction * n_pairs)`` pairs,
- ``k``, ``j``, the per-hop checks, and the rotation-mark count each default
  to ``ceil(fraction * n_pairs / 2)`` (hop checks and rotation marks only
  exist when intermediate agents do, i.e. three or more agents),
- the final encoding samples default to ``ceil(fraction * n_pairs)``,
- ``decoy_count`` defaults to ``j`` and can never exceed it, because decoys
  are the unmeasured partners left over from the j-pair check.

``validate`` confirms the pair budget closes: every check consumes pairs, and
what remains must still fit the payload (at least one pair for secret
splitting, at least ``m`` pairs for state sharing).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

from .channel import CLEAN_CHANNEL, ChannelModel, ConfigError

PROTOCOLS = ("mqssp3", "mqsspn", "mqsts")

_CEIL_SLACK = 1e-9


def _ceil_count(value: float) -> int:
    """Ceiling that forgives float representation error in fraction*count."""
    return max(0, math.ceil(value - _CEIL_SLACK))


def parse_payload(payload: str) -> tuple[str, int | str | None]:
    """Parse a payload spec into ("random", length|None) or ("bits", literal).

    "random:max" fills every available payload slot, "random:<len>" draws a
    fixed-length random bit string, "bits:<literal>" sends the given bits.
    """
    if payload == "random:max":
        return ("random", None)
    if payload.startswith("random:"):
        tail = payload[len("random:"):]
        try:
            length = int(tail)
        except ValueError:
            raise ConfigError(f"bad random payload length {tail!r}") from None
        if length <= 0 or length % 2 != 0:
            raise ConfigError("random payload length must be a positive even integer")
        return ("random", length)
    if payload.startswith("bits:"):
        literal = payload[len("bits:"):]
        if not literal or len(literal) % 2 != 0 or set(literal) - {"0", "1"}:
            raise ConfigError("bit payload must be a nonempty even-length string of 0/1")
        return ("bits", literal)
    raise ConfigError(
        f"payload must be 'random:max', 'random:<len>', or 'bits:<01...>', got {payload!r}"
    )


@dataclass(frozen=True)
class ResolvedCounts:
    """All pair-consuming counts made concrete for one configuration."""

    first_check: int
    hop_check: int  # per intermediate hop
    k: int
    j: int
    decoys: int
    marks_per_agent: int  # rotation marks each intermediate agent places
    mark_publish: int  # marks verified at the next check point, per agent
    final_samples: int
    intermediates: int  # agents that relay the roaming sequence

    @property
    def consumed(self) -> int:
        return (
            self.first_check
            + self.hop_check * self.intermediates
            + self.marks_per_agent * self.intermediates
            + self.k
            + self.j
            + self.final_samples
        )


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str = "mqssp3"
    n_pairs: int = 40
    n_agents: int | None = None
    m: int = 1
    check_fraction: float = 0.1
    k: int | None = None
    j: int | None = None
    decoy_count: int | None = None
    hop_check_count: int | None = None
    hadamard_sample_count: int | None = None
    hadamard_publish_fraction: float = 0.5
    final_sample_count: int | None = None
    threshold: float = 0.05
    payload: str = "random:max"
    seed: int = 0
    channels: dict = field(default_factory=dict)
    max_qubits: int = 16

    # -- structure ---------------------------------------------------------

    @property
    def agents(self) -> int:
        if self.n_agents is not None:
            return self.n_agents
        return 3 if self.protocol == "mqsspn" else 2

    @property
    def is_sharing(self) -> bool:
        return self.protocol == "mqsts"

    def legs(self) -> list[str]:
        """Channel legs in transmission order for this topology."""
        hops = [f"hop_{i}" for i in range(1, self.agents)]
        names = ["lead_dist", *hops, "partner_deliver"]
        if not self.is_sharing:
            names.append("lead_deliver")
        return names

    def channel_for(self, leg: str) -> ChannelModel:
        if leg in self.channels:
            return self.channels[leg]
        return self.channels.get("default", CLEAN_CHANNEL)

    # -- counts ------------------------------------------------------------

    def resolve(self) -> ResolvedCounts:
        n = self.n_pairs
        f = self.check_fraction
        intermediates = max(0, self.agents - 2)
        half = _ceil_count(f * n / 2.0)
        k = half if self.k is None else self.k
        j = half if self.j is None else self.j
        decoys = j if self.decoy_count is None else self.decoy_count
        hop_check = (
            (half if intermediates > 0 else 0)
            if self.hop_check_count is None
            else self.hop_check_count
        )
        marks = (
            (half if intermediates > 0 else 0)
            if self.hadamard_sample_count is None
            else self.hadamard_sample_count
        )
        publish = _ceil_count(self.hadamard_publish_fraction * marks)
        if self.is_sharing:
            final = 0
        else:
            final = (
                _ceil_count(f * n)
                if self.final_sample_count is None
                else self.final_sample_count
            )
        return ResolvedCounts(
            first_check=_ceil_count(f * n),
            hop_check=hop_check,
            k=k,
            j=j,
            decoys=decoys,
            marks_per_agent=marks,
            mark_publish=publish,
            final_samples=final,
            intermediates=intermediates,
        )

    # -- validation --------------------------------------------------------

    def validate(self) -> "ProtocolConfig":
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if self.n_pairs < 1:
            raise ConfigError("n_pairs must be at least 1")
        agents = self.agents
        if self.protocol == "mqssp3" and agents != 2:
            raise ConfigError("the three-party protocol has exactly 2 agents")
        if self.protocol == "mqsspn" and agents < 3:
            raise ConfigError("the many-party protocol needs at least 3 agents")
        if self.protocol == "mqsts" and agents < 2:
            raise ConfigError("state sharing needs at least 2 agents")
        if not 0.0 <= self.check_fraction <= 1.0:
            raise ConfigError("check_fraction must be in [0, 1]")
        if not 0.0 <= self.hadamard_publish_fraction <= 1.0:
            raise ConfigError("hadamard_publish_fraction must be in [0, 1]")
        if not 0.0 < self.threshold <= 1.0:
            raise ConfigError("threshold must be in (0, 1]")
        for name in ("k", "j", "decoy_count", "hop_check_count",
                     "hadamard_sample_count", "final_sample_count"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise ConfigError(f"{name} must be >= 0")
        if self.max_qubits < 4:
            raise ConfigError("max_qubits must be at least 4 for joint measurements")

        counts = self.resolve()
        if counts.decoys > counts.j:
            raise ConfigError(
                f"decoy_count ({counts.decoys}) cannot exceed j ({counts.j}): "
                "decoys are the leftover partners of the j-pair check"
            )
        remaining = self.n_pairs - counts.consumed
        if self.is_sharing:
            if self.m < 1:
                raise ConfigError("m must be at least 1")
            if self.m + 2 > self.max_qubits:
                raise ConfigError(
                    f"sharing an {self.m}-qubit state needs max_qubits >= {self.m + 2}"
                )
            if remaining < self.m:
                raise ConfigError(
                    f"pair budget too small: {counts.consumed} consumed by checks, "
                    f"{remaining} left, but m={self.m} pairs are needed"
                )
        else:
            mode, value = parse_payload(self.payload)
            if remaining < 1:
                raise ConfigError(
                    f"pair budget too small: {counts.consumed} consumed by checks, "
                    "no pairs left for the payload"
                )
            if mode == "random" and isinstance(value, int) and value > 2 * remaining:
                raise ConfigError(
                    f"payload of {value} bits needs {value // 2} pairs, "
                    f"but only {remaining} remain after checks"
                )
            if mode == "bits" and len(value) > 2 * remaining:
                raise ConfigError(
                    f"payload of {len(value)} bits needs {len(value) // 2} pairs, "
                    f"but only {remaining} remain after checks"
                )

        legal = set(self.legs()) | {"default"}
        for leg in self.channels:
            if leg not in legal:
                raise ConfigError(
                    f"unknown channel leg {leg!r}; expected one of {sorted(legal)}"
                )
        return self

    # -- serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        raw = {
            "protocol": self.protocol,
            "n_pairs": self.n_pairs,
            "n_agents": self.agents,
            "m": self.m,
            "check_fraction": self.check_fraction,
            "k": self.k,
            "j": self.j,
            "decoy_count": self.decoy_count,
            "hop_check_count": self.hop_check_count,
            "hadamard_sample_count": self.hadamard_sample_count,
            "hadamard_publish_fraction": self.hadamard_publish_fraction,
            "final_sample_count": self.final_sample_count,
            "threshold": self.threshold,
            "payload": self.payload,
            "seed": self.seed,
            "channels": {leg: model.to_dict() for leg, model in self.channels.items()},
            "max_qubits": self.max_qubits,
        }
        return raw

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, raw: dict) -> "ProtocolConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration root must be a JSON object")
        known = {
            "protocol", "n_pairs", "n_agents", "m", "check_fraction", "k", "j",
            "decoy_count", "hop_check_count", "hadamard_sample_count",
            "hadamard_publish_fraction", "final_sample_count", "threshold",
            "payload", "seed", "channels", "max_qubits",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown configuration fields: {sorted(unknown)}")
        channels_raw = raw.get("channels", {})
        if not isinstance(channels_raw, dict):
            raise ConfigError("channels must be an object of leg -> channel model")
        channels = {
            leg: ChannelModel.from_dict(model) for leg, model in channels_raw.items()
        }
        kwargs = {key: raw[key] for key in known & set(raw) if key != "channels"}
        kwargs["channels"] = channels
        try:
            config = cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        return config.validate()

    @classmethod
    def from_json(cls, text: str) -> "ProtocolConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from None
        return cls.from_dict(raw)

    def with_seed(self, seed: int) -> "ProtocolConfig":
        return replace(self, seed=seed)

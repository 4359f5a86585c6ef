"""Auditable classical record of a protocol run, with replayable decoding.

Every classical publication, quantum transmission, and local milestone is
appended as an ``Event``.  Publications carry a traffic class so the
efficiency accounting can separate eavesdropping-check traffic from the
classical bits that actually convey the payload:

- ``check``       eavesdropping-check traffic (positions, bases, outcomes,
                  operation disclosures made for checking),
- ``control``     bookkeeping announcements (lost positions, payload length),
- ``disclosure``  reconstruction collaboration between agents (encoding
                  operations on payload slots, shared joint outcomes),
- ``outcome``     the sender's own published measurement outcomes — the only
                  class the lenient throughput denominator includes.

``replay_decode`` recomputes the recovered bit string for a secret-splitting
run purely from the published events, which is the replay-determinism check:
the quantum engine can be discarded and the classical record still decodes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .frame import PauliOp, bits_code, code_bits, code_of, frame_code, op_of

TRAFFIC_CLASSES = ("check", "control", "disclosure", "outcome")

PUBLISH = "publish"
SEND = "send"
NOTE = "note"


@dataclass
class Event:
    seq: int
    stage: str
    actor: str
    kind: str  # publish | send | note
    traffic: str  # one of TRAFFIC_CLASSES for publish events, else ""
    label: str
    data: dict
    bits: int = 0

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "stage": self.stage,
            "actor": self.actor,
            "kind": self.kind,
            "traffic": self.traffic,
            "label": self.label,
            "data": self.data,
            "bits": self.bits,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "Event":
        return cls(
            seq=int(raw["seq"]),
            stage=str(raw["stage"]),
            actor=str(raw["actor"]),
            kind=str(raw["kind"]),
            traffic=str(raw.get("traffic", "")),
            label=str(raw.get("label", "")),
            data=dict(raw.get("data", {})),
            bits=int(raw.get("bits", 0)),
        )


class Transcript:
    """Ordered event log for one run, plus a small header of run facts."""

    def __init__(self, header: dict | None = None) -> None:
        self.header: dict = dict(header or {})
        self.events: list[Event] = []

    def _append(self, event: Event) -> Event:
        self.events.append(event)
        return event

    def publish(
        self,
        stage: str,
        actor: str,
        traffic: str,
        label: str,
        data: dict,
        bits: int,
    ) -> Event:
        if traffic not in TRAFFIC_CLASSES:
            raise ValueError(f"unknown traffic class {traffic!r}")
        if bits < 0:
            raise ValueError("published bit count cannot be negative")
        return self._append(
            Event(len(self.events), stage, actor, PUBLISH, traffic, label, data, bits)
        )

    def send(self, stage: str, actor: str, label: str, data: dict | None = None) -> Event:
        return self._append(
            Event(len(self.events), stage, actor, SEND, "", label, dict(data or {}))
        )

    def note(self, stage: str, actor: str, label: str, data: dict | None = None) -> Event:
        return self._append(
            Event(len(self.events), stage, actor, NOTE, "", label, dict(data or {}))
        )

    def published_bits(self, traffic: str | None = None, actor: str | None = None) -> int:
        total = 0
        for event in self.events:
            if event.kind != PUBLISH:
                continue
            if traffic is not None and event.traffic != traffic:
                continue
            if actor is not None and event.actor != actor:
                continue
            total += event.bits
        return total

    def bits_by_class(self) -> dict[str, int]:
        return {traffic: self.published_bits(traffic) for traffic in TRAFFIC_CLASSES}

    def find(self, *, stage: str | None = None, label: str | None = None) -> list[Event]:
        out = []
        for event in self.events:
            if stage is not None and event.stage != stage:
                continue
            if label is not None and event.label != label:
                continue
            out.append(event)
        return out

    def to_json(self, indent: int | None = None) -> str:
        payload = {
            "header": self.header,
            "events": [event.to_dict() for event in self.events],
        }
        return json.dumps(payload, indent=indent)

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        raw = json.loads(text)
        transcript = cls(header=raw.get("header", {}))
        for item in raw.get("events", []):
            transcript.events.append(Event.from_dict(item))
        return transcript


class ReplayError(ValueError):
    """The transcript does not contain a decodable completed run."""


def _collect_payload_records(transcript: Transcript):
    """Pull payload outcomes and per-agent disclosed codes from the log."""
    outcomes: dict[int, int] = {}
    disclosures: dict[str, dict[int, int]] = {}
    length: int | None = None
    for event in transcript.events:
        if event.kind != PUBLISH:
            continue
        if event.label == "payload outcomes":
            for pos, kind_label in event.data["outcomes"].items():
                outcomes[int(pos)] = frame_code(_kind_from_label(kind_label))
        elif event.label == "payload operation disclosure":
            per_agent = disclosures.setdefault(event.actor, {})
            for pos, code_str in event.data["codes"].items():
                per_agent[int(pos)] = bits_code(code_str)
        elif event.label == "payload length":
            length = int(event.data["bits_encoded"])
    if length is None:
        raise ReplayError("transcript has no payload length announcement")
    return outcomes, disclosures, length


def _kind_from_label(label: str):
    from .frame import BellKind

    try:
        return BellKind(label)
    except ValueError:
        raise ReplayError(f"unknown joint outcome label {label!r}") from None


def replay_decode(transcript: Transcript, withhold: set[str] | None = None) -> str:
    """Recompute the recovered bit string from published events only.

    ``withhold`` names actors whose operation disclosures are ignored — the
    incomplete-cooperation scenario.  Positions are decoded in ascending
    order; each slot contributes two bits: the XOR of the outcome's frame
    code with every disclosed operation code on that slot.
    """
    withhold = withhold or set()
    outcomes, disclosures, length = _collect_payload_records(transcript)
    bits = []
    for pos in sorted(outcomes):
        code = outcomes[pos]
        for actor, codes in disclosures.items():
            if actor in withhold:
                continue
            if pos in codes:
                code ^= codes[pos]
        bits.append(code_bits(code))
    return "".join(bits)[:length]


def op_code_string(op: PauliOp) -> str:
    """Two-character bit label for an encoding operation."""
    return code_bits(code_of(op))


def op_from_code_string(bits: str) -> PauliOp:
    return op_of(bits_code(bits))


__all__ = [
    "Event",
    "Transcript",
    "ReplayError",
    "replay_decode",
    "TRAFFIC_CLASSES",
    "op_code_string",
    "op_from_code_string",
]

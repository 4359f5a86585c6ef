"""Multiparty secret splitting over relayed singlet pairs.

One sender splits a classical message among N agents so that only all agents
together can read it.  Agent 1 prepares singlet pairs and keeps one sequence
(the roaming "partner" halves) while the other sequence (the "lead" halves)
goes to the sender.  The partner sequence is then relayed agent to agent,
each relay encrypting every photon with a random operation from {I, Z, X, Y},
until it returns to the sender; she folds her message into the lead halves as
operations of the same set and forwards both sequences to the last agent, who
joint-measures each pair in the Bell basis.  The outcome label of each pair
equals (up to the known singlet frame) the XOR of all two-bit operation codes
applied to it, so the message comes out only when every agent discloses its
codes.

Eavesdropping protection is layered, and every layer is a pair-correlation
check derived from one rule: measure both halves of a checked pair, fold the
disclosed operation history into a Bell-frame tracker, and compare the
outcome parity against the folded frame.  The layers are the first
transmission check (fresh singlets must anticorrelate in both bases), per-hop
checks at every intermediate agent, the sender's k-pair check, decoy photons
planted in the final partner delivery, basis-rotation marks that intermediate
agents place to protect their own operations, and the final encoding samples.
Any layer whose observed error rate exceeds the abort threshold stops the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .channel import (
    LOST,
    AdversaryKind,
    AdversaryState,
    ConfigError,
    composed_code,
    transmit,
)
from .config import ProtocolConfig, ResolvedCounts, parse_payload
from .core import RandomSource
from .frame import (
    HADAMARD_MARK,
    Basis,
    BellKind,
    FrameTracker,
    PauliOp,
    bits_code,
    code_bits,
    code_of,
    frame_code,
    op_of,
    other_basis,
    outcomes_equal,
)
from .register import WireRegister
from .transcript import Transcript

SENDER = "sender"


def agent_name(ordinal: int) -> str:
    return f"agent{ordinal}"


class ProtocolOrderError(RuntimeError):
    """A protocol step was invoked out of order."""


class _Abort(Exception):
    def __init__(self, stage: str, rate: float) -> None:
        super().__init__(f"error rate {rate:.4f} at {stage} exceeds threshold")
        self.stage = stage
        self.rate = rate


class PairStatus(Enum):
    ACTIVE = "active"
    FIRST_CHECK = "first_check"
    HOP_CHECK = "hop_check"
    MARK_CHECK = "mark_check"
    MARK_DISCARDED = "mark_discarded"
    SECOND_CHECK = "second_check"
    DECOY_SOURCE = "decoy_source"
    FINAL_SAMPLE = "final_sample"
    PAYLOAD = "payload"
    PADDING = "padding"
    LOST = "lost"


@dataclass
class PairRecord:
    """Book-keeping for one shared pair across the whole run."""

    index: int
    lead_wire: int | None
    partner_wire: int | None
    status: PairStatus = PairStatus.ACTIVE
    partner_entries: list = field(default_factory=list)  # PauliOp | HADAMARD_MARK
    entry_actors: list = field(default_factory=list)
    lead_op: PauliOp | None = None
    marked_by: int | None = None
    outcome: BellKind | None = None
    message_bits: str | None = None
    lost_leg: str | None = None

    def composed_partner_code(self) -> int:
        return composed_code(self.partner_entries)

    def honest_code(self) -> int:
        """XOR of every operation code honest parties applied to this slot."""
        code = self.composed_partner_code()
        if self.lead_op is not None:
            code ^= code_of(self.lead_op)
        return code


@dataclass
class DecoyRecord:
    decoy_id: int
    origin_pair: int
    wire: int | None
    basis: Basis
    expected_bit: int
    lost: bool = False
    measured_bit: int | None = None


@dataclass
class AdversaryReport:
    """Simulation-side truth about what the adversary did and learned."""

    captured_slots: int = 0
    intercept_count: int = 0
    learned: dict = field(default_factory=dict)  # slot tag -> PauliOp
    leaked_ops: dict = field(default_factory=dict)
    tamper_log: list = field(default_factory=list)


@dataclass
class RunOutcome:
    protocol: str
    seed: int
    verdict: str  # "completed" | "aborted"
    abort_stage: str | None
    abort_rate: float | None
    error_rates: dict
    recovered: str | None
    payload_bits: str | None
    match: bool | None
    fidelity: float | None
    counts: dict

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "verdict": self.verdict,
            "abort_stage": self.abort_stage,
            "abort_rate": self.abort_rate,
            "error_rates": dict(self.error_rates),
            "recovered": self.recovered,
            "payload_bits": self.payload_bits,
            "match": self.match,
            "fidelity": self.fidelity,
            "counts": dict(self.counts),
        }


@dataclass
class RunResult:
    outcome: RunOutcome
    transcript: Transcript
    pairs: list
    decoys: list
    adversary: AdversaryReport

    @property
    def completed(self) -> bool:
        return self.outcome.verdict == "completed"


class SecretSplittingRun:
    """Drives one secret-splitting execution, stage by guarded stage.

    The public step methods must be called in protocol order (``run`` does
    exactly that); calling one early raises ProtocolOrderError.  In
    particular the payload cannot be encoded before the partner sequence has
    come back and passed the sender's checks — the ordering the relay checks
    exist to enforce.
    """

    _sharing = False

    def __init__(self, config: ProtocolConfig, rng: RandomSource | None = None) -> None:
        config.validate()
        if config.is_sharing != self._sharing:
            raise ConfigError(
                f"{type(self).__name__} cannot drive a {config.protocol!r} configuration"
            )
        self.config = config
        self.counts: ResolvedCounts = config.resolve()
        self.rng = rng if rng is not None else RandomSource(config.seed)
        self.register = WireRegister(config.max_qubits)
        self.transcript = Transcript(
            header={
                "protocol": config.protocol,
                "n_pairs": config.n_pairs,
                "agents": config.agents,
                "seed": config.seed,
            }
        )
        self.agents = config.agents
        self.pairs: list[PairRecord] = []
        self.decoys: list[DecoyRecord] = []
        self.adversary_state = AdversaryState()
        self.error_rates: dict[str, float] = {}
        self.stage = "init"
        self.payload_sent: str | None = None
        self._fidelity: float | None = None
        self._transmitted: set = set()
        self._pos_bits = max(1, math.ceil(math.log2(max(2, config.n_pairs))))
        self._tamper: list[str] = []

    # ------------------------------------------------------------------ utils

    def _advance(self, expected: str, action: str, new: str) -> None:
        if self.stage != expected:
            raise ProtocolOrderError(
                f"cannot {action} while in stage {self.stage!r}; "
                f"protocol order requires stage {expected!r}"
            )
        self.stage = new

    def _active(self) -> list[PairRecord]:
        return [p for p in self.pairs if p.status is PairStatus.ACTIVE]

    def _transmit(self, leg: str, wire: int, tag: int, history=None):
        result = transmit(
            self.register,
            wire,
            self.config.channel_for(leg),
            self.rng,
            self.adversary_state,
            tag,
            history,
        )
        if result.events:
            self._tamper.extend(f"{leg}: {line}" for line in result.events)
        return result

    def _sample_active(self, count: int, stage: str) -> list[PairRecord]:
        active = self._active()
        if count > len(active):
            raise ConfigError(
                f"{stage} needs {count} pairs but only {len(active)} remain in play"
            )
        picked = self.rng.sample_indices(len(active), count)
        return [active[i] for i in picked]

    def _abort_if(self, stage: str, errors: int, samples: int) -> None:
        rate = errors / samples if samples else 0.0
        self.error_rates[stage] = rate
        self.transcript.note(
            stage, SENDER, "error rate",
            {"errors": errors, "samples": samples, "rate": rate},
        )
        if rate > self.config.threshold:
            raise _Abort(stage, rate)

    def _discard(self, wire: int | None) -> None:
        if wire is not None:
            self.register.measure(wire, Basis.Z, self.rng)

    def _publish_entry_disclosures(self, stage: str, records: list[PairRecord]) -> None:
        """Each agent publishes its operation history on the given pairs."""
        per_actor: dict[str, dict[int, list[str]]] = {}
        per_actor_bits: dict[str, int] = {}
        for pair in records:
            for entry, actor in zip(pair.partner_entries, pair.entry_actors):
                label = HADAMARD_MARK if entry == HADAMARD_MARK else code_bits(code_of(entry))
                per_actor.setdefault(actor, {}).setdefault(pair.index, []).append(label)
                per_actor_bits[actor] = per_actor_bits.get(actor, 0) + (
                    1 if entry == HADAMARD_MARK else 2
                )
        for actor in sorted(per_actor):
            self.transcript.publish(
                stage, actor, "check", "operations on check positions",
                {"entries": {str(k): v for k, v in per_actor[actor].items()}},
                per_actor_bits[actor],
            )

    def _check_pairs(
        self,
        stage: str,
        records: list[PairRecord],
        partner_actor: str,
        consumed_status: PairStatus,
    ) -> int:
        """Correlation-check each pair against its disclosed history.

        The partner-half holder draws the logical basis, rotating its own
        physical basis when the folded history carries an odd number of
        basis-rotation marks; the sender measures the lead half in the
        logical basis.  Expected parity comes from the folded Bell frame.
        Returns the number of errors; pairs are consumed.
        """
        if records:
            self.transcript.publish(
                stage, SENDER, "check", "check positions",
                {"positions": [p.index for p in records]},
                len(records) * self._pos_bits,
            )
            self._publish_entry_disclosures(stage, records)
        errors = 0
        partner_report: dict[str, dict] = {}
        lead_report: dict[str, int] = {}
        for pair in records:
            tracker = FrameTracker.fold(pair.partner_entries)
            logical = self.rng.basis()
            partner_basis = (
                other_basis(logical) if tracker.hadamard_parity else logical
            )
            partner_bit = self.register.measure(pair.partner_wire, partner_basis, self.rng)
            lead_bit = self.register.measure(pair.lead_wire, logical, self.rng)
            expected_equal = outcomes_equal(tracker.bell_kind, logical)
            if (partner_bit == lead_bit) != expected_equal:
                errors += 1
            pair.status = consumed_status
            partner_report[str(pair.index)] = {
                "basis": logical.value,
                "bit": partner_bit,
            }
            lead_report[str(pair.index)] = lead_bit
        if records:
            self.transcript.publish(
                stage, partner_actor, "check", "partner bases and outcomes",
                {"results": partner_report}, len(records) * 2,
            )
            self.transcript.publish(
                stage, SENDER, "check", "lead outcomes",
                {"results": lead_report}, len(records),
            )
        return errors

    def _announce_lost(self, stage: str, actor: str, positions: list) -> None:
        if positions:
            self.transcript.publish(
                stage, actor, "control", "lost positions",
                {"positions": positions}, len(positions) * self._pos_bits,
            )

    # ------------------------------------------------------------------ stages

    def prepare(self) -> None:
        """Agent 1 prepares the singlet pairs and splits the two sequences."""
        self._advance("init", "prepare pairs", "prepared")
        for index in range(self.config.n_pairs):
            lead, partner = self.register.alloc_bell(BellKind.PSI_MINUS)
            self.pairs.append(PairRecord(index=index, lead_wire=lead, partner_wire=partner))
        self.transcript.note(
            "prepare", agent_name(1), "prepared singlet pairs",
            {"count": self.config.n_pairs},
        )

    def distribute_lead(self) -> None:
        """Agent 1 sends the lead sequence to the sender."""
        self._advance("prepared", "distribute the lead sequence", "lead_distributed")
        lost = []
        for pair in self.pairs:
            result = self._transmit("lead_dist", pair.lead_wire, pair.index)
            self._transmitted.add(("lead", pair.index))
            if result.status == LOST:
                pair.status = PairStatus.LOST
                pair.lost_leg = "lead_dist"
                pair.lead_wire = None
                lost.append(pair.index)
                self._discard(pair.partner_wire)
                pair.partner_wire = None
            else:
                pair.lead_wire = result.wire
        self.transcript.send(
            "lead_dist", agent_name(1), "lead sequence",
            {"count": self.config.n_pairs},
        )
        self._announce_lost("lead_dist", SENDER, lost)

    def first_check(self) -> None:
        """Sender and agent 1 verify anticorrelation on sampled fresh pairs."""
        self._advance("lead_distributed", "run the first transmission check", "first_checked")
        records = self._sample_active(self.counts.first_check, "first transmission check")
        errors = self._check_pairs(
            "first_check", records, agent_name(1), PairStatus.FIRST_CHECK
        )
        self._abort_if("first_check", errors, len(records))

    def route_partner(self) -> None:
        """Relay the partner sequence through every agent back to the sender.

        Each holder encrypts all photons in hand; intermediate agents also
        place basis-rotation marks on a private sample.  Every arrival at an
        intermediate agent triggers a hop check, plus verification of the
        marks placed by the agent the photons just came from.
        """
        self._advance("first_checked", "route the partner sequence", "routed")
        for hop in range(1, self.agents):
            holder = hop  # agent ordinal sending on this hop
            self._apply_holder_ops(holder)
            if 2 <= holder <= self.agents - 1:
                self._place_marks(holder)
            self._transmit_partner_hop(hop)
            if hop < self.agents - 1:
                receiver = hop + 1
                self._hop_check(receiver)
                if holder >= 2:
                    self._verify_marks(holder, agent_name(receiver))

    def _apply_holder_ops(self, holder: int) -> None:
        actor = agent_name(holder)
        for pair in self._active():
            op = self.rng.pauli()
            self.register.apply_pauli(pair.partner_wire, op)
            pair.partner_entries.append(op)
            pair.entry_actors.append(actor)
        self.transcript.note(
            f"hop_{holder}", actor, "encrypted partner sequence",
            {"count": len(self._active())},
        )

    def _place_marks(self, holder: int) -> None:
        count = self.counts.marks_per_agent
        if count == 0:
            return
        actor = agent_name(holder)
        candidates = [p for p in self._active() if p.marked_by is None]
        if count > len(candidates):
            raise ConfigError(
                f"{actor} cannot place {count} rotation marks: "
                f"only {len(candidates)} unmarked pairs remain"
            )
        for i in self.rng.sample_indices(len(candidates), count):
            pair = candidates[i]
            self.register.apply_hadamard(pair.partner_wire)
            pair.partner_entries.append(HADAMARD_MARK)
            pair.entry_actors.append(actor)
            pair.marked_by = holder
        self.transcript.note(
            f"hop_{holder}", actor, "placed rotation marks", {"count": count}
        )

    def _transmit_partner_hop(self, hop: int) -> None:
        leg = f"hop_{hop}"
        receiver = SENDER if hop == self.agents - 1 else agent_name(hop + 1)
        lost = []
        for pair in self._active():
            result = self._transmit(
                leg, pair.partner_wire, pair.index, history=pair.partner_entries
            )
            self._transmitted.add(("partner", pair.index))
            if result.status == LOST:
                pair.status = PairStatus.LOST
                pair.lost_leg = leg
                pair.partner_wire = None
                lost.append(pair.index)
                self._discard(pair.lead_wire)
                pair.lead_wire = None
            else:
                pair.partner_wire = result.wire
        self.transcript.send(leg, agent_name(hop), "partner sequence", {"leg": leg})
        self._announce_lost(leg, receiver, lost)

    def _hop_check(self, receiver: int) -> None:
        stage = f"hop_check_{receiver}"
        records = self._sample_active(self.counts.hop_check, stage)
        errors = self._check_pairs(
            stage, records, agent_name(receiver), PairStatus.HOP_CHECK
        )
        self._abort_if(stage, errors, len(records))

    def _verify_marks(self, marker: int, partner_actor: str) -> None:
        """Verify a sample of the marks the previous holder placed."""
        if self.counts.marks_per_agent == 0:
            return
        stage = f"mark_check_{marker}"
        marked = [
            p for p in self._active() if p.marked_by == marker
        ]
        count = min(self.counts.mark_publish, len(marked))
        if count == 0:
            self._abort_if(stage, 0, 0)
            return
        picked = [marked[i] for i in self.rng.sample_indices(len(marked), count)]
        self.transcript.publish(
            stage, agent_name(marker), "check", "published mark positions",
            {"positions": [p.index for p in picked]}, count * self._pos_bits,
        )
        errors = self._check_pairs(stage, picked, partner_actor, PairStatus.MARK_CHECK)
        self._abort_if(stage, errors, count)

    def second_check(self) -> None:
        """Sender-side checks once the partner sequence is back in hand.

        Order: verify the last relay's rotation marks, retire every remaining
        marked pair (the markers announce them), run the k-pair correlation
        check, then convert j pairs into decoys by measuring their lead half.
        """
        self._advance("routed", "run the sender's checks", "second_checked")
        if self.agents >= 3:
            self._verify_marks(self.agents - 1, SENDER)
            self._retire_marks()
        records = self._sample_active(self.counts.k, "second_check")
        errors = self._check_pairs("second_check", records, SENDER, PairStatus.SECOND_CHECK)
        self._abort_if("second_check", errors, len(records))
        self._make_decoys()

    def _retire_marks(self) -> None:
        leftovers = [p for p in self.pairs if p.status is PairStatus.ACTIVE and p.marked_by]
        by_marker: dict[int, list[int]] = {}
        for pair in leftovers:
            by_marker.setdefault(pair.marked_by, []).append(pair.index)
            pair.status = PairStatus.MARK_DISCARDED
            self._discard(pair.partner_wire)
            self._discard(pair.lead_wire)
            pair.partner_wire = None
            pair.lead_wire = None
        for marker in sorted(by_marker):
            self.transcript.publish(
                "second_check", agent_name(marker), "check",
                "remaining mark positions",
                {"positions": by_marker[marker]},
                len(by_marker[marker]) * self._pos_bits,
            )

    def _make_decoys(self) -> None:
        """Measure the lead half of j pairs; their partners become decoys."""
        records = self._sample_active(self.counts.j, "decoy conversion")
        if records:
            self.transcript.publish(
                "second_check", SENDER, "check", "decoy source positions",
                {"positions": [p.index for p in records]},
                len(records) * self._pos_bits,
            )
            self._publish_entry_disclosures("second_check", records)
        for n, pair in enumerate(records):
            tracker = FrameTracker.fold(pair.partner_entries)
            basis = self.rng.basis()
            lead_bit = self.register.measure(pair.lead_wire, basis, self.rng)
            expected = lead_bit if outcomes_equal(tracker.bell_kind, basis) else 1 - lead_bit
            pair.status = PairStatus.DECOY_SOURCE
            if n < self.counts.decoys:
                self.decoys.append(
                    DecoyRecord(
                        decoy_id=n,
                        origin_pair=pair.index,
                        wire=pair.partner_wire,
                        basis=basis,
                        expected_bit=expected,
                    )
                )
            else:
                self._discard(pair.partner_wire)
            pair.partner_wire = None

    def deliver_partner(self) -> None:
        """Send surviving partner halves plus planted decoys to the last agent."""
        self._advance("second_checked", "deliver the partner sequence", "partner_delivered")
        receiver = agent_name(self.agents)
        lost = []
        for pair in self._active():
            result = self._transmit(
                "partner_deliver", pair.partner_wire, pair.index,
                history=pair.partner_entries,
            )
            self._transmitted.add(("partner", pair.index))
            if result.status == LOST:
                pair.status = PairStatus.LOST
                pair.lost_leg = "partner_deliver"
                pair.partner_wire = None
                lost.append(pair.index)
                self._discard(pair.lead_wire)
                pair.lead_wire = None
            else:
                pair.partner_wire = result.wire
        for decoy in self.decoys:
            result = self._transmit(
                "partner_deliver", decoy.wire, self.config.n_pairs + decoy.decoy_id
            )
            self._transmitted.add(("partner", decoy.origin_pair))
            if result.status == LOST:
                decoy.lost = True
                decoy.wire = None
                lost.append(f"decoy_slot_{decoy.decoy_id}")
            else:
                decoy.wire = result.wire
        self.transcript.send(
            "partner_deliver", SENDER, "partner sequence with decoys",
            {"decoys": len(self.decoys)},
        )
        self._announce_lost("partner_deliver", receiver, lost)

    def decoy_check(self) -> None:
        """Receiver measures the planted decoys in the disclosed bases."""
        self._advance("partner_delivered", "run the decoy check", "decoy_checked")
        receiver = agent_name(self.agents)
        survivors = [d for d in self.decoys if not d.lost]
        if survivors:
            self.transcript.publish(
                "decoy_check", SENDER, "check", "decoy positions and bases",
                {
                    "decoys": {
                        str(d.decoy_id): {"basis": d.basis.value, "expected": d.expected_bit}
                        for d in survivors
                    }
                },
                len(survivors) * (self._pos_bits + 2),
            )
        errors = 0
        outcomes: dict[str, int] = {}
        for decoy in survivors:
            bit = self.register.measure(decoy.wire, decoy.basis, self.rng)
            decoy.measured_bit = bit
            decoy.wire = None
            outcomes[str(decoy.decoy_id)] = bit
            if bit != decoy.expected_bit:
                errors += 1
        if survivors:
            self.transcript.publish(
                "decoy_check", receiver, "check", "decoy outcomes",
                {"outcomes": outcomes}, len(survivors),
            )
        self._abort_if("decoy_check", errors, len(survivors))

    def encode_payload(self) -> None:
        """Sender folds final samples and the message into the lead halves.

        Guarded: refuses to run before the partner sequence has returned and
        every sender-side check has passed.
        """
        self._advance("decoy_checked", "encode the payload", "encoded")
        samples = self._sample_active(self.counts.final_samples, "final samples")
        for pair in samples:
            pair.lead_op = self.rng.pauli()
            self.register.apply_pauli(pair.lead_wire, pair.lead_op)
            pair.status = PairStatus.FINAL_SAMPLE

        available = self._active()
        mode, value = parse_payload(self.config.payload)
        capacity = 2 * len(available)
        if mode == "random":
            length = capacity if value is None else value
            if length > capacity:
                raise ConfigError(
                    f"payload of {length} bits no longer fits: "
                    f"{len(available)} pairs remain after losses and checks"
                )
            bits = self.rng.bits(length)
        else:
            bits = value
            if len(bits) > capacity:
                raise ConfigError(
                    f"payload of {len(bits)} bits no longer fits: "
                    f"{len(available)} pairs remain after losses and checks"
                )
        needed = len(bits) // 2
        for i, pair in enumerate(available):
            if i < needed:
                chunk = bits[2 * i : 2 * i + 2]
                pair.lead_op = op_of(bits_code(chunk))
                pair.message_bits = chunk
                pair.status = PairStatus.PAYLOAD
            else:
                pair.lead_op = self.rng.pauli()
                pair.status = PairStatus.PADDING
            self.register.apply_pauli(pair.lead_wire, pair.lead_op)
        self.payload_sent = bits
        self.transcript.note(
            "encode", SENDER, "encoded payload",
            {"bits": len(bits), "samples": len(samples)},
        )

    def deliver_lead(self) -> None:
        """Send the encoded lead sequence to the last agent."""
        self._advance("encoded", "deliver the lead sequence", "lead_delivered")
        receiver = agent_name(self.agents)
        lost = []
        sendable = [
            p for p in self.pairs
            if p.status in (PairStatus.FINAL_SAMPLE, PairStatus.PAYLOAD, PairStatus.PADDING)
        ]
        for pair in sendable:
            result = self._transmit("lead_deliver", pair.lead_wire, pair.index)
            self._transmitted.add(("lead", pair.index))
            if result.status == LOST:
                pair.status = PairStatus.LOST
                pair.lost_leg = "lead_deliver"
                pair.lead_wire = None
                lost.append(pair.index)
                self._discard(pair.partner_wire)
                pair.partner_wire = None
            else:
                pair.lead_wire = result.wire
        self.transcript.send("lead_deliver", SENDER, "encoded lead sequence", {})
        self._announce_lost("lead_deliver", receiver, lost)
        length = len(self._effective_payload())
        self.transcript.publish(
            "lead_deliver", SENDER, "control", "payload length",
            {"bits_encoded": length},
            max(1, math.ceil(math.log2(2 * self.config.n_pairs + 1))),
        )

    def _effective_payload(self) -> str:
        return "".join(
            p.message_bits
            for p in self.pairs
            if p.status is PairStatus.PAYLOAD and p.message_bits is not None
        )

    def joint_measurement(self) -> None:
        """Last agent Bell-measures every delivered pair."""
        self._advance("lead_delivered", "measure the pairs jointly", "measured")
        receiver = agent_name(self.agents)
        measured = 0
        for pair in self.pairs:
            if pair.status in (PairStatus.FINAL_SAMPLE, PairStatus.PAYLOAD, PairStatus.PADDING):
                pair.outcome = self.register.bell_measure(
                    pair.lead_wire, pair.partner_wire, self.rng
                )
                pair.lead_wire = None
                pair.partner_wire = None
                measured += 1
        self.transcript.note(
            "joint_measurement", receiver, "joint measurement done", {"pairs": measured}
        )

    def final_check(self) -> None:
        """Compare sample outcomes against the disclosed operation codes."""
        self._advance("measured", "run the final sample check", "final_checked")
        receiver = agent_name(self.agents)
        samples = [p for p in self.pairs if p.status is PairStatus.FINAL_SAMPLE]
        if samples:
            self.transcript.publish(
                "final_check", SENDER, "check", "final sample positions and operations",
                {
                    "samples": {
                        str(p.index): code_bits(code_of(p.lead_op)) for p in samples
                    }
                },
                len(samples) * (self._pos_bits + 2),
            )
            self._publish_entry_disclosures("final_check", samples)
            self.transcript.publish(
                "final_check", receiver, "check", "final sample outcomes",
                {"outcomes": {str(p.index): p.outcome.value for p in samples}},
                len(samples) * 2,
            )
        errors = 0
        for pair in samples:
            if frame_code(pair.outcome) != pair.honest_code():
                errors += 1
        self._abort_if("final_check", errors, len(samples))

    def decode(self) -> str:
        """Agents pool outcomes and disclosed codes to read the message."""
        self._advance("final_checked", "decode the payload", "done")
        receiver = agent_name(self.agents)
        slots = [
            p for p in self.pairs
            if p.status in (PairStatus.PAYLOAD, PairStatus.PADDING)
        ]
        slots.sort(key=lambda p: p.index)
        self.transcript.publish(
            "decode", receiver, "disclosure", "payload outcomes",
            {"outcomes": {str(p.index): p.outcome.value for p in slots}},
            len(slots) * 2,
        )
        per_agent: dict[str, dict[str, str]] = {}
        for pair in slots:
            codes: dict[str, int] = {}
            for entry, actor in zip(pair.partner_entries, pair.entry_actors):
                if entry == HADAMARD_MARK:
                    continue
                codes[actor] = codes.get(actor, 0) ^ code_of(entry)
            for actor, code in codes.items():
                per_agent.setdefault(actor, {})[str(pair.index)] = code_bits(code)
        for actor in sorted(per_agent):
            self.transcript.publish(
                "decode", actor, "disclosure", "payload operation disclosure",
                {"codes": per_agent[actor]}, len(per_agent[actor]) * 2,
            )
        length = len(self._effective_payload())
        decoded = []
        for pair in slots:
            code = frame_code(pair.outcome) ^ pair.composed_partner_code()
            decoded.append(code_bits(code))
        recovered = "".join(decoded)[:length]
        self.transcript.note("decode", receiver, "recovered", {"bits": len(recovered)})
        return recovered

    # ------------------------------------------------------------------ runner

    def run(self) -> RunResult:
        verdict = "completed"
        abort_stage = None
        abort_rate = None
        recovered: str | None = None
        try:
            self.prepare()
            self.distribute_lead()
            self.first_check()
            self.route_partner()
            self.second_check()
            self.deliver_partner()
            self.decoy_check()
            recovered = self._payload_phase()
        except _Abort as abort:
            verdict = "aborted"
            abort_stage = abort.stage
            abort_rate = abort.rate
        return self._finish(verdict, abort_stage, abort_rate, recovered)

    def _payload_phase(self) -> str | None:
        """Everything after the distribution checks; overridden for sharing."""
        self.encode_payload()
        self.deliver_lead()
        self.joint_measurement()
        self.final_check()
        return self.decode()

    def _finish(
        self,
        verdict: str,
        abort_stage: str | None,
        abort_rate: float | None,
        recovered: str | None,
    ) -> RunResult:
        sent = self._effective_payload() if verdict == "completed" else self.payload_sent
        if verdict != "completed":
            match = None
        elif self._fidelity is not None:
            match = self._fidelity >= 1.0 - 1e-9
        else:
            match = recovered == sent
        counts = self._count_summary(recovered)
        outcome = RunOutcome(
            protocol=self.config.protocol,
            seed=self.config.seed,
            verdict=verdict,
            abort_stage=abort_stage,
            abort_rate=abort_rate,
            error_rates=dict(self.error_rates),
            recovered=recovered,
            payload_bits=sent,
            match=match,
            fidelity=self._fidelity,
            counts=counts,
        )
        self.transcript.header.update(
            {
                "verdict": verdict,
                "abort_stage": abort_stage,
                "recovered": recovered,
                "payload_bits": sent,
                "fidelity": self._fidelity,
            }
        )
        report = self._adversary_report(verdict)
        return RunResult(
            outcome=outcome,
            transcript=self.transcript,
            pairs=self.pairs,
            decoys=self.decoys,
            adversary=report,
        )

    def _count_summary(self, recovered: str | None) -> dict:
        payload_pairs = sum(1 for p in self.pairs if p.status is PairStatus.PAYLOAD)
        by_class = self.transcript.bits_by_class()
        b_t_strict = sum(by_class.values())
        return {
            "n_pairs": self.config.n_pairs,
            "n_agents": self.agents,
            "n_lost": sum(1 for p in self.pairs if p.status is PairStatus.LOST),
            "payload_pairs": payload_pairs,
            "q_u": 2 * payload_pairs,
            "q_t": len(self._transmitted),
            "b_m": len(recovered) if recovered is not None else 0,
            "b_t_lenient": by_class["outcome"],
            "b_t_strict": b_t_strict,
            "bits_check": by_class["check"],
            "bits_control": by_class["control"],
            "bits_disclosure": by_class["disclosure"],
            "bits_outcome": by_class["outcome"],
        }

    def _adversary_report(self, verdict: str) -> AdversaryReport:
        report = AdversaryReport(
            captured_slots=len(self.adversary_state.captured),
            intercept_count=len(self.adversary_state.intercepts),
            leaked_ops=dict(self.adversary_state.leaked_ops),
            tamper_log=list(self._tamper),
        )
        if verdict == "completed" and self.adversary_state.captured:
            published = {
                p.index: p.outcome for p in self.pairs if p.outcome is not None
            }
            report.learned = self.adversary_state.learn_from_outcomes(
                self.register, published, self.rng
            )
        return report


def run_secret_splitting(config: ProtocolConfig, rng: RandomSource | None = None) -> RunResult:
    """Run one secret-splitting execution from a validated configuration."""
    return SecretSplittingRun(config, rng).run()


def run_three_party(config: ProtocolConfig) -> RunResult:
    """Sender, preparing agent, measuring agent: the two-agent special case."""
    if config.agents != 2:
        raise ConfigError("run_three_party requires exactly 2 agents")
    return run_secret_splitting(config)


def run_n_party(config: ProtocolConfig) -> RunResult:
    """Relay topology with at least one intermediate agent."""
    if config.agents < 3:
        raise ConfigError("run_n_party requires at least 3 agents")
    return run_secret_splitting(config)

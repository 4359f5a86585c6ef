"""Per-leg quantum channel model: loss, depolarizing noise, adversaries.

Every photon that crosses a channel leg goes through ``transmit``, which
applies an else-chain of effects: loss first, then (if delivered) a possible
depolarizing error, and otherwise the configured adversary.  A channel with
all parameters zero and no adversary is exactly the identity and consumes no
randomness, so clean runs stay bit-for-bit stable when noise knobs are added
elsewhere.

Two adversaries are modeled.  Intercept-resend measures the transiting qubit
in a chosen basis and forwards the collapsed eigenstate — the textbook attack
that the pair-correlation checks are designed to catch.  The fake-signal
adversary substitutes every transiting photon with one half of a self-prepared
singlet, keeping both the genuine photon and the other fake half; after the
honest parties publish their joint-measurement outcomes, the adversary can
Bell-measure each kept pair and combine the two outcomes to learn the honest
parties' composed encoding operation.  Loss is modeled as measure-and-discard
(in Z) rather than a true partial trace, which keeps the engine pure-state;
downstream protocol statistics are unaffected because lost slots never
re-enter the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core import RandomSource
from .frame import Basis, BellKind, PauliOp, code_of, frame_code, op_of
from .register import WireRegister


class ConfigError(ValueError):
    """A run configuration is inconsistent or unsatisfiable."""


class AdversaryKind(Enum):
    NONE = "none"
    INTERCEPT_RESEND = "intercept_resend"
    FAKE_BELL = "fake_bell"


_BASIS_STRATEGIES = ("random", "z", "x")


@dataclass(frozen=True)
class AdversarySpec:
    """Which adversary sits on a channel leg and how it behaves.

    ``basis_strategy`` applies to intercept-resend only: "random" draws Z or X
    per photon, "z"/"x" fix the measurement basis.  ``operation_leak`` is an
    abstract stand-in for hardware-probe attacks: when set, the adversary is
    handed the full operation history of every photon crossing the leg.  It
    models an information leak only — no quantum state is touched.
    """

    kind: AdversaryKind = AdversaryKind.NONE
    basis_strategy: str = "random"
    operation_leak: bool = False

    def __post_init__(self) -> None:
        if self.basis_strategy not in _BASIS_STRATEGIES:
            raise ConfigError(
                f"basis_strategy must be one of {_BASIS_STRATEGIES}, got {self.basis_strategy!r}"
            )

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "basis_strategy": self.basis_strategy,
            "operation_leak": self.operation_leak,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "AdversarySpec":
        try:
            kind = AdversaryKind(raw.get("kind", "none"))
        except ValueError:
            raise ConfigError(f"unknown adversary kind {raw.get('kind')!r}") from None
        return cls(
            kind=kind,
            basis_strategy=raw.get("basis_strategy", "random"),
            operation_leak=bool(raw.get("operation_leak", False)),
        )


NO_ADVERSARY = AdversarySpec()


@dataclass(frozen=True)
class ChannelModel:
    """Loss/noise/adversary configuration for one channel leg."""

    loss_prob: float = 0.0
    depolarize_prob: float = 0.0
    adversary: AdversarySpec = NO_ADVERSARY

    def __post_init__(self) -> None:
        for name in ("loss_prob", "depolarize_prob"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value!r}")

    @property
    def is_identity(self) -> bool:
        return (
            self.loss_prob == 0.0
            and self.depolarize_prob == 0.0
            and self.adversary.kind is AdversaryKind.NONE
        )

    def to_dict(self) -> dict:
        return {
            "loss_prob": self.loss_prob,
            "depolarize_prob": self.depolarize_prob,
            "adversary": self.adversary.to_dict(),
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ChannelModel":
        adversary = raw.get("adversary", {})
        if not isinstance(adversary, dict):
            raise ConfigError("channel adversary must be an object")
        return cls(
            loss_prob=float(raw.get("loss_prob", 0.0)),
            depolarize_prob=float(raw.get("depolarize_prob", 0.0)),
            adversary=AdversarySpec.from_dict(adversary),
        )


CLEAN_CHANNEL = ChannelModel()

DELIVERED = "delivered"
LOST = "lost"


@dataclass
class TransmitResult:
    """What the channel did to one photon.

    ``wire`` is the wire id the receiver ends up holding (it differs from the
    input wire after a fake-signal substitution) and is None for lost photons.
    ``events`` is the tamper log: what the adversary did and learned.  It is
    simulation-side truth for analysis, never part of the honest transcript.
    """

    status: str
    wire: int | None
    events: list[str] = field(default_factory=list)


@dataclass
class CapturedPair:
    """One fake-signal substitution: what the adversary kept."""

    tag: int
    genuine_wire: int
    kept_wire: int


class AdversaryState:
    """Private registers and notes of the adversary across one protocol run.

    ``reservoir`` bounds how many singlet pairs the fake-signal adversary can
    prepare; None means unbounded.  ``captured`` holds one entry per
    substitution, ``intercepts`` one (tag, basis, bit) per intercept-resend
    measurement, and ``leaked_ops`` the operation histories harvested through
    a leg with ``operation_leak`` set.
    """

    def __init__(self, reservoir: int | None = None) -> None:
        if reservoir is not None and reservoir < 0:
            raise ConfigError(f"adversary reservoir must be >= 0, got {reservoir}")
        self.reservoir = reservoir
        self.captured: list[CapturedPair] = []
        self.intercepts: list[tuple[int, Basis, int]] = []
        self.leaked_ops: dict[int, list] = {}

    def _take_pair(self) -> None:
        if self.reservoir is not None:
            if self.reservoir == 0:
                raise ConfigError("fake-signal adversary exhausted its pair reservoir")
            self.reservoir -= 1

    def learn_from_outcomes(
        self,
        register: WireRegister,
        published: dict[int, BellKind],
        rng: RandomSource,
    ) -> dict[int, PauliOp]:
        """Combine kept pairs with published outcomes to infer composed ops.

        For each substituted slot whose joint-measurement outcome was
        published, the adversary Bell-measures (genuine photon, kept fake
        half); relaying through two singlets makes the two outcome labels
        differ by exactly the honest parties' composed operation, so XOR of
        the two frame codes recovers it.
        """
        learned: dict[int, PauliOp] = {}
        for cap in self.captured:
            if cap.tag not in published:
                continue
            own = register.bell_measure(cap.genuine_wire, cap.kept_wire, rng)
            learned[cap.tag] = op_of(frame_code(own) ^ frame_code(published[cap.tag]))
        return learned


def intercept_resend(
    register: WireRegister,
    wire: int,
    strategy: str,
    rng: RandomSource,
) -> tuple[int, Basis]:
    """Measure a transiting wire and forward the collapsed eigenstate.

    Returns (learned bit, basis used).  The wire keeps its id: measurement in
    the registry leaves the qubit re-prepared in the measured eigenstate,
    which is exactly the resend step.
    """
    if strategy == "random":
        basis = rng.basis()
    elif strategy == "z":
        basis = Basis.Z
    elif strategy == "x":
        basis = Basis.X
    else:
        raise ConfigError(f"unknown intercept basis strategy {strategy!r}")
    bit = register.measure(wire, basis, rng)
    return bit, basis


def fake_bell_substitution(
    register: WireRegister,
    wire: int,
    state: AdversaryState,
    tag: int,
) -> int:
    """Swap a transiting photon for half of a fresh adversary singlet.

    The genuine photon and the other fake half go into the adversary's
    registers; the returned wire id is what the receiver gets.
    """
    state._take_pair()
    kept, forwarded = register.alloc_bell(BellKind.PSI_MINUS)
    state.captured.append(CapturedPair(tag=tag, genuine_wire=wire, kept_wire=kept))
    return forwarded


def transmit(
    register: WireRegister,
    wire: int,
    model: ChannelModel,
    rng: RandomSource,
    adversary_state: AdversaryState | None = None,
    tag: int = -1,
    op_history: list | None = None,
) -> TransmitResult:
    """Send one photon across a channel leg.

    Effects form an else-chain: a lost photon sees no noise or adversary, and
    a photon that took a depolarizing error is not additionally attacked.
    ``tag`` identifies the slot (pair index or decoy id) in the tamper log and
    the adversary's notes; ``op_history`` is the operation record that a leg
    with ``operation_leak`` hands to the adversary.
    """
    spec = model.adversary
    if spec.operation_leak and adversary_state is not None and op_history:
        adversary_state.leaked_ops[tag] = list(op_history)

    if model.loss_prob > 0.0 and rng.random() < model.loss_prob:
        register.measure(wire, Basis.Z, rng)  # trace out; record discarded
        return TransmitResult(LOST, None, [f"slot {tag}: photon lost"])

    if model.depolarize_prob > 0.0 and rng.random() < model.depolarize_prob:
        error = rng.choice((PauliOp.Z, PauliOp.X, PauliOp.Y))
        register.apply_pauli(wire, error)
        return TransmitResult(DELIVERED, wire, [f"slot {tag}: depolarizing error {error!r}"])

    if spec.kind is AdversaryKind.INTERCEPT_RESEND:
        if adversary_state is None:
            raise ConfigError("intercept-resend adversary needs an AdversaryState")
        bit, basis = intercept_resend(register, wire, spec.basis_strategy, rng)
        adversary_state.intercepts.append((tag, basis, bit))
        return TransmitResult(
            DELIVERED, wire, [f"slot {tag}: intercepted in {basis!r}, learned {bit}"]
        )

    if spec.kind is AdversaryKind.FAKE_BELL:
        if adversary_state is None:
            raise ConfigError("fake-signal adversary needs an AdversaryState")
        forwarded = fake_bell_substitution(register, wire, adversary_state, tag)
        return TransmitResult(
            DELIVERED, forwarded, [f"slot {tag}: substituted wire {wire} -> {forwarded}"]
        )

    return TransmitResult(DELIVERED, wire, [])


def composed_code(ops) -> int:
    """XOR of the two-bit codes of an operation sequence (ignores marks)."""
    total = 0
    for op in ops:
        if isinstance(op, PauliOp):
            total ^= code_of(op)
    return total

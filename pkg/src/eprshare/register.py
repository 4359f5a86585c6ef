"""Wire registry: an address space of qubits spread over small systems.

Protocol runs juggle hundreds of entangled pairs, but the pairs stay mutually
unentangled, so simulating them in one joint vector would be absurd.  The
registry assigns every allocated qubit a stable wire id and tracks which
disjoint system (StateVector plus wire ordering) currently holds it.  Systems
merge lazily when an operation spans two of them (a Bell measurement across
pairs, for example) and split eagerly when a measurement leaves a qubit or a
pair in a known product state, so system sizes stay near the protocol's true
entanglement width instead of growing monotonically.

All mutation goes through the registry so wire ids stay valid across merges,
splits, and adversarial substitution of transit photons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import core
from .core import (
    BELL_AMPS,
    DEFAULT_MAX_QUBITS,
    InvalidStateError,
    RandomSource,
    StateVector,
)
from .frame import Basis, BellKind, PauliOp


@dataclass
class _System:
    state: StateVector
    wires: list[int]


class WireRegister:
    """Allocator and operation router for qubit wires."""

    def __init__(self, max_qubits: int = DEFAULT_MAX_QUBITS) -> None:
        self.max_qubits = max_qubits
        self._systems: dict[int, _System] = {}
        self._home: dict[int, int] = {}
        self._next_wire = 0
        self._next_system = 0
        #: High-water mark of system width, including transient merges that a
        #: measurement immediately splits apart again.
        self.peak_width = 0

    # -- allocation and lookup -------------------------------------------------

    def alloc(self, state: StateVector) -> list[int]:
        """Register a fresh system; returns its wire ids in qubit order."""
        wires = [self._next_wire + i for i in range(state.n_qubits)]
        self._next_wire += state.n_qubits
        sys_id = self._next_system
        self._next_system += 1
        self._systems[sys_id] = _System(state, list(wires))
        for w in wires:
            self._home[w] = sys_id
        self.peak_width = max(self.peak_width, state.n_qubits)
        return wires

    def alloc_bell(self, kind: BellKind) -> tuple[int, int]:
        a, b = self.alloc(core.make_bell(kind))
        return a, b

    def _locate(self, wire: int) -> tuple[_System, int]:
        if wire not in self._home:
            raise KeyError(f"unknown wire {wire}")
        system = self._systems[self._home[wire]]
        return system, system.wires.index(wire)

    def system_wires(self, wire: int) -> list[int]:
        """Wires sharing a system with ``wire`` (including it), in axis order."""
        system, _ = self._locate(wire)
        return list(system.wires)

    def state_of(self, wires: list[int]) -> StateVector:
        """State of one complete system, axes permuted to the given wire order.

        The wires must be exactly the members of a single system; asking for a
        subset would silently discard entanglement, so it raises instead.
        """
        if not wires:
            raise ValueError("state_of needs at least one wire")
        system, _ = self._locate(wires[0])
        if sorted(wires) != sorted(system.wires):
            raise ValueError("wires must list one whole system exactly")
        axes = [system.wires.index(w) for w in wires]
        t = np.transpose(system.state.tensor_view(), axes)
        return StateVector(t.reshape(-1), system.state.n_qubits)

    # -- merging and splitting -------------------------------------------------

    def _merge(self, wa: int, wb: int) -> _System:
        sys_a, _ = self._locate(wa)
        sys_b, _ = self._locate(wb)
        if sys_a is sys_b:
            return sys_a
        joined = core.tensor(sys_a.state, sys_b.state, self.max_qubits)
        id_a = self._home[wa]
        id_b = self._home[wb]
        merged = _System(joined, sys_a.wires + sys_b.wires)
        del self._systems[id_b]
        self._systems[id_a] = merged
        for w in merged.wires:
            self._home[w] = id_a
        self.peak_width = max(self.peak_width, joined.n_qubits)
        return merged

    def _split(self, system: _System, axes: list[int], new_wires: list[int],
               new_state: StateVector, remainder: np.ndarray) -> None:
        """Detach axes (known to hold ``new_state``) into their own system."""
        keep_wires = [w for i, w in enumerate(system.wires) if i not in axes]
        old_id = self._home[new_wires[0]]
        new_id = self._next_system
        self._next_system += 1
        self._systems[new_id] = _System(new_state, new_wires)
        for w in new_wires:
            self._home[w] = new_id
        if keep_wires:
            norm = float(np.linalg.norm(remainder))
            if norm <= 0:
                raise InvalidStateError("remainder vanished during factorization")
            self._systems[old_id] = _System(
                StateVector(remainder.reshape(-1) / norm, len(keep_wires)), keep_wires
            )
        else:
            del self._systems[old_id]

    # -- operations ------------------------------------------------------------

    def apply_pauli(self, wire: int, op: PauliOp) -> None:
        system, axis = self._locate(wire)
        system.state = core.apply_pauli(system.state, axis, op)

    def apply_hadamard(self, wire: int) -> None:
        system, axis = self._locate(wire)
        system.state = core.apply_hadamard(system.state, axis)

    def measure(self, wire: int, basis: Basis, rng: RandomSource) -> int:
        """Measure one wire; its qubit splits off into a 1-qubit eigenstate system."""
        system, axis = self._locate(wire)
        bit, remainder = core.measure_extract(system.state, axis, basis, rng)
        self._detach_measured(system, wire, axis, basis, bit, remainder)
        return bit

    def project_qubit(self, wire: int, basis: Basis, bit: int) -> float:
        """Force one wire onto a basis eigenstate; returns the Born probability."""
        system, axis = self._locate(wire)
        prob, remainder = core.project_extract(system.state, axis, basis, bit)
        if remainder is None:
            raise InvalidStateError("projection onto a zero-probability outcome")
        self._detach_measured(system, wire, axis, basis, bit, remainder)
        return prob

    def _detach_measured(self, system: _System, wire: int, axis: int, basis: Basis,
                         bit: int, remainder: np.ndarray) -> None:
        if system.state.n_qubits == 1:
            system.state = core.basis_eigenstate(basis, bit)
            return
        self._split(system, [axis], [wire], core.basis_eigenstate(basis, bit), remainder)

    def bell_measure(self, wa: int, wb: int, rng: RandomSource) -> BellKind:
        """Bell-basis measurement across any two wires, merging systems if needed.

        The measured pair splits off as its own 2-qubit system in the outcome
        Bell state; whatever it was entangled with stays behind renormalized.
        """
        if wa == wb:
            raise ValueError("Bell measurement needs two distinct wires")
        system = self._merge(wa, wb)
        kind, _ = core.bell_measure(
            system.state, system.wires.index(wa), system.wires.index(wb), rng
        )
        self._project_bell_pair(system, wa, wb, kind)
        return kind

    def project_bell(self, wa: int, wb: int, kind: BellKind) -> float:
        """Force a Bell outcome on two wires; returns the Born probability."""
        if wa == wb:
            raise ValueError("Bell measurement needs two distinct wires")
        system = self._merge(wa, wb)
        probs = core.bell_probabilities(
            system.state, system.wires.index(wa), system.wires.index(wb)
        )
        prob = probs[kind]
        if prob <= 1e-12:
            raise InvalidStateError(f"projection onto zero-probability outcome {kind!r}")
        self._project_bell_pair(system, wa, wb, kind)
        return prob

    def _project_bell_pair(self, system: _System, wa: int, wb: int, kind: BellKind) -> None:
        """Collapse (wa, wb) onto ``kind`` and detach them as a product pair."""
        ax_a = system.wires.index(wa)
        ax_b = system.wires.index(wb)
        if system.state.n_qubits == 2:
            state = core.make_bell(kind)
            if ax_a != 0:  # system stores (wb, wa); present amplitudes in that order
                state = StateVector(state.tensor_view().T.reshape(-1), 2)
            system.state = state
            return
        bra = BELL_AMPS[kind].reshape(2, 2).conj()
        remainder = np.tensordot(bra, system.state.tensor_view(), axes=([0, 1], [ax_a, ax_b]))
        self._split(system, [ax_a, ax_b], [wa, wb], core.make_bell(kind), remainder)

    # -- diagnostics -----------------------------------------------------------

    def n_systems(self) -> int:
        return len(self._systems)

    def largest_system(self) -> int:
        return max((s.state.n_qubits for s in self._systems.values()), default=0)

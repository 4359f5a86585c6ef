"""Symbolic algebra of the four one-qubit encoding operations.

The protocols in this package encode classical information by applying one of
four local unitaries to half of an entangled pair: the identity, the phase
flip (sigma_z), the bit flip (sigma_x), and the combined flip written here as
the real matrix [[0, 1], [-1, 0]], which equals sigma_z . sigma_x and is
sigma_y up to a global factor of i.  Modulo global phase these four form the
group Z2 x Z2: every element is self-inverse and composition is commutative.
Each operation carries an agreed two-bit label chosen so that composition is
plain XOR on labels, which is what makes message recovery a table lookup.

Everything in this module is symbolic bookkeeping over enums plus the 2x2
matrices themselves; no state vectors appear here.  The numerical engine in
``core`` consumes the matrices, and the protocol modules consume the group
tables.  The derived tables (Bell-state transfer, receiver corrections) are
cross-checked against brute-force matrix/statevector oracles in the tests.
"""

from __future__ import annotations

from enum import Enum

import numpy as np


class PauliOp(Enum):
    """The four encoding operations, named by their action on a qubit."""

    I = "I"
    Z = "Z"
    X = "X"
    Y = "Y"

    def __repr__(self) -> str:  # compact in transcripts and test output
        return self.value


class BellKind(Enum):
    """The four Bell states of a qubit pair.

    Amplitude conventions (big-endian basis order 00, 01, 10, 11):
    PHI_PLUS  = (|00> + |11>)/sqrt(2)
    PHI_MINUS = (|00> - |11>)/sqrt(2)
    PSI_PLUS  = (|01> + |10>)/sqrt(2)
    PSI_MINUS = (|01> - |10>)/sqrt(2)
    """

    PHI_PLUS = "phi+"
    PHI_MINUS = "phi-"
    PSI_PLUS = "psi+"
    PSI_MINUS = "psi-"

    def __repr__(self) -> str:
        return self.value


class Basis(Enum):
    """Single-qubit measurement bases.

    Z eigenvectors are |0>, |1>; X eigenvectors are (|0> +/- |1>)/sqrt(2),
    with outcome bit 0 for the + eigenvector and 1 for the - eigenvector.
    """

    Z = "Z"
    X = "X"

    def __repr__(self) -> str:
        return self.value


# 2x2 matrices of the encoding operations.  Y is sigma_z @ sigma_x exactly
# (not just up to phase), so matrix composition of any two table entries
# lands back on a table entry up to a real sign or factor of +/-1.
MATRICES: dict[PauliOp, np.ndarray] = {
    PauliOp.I: np.eye(2, dtype=np.complex128),
    PauliOp.Z: np.array([[1, 0], [0, -1]], dtype=np.complex128),
    PauliOp.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    PauliOp.Y: np.array([[0, 1], [-1, 0]], dtype=np.complex128),
}

HADAMARD = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2.0)

# Agreed two-bit labels.  Encoded as an int 0..3 whose high bit and low bit
# are the published bit pair.  The map is a group isomorphism onto (Z2)^2:
# label(a.b) == label(a) XOR label(b), which the tests verify exhaustively
# against the matrix products.
_CODE_OF = {PauliOp.I: 0b00, PauliOp.Z: 0b11, PauliOp.X: 0b01, PauliOp.Y: 0b10}
_OP_OF = {v: k for k, v in _CODE_OF.items()}


def code_of(op: PauliOp) -> int:
    """Two-bit label of an encoding op, packed as an int in 0..3."""
    return _CODE_OF[op]


def op_of(code: int) -> PauliOp:
    """Encoding op for a two-bit label in 0..3."""
    if code not in _OP_OF:
        raise ValueError(f"two-bit code must be in 0..3, got {code!r}")
    return _OP_OF[code]


def code_bits(code: int) -> str:
    """Render a two-bit label as a bit string, high bit first."""
    if not 0 <= code <= 3:
        raise ValueError(f"two-bit code must be in 0..3, got {code!r}")
    return format(code, "02b")


def bits_code(bits: str) -> int:
    """Parse a two-character bit string into a two-bit label."""
    if len(bits) != 2 or any(ch not in "01" for ch in bits):
        raise ValueError(f"expected two bits, got {bits!r}")
    return int(bits, 2)


def compose(a: PauliOp, b: PauliOp) -> PauliOp:
    """Group product of two encoding ops, quotiented by global phase."""
    return _OP_OF[_CODE_OF[a] ^ _CODE_OF[b]]


def compose_all(ops) -> PauliOp:
    """Fold ``compose`` over an iterable of ops (identity for empty input)."""
    code = 0
    for op in ops:
        code ^= _CODE_OF[op]
    return _OP_OF[code]


def inverse(op: PauliOp) -> PauliOp:
    """Inverse modulo global phase; every encoding op is self-inverse."""
    return op


# Bell-frame labels: the unique op that maps the singlet onto each kind.
# Applying op u to either qubit of PSI_MINUS yields (up to global phase) the
# Bell state with frame label code_of(u); applying u to one qubit and v to
# the other yields the state labelled code_of(u) XOR code_of(v).
_FRAME_OF = {
    BellKind.PSI_MINUS: 0b00,
    BellKind.PSI_PLUS: 0b11,
    BellKind.PHI_MINUS: 0b01,
    BellKind.PHI_PLUS: 0b10,
}
_KIND_OF_FRAME = {v: k for k, v in _FRAME_OF.items()}


def frame_code(kind: BellKind) -> int:
    """Two-bit frame label of a Bell kind relative to the singlet."""
    return _FRAME_OF[kind]


def kind_of_frame(code: int) -> BellKind:
    """Bell kind whose frame label is ``code``."""
    if code not in _KIND_OF_FRAME:
        raise ValueError(f"frame code must be in 0..3, got {code!r}")
    return _KIND_OF_FRAME[code]


def bell_after(start: BellKind, op: PauliOp) -> BellKind:
    """Bell kind after applying ``op`` to the first qubit of ``start``.

    Global phase is discarded; acting on the second qubit instead gives the
    same kind, which the statevector oracle in the tests confirms.
    """
    return _KIND_OF_FRAME[_FRAME_OF[start] ^ _CODE_OF[op]]


def correction_for(outcome: BellKind) -> PauliOp:
    """Receiver correction for a Bell outcome on singlet-based channels.

    This is the unique op with ``bell_after(PSI_MINUS, op) == outcome``;
    applying it to the receiver qubit restores the teleported state.
    """
    return _OP_OF[_FRAME_OF[outcome]]


def correction_pair(o1: BellKind, o2: BellKind) -> tuple[PauliOp, PauliOp]:
    """Per-qubit corrections for a two-pair joint measurement."""
    return correction_for(o1), correction_for(o2)


def other_basis(basis: Basis) -> Basis:
    """The complementary measurement basis."""
    return Basis.X if basis is Basis.Z else Basis.Z


def hadamard_conjugate(op: PauliOp) -> PauliOp:
    """H . op . H modulo global phase: swaps Z and X, fixes I and Y."""
    if op is PauliOp.Z:
        return PauliOp.X
    if op is PauliOp.X:
        return PauliOp.Z
    return op


def flips_outcome(op: PauliOp, basis: Basis) -> bool:
    """Whether ``op`` maps ``basis`` eigenstates onto the opposite eigenstate.

    In Z: X and Y flip the outcome bit.  In X: Z and Y flip it.  Used to
    predict eigenstate photons and pair correlations after disclosed ops.
    """
    if basis is Basis.Z:
        return op in (PauliOp.X, PauliOp.Y)
    return op in (PauliOp.Z, PauliOp.Y)


def outcomes_equal(kind: BellKind, basis: Basis) -> bool:
    """Expected same-basis outcome parity for a Bell pair.

    True means both qubits yield the same bit.  In Z the phi states are
    correlated and the psi states anticorrelated; in X the plus states are
    correlated and the minus states anticorrelated.  The singlet is the only
    kind anticorrelated in both bases, which is what the first transmission
    check relies on.
    """
    if basis is Basis.Z:
        return kind in (BellKind.PHI_PLUS, BellKind.PHI_MINUS)
    return kind in (BellKind.PHI_PLUS, BellKind.PSI_PLUS)


HADAMARD_MARK = "H"


class FrameTracker:
    """Folds a recorded op/mark history on one pair half into (parity, op).

    A photon that accumulated Pauli ops interleaved with Hadamard marks is,
    up to global phase, H^parity . net_op applied to its original half of the
    singlet.  Ops recorded after a mark are conjugated through it, so the
    tracker lets checkers predict correlations in the rotated frame without
    touching amplitudes.
    """

    def __init__(self) -> None:
        self.hadamard_parity = 0
        self.net_op = PauliOp.I

    def record(self, entry) -> None:
        """Fold one history entry: a PauliOp or the HADAMARD_MARK sentinel."""
        if entry == HADAMARD_MARK:
            self.hadamard_parity ^= 1
        else:
            op = entry if self.hadamard_parity == 0 else hadamard_conjugate(entry)
            self.net_op = compose(op, self.net_op)

    @classmethod
    def fold(cls, entries) -> "FrameTracker":
        tracker = cls()
        for entry in entries:
            tracker.record(entry)
        return tracker

    @property
    def bell_kind(self) -> BellKind:
        """Underlying Bell kind of the pair once marks are unwound."""
        return _KIND_OF_FRAME[_CODE_OF[self.net_op]]

"""Dense statevector engine for small multi-qubit systems.

States are vectors of 2**n complex amplitudes with big-endian qubit indexing:
qubit 0 owns the most significant bit of the basis index, so for two qubits
the basis order is 00, 01, 10, 11 and reshaping to shape (2,) * n makes qubit
q exactly axis q.  All operations are value-semantic: they return fresh
StateVector instances and never mutate their inputs, which keeps concurrent
analysis of intermediate states safe.

The engine is deliberately minimal: Bell-pair construction, tensor products,
the four encoding ops plus Hadamard, projective single-qubit measurements in
Z or X, projective Bell-basis measurements on a qubit pair, fidelity, and
Haar-random state draws.  Capacity is capped (default 16 qubits) so a bug in
protocol bookkeeping fails loudly instead of allocating gigabytes.

Randomness comes from RandomSource, a thin wrapper over numpy's counter-based
Philox generator: one seed, one instance, bit-for-bit reproducible runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .frame import HADAMARD, MATRICES, Basis, BellKind, PauliOp

DEFAULT_MAX_QUBITS = 16

# Probability clamp: Born weights within this of 0 or 1 are treated as exact,
# so repeated measurements are idempotent despite floating-point rounding.
_PROB_EPS = 1e-12

_NORM_TOL = 1e-10


class CapacityError(ValueError):
    """A state would exceed the configured qubit capacity."""


class InvalidStateError(ValueError):
    """Amplitudes do not describe a normalized quantum state."""


class RandomSource:
    """Deterministic random stream for one simulation run.

    Wraps numpy's Philox counter-based generator.  The same seed and the same
    call sequence reproduce identical outputs bit for bit; campaigns derive
    per-trial sources as seed + trial index.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.Philox(key=self.seed & (2**64 - 1)))

    def random(self) -> float:
        return float(self._gen.random())

    def bit(self) -> int:
        return int(self._gen.integers(0, 2))

    def integer(self, upper: int) -> int:
        """Uniform integer in [0, upper)."""
        return int(self._gen.integers(0, upper))

    def choice(self, items):
        """Uniform choice from a sequence (index-based, order-stable)."""
        return items[self.integer(len(items))]

    def sample_indices(self, population: int, count: int) -> list[int]:
        """Sorted sample of distinct indices from range(population)."""
        if count > population:
            raise ValueError(f"cannot sample {count} from {population}")
        picked = self._gen.choice(population, size=count, replace=False)
        return sorted(int(i) for i in picked)

    def shuffled(self, items: list) -> list:
        order = self._gen.permutation(len(items))
        return [items[int(i)] for i in order]

    def normal(self, size: int) -> np.ndarray:
        return self._gen.standard_normal(size)

    def basis(self) -> Basis:
        return Basis.Z if self.bit() == 0 else Basis.X

    def pauli(self) -> PauliOp:
        return (PauliOp.I, PauliOp.Z, PauliOp.X, PauliOp.Y)[self.integer(4)]

    def bits(self, count: int) -> str:
        return "".join("01"[self.bit()] for _ in range(count))


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state over n_qubits qubits, big-endian amplitude order."""

    amps: np.ndarray
    n_qubits: int = field(default=-1)

    def __post_init__(self) -> None:
        amps = np.asarray(self.amps, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "amps", amps)
        n = int(amps.size).bit_length() - 1
        if amps.size == 0 or amps.size != 1 << n:
            raise InvalidStateError(f"amplitude count {amps.size} is not a power of two")
        if self.n_qubits == -1:
            object.__setattr__(self, "n_qubits", n)
        elif self.n_qubits != n:
            raise InvalidStateError(f"{amps.size} amplitudes cannot span {self.n_qubits} qubits")
        # one fused pass: non-finite amplitudes poison the norm and are caught
        norm_sq = float(np.vdot(amps, amps).real)
        if not math.isfinite(norm_sq):
            raise InvalidStateError("amplitudes must be finite")
        if abs(math.sqrt(norm_sq) - 1.0) > _NORM_TOL:
            raise InvalidStateError(
                f"state norm {math.sqrt(norm_sq)!r} deviates from 1 beyond {_NORM_TOL}"
            )

    def tensor_view(self) -> np.ndarray:
        """Amplitudes reshaped to (2,) * n_qubits; qubit q is axis q."""
        return self.amps.reshape((2,) * self.n_qubits)

    def _check_qubit(self, qubit: int) -> None:
        if not 0 <= qubit < self.n_qubits:
            raise IndexError(f"qubit {qubit} out of range for {self.n_qubits} qubits")


def ket(bits: str) -> StateVector:
    """Computational basis state for a bit string, e.g. ket("01")."""
    if not bits or any(ch not in "01" for ch in bits):
        raise ValueError(f"expected a nonempty bit string, got {bits!r}")
    amps = np.zeros(1 << len(bits), dtype=np.complex128)
    amps[int(bits, 2)] = 1.0
    return StateVector(amps)


def basis_eigenstate(basis: Basis, bit: int) -> StateVector:
    """Single-qubit eigenstate |bit> of Z, or (|0> +/- |1>)/sqrt(2) of X."""
    if bit not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {bit!r}")
    if basis is Basis.Z:
        return ket("01"[bit])
    sign = 1.0 if bit == 0 else -1.0
    return StateVector(np.array([1.0, sign]) / np.sqrt(2.0))


_SQRT_HALF = 1.0 / np.sqrt(2.0)

BELL_AMPS: dict[BellKind, np.ndarray] = {
    BellKind.PHI_PLUS: np.array([1, 0, 0, 1], dtype=np.complex128) * _SQRT_HALF,
    BellKind.PHI_MINUS: np.array([1, 0, 0, -1], dtype=np.complex128) * _SQRT_HALF,
    BellKind.PSI_PLUS: np.array([0, 1, 1, 0], dtype=np.complex128) * _SQRT_HALF,
    BellKind.PSI_MINUS: np.array([0, 1, -1, 0], dtype=np.complex128) * _SQRT_HALF,
}


def make_bell(kind: BellKind) -> StateVector:
    """Two-qubit Bell state with the documented amplitude conventions."""
    return StateVector(BELL_AMPS[kind].copy())


def tensor(a: StateVector, b: StateVector, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Tensor product; a's qubits become the leading indices."""
    total = a.n_qubits + b.n_qubits
    if total > max_qubits:
        raise CapacityError(f"tensor product needs {total} qubits, capacity is {max_qubits}")
    return StateVector(np.kron(a.amps, b.amps), total)


def apply_matrix(state: StateVector, qubit: int, matrix: np.ndarray) -> StateVector:
    """Apply a 2x2 matrix to one qubit."""
    state._check_qubit(qubit)
    t = np.tensordot(matrix, state.tensor_view(), axes=([1], [qubit]))
    t = np.moveaxis(t, 0, qubit)
    return StateVector(t.reshape(-1), state.n_qubits)


def apply_pauli(state: StateVector, qubit: int, op: PauliOp) -> StateVector:
    """Apply one of the four encoding ops to a qubit."""
    return apply_matrix(state, qubit, MATRICES[op])


def apply_hadamard(state: StateVector, qubit: int) -> StateVector:
    """Apply the Hadamard rotation to a qubit."""
    return apply_matrix(state, qubit, HADAMARD)


def _born_pick(p0: float, rng: RandomSource) -> int:
    """Sample a bit with outcome-0 weight p0, clamping near-certain weights."""
    if p0 >= 1.0 - _PROB_EPS:
        return 0
    if p0 <= _PROB_EPS:
        return 1
    return 0 if rng.random() < p0 else 1


def project_qubit(state: StateVector, qubit: int, basis: Basis, bit: int):
    """Project one qubit onto a basis eigenstate.

    Returns (probability, collapsed state) where the collapsed state keeps
    all qubits, with the measured one left in the eigenstate.  The collapsed
    state is None when the probability is (numerically) zero.
    """
    state._check_qubit(qubit)
    work = apply_hadamard(state, qubit) if basis is Basis.X else state
    t = work.tensor_view()
    kept = np.take(t, bit, axis=qubit)
    prob = float(np.sum(np.abs(kept) ** 2))
    if prob <= _PROB_EPS:
        return 0.0, None
    full = np.zeros_like(t)
    index = [slice(None)] * state.n_qubits
    index[qubit] = bit
    full[tuple(index)] = kept / np.sqrt(prob)
    collapsed = StateVector(full.reshape(-1), state.n_qubits)
    if basis is Basis.X:
        collapsed = apply_hadamard(collapsed, qubit)
    return prob, collapsed


def measure(state: StateVector, qubit: int, basis: Basis, rng: RandomSource):
    """Projective single-qubit measurement.

    Returns (bit, collapsed state).  Outcome weights follow the Born rule on
    the current amplitudes; the collapsed state is renormalized with the
    measured qubit left in the corresponding eigenstate, so re-measuring in
    the same basis returns the same bit with probability 1.
    """
    state._check_qubit(qubit)
    if not np.any(np.abs(state.amps) > 0):
        raise InvalidStateError("cannot measure an all-zero state")
    work = apply_hadamard(state, qubit) if basis is Basis.X else state
    t = work.tensor_view()
    p0 = float(np.sum(np.abs(np.take(t, 0, axis=qubit)) ** 2))
    bit = _born_pick(p0, rng)
    _, collapsed = project_qubit(state, qubit, basis, bit)
    return bit, collapsed


def _basis_slices(t: np.ndarray, qubit: int, basis: Basis) -> tuple[np.ndarray, np.ndarray]:
    """Amplitude blocks for the two outcomes of one qubit in a basis.

    Slicing and recombining beats applying a Hadamard matrix: no tensordot,
    no intermediate state construction.
    """
    a0 = np.take(t, 0, axis=qubit)
    a1 = np.take(t, 1, axis=qubit)
    if basis is Basis.X:
        return (a0 + a1) * _SQRT_HALF, (a0 - a1) * _SQRT_HALF
    return a0, a1


def measure_extract(
    state: StateVector, qubit: int, basis: Basis, rng: RandomSource
) -> tuple[int, np.ndarray]:
    """Measure one qubit and factor it out in a single pass.

    Returns (bit, remainder) where remainder holds the unnormalized
    amplitudes of the other qubits conditioned on the outcome (a scalar array
    for single-qubit states).  Same Born statistics as ``measure``, but
    without constructing the intermediate collapsed full state — this is the
    registry's hot path.
    """
    state._check_qubit(qubit)
    k0, k1 = _basis_slices(state.tensor_view(), qubit, basis)
    p0 = float(np.vdot(k0, k0).real)
    p1 = float(np.vdot(k1, k1).real)
    total = p0 + p1
    if total <= _PROB_EPS:
        raise InvalidStateError("cannot measure an all-zero state")
    bit = _born_pick(p0 / total, rng)
    return bit, (k0 if bit == 0 else k1)


def project_extract(
    state: StateVector, qubit: int, basis: Basis, bit: int
) -> tuple[float, np.ndarray | None]:
    """Force one outcome and factor the qubit out in a single pass.

    Returns (probability, remainder as in ``measure_extract``); the remainder
    is None when the outcome has (numerically) zero probability.
    """
    state._check_qubit(qubit)
    k0, k1 = _basis_slices(state.tensor_view(), qubit, basis)
    kept = k0 if bit == 0 else k1
    prob = float(np.vdot(kept, kept).real)
    if prob <= _PROB_EPS:
        return 0.0, None
    return prob, kept


def _bell_remainder(state: StateVector, qa: int, qb: int, kind: BellKind) -> np.ndarray:
    """Unnormalized coefficients left after contracting (qa, qb) with a Bell bra."""
    bra = BELL_AMPS[kind].reshape(2, 2).conj()
    return np.tensordot(bra, state.tensor_view(), axes=([0, 1], [qa, qb]))


def _check_pair(state: StateVector, qa: int, qb: int) -> None:
    state._check_qubit(qa)
    state._check_qubit(qb)
    if qa == qb:
        raise ValueError("Bell measurement needs two distinct qubits")


def bell_probabilities(state: StateVector, qa: int, qb: int) -> dict[BellKind, float]:
    """Born weights of the four Bell outcomes on a qubit pair."""
    _check_pair(state, qa, qb)
    return {
        kind: float(np.sum(np.abs(_bell_remainder(state, qa, qb, kind)) ** 2))
        for kind in BellKind
    }


def project_bell(state: StateVector, qa: int, qb: int, kind: BellKind):
    """Project a qubit pair onto one Bell state.

    Returns (probability, collapsed state); the collapsed state keeps all
    qubits with the measured pair left in the projected Bell state, and is
    None when the probability is (numerically) zero.
    """
    _check_pair(state, qa, qb)
    remainder = _bell_remainder(state, qa, qb, kind)
    prob = float(np.sum(np.abs(remainder) ** 2))
    if prob <= _PROB_EPS:
        return 0.0, None
    pair = BELL_AMPS[kind].reshape(2, 2)
    full = np.multiply.outer(pair, remainder / np.sqrt(prob))
    full = np.moveaxis(full, (0, 1), (qa, qb))
    return prob, StateVector(full.reshape(-1), state.n_qubits)


def bell_measure(state: StateVector, qa: int, qb: int, rng: RandomSource):
    """Projective Bell-basis measurement on two qubits.

    Returns (BellKind, collapsed state).  The outcome label carries no global
    phase; the collapsed state keeps the measured pair in place.
    """
    probs = bell_probabilities(state, qa, qb)
    roll = rng.random()
    acc = 0.0
    kinds = list(BellKind)
    kind = kinds[-1]
    for candidate in kinds:
        acc += probs[candidate]
        if roll < acc or probs[candidate] >= 1.0 - _PROB_EPS:
            kind = candidate
            break
    prob, collapsed = project_bell(state, qa, qb, kind)
    if collapsed is None:  # numerically impossible branch guarded anyway
        raise InvalidStateError("sampled a zero-probability Bell outcome")
    return kind, collapsed


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2 for equal-sized pure states."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"fidelity needs equal sizes, got {a.n_qubits} and {b.n_qubits}")
    return float(abs(np.vdot(a.amps, b.amps)) ** 2)


def random_state(n_qubits: int, rng: RandomSource, max_qubits: int = DEFAULT_MAX_QUBITS) -> StateVector:
    """Haar-random pure state on n_qubits qubits."""
    if n_qubits < 1:
        raise ValueError(f"need at least one qubit, got {n_qubits}")
    if n_qubits > max_qubits:
        raise CapacityError(f"random state needs {n_qubits} qubits, capacity is {max_qubits}")
    dim = 1 << n_qubits
    raw = rng.normal(2 * dim).astype(np.float64)
    amps = raw[:dim] + 1j * raw[dim:]
    return StateVector(amps / np.linalg.norm(amps), n_qubits)

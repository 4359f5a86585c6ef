"""eprshare: simulator and verification toolkit for entanglement-based
multiparty secret splitting and state sharing.

The package is layered: ``frame`` holds the symbolic op/Bell algebra,
``core`` the dense statevector engine, ``register`` the wire bookkeeping,
``channel`` the noise and adversary models, ``splitting``/``sharing`` the two
protocol state machines, and ``config``/``transcript``/``metrics``/
``campaign``/``cli`` the run harness.
"""

from .frame import (
    Basis,
    BellKind,
    PauliOp,
    bell_after,
    code_of,
    compose,
    correction_for,
    correction_pair,
    op_of,
)
from .core import (
    CapacityError,
    InvalidStateError,
    RandomSource,
    StateVector,
    apply_hadamard,
    apply_pauli,
    bell_measure,
    fidelity,
    make_bell,
    measure,
    random_state,
    tensor,
)
from .register import WireRegister
from .channel import (
    AdversaryKind,
    AdversarySpec,
    AdversaryState,
    ChannelModel,
    ConfigError,
    TransmitResult,
    transmit,
)
from .config import ProtocolConfig
from .transcript import Transcript, replay_decode
from .splitting import (
    PairStatus,
    ProtocolOrderError,
    RunOutcome,
    RunResult,
    SecretSplittingRun,
    run_n_party,
    run_secret_splitting,
    run_three_party,
)
from .sharing import (
    RECONSTRUCTION_TABLE,
    IncompleteCooperationError,
    StateSharingRun,
    reconstruct,
    run_state_sharing,
    verify_reconstruction_table,
)
from .metrics import EfficiencyReport, EfficiencyUndefinedError, compute_efficiency
from .campaign import CampaignReport, run_campaign, run_protocol

__version__ = "0.1.0"

__all__ = [
    "AdversaryKind",
    "AdversarySpec",
    "AdversaryState",
    "CampaignReport",
    "ChannelModel",
    "ConfigError",
    "EfficiencyReport",
    "EfficiencyUndefinedError",
    "IncompleteCooperationError",
    "PairStatus",
    "ProtocolConfig",
    "ProtocolOrderError",
    "RECONSTRUCTION_TABLE",
    "RunOutcome",
    "RunResult",
    "SecretSplittingRun",
    "StateSharingRun",
    "Transcript",
    "TransmitResult",
    "compute_efficiency",
    "reconstruct",
    "replay_decode",
    "run_campaign",
    "run_n_party",
    "run_protocol",
    "run_secret_splitting",
    "run_state_sharing",
    "run_three_party",
    "transmit",
    "verify_reconstruction_table",
    "Basis",
    "BellKind",
    "PauliOp",
    "bell_after",
    "code_of",
    "compose",
    "correction_for",
    "correction_pair",
    "op_of",
    "CapacityError",
    "InvalidStateError",
    "RandomSource",
    "StateVector",
    "apply_hadamard",
    "apply_pauli",
    "bell_measure",
    "fidelity",
    "make_bell",
    "measure",
    "random_state",
    "tensor",
    "WireRegister",
    "__version__",
]

"""Qubit- and bit-efficiency accounting for completed runs.

Counts are integers taken from the run's transcript and pair table:

- ``q_u``  payload-carrying qubits (two per payload pair),
- ``q_t``  distinct qubits that entered a channel at least once — relayed
  photons and reused decoys count once, however many legs they crossed,
- ``b_m``  payload bits conveyed,
- ``b_t``  classical bits in the denominator.  The lenient variant counts
  only the sender's published joint-measurement outcomes (zero for secret
  splitting, two per shared qubit for state sharing): check traffic,
  bookkeeping announcements, and the agents' reconstruction collaboration are
  treated as protocol overhead rather than message transport.  The strict
  variant counts every published bit of any class.

Efficiencies are the exact integer ratios ``eta_q = q_u / q_t`` and
``eta_t = b_m / (q_t + b_t)``, reported as floats alongside the raw counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .splitting import RunOutcome


class EfficiencyUndefinedError(ValueError):
    """Efficiency is undefined for a run that aborted."""


@dataclass(frozen=True)
class EfficiencyReport:
    q_u: int
    q_t: int
    b_m: int
    b_t_lenient: int
    b_t_strict: int

    @property
    def eta_q_exact(self) -> Fraction:
        return Fraction(self.q_u, self.q_t) if self.q_t else Fraction(0)

    @property
    def eta_t_exact(self) -> Fraction:
        denom = self.q_t + self.b_t_lenient
        return Fraction(self.b_m, denom) if denom else Fraction(0)

    @property
    def eta_t_strict_exact(self) -> Fraction:
        denom = self.q_t + self.b_t_strict
        return Fraction(self.b_m, denom) if denom else Fraction(0)

    @property
    def eta_q(self) -> float:
        return float(self.eta_q_exact)

    @property
    def eta_t(self) -> float:
        return float(self.eta_t_exact)

    @property
    def eta_t_strict(self) -> float:
        return float(self.eta_t_strict_exact)

    def to_dict(self) -> dict:
        return {
            "q_u": self.q_u,
            "q_t": self.q_t,
            "b_m": self.b_m,
            "b_t_lenient": self.b_t_lenient,
            "b_t_strict": self.b_t_strict,
            "eta_q": self.eta_q,
            "eta_t": self.eta_t,
            "eta_t_strict": self.eta_t_strict,
        }


def compute_efficiency(outcome: RunOutcome) -> EfficiencyReport:
    """Build the efficiency report for a completed run."""
    if outcome.verdict != "completed":
        raise EfficiencyUndefinedError(
            f"run aborted at {outcome.abort_stage!r}; efficiency is undefined"
        )
    counts = outcome.counts
    return EfficiencyReport(
        q_u=counts["q_u"],
        q_t=counts["q_t"],
        b_m=counts["b_m"],
        b_t_lenient=counts["b_t_lenient"],
        b_t_strict=counts["b_t_strict"],
    )

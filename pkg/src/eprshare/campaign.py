"""Multi-trial campaigns: run a configuration many times and aggregate.

Trial ``i`` runs with seed ``base_seed + i``, so campaigns are reproducible
end to end and any single trial can be replayed in isolation by seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import ProtocolConfig
from .metrics import compute_efficiency
from .sharing import run_state_sharing
from .splitting import RunResult, run_secret_splitting


def run_protocol(config: ProtocolConfig) -> RunResult:
    """Run one execution of whichever protocol the configuration selects."""
    if config.is_sharing:
        return run_state_sharing(config)
    return run_secret_splitting(config)


@dataclass
class CampaignReport:
    protocol: str
    trials: int
    base_seed: int
    abort_rate: float
    recovery_rate: float
    mean_error: float
    mean_fidelity: float | None
    mean_eta_q: float | None
    mean_eta_t: float | None
    aborts_by_stage: dict = field(default_factory=dict)
    mean_error_rates: dict = field(default_factory=dict)
    per_trial: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "trials": self.trials,
            "base_seed": self.base_seed,
            "abort_rate": self.abort_rate,
            "recovery_rate": self.recovery_rate,
            "mean_error": self.mean_error,
            "mean_fidelity": self.mean_fidelity,
            "mean_eta_q": self.mean_eta_q,
            "mean_eta_t": self.mean_eta_t,
            "aborts_by_stage": dict(self.aborts_by_stage),
            "mean_error_rates": dict(self.mean_error_rates),
            "per_trial": list(self.per_trial),
        }


def _mean(values: list[float]) -> float | None:
    return sum(values) / len(values) if values else None


def run_campaign(config: ProtocolConfig, trials: int) -> CampaignReport:
    """Run ``trials`` seeded executions and aggregate their outcomes.

    ``mean_error`` averages, over all trials, the worst per-stage error rate
    each trial observed — the statistic the abort rule acts on.  Efficiency
    and fidelity averages cover completed trials only.
    """
    if trials < 1:
        raise ValueError("a campaign needs at least one trial")
    config.validate()
    aborts = 0
    recoveries = 0
    worst_errors: list[float] = []
    fidelities: list[float] = []
    etas_q: list[float] = []
    etas_t: list[float] = []
    aborts_by_stage: dict[str, int] = {}
    stage_rates: dict[str, list[float]] = {}
    per_trial: list[dict] = []

    for i in range(trials):
        result = run_protocol(config.with_seed(config.seed + i))
        outcome = result.outcome
        worst = max(outcome.error_rates.values(), default=0.0)
        worst_errors.append(worst)
        for stage, rate in outcome.error_rates.items():
            stage_rates.setdefault(stage, []).append(rate)
        eta_q = eta_t = None
        if outcome.verdict == "aborted":
            aborts += 1
            stage = outcome.abort_stage or "unknown"
            aborts_by_stage[stage] = aborts_by_stage.get(stage, 0) + 1
        else:
            if outcome.match:
                recoveries += 1
            if outcome.fidelity is not None:
                fidelities.append(outcome.fidelity)
            efficiency = compute_efficiency(outcome)
            eta_q = efficiency.eta_q
            eta_t = efficiency.eta_t
            etas_q.append(eta_q)
            etas_t.append(eta_t)
        per_trial.append(
            {
                "seed": outcome.seed,
                "verdict": outcome.verdict,
                "abort_stage": outcome.abort_stage,
                "match": outcome.match,
                "fidelity": outcome.fidelity,
                "worst_error": worst,
                "eta_q": eta_q,
                "eta_t": eta_t,
            }
        )

    return CampaignReport(
        protocol=config.protocol,
        trials=trials,
        base_seed=config.seed,
        abort_rate=aborts / trials,
        recovery_rate=recoveries / trials,
        mean_error=sum(worst_errors) / trials,
        mean_fidelity=_mean(fidelities),
        mean_eta_q=_mean(etas_q),
        mean_eta_t=_mean(etas_t),
        aborts_by_stage=aborts_by_stage,
        mean_error_rates={
            stage: sum(rates) / len(rates) for stage, rates in sorted(stage_rates.items())
        },
        per_trial=per_trial,
    )

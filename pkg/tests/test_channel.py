"""Channel-leg tests: identity exactness, loss/noise statistics, adversaries.

Every statistical assertion pins an analytically derived rate and a 3-sigma
binomial band at the stated trial count, so failures mean physics bugs rather
than bad luck (chance of a spurious trip is ~0.3% per assertion).
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from eprshare.channel import (
    CLEAN_CHANNEL,
    DELIVERED,
    LOST,
    AdversaryKind,
    AdversarySpec,
    AdversaryState,
    ChannelModel,
    ConfigError,
    composed_code,
    transmit,
)
from eprshare.core import RandomSource
from eprshare.frame import (
    Basis,
    BellKind,
    PauliOp,
    code_of,
    frame_code,
    op_of,
    outcomes_equal,
)
from eprshare.register import WireRegister


def three_sigma(p: float, n: int) -> float:
    return 3.0 * math.sqrt(p * (1.0 - p) / n)


class TestSpecValidation:
    def test_bad_basis_strategy(self):
        with pytest.raises(ConfigError):
            AdversarySpec(basis_strategy="diagonal")

    def test_bad_probabilities(self):
        with pytest.raises(ConfigError):
            ChannelModel(loss_prob=-0.1)
        with pytest.raises(ConfigError):
            ChannelModel(depolarize_prob=1.5)

    def test_negative_reservoir(self):
        with pytest.raises(ConfigError):
            AdversaryState(reservoir=-1)

    def test_is_identity(self):
        assert CLEAN_CHANNEL.is_identity
        assert not ChannelModel(loss_prob=0.01).is_identity
        assert not ChannelModel(
            adversary=AdversarySpec(kind=AdversaryKind.INTERCEPT_RESEND)
        ).is_identity

    def test_spec_round_trip(self):
        spec = AdversarySpec(
            kind=AdversaryKind.FAKE_BELL, basis_strategy="x", operation_leak=True
        )
        assert AdversarySpec.from_dict(spec.to_dict()) == spec

    def test_model_round_trip(self):
        model = ChannelModel(
            loss_prob=0.125,
            depolarize_prob=0.25,
            adversary=AdversarySpec(kind=AdversaryKind.INTERCEPT_RESEND),
        )
        assert ChannelModel.from_dict(model.to_dict()) == model

    def test_from_dict_rejects_unknown_kind(self):
        with pytest.raises(ConfigError):
            AdversarySpec.from_dict({"kind": "cnot_probe"})

    def test_from_dict_rejects_non_dict_adversary(self):
        with pytest.raises(ConfigError):
            ChannelModel.from_dict({"adversary": "fake_bell"})


class TestIdentityChannel:
    def test_state_untouched_and_no_randomness_consumed(self):
        """A zero channel must not disturb the state or the rng stream."""
        reg = WireRegister()
        lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        before = reg.state_of([lead, partner]).amps.copy()
        rng = RandomSource(41)
        twin = RandomSource(41)
        result = transmit(reg, partner, CLEAN_CHANNEL, rng)
        assert result.status == DELIVERED
        assert result.wire == partner
        assert result.events == []
        assert np.array_equal(reg.state_of([lead, partner]).amps, before)
        # identical draws afterwards prove transmit consumed nothing
        assert [rng.random() for _ in range(8)] == [twin.random() for _ in range(8)]


class TestLoss:
    def test_lost_photon_reported(self):
        reg = WireRegister()
        _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        result = transmit(reg, partner, ChannelModel(loss_prob=1.0), RandomSource(1))
        assert result.status == LOST
        assert result.wire is None
        assert result.events and "lost" in result.events[0]

    def test_loss_rate_matches_probability(self):
        p, trials = 0.3, 4000
        rng = RandomSource(7)
        model = ChannelModel(loss_prob=p)
        lost = 0
        for _ in range(trials):
            reg = WireRegister()
            _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
            if transmit(reg, partner, model, rng).status == LOST:
                lost += 1
        assert abs(lost / trials - p) <= three_sigma(p, trials)


def correlation_check_error(reg: WireRegister, lead: int, partner: int,
                            rng: RandomSource) -> bool:
    """Same-basis pair check against a singlet: error iff correlation flipped."""
    basis = rng.basis()
    partner_bit = reg.measure(partner, basis, rng)
    lead_bit = reg.measure(lead, basis, rng)
    return (partner_bit == lead_bit) != outcomes_equal(BellKind.PSI_MINUS, basis)


class TestDepolarize:
    def test_error_rate_is_two_thirds_p(self):
        """A uniform X/Y/Z error hits the same-basis check with prob 2/3.

        Of the three equally likely errors, exactly two flip the measured
        correlation in any fixed check basis (the third commutes with it), so
        the check error rate is 2p/3.
        """
        trials = 10_000
        for p, seed in ((0.3, 11), (0.9, 12)):
            rng = RandomSource(seed)
            model = ChannelModel(depolarize_prob=p)
            errors = 0
            for _ in range(trials):
                reg = WireRegister()
                lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
                assert transmit(reg, partner, model, rng).status == DELIVERED
                if correlation_check_error(reg, lead, partner, rng):
                    errors += 1
            expected = 2.0 * p / 3.0
            assert abs(errors / trials - expected) <= three_sigma(expected, trials)


class TestInterceptResend:
    def _run_checks(self, strategy: str, trials: int, seed: int,
                    check_basis: Basis | None = None) -> float:
        rng = RandomSource(seed)
        model = ChannelModel(adversary=AdversarySpec(
            kind=AdversaryKind.INTERCEPT_RESEND, basis_strategy=strategy))
        errors = 0
        for _ in range(trials):
            reg = WireRegister()
            lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
            state = AdversaryState()
            transmit(reg, partner, model, rng, adversary_state=state)
            if check_basis is None:
                err = correlation_check_error(reg, lead, partner, rng)
            else:
                pb = reg.measure(partner, check_basis, rng)
                lb = reg.measure(lead, check_basis, rng)
                err = (pb == lb) != outcomes_equal(BellKind.PSI_MINUS, check_basis)
            errors += err
        return errors / trials

    def test_random_basis_error_rate_quarter(self):
        """Random-basis intercept-resend trips a singlet check 1/4 of the time.

        Half the time the eavesdropper guesses the check basis and stays
        invisible; the other half the resent eigenstate gives uncorrelated
        results, erring with probability 1/2.  Net: 1/4.
        """
        trials = 10_000
        rate = self._run_checks("random", trials, seed=21)
        assert abs(rate - 0.25) <= three_sigma(0.25, trials)

    def test_fixed_z_strategy_conditional_rates(self):
        """Z-only interception is invisible to Z checks, a coin flip to X checks."""
        assert self._run_checks("z", 2000, seed=22, check_basis=Basis.Z) == 0.0
        trials = 5000
        rate = self._run_checks("z", trials, seed=23, check_basis=Basis.X)
        assert abs(rate - 0.5) <= three_sigma(0.5, trials)

    def test_requires_adversary_state(self):
        reg = WireRegister()
        _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        model = ChannelModel(adversary=AdversarySpec(kind=AdversaryKind.INTERCEPT_RESEND))
        with pytest.raises(ConfigError):
            transmit(reg, partner, model, RandomSource(0))

    def test_intercepts_are_logged(self):
        reg = WireRegister()
        _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        model = ChannelModel(adversary=AdversarySpec(kind=AdversaryKind.INTERCEPT_RESEND))
        state = AdversaryState()
        result = transmit(reg, partner, model, RandomSource(3),
                          adversary_state=state, tag=17)
        assert result.status == DELIVERED
        assert len(state.intercepts) == 1
        tag, basis, bit = state.intercepts[0]
        assert tag == 17 and basis in (Basis.Z, Basis.X) and bit in (0, 1)


FAKE = ChannelModel(adversary=AdversarySpec(kind=AdversaryKind.FAKE_BELL))


class TestFakeBellSubstitution:
    def test_learning_recovers_composed_ops_exhaustively(self):
        """Kept halves + published outcome reveal the composed honest operation.

        For every (lead op, partner op) pair: decorate a genuine singlet, let
        the substitution happen mid-flight, apply the receiver-side op to the
        forwarded fake half, joint-measure and publish.  Relaying through two
        singlets makes the published and private outcome labels differ by
        exactly the XOR of the honest codes — deterministically, every run.
        """
        for lead_op in PauliOp:
            for partner_op in PauliOp:
                for seed in (1, 2, 3):
                    rng = RandomSource(seed)
                    reg = WireRegister()
                    lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
                    state = AdversaryState()
                    reg.apply_pauli(lead, lead_op)
                    result = transmit(reg, partner, FAKE, rng,
                                      adversary_state=state, tag=0)
                    forwarded = result.wire
                    assert forwarded != partner
                    reg.apply_pauli(forwarded, partner_op)
                    outcome = reg.bell_measure(lead, forwarded, rng)
                    learned = state.learn_from_outcomes(reg, {0: outcome}, rng)
                    assert learned[0] is op_of(code_of(lead_op) ^ code_of(partner_op))

    def test_unpublished_slots_stay_unknown(self):
        rng = RandomSource(5)
        reg = WireRegister()
        lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        state = AdversaryState()
        transmit(reg, partner, FAKE, rng, adversary_state=state, tag=4)
        assert state.learn_from_outcomes(reg, {}, rng) == {}

    def test_decoy_detection_is_a_coin_flip_per_decoy(self):
        """A substituted decoy forwards half a fresh singlet: maximally mixed.

        Whatever basis and outcome the preparer had, the receiver's measurement
        of the fake half is uniform, so each decoy exposes the substitution
        with probability exactly 1/2; d decoys catch it with 1 - (1/2)**d.
        """
        trials = 10_000
        rng = RandomSource(31)
        mismatches = []
        for _ in range(trials):
            reg = WireRegister()
            lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
            basis = rng.basis()
            lead_bit = reg.measure(lead, basis, rng)  # decoy preparation
            expected = lead_bit if outcomes_equal(BellKind.PSI_MINUS, basis) else 1 - lead_bit
            state = AdversaryState()
            result = transmit(reg, partner, FAKE, rng, adversary_state=state)
            measured = reg.measure(result.wire, basis, rng)
            mismatches.append(measured != expected)
        rate = sum(mismatches) / trials
        assert abs(rate - 0.5) <= three_sigma(0.5, trials)
        # aggregate the same trials into batches of d decoys
        for d in (4, 8):
            batches = trials // d
            caught = sum(
                any(mismatches[i * d:(i + 1) * d]) for i in range(batches)
            ) / batches
            expected_catch = 1.0 - 0.5 ** d
            assert abs(caught - expected_catch) <= three_sigma(expected_catch, batches)

    def test_reservoir_exhaustion(self):
        rng = RandomSource(9)
        reg = WireRegister()
        state = AdversaryState(reservoir=2)
        for i in range(2):
            _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
            transmit(reg, partner, FAKE, rng, adversary_state=state, tag=i)
        _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        with pytest.raises(ConfigError):
            transmit(reg, partner, FAKE, rng, adversary_state=state, tag=2)
        assert len(state.captured) == 2


class TestOperationLeak:
    def test_history_is_harvested_without_touching_the_state(self):
        reg = WireRegister()
        lead, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        before = reg.state_of([lead, partner]).amps.copy()
        model = ChannelModel(adversary=AdversarySpec(operation_leak=True))
        state = AdversaryState()
        history = [PauliOp.X, "H", PauliOp.Y]
        result = transmit(reg, partner, model, RandomSource(2),
                          adversary_state=state, tag=6, op_history=history)
        assert result.status == DELIVERED and result.wire == partner
        assert state.leaked_ops == {6: [PauliOp.X, "H", PauliOp.Y]}
        assert np.array_equal(reg.state_of([lead, partner]).amps, before)

    def test_empty_history_not_recorded(self):
        reg = WireRegister()
        _, partner = reg.alloc_bell(BellKind.PSI_MINUS)
        model = ChannelModel(adversary=AdversarySpec(operation_leak=True))
        state = AdversaryState()
        transmit(reg, partner, model, RandomSource(2),
                 adversary_state=state, tag=6, op_history=[])
        assert state.leaked_ops == {}


class TestComposedCode:
    def test_xor_and_mark_skipping(self):
        assert composed_code([]) == 0
        assert composed_code([PauliOp.X, "H", PauliOp.Y, PauliOp.X]) == code_of(PauliOp.Y)
        assert composed_code([PauliOp.Z, PauliOp.Z]) == 0

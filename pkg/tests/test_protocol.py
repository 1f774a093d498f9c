"""Round enumeration, sampling, sifting, and the exact analyses."""
import numpy as np
import pytest

from sqkdsim.adversary import (identity_attack, measure_resend_attack,
                               probe_rotation_attack, random_attack,
                               tagging_attack)
from sqkdsim.measurement import AliceOp, Basis, ClickPattern, Interpretation
from sqkdsim.protocol import (ProtocolConfig, RoundEnumerator, RoundSimulator,
                              Variant, eve_conditional_states,
                              exact_statistics, legacy_identification,
                              run_protocol, simulate_records)

MIRROR_OPS = (AliceOp.CTRL, AliceOp.SWAP_10, AliceOp.SWAP_01, AliceOp.SWAP_ALL)
BASES = (Basis.COMPUTATIONAL, Basis.HADAMARD)


def test_config_validation():
    cfg = ProtocolConfig(variant="legacy")
    assert cfg.variant is Variant.LEGACY
    assert sum(cfg.alice_op_probs.values()) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        ProtocolConfig(channel_loss=1.5)
    with pytest.raises(ValueError):
        ProtocolConfig(alice_op_probs={AliceOp.CTRL: 0.7})
    with pytest.raises(ValueError):
        ProtocolConfig(variant=Variant.LEGACY,
                       alice_op_probs={AliceOp.SWAP_10: 1.0})


def test_config_accepts_string_op_keys():
    cfg = ProtocolConfig(alice_op_probs={"CTRL": 0.4, "SWAP-10": 0.3,
                                         "SWAP-01": 0.3})
    assert cfg.alice_op_probs[AliceOp.CTRL] == pytest.approx(0.4)


@pytest.mark.parametrize("attack_name,attack", [
    ("identity", identity_attack()),
    ("tagging", tagging_attack()),
    ("measure-resend", measure_resend_attack("computational")),
    ("random", random_attack(3, probe_dim=3, strength=0.6)),
])
def test_branch_probabilities_conserved(attack_name, attack):
    cfg = ProtocolConfig(tag_dim=attack.system.tag_dim)
    enum = RoundEnumerator(cfg, attack)
    for op in MIRROR_OPS:
        for basis in BASES:
            total = sum(b.probability for b in enum.branches(op, basis))
            assert total == pytest.approx(1.0, abs=1e-9), (attack_name, op, basis)


def test_branch_probabilities_conserved_with_loss():
    cfg = ProtocolConfig(channel_loss=0.7)
    enum = RoundEnumerator(cfg, identity_attack())
    for op in MIRROR_OPS:
        for basis in BASES:
            total = sum(b.probability for b in enum.branches(op, basis))
            assert total == pytest.approx(1.0, abs=1e-9)


def test_identity_ctrl_branches():
    enum = RoundEnumerator(ProtocolConfig(), identity_attack())
    branches = enum.branches(AliceOp.CTRL, Basis.HADAMARD)
    assert len(branches) == 1
    b = branches[0]
    assert b.probability == pytest.approx(1.0)
    assert b.bob_pattern is ClickPattern.P01
    assert b.interpretation is Interpretation.LEGAL
    # computational CTRL rounds are discarded at sifting
    for b in enum.branches(AliceOp.CTRL, Basis.COMPUTATIONAL):
        assert b.discarded and b.interpretation is None


def test_identity_swap_10_branches():
    enum = RoundEnumerator(ProtocolConfig(), identity_attack())
    branches = enum.branches(AliceOp.SWAP_10, Basis.COMPUTATIONAL)
    by_interp = {b.interpretation: b for b in branches}
    shared = by_interp[Interpretation.SHARED_BIT]
    assert shared.probability == pytest.approx(0.5)
    assert shared.alice_pattern is ClickPattern.P00
    assert shared.bob_pattern is ClickPattern.P01
    assert (shared.alice_bit, shared.bob_bit) == (0, 0)
    kept = by_interp[Interpretation.NO_SHARED_BIT]
    assert kept.probability == pytest.approx(0.5)
    assert kept.alice_pattern is ClickPattern.P10
    assert kept.bob_pattern is ClickPattern.P00


def test_identity_swap_all_branches():
    enum = RoundEnumerator(ProtocolConfig(), identity_attack())
    branches = enum.branches(AliceOp.SWAP_ALL, Basis.COMPUTATIONAL)
    assert {b.interpretation for b in branches} == {Interpretation.LEGAL}
    assert sum(b.probability for b in branches) == pytest.approx(1.0)
    assert {b.alice_pattern for b in branches} == \
        {ClickPattern.P01, ClickPattern.P10}


def test_loss_probability_closed_form():
    """One photon crossing the channel twice survives with probability q**2."""
    for q in (1.0, 0.8, 0.5):
        cfg = ProtocolConfig(channel_loss=q)
        enum = RoundEnumerator(cfg, identity_attack())
        p_loss = sum(b.probability
                     for b in enum.branches(AliceOp.CTRL, Basis.HADAMARD)
                     if b.interpretation is Interpretation.LOSS)
        assert p_loss == pytest.approx(1.0 - q * q, abs=1e-12)


def test_eve_probe_vectors_are_normalized():
    enum = RoundEnumerator(ProtocolConfig(), measure_resend_attack("computational"))
    for op in MIRROR_OPS:
        for basis in BASES:
            for b in enum.branches(op, basis):
                assert np.vdot(b.eve_probe, b.eve_probe).real == \
                    pytest.approx(1.0, abs=1e-9)


def test_simulation_is_reproducible():
    cfg = ProtocolConfig(n_rounds=300, rng_seed=17)
    attack = identity_attack()
    first = simulate_records(cfg, attack)
    second = simulate_records(cfg, attack)
    assert [(r.alice_op, r.bob_basis, r.branch_ref) for r in first] == \
        [(r.alice_op, r.bob_basis, r.branch_ref) for r in second]
    assert run_protocol(cfg, attack).to_document() == \
        run_protocol(cfg, attack).to_document()


def test_different_seeds_differ():
    attack = identity_attack()
    a = run_protocol(ProtocolConfig(n_rounds=200, rng_seed=1), attack)
    b = run_protocol(ProtocolConfig(n_rounds=200, rng_seed=2), attack)
    assert a.to_document() != b.to_document()


def test_sampled_frequencies_match_exact_branches():
    """Observed outcome rates sit within 5 sigma of the exact probabilities."""
    cfg = ProtocolConfig(n_rounds=100_000, rng_seed=5)
    attack = identity_attack()
    stats = run_protocol(cfg, attack)
    exact = exact_statistics(cfg, attack)
    for op in MIRROR_OPS:
        per_op = stats.counts.get(op.value, {})
        n_op = sum(per_op.values())
        assert n_op > 0
        for label, p in exact.outcome_probs[op].items():
            observed = per_op.get(label, 0) / n_op
            sigma = np.sqrt(p * (1.0 - p) / n_op)
            assert abs(observed - p) <= 5.0 * sigma + 1e-12, (op, label)


def test_run_protocol_identity_bookkeeping():
    cfg = ProtocolConfig(n_rounds=2000, rng_seed=9, test_fraction=0.25)
    stats = run_protocol(cfg, identity_attack())
    assert stats.ctrl_error_rate == 0.0
    assert stats.swap_x_error_rate == 0.0
    assert stats.swap_all_error_rate == 0.0
    assert stats.raw_key_error_rate == 0.0
    assert not stats.aborted
    assert stats.raw_key_alice == stats.raw_key_bob
    assert len(stats.raw_key_alice) == \
        stats.shared_bit_rounds - stats.test_sample_size
    assert stats.test_sample_size == round(0.25 * stats.shared_bit_rounds)


def test_run_protocol_aborts_on_measure_resend():
    cfg = ProtocolConfig(n_rounds=2000, rng_seed=12)
    stats = run_protocol(cfg, measure_resend_attack("computational"))
    assert stats.aborted
    assert any("ctrl" in reason for reason in stats.abort_reasons)
    assert stats.ctrl_error_rate == pytest.approx(0.25, abs=0.05)


def test_loss_only_adds_loss_outcomes():
    cfg = ProtocolConfig(n_rounds=1500, rng_seed=4, channel_loss=0.8)
    stats = run_protocol(cfg, identity_attack())
    assert stats.ctrl_error_rate == 0.0
    assert stats.swap_x_error_rate == 0.0
    assert stats.raw_key_error_rate in (0.0, None)
    assert stats.raw_key_alice == stats.raw_key_bob
    losses = sum(per_op.get("Loss", 0) for per_op in stats.counts.values())
    assert losses > 0


def test_exact_statistics_identity():
    cfg = ProtocolConfig()
    exact = exact_statistics(cfg, identity_attack())
    ctrl = exact.outcome_probs[AliceOp.CTRL]
    assert ctrl["Discarded"] == pytest.approx(0.5)
    assert ctrl["Legal"] == pytest.approx(0.5)
    swap = exact.outcome_probs[AliceOp.SWAP_10]
    assert swap["Discarded"] == pytest.approx(0.5)
    assert swap["SharedBit"] == pytest.approx(0.25)
    assert swap["NoSharedBit"] == pytest.approx(0.25)
    assert all(p == pytest.approx(0.0, abs=1e-15)
               for p in exact.error_probs.values())
    assert exact.shared_mismatch == pytest.approx(0.0, abs=1e-15)


def test_exact_statistics_measure_resend_error_rates():
    cfg = ProtocolConfig()
    exact = exact_statistics(cfg, measure_resend_attack("computational"))
    assert exact.error_probs[AliceOp.CTRL] == pytest.approx(0.25, abs=1e-12)
    assert exact.error_probs[AliceOp.SWAP_10] == pytest.approx(0.0, abs=1e-12)


def test_forward_hadamard_resend_is_invisible_and_useless():
    """Measuring the forward leg in its own eigenbasis leaves no trace."""
    attack = measure_resend_attack("hadamard")
    exact = exact_statistics(ProtocolConfig(), attack)
    assert all(p == pytest.approx(0.0, abs=1e-12)
               for p in exact.error_probs.values())
    cond = eve_conditional_states(attack)
    assert cond.trace_distance == pytest.approx(0.0, abs=1e-12)


def test_eve_conditionals_identity():
    cond = eve_conditional_states(identity_attack())
    assert cond.p_shared == pytest.approx(0.5, abs=1e-12)
    assert cond.p_bit[0] == pytest.approx(cond.p_bit[1], abs=1e-12)
    assert cond.trace_distance == pytest.approx(0.0, abs=1e-12)


def test_eve_conditionals_measure_resend():
    cond = eve_conditional_states(measure_resend_attack("computational"))
    assert cond.trace_distance == pytest.approx(1.0, abs=1e-12)
    # bit 0 leaves the record-1 pointer, bit 1 the record-2 pointer
    assert cond.states[0].matrix[1, 1] == pytest.approx(1.0, abs=1e-12)
    assert cond.states[1].matrix[2, 2] == pytest.approx(1.0, abs=1e-12)


def test_quiet_probe_rotation_learns_nothing():
    attack = probe_rotation_attack(6, probe_dim=3)
    cond = eve_conditional_states(attack)
    assert cond.p_shared == pytest.approx(0.5, abs=1e-10)
    assert cond.trace_distance == pytest.approx(0.0, abs=1e-10)


def test_legacy_identity_run_shares_bits():
    cfg = ProtocolConfig(variant=Variant.LEGACY, n_rounds=2000, rng_seed=3)
    stats = run_protocol(cfg, identity_attack())
    assert stats.swap_all_error_rate is None
    assert stats.swap_x_error_rate == 0.0
    assert stats.shared_bit_rounds > 0
    assert stats.raw_key_alice == stats.raw_key_bob


def test_legacy_identification_extremes():
    ident = legacy_identification(identity_attack())
    assert ident.accuracy == pytest.approx(0.5, abs=1e-12)
    tagged = legacy_identification(tagging_attack())
    assert tagged.accuracy == pytest.approx(1.0, abs=1e-12)


def test_variant_mismatch_is_rejected():
    with pytest.raises(ValueError):
        eve_conditional_states(identity_attack(),
                               ProtocolConfig(variant=Variant.LEGACY))
    with pytest.raises(ValueError):
        legacy_identification(identity_attack(), ProtocolConfig())


def test_attack_config_shape_mismatch_is_rejected():
    with pytest.raises(ValueError):
        RoundEnumerator(ProtocolConfig(tag_dim=2), identity_attack(tag_dim=1))


def test_simulator_draws_every_operation():
    cfg = ProtocolConfig(n_rounds=400, rng_seed=2)
    sim = RoundSimulator(cfg, identity_attack())
    rng = np.random.default_rng(0)
    seen = {sim.run_round(rng, i).alice_op for i in range(400)}
    assert seen == set(MIRROR_OPS)

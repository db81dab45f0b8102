"""Threshold selection and the end-to-end solver."""

from fractions import Fraction

import pytest

import mmsfair as mf

from helpers import random_instance


def test_alpha_for_improved_small_n():
    choice = mf.alpha_for(3, "improved")
    assert choice.alpha == Fraction(3, 4) + Fraction(1, 36)
    assert choice.delta == Fraction(1, 36)
    assert Fraction(1, 36) < Fraction(3, 44)  # n=3 keeps the 1/36 cap


def test_alpha_for_improved_large_n():
    choice = mf.alpha_for(9, "improved")
    assert choice.alpha == Fraction(3, 4) + Fraction(3, 140)
    assert Fraction(3, 140) < Fraction(1, 36)


def test_alpha_for_classic():
    for n in (1, 2, 5, 40):
        assert mf.alpha_for(n, "classic").alpha == Fraction(3, 4)


def test_alpha_for_explicit():
    choice = mf.alpha_for(4, "2/3")
    assert choice.alpha == Fraction(2, 3)
    assert choice.delta == Fraction(2, 3) - Fraction(3, 4)
    assert choice.mode == "explicit"
    assert mf.alpha_for(4, Fraction(3, 4)).alpha == Fraction(3, 4)


def test_alpha_for_rejects_bad_values():
    with pytest.raises(mf.ContractError):
        mf.alpha_for(4, "9/10")  # above the proven bound
    with pytest.raises(mf.ContractError):
        mf.alpha_for(4, "0/1")
    with pytest.raises(mf.ContractError):
        mf.alpha_for(0, "improved")
    with pytest.raises(mf.ValidationError):
        mf.alpha_for(4, "-1/2")


def test_single_agent_takes_everything():
    inst = mf.make_instance(1, ["g1", "g2"], {0: {"g1": 1, "g2": 2}})
    report = mf.approx_mms(inst, mf.alpha_for(1))
    assert report.allocation.bundles[0] == frozenset({"g1", "g2"})
    assert report.score >= 1


def test_tight_example_score_window():
    inst = mf.gen_tight_example(3)
    choice = mf.alpha_for(3)
    report = mf.approx_mms(inst, choice)
    assert choice.alpha <= report.score <= Fraction(9, 10)


def test_random_instance_meets_threshold():
    inst = random_instance(99, 3, 9, bound=100)
    choice = mf.alpha_for(3)
    report = mf.approx_mms(inst, choice)
    assert report.allocation.complete
    check = mf.verify(inst, report.allocation, choice.alpha)
    assert check.passed
    assert check.score == report.score


def test_classic_and_explicit_modes():
    inst = random_instance(7, 4, 10, bound=50)
    assert mf.approx_mms(inst, mf.alpha_for(4, "classic")).score >= Fraction(3, 4)
    assert mf.approx_mms(inst, mf.alpha_for(4, "1/2")).score >= Fraction(1, 2)


def test_alpha_choice_must_match_instance():
    inst = random_instance(3, 2, 5)
    with pytest.raises(mf.ContractError):
        mf.approx_mms(inst, mf.alpha_for(3))


def test_zero_share_agents_are_peeled():
    inst = mf.make_instance(2, ["g1", "g2", "g3"],
                            {0: {"g1": 0, "g2": 0, "g3": 0},
                             1: {"g1": 1, "g2": 2, "g3": 3}})
    report = mf.approx_mms(inst, mf.alpha_for(2))
    assert report.peeled == (0,)
    assert report.allocation.bundles[0] == frozenset()
    assert report.allocation.bundles[1] == frozenset({"g1", "g2", "g3"})
    assert report.per_agent[0][2] is None


def test_all_zero_instance():
    inst = mf.gen_random(mf.GeneratorSpec(kind="uniform-int", n=3, m=4,
                                          value_bound=0, seed=4))
    report = mf.approx_mms(inst, mf.alpha_for(3))
    assert report.peeled == (0, 1, 2)
    assert report.allocation.complete
    assert report.score == 1


def test_reduction_lift_bundles_meet_threshold_from_log():
    # each reduced agent's bundle, valued in the instance the reduction saw,
    # meets alpha times their share at that moment
    for seed in range(8):
        inst = random_instance(seed, 4, 11, bound=60, min_value=1)
        choice = mf.alpha_for(4)
        report = mf.approx_mms(inst, choice)
        replayed = mf.replay_log(report.reduction_log)
        for step, record in zip(replayed, report.reduction_log.records):
            given = mf.bundle_value(step, record.agent, record.removed_goods)
            assert given >= choice.alpha * record.pre_mms[record.agent]


def test_irreducible_instance_is_exposed_and_checks_out():
    inst = random_instance(4, 3, 12, bound=80, min_value=1)
    choice = mf.alpha_for(3)
    report = mf.approx_mms(inst, choice)
    oni = report.irreducible_instance
    assert oni is not None
    assert mf.is_ordered(oni)
    values = mf.instance_mms_values(oni)
    assert all(v == 1 for v in values.values())
    assert mf.is_totally_irreducible(oni, choice.alpha, values)
    assert oni.m >= 2 * oni.n


def test_positive_dummy_survives_to_bag_filling():
    from helpers import dummy_survives_to_bagfill_instance

    inst = dummy_survives_to_bagfill_instance()
    choice = mf.alpha_for(3, "improved")
    report = mf.approx_mms(inst, choice)
    records = report.reduction_log.records
    assert [r.rule for r in records] == ["R4"]
    assert records[0].dummy_created[1] == {1: Fraction(5), 2: Fraction(5)}
    oni = report.irreducible_instance
    assert oni is not None and len(oni.dummies) == 1
    dummy = oni.dummies[0]
    cap = Fraction(4, 3) * choice.delta
    for a in oni.agents:
        assert 0 < oni.valuations[a][dummy] < cap
    # the dummy steered the reduction but was never allocated
    held = set().union(*report.allocation.bundles.values())
    assert dummy not in held
    assert report.score >= choice.alpha


def test_report_json_is_serializable():
    import json

    inst = random_instance(15, 3, 9, bound=30)
    choice = mf.alpha_for(3)
    report = mf.approx_mms(inst, choice)
    doc = report.to_json(inst)
    text = json.dumps(doc)
    assert json.loads(text)["score"] == mf.format_value(report.score)
    assert set(doc["allocation"]) == {"0", "1", "2"}


def test_capacity_error_propagates():
    inst = random_instance(2, 2, 21, bound=9)
    with pytest.raises(mf.CapacityError):
        mf.approx_mms(inst, mf.alpha_for(2))
    report = mf.approx_mms(inst, mf.alpha_for(2), max_goods=21)
    assert report.allocation.complete

import re

import pytest
from hypothesis import given, strategies as st

from conftest import bar_state, fold
from disruptkit.detection import ENHANCED, DetectionConfig, assess, detect, make_instance
from disruptkit.interaction import (
    ActKind,
    DialogueAct,
    Event,
    Participant,
    Physical,
    QuestionForm,
    RelationshipMatrix,
    Role,
    Say,
    Tie,
    apply_event,
)
from disruptkit.session import run_session
from disruptkit.suite import resolve_pack
from disruptkit.taxonomy import (
    TALK_BASED,
    THIRD_PARTY_MOCKS,
    Perceived,
    DisruptionKind as K,
    RecoveryStatus,
    Repairable,
    StatusContext,
)


def say(kind, speaker, to, **kw):
    return Say(DialogueAct(ActKind(kind), speaker, tuple(to) if isinstance(to, tuple) else (to,), **kw))


def order_then_change(pack, gap, first="latte", second="espresso"):
    """Client orders, agent accepts, ``gap`` filler turns, then the client changes the order."""
    script = [say("request", "client1", "agent", item=first), say("accept", "agent", "client1", item=first)]
    for i in range(gap):
        who, to = ("client1", "agent") if i % 2 == 0 else ("agent", "client1")
        script.append(say("inform", who, to))
    state, _ = fold(bar_state(pack), script)
    event = Event(state.last_index + 1, state.clock + 1, say("request", "client1", "agent", item=second))
    return state, event


def kinds(found):
    return [d.kind for d in found]


def test_f1_incompatible_change_is_necessary(pack):
    state, event = order_then_change(pack, 1)
    (d,) = detect(state, event, DetectionConfig("reactive", 8))
    assert d.kind is K.F1 and d.status is RecoveryStatus.RECOVERY_NECESSARY
    assert d.evidence == (1, event.index)


def test_f1_compatible_change_is_optional(pack):
    state, event = order_then_change(pack, 1, "coffee", "coffee_with_milk")
    (d,) = detect(state, event, ENHANCED)
    assert d.status is RecoveryStatus.RECOVERY_OPTIONAL


def test_f1_outside_reactive_window(pack):
    state, event = order_then_change(pack, 18)
    assert event.index - 1 == 20
    assert detect(state, event, DetectionConfig("reactive", 8)) == []
    assert kinds(detect(state, event, ENHANCED)) == [K.F1]


@given(st.integers(0, 30), st.integers(2, 40), st.integers(0, 20))
def test_window_monotone(pack, gap, window, more):
    state, event = order_then_change(pack, gap)
    small = detect(state, event, DetectionConfig("reactive", window))
    large = detect(state, event, DetectionConfig("reactive", window + more))
    full = detect(state, event, ENHANCED)
    assert set(small) <= set(large) <= set(full)


def test_agent_spill_is_f5_unintended(pack):
    state = bar_state(pack)
    (d,) = detect(state, Event(1, 0, Physical("agent", "spill", "coffee")), ENHANCED)
    assert d.kind is K.F5 and d.intent.perceived is Perceived.UNINTENDED
    assert d.breaching_actor == "agent" and d.affected == ("client1",)


def test_presupposed_intimacy_is_s6(pack):
    state = bar_state(
        pack,
        extra=(Participant("client2", Role.CLIENT),),
        ties=RelationshipMatrix.from_pairs([]),
    )
    act = say("inform", "agent", ("client1", "client2"), presupposed_tie=Tie.CLOSE, surface="Two lattes for two lovebirds!")
    (d,) = detect(state, Event(1, 0, act), ENHANCED)
    assert d.kind is K.S6 and d.intent.perceived is Perceived.AMBIGUOUS


def test_yes_to_alternative_question_is_misunderstanding(pack):
    ask = say("ask", "agent", "client1", question_form=QuestionForm("alternative", ("white_sugar_jar", "brown_sugar_jar")))
    state, _ = fold(bar_state(pack), [ask])
    (d,) = detect(state, Event(2, 1, say("answer", "client1", "agent", answer_polarity="yes")), ENHANCED)
    assert d.kind is K.S10 and d.subkind is Repairable.MISUNDERSTANDING
    assert d.status is RecoveryStatus.RECOVERY_OPTIONAL


def test_membrane_topic_is_s11(pack):
    act = say("inform", "client1", "agent", topics=("evacuation",))
    (d,) = detect(bar_state(pack), Event(1, 0, act), ENHANCED)
    assert d.kind is K.S11 and d.breaching_actor == "client1"


def test_unmitigated_disagreement_is_s12(pack):
    state, _ = fold(bar_state(pack), [say("inform", "client1", "agent")])
    bare = detect(state, Event(2, 1, say("disagree", "agent", "client1")), ENHANCED)
    soft = detect(state, Event(2, 1, say("disagree", "agent", "client1", mitigated=True)), ENHANCED)
    assert kinds(bare) == [K.S12] and bare[0].intent.perceived is Perceived.INTENDED
    assert soft == []


def test_agreeing_with_self_critique_is_s12(pack):
    state, _ = fold(bar_state(pack), [say("self_critique", "client1", "agent")])
    assert kinds(detect(state, Event(2, 1, say("agree", "agent", "client1")), ENHANCED)) == [K.S12]


def test_loud_voice_tolerated_under_noise(pack):
    from disruptkit.interaction import Noise

    loud = say("inform", "client1", "agent", volume=9)
    (d,) = detect(bar_state(pack), Event(1, 0, loud), ENHANCED)
    assert d.kind is K.S7 and d.status is RecoveryStatus.RECOVERY_NECESSARY
    state, _ = fold(bar_state(pack), [Noise(5, 2)])
    (d,) = detect(state, Event(2, 1, loud), ENHANCED)
    assert d.status is RecoveryStatus.TOLERATED


def test_assess_with_reactions():
    inst = make_instance(K.S6, "agent", ["client1"], [3], flags=[TALK_BASED])
    assert inst.status is RecoveryStatus.RECOVERY_OPTIONAL
    mocked = assess(inst, None, [THIRD_PARTY_MOCKS])
    assert mocked.intent.perceived is Perceived.INTENDED
    assert mocked.status is RecoveryStatus.RECOVERY_NECESSARY
    f1 = assess(make_instance(K.F1, "client1", ["agent"], [1, 4], context=StatusContext(compatible_change=True)))
    assert f1.status is RecoveryStatus.RECOVERY_OPTIONAL
    s12 = assess(make_instance(K.S12, "agent", ["client1"], [2], flags=[TALK_BASED]))
    assert s12.intent.perceived is Perceived.INTENDED


def test_detect_is_idempotent_and_pure(pack):
    state, event = order_then_change(pack, 3)
    before = state
    assert detect(state, event) == detect(state, event)
    assert state == before
    assert apply_event(state, event) == apply_event(state, event)


def test_config_validation():
    with pytest.raises(ValueError):
        DetectionConfig("reactive", 1)
    with pytest.raises(ValueError):
        DetectionConfig("psychic")


# -- fixture-level properties --------------------------------------------------


def test_golden_scripts_fire_their_kind_once(fixtures):
    golden = {sc.golden: (path, sc) for path, sc in fixtures.values() if sc.golden}
    assert set(golden) == set(K)
    for kind, (path, sc) in golden.items():
        t = run_session(sc, resolve_pack(sc.pack, path), "B")
        assert t.kinds() == {kind: 1}, sc.id


def test_architecture_subsumption(fixtures):
    """Script-event detections under A also appear under B, except where B prefaced the event."""
    for path, sc in fixtures.values():
        pack = resolve_pack(sc.pack, path)
        a, b = run_session(sc, pack, "A"), run_session(sc, pack, "B")
        prefaced = {int(m.group(1)) for m in (re.match(r"  preface script#(\d+)", ln) for ln in b.lines) if m}
        seen_a = {(d.instance.kind, d.ordinal) for d in a.detections if not d.emitted and d.ordinal not in prefaced}
        seen_b = {(d.instance.kind, d.ordinal) for d in b.detections if not d.emitted}
        assert seen_a <= seen_b, sc.id

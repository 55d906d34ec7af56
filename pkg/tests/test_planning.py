import random
from dataclasses import replace

import pytest

from conftest import bar_catalog, bar_state, fold
from disruptkit import planning
from disruptkit.culture import CulturePack, fill_slots
from disruptkit.detection import make_instance
from disruptkit.execution import emit_events
from disruptkit.interaction import ActKind, DialogueAct, Norms, Participant, Role, Say, initial_state
from disruptkit.planning import ZERO, cost_of, forecast, plan, preface_if_dispreferred
from disruptkit.recovery import CommunicativeAct, RecoveryGoal, map_strategy
from disruptkit.taxonomy import TALK_BASED, DisruptionKind as K, Form, RecoveryStatus, Strategy as S


def say(kind, speaker, to, **kw):
    return Say(DialogueAct(ActKind(kind), speaker, (to,), **kw))


def agent_act(kind, **kw):
    return DialogueAct(ActKind(kind), "agent", ("client1",), **kw)


def test_forecast_examples(pack):
    state = bar_state(pack)
    found = forecast(state, agent_act("change_topic", topics=("religion",), surface="So, religion?"))
    assert [d.kind for d in found] == [K.S11]
    assert forecast(state, agent_act("minimize", surface="Never mind.")) == []
    state, _ = fold(state, [say("inform", "client1", "agent")])
    assert [d.kind for d in forecast(state, agent_act("disagree"))] == [K.S12]
    assert forecast(state, agent_act("disagree", mitigated=True)) == []


def test_forecast_leaves_state_alone(pack):
    state = bar_state(pack)
    forecast(state, agent_act("change_topic", topics=("religion",), surface="x"))
    assert state == bar_state(pack)
    with pytest.raises(ValueError):
        forecast(state, DialogueAct(ActKind.INFORM, "client1", ("agent",)))


def s6_goal(pack, state_membrane=(), safe=None, topics=("family",)):
    norms = pack.norms("bar")
    if safe is not None:
        norms = replace(norms, safe_topics=tuple(safe), membrane=frozenset(norms.membrane) - set(safe))
    local = replace(pack, occasions={"bar": norms})
    state = bar_state(local, extra_membrane=state_membrane)
    state, _ = fold(state, [say("inform", "client1", "agent", topics=topics)])
    d = make_instance(K.S6, "client1", ["agent"], [1], flags=[TALK_BASED])
    goal = replace(map_strategy(d, local, state), chain=(S.CHANGE_TOPIC,))
    return goal, state, local


def test_topic_choice_skips_membrane(pack):
    goal, state, local = s6_goal(pack, state_membrane=("religion",), safe=["religion", "weather", "sports"])
    p = plan(goal, state, local)
    assert p.steps[0].act.topics == ("weather",)
    assert p.forecast_cost == (ZERO,)
    assert any("reject topic religion" in why for why in p.chosen_rationale)


def test_apology_plan_after_spill(pack):
    from disruptkit.interaction import Physical

    state, _ = fold(bar_state(pack), [Physical("agent", "spill", "coffee")])
    d = make_instance(K.F5, "agent", ["client1"], [1], flags=["physical_mishap"])
    goal = replace(map_strategy(d, pack, state), chain=(S.APOLOGIZE,))
    p = plan(goal, state, pack)
    assert [s.surface for s in p.steps] == ["I am sorry."]
    assert p.forecast_cost == (ZERO,)


def test_hesitation_then_minimize_on_refusal(pack):
    state, _ = fold(bar_state(pack), [say("request", "client1", "agent", item="coffee"), say("refuse", "agent", "client1", surface="No.")])
    d = make_instance(K.S12, "agent", ["client1"], [2], flags=[TALK_BASED])
    goal = map_strategy(d, pack, state)
    assert goal.chain == (S.HESITATION_PREFACE, S.MINIMIZE)
    p = plan(goal, state, pack)
    first, second = p.steps
    assert first.act.kind is ActKind.REFUSE and first.act.mitigated and first.surface == "Hm, No."
    assert second.strategy is S.MINIMIZE


def test_preface_examples(pack):
    state, _ = fold(bar_state(pack), [say("inform", "client1", "agent")])
    (soft,) = preface_if_dispreferred(agent_act("disagree", surface="Really?"), state, pack)
    assert soft.mitigated and soft.surface == "Hm, Really?"
    plain = agent_act("inform", surface="Here you are.")
    assert preface_if_dispreferred(plain, state, pack) == [plain]
    state, _ = fold(bar_state(pack), [say("self_critique", "client1", "agent")])
    (soft,) = preface_if_dispreferred(agent_act("agree", surface="Yes."), state, pack)
    assert soft.mitigated


def test_unsatisfiable_must_form_is_flagged(pack, monkeypatch):
    state, _ = fold(bar_state(pack), [say("inform", "client1", "agent")])
    d = make_instance(K.S12, "client1", ["agent"], [1], flags=[TALK_BASED])
    goal = replace(map_strategy(d, pack, state), chain=(S.REQUEST_REPEAT, S.MINIMIZE), must_form=True)
    bad = make_instance(K.S11, "agent", ["client1"], [2])
    monkeypatch.setattr(planning, "forecast", lambda st, act, pack=None: [bad])
    p = plan(goal, state, pack)
    assert p.unsatisfiable_must_form
    assert [s.strategy for s in p.steps] == [S.REQUEST_REPEAT]  # may-form minimize skipped
    assert p.forecast_cost == ((1, 0),)


def test_plan_is_deterministic(pack):
    goal, state, local = s6_goal(pack, state_membrane=("religion",), safe=["religion", "weather"])
    assert plan(goal, state, local, 3) == plan(goal, state, local, 3)


# -- brute-force oracle ------------------------------------------------------------

TOPICS = ["weather", "sports", "religion", "music", "family", "salary", "busy_day", "politics"]
PLAIN = {S.MINIMIZE: ActKind.MINIMIZE, S.APOLOGIZE: ActKind.APOLOGIZE, S.IGNORE_AND_CONTINUE: ActKind.INFORM}


def oracle_candidates(strategy, goal, state, pack):
    to = (goal.addressee,)
    out = []
    if strategy is S.CHANGE_TOPIC:
        for topic in pack.norms(state.occasion).safe_topics:
            if topic in goal.avoid_topics:
                continue
            for text in pack.templates.get(f"change_topic.{topic}") or pack.templates.get("change_topic", ()):
                surface = fill_slots(text, {"topic": topic.replace("_", " "), "addressee": goal.addressee})
                out.append(DialogueAct(ActKind.CHANGE_TOPIC, "agent", to, topics=(topic,), surface=surface))
        return out
    for text in pack.templates.get(strategy.value, ()):
        out.append(DialogueAct(PLAIN[strategy], "agent", to, surface=text))
    return out


def brute_force(goal, state, pack):
    hyp, picked = state, []
    for strategy in goal.chain:
        acts = oracle_candidates(strategy, goal, hyp, pack)
        if not acts:
            continue
        costs = [cost_of(forecast(hyp, a)) for a in acts]
        order = sorted(range(len(acts)), key=lambda i: (costs[i] != ZERO, costs[i], i))
        best = order[0] if ZERO not in costs else costs.index(ZERO)
        if costs[best][0] > 0 and strategy.form is Form.MAY:
            continue
        picked.append((strategy, acts[best]))
        hyp = emit_events(CommunicativeAct(strategy, acts[best]), hyp)[1]
    return picked


def random_case(rnd):
    membrane = set(rnd.sample(TOPICS, rnd.randint(0, 4)))
    safe = [t for t in rnd.sample(TOPICS, rnd.randint(0, 5))]
    pack_membrane = frozenset(membrane - set(safe))
    templates = {
        "minimize": tuple(rnd.sample(["Never mind.", "No problem.", "It happens."], rnd.randint(1, 3))),
        "apologize": ("Sorry.",),
        "ignore_and_continue": ("Anything else?",),
        "change_topic": ("What about {topic}?",),
    }
    for t in safe:
        if rnd.random() < 0.5:
            templates[f"change_topic.{t}"] = tuple(f"Talking of {t} {i}." for i in range(rnd.randint(1, 2)))
    norms = Norms(membrane=pack_membrane, safe_topics=tuple(safe))
    pack = CulturePack("rnd", {"bar": norms}, templates=templates)
    state = initial_state(
        occasion="bar",
        participants=[Participant("agent", Role.AGENT), Participant("client1", Role.CLIENT)],
        norms=norms,
        catalog=bar_catalog(),
        extra_membrane=membrane,
    )
    offending = tuple(rnd.sample(TOPICS, rnd.randint(0, 2)))
    state, _ = fold(state, [say("inform", "client1", "agent", topics=offending)])
    kind = rnd.choice([K.S6, K.S11])
    d = make_instance(kind, "client1", ["agent"], [1], flags=[TALK_BASED])
    chain = tuple(rnd.sample([S.CHANGE_TOPIC, S.MINIMIZE, S.APOLOGIZE, S.IGNORE_AND_CONTINUE], rnd.randint(1, 3)))
    goal = replace(map_strategy(d, pack, state), chain=chain)
    return goal, state, pack


def test_planner_matches_brute_force_on_random_goals():
    rnd = random.Random(20240611)
    agreed = 0
    for _ in range(250):
        goal, state, pack = random_case(rnd)
        got = [(s.strategy, s.act) for s in plan(goal, state, pack).steps]
        assert got == brute_force(goal, state, pack)
        agreed += 1
    assert agreed >= 200


def test_planner_matches_brute_force_on_fixture_goals(fixtures):
    from disruptkit.session import Session
    from disruptkit.suite import resolve_pack

    seen = []
    real_plan = planning.plan

    def spy(goal, state, pack, counter=0):
        seen.append((goal, state, pack))
        return real_plan(goal, state, pack, counter)

    import disruptkit.session as session_mod

    original = session_mod.plan
    session_mod.plan = spy
    try:
        for path, sc in fixtures.values():
            s = Session(sc, resolve_pack(sc.pack, path), "B")
            for item in sc.events:
                s.feed(item)
    finally:
        session_mod.plan = original
    checked = 0
    for goal, state, pack in seen:
        if not all(s in PLAIN or s is S.CHANGE_TOPIC for s in goal.chain):
            continue
        checked += 1
        assert [(s.strategy, s.act) for s in real_plan(goal, state, pack).steps] == brute_force(goal, state, pack)
    assert checked >= 5

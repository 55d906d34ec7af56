"""Acceptance criteria, one test each.

Every test records a ``criterion N: PASS|FAIL`` line; conftest prints them in the
terminal summary. ``python3 tests/test_acceptance.py`` prints them directly.
"""

import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from disruptkit import planning  # noqa: E402
from disruptkit import session as session_mod  # noqa: E402
from disruptkit.advisor import VOCABULARIES, CompetenceProfile, manageable_disruptions  # noqa: E402
from disruptkit.culture import builtin_pack_names, builtin_pack_text, load_builtin_pack, parse_culture_pack, serialize_pack  # noqa: E402
from disruptkit.detection import ENHANCED, agent_attributed, detect  # noqa: E402
from disruptkit.scenario import parse_scenario, serialize_scenario  # noqa: E402
from disruptkit.session import Session, run_session  # noqa: E402
from disruptkit.suite import format_matrix, load_scenarios, resolve_pack, run_suite  # noqa: E402
from disruptkit.taxonomy import ALL_KINDS, DisruptionKind as K  # noqa: E402

RESULTS = {}


def fixture_map():
    return {sc.id: (path, sc) for path, sc in load_scenarios()}


def run(sid, arch, pack=None, **kw):
    path, sc = fixture_map()[sid]
    return run_session(sc, pack or resolve_pack(sc.pack, path), arch, **kw)


def criterion_1():
    t = run("sugar_drop", "A")
    minimize = set(load_builtin_pack("generic").templates["minimize"])
    recs = [r for r in t.recoveries if r.strategy == "minimize"]
    assert len(recs) == 1 and recs[0].surface in minimize, recs
    assert t.kinds()[K.F5] == 1 and len(t.detections) == 1, t.detection_log
    assert t.passed
    return f"dropped sugar minimized with {recs[0].surface!r}; one F5"


def criterion_2():
    found = {}
    for arch in "AB":
        t = run("milk_change", arch)
        (d,) = [d.instance for d in t.detections]
        assert d.kind is K.F1 and d.status.label == "recovery_optional"
        found[arch] = [(r.strategy, r.surface) for r in t.recoveries]
        assert t.passed
    assert [s for s, _ in found["A"]] == ["minimize"]
    assert found["B"][0][0] == "minimize"
    assert found["B"][1] == ("change_topic", "I guess this is a busy day for you.")
    return "F1 optional (compatible items); minimize, then change_topic under B"


def criterion_3():
    a, b = run_suite(None, "A"), run_suite(None, "B")
    functional = [k for k in ALL_KINDS if k.order.value == "functional"]
    assert b.rows_ok() == 12, format_matrix([a, b])
    assert a.rows_ok(functional) == 5, format_matrix([a, b])
    return f"archB {b.rows_ok()}/12 rows, archA {a.rows_ok(functional)}/5 functional rows"


def criterion_4():
    a = run("long_gap_change", "A", window=8)
    b = run("long_gap_change", "B", window=8)
    assert a.kinds()[K.F1] == 0 and b.kinds()[K.F1] == 1
    return "long-gap order change: no F1 under A (window 8), F1 under B"


def criterion_5():
    checked = 0
    for sid, (path, sc) in fixture_map().items():
        s = Session(sc, resolve_pack(sc.pack, path), "B")
        seen = []
        original = s._step

        def step(event, _orig=original, _seen=seen, _s=s):
            _seen.append((_s.state, event))
            return _orig(event)

        s._step = step
        for item in sc.events:
            s.feed(item)
        t = s.finish()
        emitted = {id(ev) for _, ev in t.emitted}
        for state, event in seen:
            if id(event) in emitted:
                checked += 1
                assert agent_attributed(detect(state, event, ENHANCED), state.agent) == [], sid
        assert t.unsatisfiable == [], sid
    assert checked > 0
    return f"{checked} agent-emitted events re-checked, zero agent-attributed disruptions"


def criterion_6():
    from test_planning import PLAIN, brute_force, random_case
    from disruptkit.taxonomy import Strategy as S

    rnd = random.Random(20240611)
    for i in range(250):
        goal, state, pack = random_case(rnd)
        got = [(s.strategy, s.act) for s in planning.plan(goal, state, pack).steps]
        assert got == brute_force(goal, state, pack), f"random goal {i}"
    seen = []
    real = planning.plan
    session_mod.plan = lambda goal, state, pack, counter=0: seen.append((goal, state, pack)) or real(goal, state, pack, counter)
    try:
        for path, sc in fixture_map().values():
            s = Session(sc, resolve_pack(sc.pack, path), "B")
            for item in sc.events:
                s.feed(item)
    finally:
        session_mod.plan = real
    fixture_goals = [g for g in seen if all(s in PLAIN or s is S.CHANGE_TOPIC for s in g[0].chain)]
    for goal, state, pack in fixture_goals:
        assert [(s.strategy, s.act) for s in real(goal, state, pack).steps] == brute_force(goal, state, pack)
    assert len(fixture_goals) >= 1
    return f"plan equals brute force on 250 random goals and {len(fixture_goals)} fixture goals"


def criterion_7():
    generic, alt = load_builtin_pack("generic"), load_builtin_pack("generic_alt")
    assert generic.occasions == alt.occasions and generic.overrides == alt.overrides
    compared = differing = 0
    for sid, (_, sc) in fixture_map().items():
        if sc.pack not in (None, "generic"):
            continue
        for arch in "AB":
            x, y = run(sid, arch, pack=generic), run(sid, arch, pack=alt)
            assert x.detection_log == y.detection_log, (sid, arch)
            assert [r.strategy for r in x.recoveries] == [r.strategy for r in y.recoveries]
            for rx, ry in zip(x.recoveries, y.recoveries):
                templated = generic.templates.get(rx.strategy) != alt.templates.get(rx.strategy)
                if templated and rx.surface:
                    assert rx.surface != ry.surface, (sid, arch, rx.strategy)
                    differing += 1
            compared += 1
    return f"{compared} runs with identical detection logs, {differing} surfaces differ with the wording"


def criterion_8():
    pack = load_builtin_pack("generic")
    options = pack.templates["signal_misunderstanding"]
    assert options[0].startswith("Do you prefer") and "Both of them?" in options
    t = run("sugar_misunderstanding", "B")
    assert [r.surface for r in t.recoveries] == ["Do you prefer brown sugar then?"]
    assert "Both of them?" not in t.text
    return "confirmation-seeking repair emitted, blunt variant never"


def criterion_9():
    texts = [{(a, k): t.text for a in "AB" for k, t in run_suite(None, a, workers=w).transcripts.items()} for w in (4, 1)]
    assert texts[0] == texts[1]
    packs = [builtin_pack_text(n) for n in builtin_pack_names()]
    for text in packs:
        once = parse_culture_pack(text)
        assert parse_culture_pack(serialize_pack(once)) == once
        assert serialize_pack(parse_culture_pack(serialize_pack(once))) == serialize_pack(once)
    scenarios = load_scenarios()
    for path, sc in scenarios:
        again = parse_scenario(serialize_scenario(sc))
        assert again == sc, path.name
        assert serialize_scenario(again) == serialize_scenario(sc)
    return f"two suite runs identical; {len(packs)} packs and {len(scenarios)} scripts round-trip"


def criterion_10():
    rnd = random.Random(1000)
    assert manageable_disruptions(CompetenceProfile.full()) == set(ALL_KINDS)
    assert manageable_disruptions(CompetenceProfile()) == set()
    n = 1500
    for _ in range(n):
        small = CompetenceProfile(**{c: frozenset(v for v in sorted(vs) if rnd.random() < 0.5) for c, vs in VOCABULARIES.items()})
        big = CompetenceProfile(**{c: getattr(small, c) | frozenset(v for v in sorted(vs) if rnd.random() < 0.3) for c, vs in VOCABULARIES.items()})
        assert manageable_disruptions(small) <= manageable_disruptions(big)
    return f"monotone over {n} random profile pairs; full maps to all, empty to none"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def check(n):
    try:
        detail = CRITERIA[n - 1]()
    except Exception as exc:
        line = f"criterion {n}: FAIL {type(exc).__name__}: {exc}"
        RESULTS[n] = line
        print(line)
        raise
    line = f"criterion {n}: PASS {detail}"
    RESULTS[n] = line
    print(line)


@pytest.mark.parametrize("n", range(1, len(CRITERIA) + 1))
def test_criterion(n):
    check(n)


if __name__ == "__main__":
    failed = 0
    for i in range(1, len(CRITERIA) + 1):
        try:
            check(i)
        except Exception:
            failed += 1
    sys.exit(1 if failed else 0)

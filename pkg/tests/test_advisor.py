import json
import random

import pytest

from disruptkit.advisor import (
    QUESTIONS,
    REQUIREMENTS,
    VOCABULARIES,
    AdvisorAnswers,
    CompetenceProfile,
    advise,
    load_answers,
    load_profile,
    manageable_disruptions,
)
from disruptkit.errors import SchemaError
from disruptkit.taxonomy import ALL_KINDS, DisruptionKind as K


def answers(**overrides):
    data = {q: "yes" for q in QUESTIONS}
    data.update(overrides)
    return AdvisorAnswers.from_mapping(data)


def test_full_and_empty_profiles():
    assert manageable_disruptions(CompetenceProfile.full()) == set(ALL_KINDS)
    assert manageable_disruptions(CompetenceProfile()) == set()


def test_conversational_representational_profile_covers_f1():
    profile = CompetenceProfile(
        frozenset({"conversational", "representational"}),
        frozenset({"scenario"}),
        frozenset({"current_scenario", "situating_scenario"}),
        frozenset({"functional"}),
    )
    assert K.F1 in manageable_disruptions(profile)
    assert K.F2 not in manageable_disruptions(profile)


def test_requirement_rows_use_closed_vocabularies():
    assert set(REQUIREMENTS) == set(ALL_KINDS)
    for need in REQUIREMENTS.values():
        assert need.competences  # every row names at least one competence


def test_unknown_vocabulary_rejected():
    with pytest.raises(SchemaError):
        CompetenceProfile(frozenset({"telepathy"}))


def random_profile(rnd):
    return CompetenceProfile(**{c: frozenset(v for v in sorted(vocab) if rnd.random() < 0.6) for c, vocab in VOCABULARIES.items()})


def grow(rnd, profile):
    return CompetenceProfile(
        **{c: getattr(profile, c) | frozenset(v for v in sorted(vocab) if rnd.random() < 0.3) for c, vocab in VOCABULARIES.items()}
    )


def test_manageable_is_monotone():
    rnd = random.Random(7)
    for _ in range(1200):
        small = random_profile(rnd)
        large = grow(rnd, small)
        assert large.covers(small)
        assert manageable_disruptions(small) <= manageable_disruptions(large)


def test_q7_selects_architecture():
    full = CompetenceProfile.full()
    report = advise(answers(q7="no", q11="no", q14="no"), full)
    assert "You can use a reactive approach as depicted in Architecture A" in report
    assert "architecture: A" in report
    assert "architecture: B" in advise(answers(), full)


def test_caveats():
    assert "do NOT cover this" in advise(answers(q11="no", q14="yes"), CompetenceProfile())
    assert "could still occur" in advise(answers(q1="no"), CompetenceProfile())
    assert "unsupported" not in advise(answers(q11="no", q14="no"), CompetenceProfile())


def test_report_is_pure():
    a, p = answers(q3="no"), CompetenceProfile.full()
    assert advise(a, p) == advise(a, p)


def test_answer_validation():
    with pytest.raises(SchemaError):
        AdvisorAnswers.from_mapping({"q1": "yes"})
    with pytest.raises(SchemaError):
        answers(q2="maybe")
    with pytest.raises(SchemaError):
        AdvisorAnswers.from_mapping({**{q: "no" for q in QUESTIONS}, "q15": "yes"})


def test_json_loaders(tmp_path):
    a = tmp_path / "a.json"
    a.write_text(json.dumps({q: True for q in QUESTIONS}))
    p = tmp_path / "p.json"
    p.write_text(json.dumps({"competences": ["conversational"], "planning": ["functional"]}))
    assert load_answers(str(a))[14] is True
    assert load_profile(str(p)).competences == {"conversational"}
    p.write_text(json.dumps({"skills": []}))
    with pytest.raises(SchemaError):
        load_profile(str(p))

from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from disruptkit.errors import ParseError
from disruptkit.interaction import Physical
from disruptkit.scenario import (
    ExpectDisruption,
    parse_event_line,
    parse_scenario,
    serialize_event,
    serialize_scenario,
)
from disruptkit.taxonomy import DisruptionKind as K

HEADER = """scenario t
occasion bar
landmark counter 0 0
participant agent role=agent pos=0,-0.5
participant client1 role=client pos=0,0.6
participant client2 role=client pos=1,0.6 with=pair
participant client3 role=client pos=1.5,0.6 with=pair
tie client2 client3 close
item coffee price=1.30 category=coffee
item water price=2 category=water
object cup
deixis that = [cup, coffee]
membrane [religion]
"""


def test_bar_spill_shape(fixtures):
    _, sc = fixtures["bar_spill"]
    assert sum(isinstance(e.payload, Physical) for e in sc.events) == 1
    expects = [e for e in sc.expectations if isinstance(e, ExpectDisruption)]
    assert [(e.kind, e.at) for e in expects] == [(K.F5, 6)]
    assert sc.golden is K.F5 and sc.agent == "agent"


def test_undeclared_participant():
    with pytest.raises(ParseError) as err:
        parse_scenario(HEADER + "event t=0 say client9 -> agent act=greet\n")
    assert err.value.line == 14


@pytest.mark.parametrize(
    "line",
    [
        "event t=0 say client1 -> agent act=request item=tea",
        "event t=0 say client1 -> agent act=request",
        "event t=0 say client1 -> agent act=ask",
        "event t=0 say client1 -> agent act=shout",
        "event t=0 physical client1 explode cup",
        "event t=0 noise level=11 span=1",
        "event t=0 say client1 -> agent act=greet vol=12",
        'event t=0 say client1 -> agent act=greet "open',
        "event t=0 pay client1 abc",
        "event t=x depart client1",
    ],
)
def test_bad_event_lines(line):
    with pytest.raises(ParseError):
        parse_scenario(HEADER + line + "\n")


def test_events_must_be_time_ordered():
    with pytest.raises(ParseError):
        parse_scenario(HEADER + "event t=3 queue client1\nevent t=2 queue client2\n")


def test_expectations_checked():
    with pytest.raises(ParseError):
        parse_scenario(HEADER + "event t=0 queue client1\n\nexpect disruption F1 at 5\n")
    with pytest.raises(ParseError):
        parse_scenario(HEADER + "event t=0 queue client1\n\nexpect none 1..1 actor=ghost\n")
    with pytest.raises(ParseError):
        parse_scenario(HEADER + "event t=0 queue client1\n\nexpect recovery shrug by 1\n")


def test_header_requirements():
    with pytest.raises(ParseError):
        parse_scenario(HEADER.replace("landmark counter 0 0\n", ""))
    with pytest.raises(ParseError):
        parse_scenario(HEADER.replace("participant agent role=agent", "participant agent role=client"))
    with pytest.raises(ParseError):
        parse_scenario(HEADER + "participant client1 role=client\n")


def test_fixture_round_trip(fixtures):
    for _, sc in fixtures.values():
        text = serialize_scenario(sc)
        again = parse_scenario(text)
        assert again == sc, sc.id
        assert serialize_scenario(again) == text


def test_event_line_against_header():
    sc = parse_scenario(HEADER)
    ev = parse_event_line('event t=4 say client1 -> agent act=request item=coffee "A coffee."', sc)
    assert ev.time == 4 and ev.payload.act.item == "coffee"
    with pytest.raises(ParseError):
        parse_event_line("event t=4 say ghost -> agent act=greet", sc)


words = st.text(alphabet="abcdefghij ,.?!'\"\\", max_size=20)


def say_lines():
    who = st.sampled_from(["agent", "client1", "client2", "client3"])
    opts = st.fixed_dictionaries(
        {},
        optional={
            "topics": st.lists(st.sampled_from(["weather", "family", "religion"]), min_size=1, max_size=2, unique=True),
            "vol": st.integers(0, 10),
            "tie": st.sampled_from(["strangers", "acquainted", "close"]),
            "mitigated": st.just(True),
            "surface": words,
        },
    )
    kinds = st.sampled_from(
        [("greet", ""), ("request", "item=coffee"), ("ask", "qform=alt(cup,coffee)"), ("ask", "qform=yes_no"),
         ("answer", "polarity=no"), ("inform", ""), ("reference", "ref=that"), ("disagree", "")]
    )

    def build(a, b, kind, o):
        k, extra = kind
        parts = [f"say {a} -> {b} act={k}"]
        if extra:
            parts.append(extra)
        if "tie" in o:
            parts.append(f"tie={o['tie']}")
        if "topics" in o:
            parts.append(f"topics=[{','.join(o['topics'])}]")
        if "vol" in o:
            parts.append(f"vol={o['vol']}")
        if "mitigated" in o:
            parts.append("mitigated")
        if "surface" in o:
            parts.append('"' + o["surface"].replace("\\", "\\\\").replace('"', '\\"') + '"')
        return " ".join(parts)

    return st.builds(build, who, who, kinds, opts)


other_lines = st.sampled_from(
    [
        "move client1 0.25 -1",
        "physical client2 drop cup",
        "noise level=7 span=2",
        "queue client3",
        "react mock",
        "react neutral",
        "depart client2",
        "enter client2 pos=2,2",
        "prepare agent client1",
        "serve agent client1 coffee",
        "pay client1 1.30",
        "remedy agent clean_counter cup",
    ]
)


@given(st.lists(st.one_of(say_lines(), other_lines), max_size=15))
def test_generated_scripts_round_trip(lines):
    body = "".join(f"event t={i} {line}\n" for i, line in enumerate(lines))
    sc = parse_scenario(HEADER + "\n" + body)
    text = serialize_scenario(sc)
    assert parse_scenario(text) == sc
    for i, ev in enumerate(sc.events):
        assert parse_event_line(serialize_event(ev), replace(sc, events=sc.events[:i])) == ev

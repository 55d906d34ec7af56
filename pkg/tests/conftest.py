import sys
from decimal import Decimal

import pytest
from hypothesis import settings

from disruptkit.culture import load_builtin_pack
from disruptkit.interaction import (
    Catalog,
    Event,
    Item,
    Participant,
    Role,
    initial_state,
)
from disruptkit.suite import load_scenarios

settings.register_profile("repo", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("repo")


@pytest.fixture(scope="session")
def pack():
    return load_builtin_pack("generic")


@pytest.fixture(scope="session")
def fixtures():
    return {sc.id: (path, sc) for path, sc in load_scenarios()}


def bar_catalog():
    return Catalog(
        items=(
            Item("coffee", Decimal("1.30"), "coffee"),
            Item("coffee_with_milk", Decimal("1.40"), "coffee"),
            Item("latte", Decimal("1.50"), "coffee"),
            Item("espresso", Decimal("1.00"), "coffee"),
            Item("water", Decimal("2.00"), "water"),
        ),
        compatible_pairs=frozenset({frozenset({"coffee", "coffee_with_milk"})}),
        objects=frozenset({"cup", "white_sugar_jar", "brown_sugar_jar"}),
        deixis=(("that", ("white_sugar_jar", "brown_sugar_jar")),),
    )


def bar_state(pack, *, extra=(), positions=None, **kw):
    people = [Participant("agent", Role.AGENT), Participant("client1", Role.CLIENT), *extra]
    pos = {"agent": (0.0, -0.5), "client1": (0.0, 0.6)}
    pos.update(positions or {})
    return initial_state(
        occasion="bar",
        participants=people,
        norms=pack.norms("bar"),
        catalog=bar_catalog(),
        positions=pos,
        landmarks={"counter": (0.0, 0.0)},
        **kw,
    )


def fold(state, payloads, start_time=0, step=1):
    """Apply payloads as consecutive events; returns the final state and the events."""
    from disruptkit.interaction import apply_event

    events = []
    t = start_time
    for p in payloads:
        ev = Event(state.last_index + 1, t, p)
        state = apply_event(state, ev)
        events.append(ev)
        t += step
    return state, events


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

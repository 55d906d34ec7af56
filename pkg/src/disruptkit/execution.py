"""Turn recovery acts and plans into events on the session stream."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple, Union

from .interaction import Event, InteractionState, Remedy, Say, apply_event
from .recovery import CommunicativeAct


@dataclass(frozen=True)
class EmittedAction:
    events: Tuple[Event, ...]
    provenance: Tuple[str, ...]  # "<disruption key>/<strategy>" per step, null acts included


def emit_events(step: CommunicativeAct, state: InteractionState) -> Tuple[List[Event], InteractionState]:
    """Events for one step at the current clock, applied in order."""
    events: List[Event] = []
    if step.act is not None:
        ev = Event(state.last_index + 1, state.clock, Say(step.act))
        state = apply_event(state, ev)
        events.append(ev)
    if step.physical_remedy is not None:
        ev = Event(state.last_index + 1, state.clock, Remedy(state.agent, step.physical_remedy, step.remedy_object))
        state = apply_event(state, ev)
        events.append(ev)
    return events, state


def execute(item: Union[CommunicativeAct, "Plan"], state: InteractionState) -> Tuple[EmittedAction, InteractionState]:
    steps = (item,) if isinstance(item, CommunicativeAct) else item.steps
    events: List[Event] = []
    provenance: List[str] = []
    for step in steps:
        emitted, state = emit_events(step, state)
        events += emitted
        provenance.append(f"{step.disruption or '-'}/{step.strategy.value}")
    return EmittedAction(tuple(events), tuple(provenance)), state

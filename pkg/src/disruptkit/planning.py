"""One-step lookahead planner for recovery goals.

Every candidate act is applied to a copy of the state and run through the
enhanced detectors; the planner keeps the first candidate that would cause
nothing, else the cheapest by (necessary, optional) count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .culture import CulturePack, fill_slots
from .detection import ENHANCED, detect
from .errors import MissingSlot, NoTemplate
from .execution import emit_events
from .interaction import DialogueAct, Event, InteractionState, Say
from .recovery import (
    CommunicativeAct,
    RecoveryGoal,
    build_act,
    hesitation_act,
    preface_act,
    recovery_slots,
    remedy_for,
    spoken,
)
from .taxonomy import DisruptionInstance, Form, RecoveryStatus, Strategy

Cost = Tuple[int, int]
ZERO: Cost = (0, 0)


@dataclass(frozen=True)
class Candidate:
    label: str
    step: CommunicativeAct


@dataclass(frozen=True)
class Plan:
    steps: Tuple[CommunicativeAct, ...]
    forecast_cost: Tuple[Cost, ...]
    chosen_rationale: Tuple[str, ...]
    unsatisfiable_must_form: bool = False


def forecast(state: InteractionState, act: DialogueAct, pack: Optional[CulturePack] = None) -> List[DisruptionInstance]:
    """Would-be disruptions if the agent said ``act`` now; ``state`` is untouched."""
    if act.speaker != state.agent:
        raise ValueError("forecast is for the agent's own acts")
    event = Event(state.last_index + 1, state.clock, Say(act))
    return detect(state, event, ENHANCED)


def cost_of(found: Sequence[DisruptionInstance]) -> Cost:
    necessary = sum(1 for d in found if d.status is RecoveryStatus.RECOVERY_NECESSARY)
    optional = sum(1 for d in found if d.status is RecoveryStatus.RECOVERY_OPTIONAL)
    return necessary, optional


def candidates(
    strategy: Strategy, goal: RecoveryGoal, state: InteractionState, pack: CulturePack, counter: int = 0
) -> Tuple[List[Candidate], List[str]]:
    """Candidates in generation order, plus notes on ones that could not be built."""
    d = goal.disruption
    remedy, obj = remedy_for(d, state) if strategy is Strategy.REMEDIATE_PHYSICAL else (None, None)
    out: List[Candidate] = []
    notes: List[str] = []

    def add(label: str, act: Optional[DialogueAct]) -> None:
        out.append(Candidate(label, CommunicativeAct(strategy, act, remedy, obj, d.key)))

    if strategy is Strategy.TREAT_AS_IRRELEVANT:
        add("null", None)
        return out, notes
    if strategy is Strategy.HESITATION_PREFACE:
        tokens = pack.templates.get(strategy.value) or (pack.hesitation_token,)
        token = tokens[counter % len(tokens)]
        add(f"preface {token.strip()!r}", hesitation_act(d, state, token))
        return out, notes

    slots = recovery_slots(d, state, strategy)
    if strategy is Strategy.CHANGE_TOPIC:
        for topic in pack.norms(state.occasion).safe_topics:
            if topic in goal.avoid_topics:
                notes.append(f"topic {topic} avoided")
                continue
            key = f"change_topic.{topic}"
            options = pack.templates.get(key) or pack.templates.get(strategy.value, ())
            if not options:
                notes.append(f"topic {topic}: no template")
            for i, text in enumerate(options):
                try:
                    surface = fill_slots(text, dict(slots, topic=spoken(topic)))
                except MissingSlot as exc:
                    notes.append(f"topic {topic} template {i}: {exc}")
                    continue
                act = build_act(strategy, d, pack, state, surface, topic=topic)
                add(f"topic {topic} template {i}", act)
        return out, notes

    options = pack.templates.get(strategy.value, ())
    if not options:
        notes.append(str(NoTemplate(f"no template for {strategy.value}")))
    for i, text in enumerate(options):
        try:
            surface = fill_slots(text, slots)
        except MissingSlot as exc:
            notes.append(f"template {i}: {exc}")
            continue
        add(f"template {i}", build_act(strategy, d, pack, state, surface))
    return out, notes


def _step_cost(state: InteractionState, step: CommunicativeAct) -> Cost:
    return ZERO if step.act is None else cost_of(forecast(state, step.act))


def plan(goal: RecoveryGoal, state: InteractionState, pack: CulturePack, counter: int = 0) -> Plan:
    hyp = state
    steps: List[CommunicativeAct] = []
    costs: List[Cost] = []
    why: List[str] = []
    unsatisfiable = False
    for strategy in goal.chain:
        must = strategy.form is Form.MUST
        cands, notes = candidates(strategy, goal, hyp, pack, counter)
        why += [f"{strategy.value}: {n}" for n in notes]
        if not cands:
            why.append(f"{strategy.value}: no candidate, step skipped")
            unsatisfiable = unsatisfiable or must
            continue
        scored = [(c, _step_cost(hyp, c.step)) for c in cands]
        chosen, cost = next(((c, k) for c, k in scored if k == ZERO), (None, None))
        for c, k in scored:
            if c is chosen:
                break
            why.append(f"{strategy.value}: reject {c.label} cost={k}")
        if chosen is None:
            chosen, cost = min(scored, key=lambda ck: ck[1])  # min() keeps the earliest on ties
            if cost[0] > 0 and not must:
                why.append(f"{strategy.value}: every candidate forecasts a necessary disruption, step skipped")
                continue
            if cost[0] > 0:
                unsatisfiable = True
                why.append(f"{strategy.value}: unsatisfiable must-form, emitting {chosen.label} cost={cost}")
        why.append(f"{strategy.value}: accept {chosen.label} cost={cost}")
        steps.append(chosen.step)
        costs.append(cost)
        hyp = emit_events(chosen.step, hyp)[1]
    return Plan(tuple(steps), tuple(costs), tuple(why), unsatisfiable)


def preface_if_dispreferred(act: DialogueAct, state: InteractionState, pack: CulturePack) -> List[DialogueAct]:
    if act.speaker != state.agent:
        raise ValueError("only the agent's own acts are prefaced")
    if act.mitigated:
        return [act]
    bare = cost_of(_kinds(forecast(state, act), "S12"))
    if bare == ZERO:
        return [act]
    softened = preface_act(act, pack.hesitation_token)
    if _kinds(forecast(state, softened), "S12"):
        return [act]
    return [softened]


def _kinds(found: Sequence[DisruptionInstance], kind: str) -> List[DisruptionInstance]:
    return [d for d in found if d.kind.value == kind]

"""Mapping disruptions to agent acts (reactive) or to recovery goals (planned)."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Optional, Tuple

from .culture import CulturePack, render_template, resolve_chain
from .errors import PreconditionError
from .interaction import ActKind, DialogueAct, InteractionState, Physical, QuestionForm, Say
from .taxonomy import DisruptionInstance, DisruptionKind as K, Form, RecoveryStatus, Strategy

S = Strategy

_ASK_FORMS = {
    S.INITIATE_PROCESS: QuestionForm("open"),
    S.ASK_TO_PROCEED: QuestionForm("yes_no"),
    S.REQUEST_REPEAT: QuestionForm("open"),
    S.SIGNAL_MISUNDERSTANDING: QuestionForm("yes_no"),
}
_INFORM = frozenset(
    {
        S.TRIANGLING,
        S.IGNORE_AND_CONTINUE,
        S.REMEDIATE_PHYSICAL,
        S.OFFER_COMPENSATION,
        S.HESITATION_PREFACE,
        S.SELF_REPAIR,  # the corrected re-utterance, not a new slip
    }
)
_ACT_OF = {S.BENEVOLENT_JOKE: ActKind.JOKE}


@dataclass(frozen=True)
class CommunicativeAct:
    strategy: Strategy
    act: Optional[DialogueAct]  # None is the null act
    physical_remedy: Optional[str] = None
    remedy_object: Optional[str] = None
    disruption: Optional[str] = None  # key of the disruption being recovered

    def __post_init__(self) -> None:
        if self.act is None and self.strategy is not S.TREAT_AS_IRRELEVANT:
            raise ValueError("only treat_as_irrelevant may be a null act")
        if self.act is not None and not self.act.surface:
            raise ValueError("recovery acts carry rendered surface text")

    @property
    def surface(self) -> str:
        return self.act.surface if self.act is not None else ""


@dataclass(frozen=True)
class RecoveryGoal:
    disruption: DisruptionInstance
    chain: Tuple[Strategy, ...]
    avoid_topics: FrozenSet[str]
    addressee: Optional[str]
    must_form: bool

    def __post_init__(self) -> None:
        if not self.chain:
            raise ValueError("a recovery goal needs a non-empty chain")


def chain_for(d: DisruptionInstance, pack: CulturePack, agent: str) -> Tuple[Strategy, ...]:
    return resolve_chain(pack, d.kind, d.breaching_actor == agent, d.intent.perceived, d.subkind)


def recovery_addressee(d: DisruptionInstance, agent: str) -> Optional[str]:
    if d.breaching_actor != agent:
        return d.breaching_actor
    return d.affected[0] if d.affected else None


def spoken(token: str) -> str:
    return token.replace("_", " ")


def _evidence_act(d: DisruptionInstance, state: InteractionState, speaker: Optional[str] = None) -> Optional[DialogueAct]:
    for index in reversed(d.evidence):
        try:
            payload = state.event(index).payload
        except KeyError:
            continue
        if isinstance(payload, Say) and (speaker is None or payload.act.speaker == speaker):
            return payload.act
    return None


def recovery_slots(d: DisruptionInstance, state: InteractionState, strategy: Strategy) -> Dict[str, str]:
    """Slot values available for rendering; unknown ones stay absent."""
    agent = state.agent
    to = recovery_addressee(d, agent)
    slots: Dict[str, str] = {}
    if to is not None:
        slots["addressee"] = spoken(to)
        proc = state.processes.get(to)
        if proc is not None:
            if proc.amount_due > 0:
                slots["amount"] = f"{proc.amount_due:.2f}"
            if proc.order_items:
                slots["item"] = spoken(proc.order_items[-1])
    if d.kind is K.F3:
        question = _evidence_act(d, state, agent)
        if question is not None and question.surface:
            slots["question"] = question.surface
    if d.kind is K.S10:
        asked = next(
            (
                state.event(i).payload.act
                for i in d.evidence
                if isinstance(state.event(i).payload, Say) and state.event(i).payload.act.kind is ActKind.ASK
            ),
            None,
        )
        if asked is not None and asked.question_form.options:
            slots["item"] = spoken(asked.question_form.options[-1])
        last = _evidence_act(d, state)
        if last is not None and last.referent is not None:
            targets = state.catalog.referents(last.referent)
            slots["options"] = " or ".join(f"the {spoken(t)}" for t in targets)
    return slots


def build_act(
    strategy: Strategy,
    d: DisruptionInstance,
    pack: CulturePack,
    state: InteractionState,
    surface: str,
    *,
    topic: Optional[str] = None,
) -> DialogueAct:
    """The agent's dialogue act realizing ``strategy`` with ``surface`` text."""
    agent = state.agent
    to = recovery_addressee(d, agent)
    addressees = (to,) if to is not None else ()
    if strategy is S.REPEAT_QUESTION:
        original = _evidence_act(d, state, agent)
        form = original.question_form if original is not None and original.question_form else QuestionForm("open")
        return DialogueAct(ActKind.ASK, agent, addressees, question_form=form, surface=surface)
    if strategy is S.CLARIFY_REFERENT:
        last = _evidence_act(d, state)
        targets = state.catalog.referents(last.referent) if last is not None and last.referent else ()
        form = QuestionForm("alternative", tuple(targets)) if len(targets) > 1 else QuestionForm("open")
        return DialogueAct(ActKind.ASK, agent, addressees, question_form=form, surface=surface)
    if strategy in _ASK_FORMS:
        item = None
        if strategy is S.SIGNAL_MISUNDERSTANDING:
            asked = _evidence_act(d, state, agent)
            if asked is not None and asked.question_form and asked.question_form.options:
                item = asked.question_form.options[-1]
        return DialogueAct(ActKind.ASK, agent, addressees, item=item, question_form=_ASK_FORMS[strategy], surface=surface)
    if strategy is S.CHANGE_TOPIC:
        return DialogueAct(ActKind.CHANGE_TOPIC, agent, addressees, topics=(topic,) if topic else (), surface=surface)
    if strategy in _INFORM:
        return DialogueAct(ActKind.INFORM, agent, addressees, surface=surface)
    kind = _ACT_OF.get(strategy) or ActKind(strategy.value)
    return DialogueAct(kind, agent, addressees, surface=surface)


def remedy_for(d: DisruptionInstance, state: InteractionState) -> Tuple[Optional[str], Optional[str]]:
    """Symbolic physical remedy for the agent's own mishap."""
    if d.kind is not K.F5 or d.breaching_actor != state.agent:
        return None, None
    payload = state.event(d.at).payload
    obj = payload.obj if isinstance(payload, Physical) else None
    return "clean_counter", obj


def preface_act(act: DialogueAct, token: str) -> DialogueAct:
    base = act.surface or ""
    return replace(act, mitigated=True, surface=token + base if base else token.strip())


def hesitation_act(d: DisruptionInstance, state: InteractionState, token: str) -> DialogueAct:
    """Re-issue the agent's own dispreferred act with a hesitation preface."""
    own = _evidence_act(d, state, state.agent)
    if own is not None:
        return preface_act(own, token)
    to = recovery_addressee(d, state.agent)
    return DialogueAct(ActKind.INFORM, state.agent, (to,) if to else (), surface=token.strip(), mitigated=True)


def map_reactive(d: DisruptionInstance, pack: CulturePack, counter: int, state: InteractionState) -> CommunicativeAct:
    """First strategy of the resolved chain, rendered with ``counter``."""
    if d.status is RecoveryStatus.TOLERATED:
        raise PreconditionError(f"{d.key} is tolerated; nothing to map")
    strategy = chain_for(d, pack, state.agent)[0]
    remedy, obj = remedy_for(d, state)
    if strategy is S.TREAT_AS_IRRELEVANT:
        return CommunicativeAct(strategy, None, disruption=d.key)
    if strategy is S.HESITATION_PREFACE:
        act = hesitation_act(d, state, pack.hesitation_token)
        return CommunicativeAct(strategy, act, remedy, obj, d.key)
    slots = recovery_slots(d, state, strategy)
    topic = None
    key = None
    if strategy is S.CHANGE_TOPIC:
        topic, key = _first_topic(d, pack, state)
        if topic is not None:
            slots["topic"] = spoken(topic)
    surface = render_template(pack, strategy, slots, counter, key=key)
    return CommunicativeAct(strategy, build_act(strategy, d, pack, state, surface, topic=topic), remedy, obj, d.key)


def _first_topic(d: DisruptionInstance, pack: CulturePack, state: InteractionState):
    avoid = avoid_topics_for(d, pack, state)
    for topic in pack.norms(state.occasion).safe_topics:
        if topic not in avoid:
            key = f"change_topic.{topic}"
            return topic, key if key in pack.templates else None
    return None, None


def avoid_topics_for(d: DisruptionInstance, pack: CulturePack, state: InteractionState) -> FrozenSet[str]:
    avoid = set(pack.norms(state.occasion).membrane)
    if d.kind in (K.S6, K.S11):
        for i in d.evidence:
            payload = state.event(i).payload
            if isinstance(payload, Say):
                avoid.update(payload.act.topics)
    return frozenset(avoid)


def map_strategy(d: DisruptionInstance, pack: CulturePack, state: InteractionState) -> RecoveryGoal:
    if d.status is RecoveryStatus.TOLERATED:
        raise PreconditionError(f"{d.key} is tolerated; nothing to map")
    chain = chain_for(d, pack, state.agent)
    return RecoveryGoal(
        disruption=d,
        chain=chain,
        avoid_topics=avoid_topics_for(d, pack, state),
        addressee=recovery_addressee(d, state.agent),
        must_form=chain[0].form is Form.MUST,
    )

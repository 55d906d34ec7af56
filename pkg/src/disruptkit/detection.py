"""Rule families that turn (state, event) into disruption instances.

Reactive mode only sees order changes whose original order lies inside a
sliding window of recent events; enhanced mode sees the whole state.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence

from .interaction import (
    ActKind,
    BystanderReaction,
    Depart,
    DialogueAct,
    Event,
    InteractionState,
    Move,
    Phase,
    Physical,
    Say,
    Serve,
    apply_event,
    compatible_change,
    distance,
)
from .taxonomy import (
    PHYSICAL_MISHAP,
    TALK_BASED,
    THIRD_PARTY_MOCKS,
    THIRD_PARTY_NEUTRAL,
    DisruptionInstance,
    DisruptionKind as K,
    Repairable,
    StatusContext,
    classify_status,
    perceive_intentionality,
)

WITH_CHORD_MAX_M = 1.5


@dataclass(frozen=True)
class DetectionConfig:
    mode: str = "reactive"  # reactive | enhanced
    window: int = 8

    def __post_init__(self) -> None:
        if self.mode not in ("reactive", "enhanced"):
            raise ValueError(f"unknown detection mode {self.mode!r}")
        if self.mode == "reactive" and self.window < 2:
            raise ValueError("reactive window must be at least 2")


ENHANCED = DetectionConfig("enhanced")


def make_instance(
    kind: K,
    actor: str,
    affected: Iterable[str],
    evidence: Iterable[int],
    *,
    flags: Iterable[str] = (),
    context: StatusContext = StatusContext(),
    subkind: Optional[Repairable] = None,
    note: str = "",
) -> DisruptionInstance:
    flags = frozenset(flags)
    evidence = tuple(sorted(set(i for i in evidence if i > 0)))
    intent = perceive_intentionality(kind, flags)
    context = replace(context, perceived=intent.perceived, subkind=subkind)
    return DisruptionInstance(
        kind=kind,
        breaching_actor=actor,
        affected=tuple(a for a in dict.fromkeys(affected) if a != actor),
        evidence=evidence,
        intent=intent,
        status=classify_status(kind, context),
        at=max(evidence),
        subkind=subkind,
        flags=flags,
        context=context,
        note=note,
    )


def assess(
    instance: DisruptionInstance, state: Optional[InteractionState] = None, reactions: Iterable[str] = ()
) -> DisruptionInstance:
    """Recompute intent and status once bystander reactions are known."""
    flags = instance.flags | frozenset(reactions)
    intent = perceive_intentionality(instance.kind, flags)
    context = replace(instance.context, perceived=intent.perceived)
    return replace(instance, flags=flags, intent=intent, context=context, status=classify_status(instance.kind, context))


def reaction_flag(event: Event) -> Optional[str]:
    if isinstance(event.payload, BystanderReaction):
        return THIRD_PARTY_MOCKS if event.payload.reaction == "mock" else THIRD_PARTY_NEUTRAL
    return None


def detect(
    state: InteractionState,
    event: Event,
    config: DetectionConfig = ENHANCED,
    post: Optional[InteractionState] = None,
) -> List[DisruptionInstance]:
    """Functional then social findings for ``event`` applied to ``state``."""
    post = post if post is not None else apply_event(state, event)
    return _functional(state, event, config, post) + _social(state, event, config, post)


def detect_functional(
    state: InteractionState, new_event: Event, config: DetectionConfig = ENHANCED
) -> List[DisruptionInstance]:
    return _functional(state, new_event, config, apply_event(state, new_event))


def detect_social(
    state: InteractionState, new_event: Event, config: DetectionConfig = ENHANCED
) -> List[DisruptionInstance]:
    return _social(state, new_event, config, apply_event(state, new_event))


def _heard(state: InteractionState, event: Event) -> bool:
    """False for a non-agent utterance lost in noise."""
    p = event.payload
    return not (isinstance(p, Say) and p.act.speaker != state.agent and state.is_masked(event.index))


# -- functional order -------------------------------------------------------


def _functional(pre: InteractionState, event: Event, config: DetectionConfig, post: InteractionState) -> List[DisruptionInstance]:
    out: List[DisruptionInstance] = []
    for rule in (_f1, _f2, _f3, _f4, _f5):
        found = rule(pre, event, config, post)
        if found is not None:
            out.append(found)
    return out


def _f1(pre, event, config, post) -> Optional[DisruptionInstance]:
    for client in sorted(post.processes):
        mark = post.processes[client].change
        if mark is None or mark.change_index != event.index:
            continue
        if config.mode == "reactive" and event.index - mark.original_index >= config.window:
            return None  # the original order has left the window
        cat = post.catalog
        compatible = mark.old_item in cat and mark.new_item in cat and compatible_change(mark.old_item, mark.new_item, cat)
        return make_instance(
            K.F1,
            client,
            [post.agent],
            [mark.original_index, event.index],
            context=StatusContext(compatible_change=compatible),
            note=f"{mark.old_item}->{mark.new_item}",
        )
    return None


def _f2(pre, event, config, post) -> Optional[DisruptionInstance]:
    limit = pre.norms.timeout_order_start_s
    for client in sorted(pre.counter_since):
        tick, since_index = pre.counter_since[client]
        proc = post.processes.get(client)
        if proc is None or proc.phase not in (Phase.IDLE, Phase.ENGAGED):
            continue
        if not post.participants[client].present:
            continue
        if pre.clock - tick <= limit < event.time - tick:
            return make_instance(K.F2, client, [post.agent], [since_index, event.index], note=f"waited {event.time - tick}s")
    return None


def _f3(pre, event, config, post) -> Optional[DisruptionInstance]:
    agent = pre.agent
    still_open = set(post.open_pairs)
    for pair in sorted(pre.open_pairs, key=lambda p: p.first_part):
        if pair.from_ != agent or pair.first_kind is not ActKind.ASK:
            continue
        if not pre.clock <= pair.deadline < event.time:
            continue
        if pair not in still_open or not post.participants[pair.to].present:
            continue
        return make_instance(K.F3, pair.to, [agent], [pair.first_part, event.index], note="question unanswered")
    return None


def _f4(pre, event, config, post) -> Optional[DisruptionInstance]:
    p = event.payload
    if not isinstance(p, Depart):
        return None
    proc = post.processes.get(p.participant)
    if proc is None or not proc.abandoned:
        return None
    return make_instance(K.F4, p.participant, [post.agent], [event.index], note=f"unpaid {proc.amount_due}")


def _f5(pre, event, config, post) -> Optional[DisruptionInstance]:
    p = event.payload
    if not isinstance(p, Physical):
        return None
    agent = post.agent
    if p.participant == agent:
        affected = [c for c in sorted(post.processes) if post.participants[c].present]
    else:
        affected = [agent]
    return make_instance(K.F5, p.participant, affected, [event.index], flags=[PHYSICAL_MISHAP], note=f"{p.mishap} {p.obj}")


# -- expressive order -------------------------------------------------------


def _social(pre: InteractionState, event: Event, config: DetectionConfig, post: InteractionState) -> List[DisruptionInstance]:
    out: List[DisruptionInstance] = []
    heard = _heard(pre, event)
    for rule in (_s6, _s7, _s8, _s9, _s10, _s11, _s12):
        if not heard and rule is not _s10:
            continue
        found = rule(pre, event, post)
        if found is not None:
            out.append(found)
    return out


def _say(event: Event) -> Optional[DialogueAct]:
    return event.payload.act if isinstance(event.payload, Say) else None


def _s6(pre, event, post) -> Optional[DisruptionInstance]:
    act = _say(event)
    if act is None:
        return None
    if act.presupposed_tie is not None:
        if len(act.addressees) >= 2:
            pairs = [(a, b) for i, a in enumerate(act.addressees) for b in act.addressees[i + 1 :]]
        else:
            pairs = [(act.speaker, a) for a in act.addressees]
        wrong = [(a, b) for a, b in pairs if pre.ties.tie(a, b) < act.presupposed_tie]
        if wrong:
            a, b = wrong[0]
            note = f"presumes {act.presupposed_tie.label} between {a} and {b} ({pre.ties.tie(a, b).label})"
            return make_instance(K.S6, act.speaker, act.addressees, [event.index], flags=[TALK_BASED], note=note)
    if act.kind is ActKind.REQUEST and act.item in pre.catalog.foreign:
        return make_instance(K.S6, act.speaker, act.addressees, [event.index], flags=[TALK_BASED], note=f"{act.item} is not served here")
    return None


def _s7(pre, event, post) -> Optional[DisruptionInstance]:
    act = _say(event)
    if act is None:
        return None
    n = pre.norms
    if (
        act.kind is ActKind.REQUEST
        and n.queue_policy == "fifo"
        and pre.is_client(act.speaker)
        and pre.queue
        and pre.queue[0] != act.speaker
    ):
        ahead = pre.queue[: pre.queue.index(act.speaker)] if act.speaker in pre.queue else pre.queue
        return make_instance(K.S7, act.speaker, list(ahead) + [pre.agent], [event.index], flags=[TALK_BASED], note="skips the queue")
    if act.volume > n.volume_max:
        noisy = pre.noise is not None and event.index <= pre.noise[1]
        ctx = StatusContext(severity_within_tolerance=noisy)
        note = f"volume {act.volume}" + (" over noise" if noisy else "")
        return make_instance(K.S7, act.speaker, act.addressees, [event.index], flags=[TALK_BASED], context=ctx, note=note)
    return None


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c) -> float:
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return d1 * d2 < 0 and d3 * d4 < 0


def _s8(pre, event, post) -> Optional[DisruptionInstance]:
    p = event.payload
    if not isinstance(p, Move):
        return None
    mover = p.participant
    group = pre.participants[mover].with_group
    new = post.positions[mover]
    old = pre.positions.get(mover)
    present = [q for q in sorted(post.participants) if q != mover and post.participants[q].present and q in post.positions]
    hit: List[str] = []
    for q in present:
        other = post.participants[q].with_group
        if group is not None and other == group:
            continue
        close_now = distance(new, post.positions[q]) < pre.norms.proxemic_violation_m
        close_before = old is not None and distance(old, post.positions[q]) < pre.norms.proxemic_violation_m
        if close_now and not close_before:
            hit.append(q)
    notes = [f"within {pre.norms.proxemic_violation_m}m of {', '.join(hit)}"] if hit else []
    if old is not None:
        for i, a in enumerate(present):
            ga = post.participants[a].with_group
            if ga is None or ga == group:
                continue
            for b in present[i + 1 :]:
                if post.participants[b].with_group != ga:
                    continue
                pa, pb = post.positions[a], post.positions[b]
                if distance(pa, pb) <= WITH_CHORD_MAX_M and _segments_cross(old, new, pa, pb):
                    hit += [a, b]
                    notes.append(f"crosses the with {a}+{b}")
    if not hit:
        return None
    return make_instance(K.S8, mover, hit, [event.index], note="; ".join(notes))


def _s9(pre, event, post) -> Optional[DisruptionInstance]:
    p = event.payload
    agent = pre.agent
    if isinstance(p, Serve):
        for pair in sorted(pre.open_pairs, key=lambda x: x.first_part):
            if pair.from_ == p.client and pair.to == agent and pair.first_kind is ActKind.REQUEST:
                return make_instance(
                    K.S9, agent, [p.client], [pair.first_part, event.index], note="served without answering the request"
                )
        return None
    act = _say(event)
    if act is None or post.hold is None:
        return None
    speaker, start, start_index = post.hold
    limit = pre.norms.turn_hold_max_s
    if speaker == act.speaker and pre.clock - start <= limit < event.time - start and start_index < event.index:
        return make_instance(
            K.S9, speaker, act.addressees, [start_index, event.index], note=f"holds the floor {event.time - start}s"
        )
    return None


def _open_question(pre: InteractionState, act: DialogueAct):
    for pair in sorted(pre.open_pairs, key=lambda x: -x.first_part):
        if pair.to == act.speaker and pair.from_ in act.addressees and pair.first_kind is ActKind.ASK:
            return pair
    return None


def _s10(pre, event, post) -> Optional[DisruptionInstance]:
    act = _say(event)
    if act is None:
        return None
    agent = pre.agent
    if not _heard(pre, event):
        if agent in act.addressees:
            return make_instance(
                K.S10, act.speaker, [agent], [event.index], subkind=Repairable.NON_RECEPTION, note="lost in noise"
            )
        return None
    if act.kind is ActKind.ANSWER and act.answer_polarity is not None:
        pair = _open_question(pre, act)
        if pair is not None:
            q = pre.event(pair.first_part).payload.act
            if q.question_form.kind == "alternative":
                return make_instance(
                    K.S10,
                    act.speaker,
                    act.addressees,
                    [pair.first_part, event.index],
                    subkind=Repairable.MISUNDERSTANDING,
                    note=f"{act.answer_polarity} to {' or '.join(q.question_form.options)}",
                )
    if act.kind is ActKind.SELF_REPAIR:
        prior = [
            e.index
            for e in pre.history
            if isinstance(e.payload, Say) and e.payload.act.speaker == act.speaker
        ]
        evidence = prior[-1:] + [event.index]
        return make_instance(
            K.S10, act.speaker, act.addressees, evidence, subkind=Repairable.SPEECH_ERROR, note="self-repaired slip"
        )
    if act.referent is not None:
        targets = pre.catalog.referents(act.referent)
        if len(targets) > 1:
            return make_instance(
                K.S10,
                act.speaker,
                act.addressees,
                [event.index],
                subkind=Repairable.INDEXICAL,
                note=f"{act.referent} could be {', '.join(targets)}",
            )
    return None


def _s11(pre, event, post) -> Optional[DisruptionInstance]:
    act = _say(event)
    if act is None:
        return None
    breach = [t for t in act.topics if t in pre.membrane]
    if not breach:
        return None
    return make_instance(K.S11, act.speaker, act.addressees, [event.index], flags=[TALK_BASED], note=f"topic {', '.join(breach)}")


def _last_say(state: InteractionState) -> Optional[DialogueAct]:
    for ev in reversed(state.history):
        if isinstance(ev.payload, Say):
            return ev.payload.act
    return None


def _s12(pre, event, post) -> Optional[DisruptionInstance]:
    act = _say(event)
    if act is None or act.mitigated:
        return None
    note = None
    if act.kind is ActKind.DISAGREE:
        note = "bare disagreement"
    elif act.kind is ActKind.REFUSE:
        note = "bare refusal"
    elif act.kind is ActKind.AGREE:
        last = _last_say(pre)
        if last is not None and last.kind is ActKind.SELF_CRITIQUE and last.speaker in act.addressees:
            note = "agrees with a self-critique"
    if note is None:
        return None
    return make_instance(K.S12, act.speaker, act.addressees, [event.index], flags=[TALK_BASED], note=note)


def agent_attributed(instances: Sequence[DisruptionInstance], agent: str) -> List[DisruptionInstance]:
    return [d for d in instances if d.breaching_actor == agent]


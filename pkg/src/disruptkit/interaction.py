"""Participants, events, dialogue acts and the evolving interaction state.

``apply_event`` is a pure fold: the input state is never mutated, every
update builds a new ``InteractionState``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from decimal import Decimal
from enum import Enum, IntEnum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple, Union

from .errors import IllegalTransition, StaleEvent, UnknownItem, UnknownParticipant

Point = Tuple[float, float]

COUNTER_ZONE_M = 1.0
PAYMENT = "payment"  # reserved item token: a request for it is a bill


class Role(Enum):
    CLIENT = "client"
    AGENT = "agent"
    BYSTANDER = "bystander"


class Tie(IntEnum):
    STRANGERS = 0
    ACQUAINTED = 1
    CLOSE = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "Tie":
        return cls[text.upper()]


class ActKind(Enum):
    REQUEST = "request"
    ACCEPT = "accept"
    ASK = "ask"
    ANSWER = "answer"
    INFORM = "inform"
    APOLOGIZE = "apologize"
    EXCUSE = "excuse"
    JUSTIFY = "justify"
    MINIMIZE = "minimize"
    SELF_CRITIQUE = "self_critique"
    DISAGREE = "disagree"
    AGREE = "agree"
    REFUSE = "refuse"
    SELF_REPAIR = "self_repair"
    REFERENCE = "reference"
    GREET = "greet"
    DEPART_ANNOUNCE = "depart_announce"
    CHANGE_TOPIC = "change_topic"
    STATE_NORM = "state_norm"
    JOKE = "joke"
    CRITICIZE = "criticize"
    BOUNDARY_STATEMENT = "boundary_statement"


class Phase(IntEnum):
    IDLE = 0
    ENGAGED = 1
    ORDERING = 2
    CONFIRMED = 3
    PREPARING = 4
    SERVED = 5
    BILLING = 6
    PAID = 7
    CLOSED = 8

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Participant:
    id: str
    role: Role
    with_group: Optional[str] = None
    present: bool = True


@dataclass(frozen=True)
class RelationshipMatrix:
    """Symmetric pairwise ties; missing pairs are strangers."""

    ties: FrozenSet[Tuple[FrozenSet[str], Tie]] = frozenset()

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str, Tie]]) -> "RelationshipMatrix":
        table: Dict[FrozenSet[str], Tie] = {}
        for a, b, tie in pairs:
            if a != b:
                table[frozenset((a, b))] = tie
        return cls(frozenset(table.items()))

    def tie(self, a: str, b: str) -> Tie:
        if a == b:
            return Tie.CLOSE
        key = frozenset((a, b))
        for pair, tie in self.ties:
            if pair == key:
                return tie
        return Tie.STRANGERS


@dataclass(frozen=True)
class QuestionForm:
    kind: str  # yes_no | alternative | open
    options: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("yes_no", "alternative", "open"):
            raise ValueError(f"unknown question form {self.kind!r}")
        if (self.kind == "alternative") != bool(self.options):
            raise ValueError("only alternative questions carry options")


@dataclass(frozen=True)
class DialogueAct:
    kind: ActKind
    speaker: str
    addressees: Tuple[str, ...]
    item: Optional[str] = None
    question_form: Optional[QuestionForm] = None
    answer_polarity: Optional[str] = None
    referent: Optional[str] = None
    presupposed_tie: Optional[Tie] = None
    topics: Tuple[str, ...] = ()
    volume: int = 5
    mitigated: bool = False
    surface: Optional[str] = None

    def __post_init__(self) -> None:
        if self.kind is ActKind.ASK and self.question_form is None:
            raise ValueError("an ask needs a question form")
        if self.kind is ActKind.ANSWER and self.answer_polarity is None and self.item is None:
            raise ValueError("an answer needs a polarity or an item")
        if self.kind is ActKind.REQUEST and self.item is None:
            raise ValueError("a request needs an item")
        if self.answer_polarity not in (None, "yes", "no"):
            raise ValueError(f"bad polarity {self.answer_polarity!r}")
        if not 0 <= self.volume <= 10:
            raise ValueError("volume is a level between 0 and 10")


# -- event payloads ---------------------------------------------------------

MISHAPS = ("spill", "drop", "bump")


@dataclass(frozen=True)
class Say:
    act: DialogueAct


@dataclass(frozen=True)
class Move:
    participant: str
    position: Point


@dataclass(frozen=True)
class Physical:
    participant: str
    mishap: str
    obj: str

    def __post_init__(self) -> None:
        if self.mishap not in MISHAPS:
            raise ValueError(f"unknown mishap {self.mishap!r}")


@dataclass(frozen=True)
class Noise:
    level: int
    span: int


@dataclass(frozen=True)
class Enter:
    participant: str
    position: Optional[Point] = None


@dataclass(frozen=True)
class Depart:
    participant: str


@dataclass(frozen=True)
class QueueJoin:
    participant: str


@dataclass(frozen=True)
class BystanderReaction:
    reaction: str  # mock | neutral

    def __post_init__(self) -> None:
        if self.reaction not in ("mock", "neutral"):
            raise ValueError(f"unknown reaction {self.reaction!r}")


@dataclass(frozen=True)
class Prepare:
    agent: str
    client: str


@dataclass(frozen=True)
class Serve:
    agent: str
    client: str
    item: str


@dataclass(frozen=True)
class Pay:
    client: str
    amount: Decimal


@dataclass(frozen=True)
class Remedy:
    """Symbolic marker for a physical remediation (cleaning, remaking)."""

    participant: str
    token: str
    obj: Optional[str] = None


Payload = Union[
    Say, Move, Physical, Noise, Enter, Depart, QueueJoin, BystanderReaction, Prepare, Serve, Pay, Remedy
]


@dataclass(frozen=True)
class Event:
    index: int
    time: int
    payload: Payload


def payload_participants(payload: Payload) -> Tuple[str, ...]:
    if isinstance(payload, Say):
        return (payload.act.speaker,) + tuple(payload.act.addressees)
    if isinstance(payload, (Move, Physical, Enter, Depart, QueueJoin, Remedy)):
        return (payload.participant,)
    if isinstance(payload, (Prepare, Serve)):
        return (payload.agent, payload.client)
    if isinstance(payload, Pay):
        return (payload.client,)
    return ()


# -- catalog ----------------------------------------------------------------


@dataclass(frozen=True)
class Item:
    name: str
    price: Decimal = Decimal("0")
    category: Optional[str] = None


@dataclass(frozen=True)
class Catalog:
    items: Tuple[Item, ...] = ()
    compatible_pairs: FrozenSet[FrozenSet[str]] = frozenset()
    foreign: FrozenSet[str] = frozenset()
    objects: FrozenSet[str] = frozenset()
    deixis: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()

    def __contains__(self, name: object) -> bool:
        return any(i.name == name for i in self.items)

    def get(self, name: str) -> Item:
        for item in self.items:
            if item.name == name:
                return item
        raise UnknownItem(name)

    def category(self, name: str) -> Optional[str]:
        return self.get(name).category if name in self else None

    def referents(self, token: str) -> Tuple[str, ...]:
        for key, targets in self.deixis:
            if key == token:
                return targets
        if token in self or token in self.objects:
            return (token,)
        return ()


def compatible_change(old_item: str, new_item: str, catalog: Catalog) -> bool:
    for name in (old_item, new_item):
        if name not in catalog:
            raise UnknownItem(name)
    if old_item == new_item:
        return True
    return frozenset((old_item, new_item)) in catalog.compatible_pairs


# -- functional process -----------------------------------------------------


@dataclass(frozen=True)
class ChangeMark:
    old_item: str
    new_item: str
    original_index: int  # event that placed old_item
    change_index: int


@dataclass(frozen=True)
class FunctionalProcess:
    client: str
    phase: Phase = Phase.IDLE
    order_items: Tuple[str, ...] = ()
    item_sources: Tuple[int, ...] = ()  # event index per order item
    amount_due: Decimal = Decimal("0")
    change: Optional[ChangeMark] = None
    abandoned: bool = False


ProcessInput = Union[DialogueAct, Depart, Pay, Prepare, Serve, Remedy]


def _total(items: Iterable[str], catalog: Optional[Catalog]) -> Decimal:
    if catalog is None:
        return Decimal("0")
    return sum((catalog.get(i).price for i in items if i in catalog), Decimal("0"))


def _same_slot(old: str, new: str, catalog: Optional[Catalog]) -> bool:
    if catalog is None:
        return True
    cat_old, cat_new = catalog.category(old), catalog.category(new)
    return cat_old is not None and cat_old == cat_new


def functional_transition(
    process: FunctionalProcess,
    act: ProcessInput,
    *,
    catalog: Optional[Catalog] = None,
    at: int = 0,
) -> FunctionalProcess:
    """Advance one client's process.

    Raises IllegalTransition for moves the phase machine does not allow;
    callers treat that as a signal, not a crash.  A change of an already
    accepted order records a ``ChangeMark`` on the returned process.
    """
    p = replace(process, change=None)
    phase = p.phase

    if isinstance(act, Depart):
        abandoned = phase < Phase.PAID and p.amount_due > 0
        return replace(p, phase=Phase.CLOSED, abandoned=abandoned)
    if isinstance(act, Pay):
        if phase is not Phase.BILLING:
            raise IllegalTransition(phase, act)
        due = p.amount_due - act.amount
        if due <= 0:
            return replace(p, phase=Phase.PAID, amount_due=Decimal("0"))
        return replace(p, amount_due=due)
    if isinstance(act, Prepare):
        if phase is not Phase.CONFIRMED:
            raise IllegalTransition(phase, act)
        return replace(p, phase=Phase.PREPARING)
    if isinstance(act, Serve):
        if phase not in (Phase.CONFIRMED, Phase.PREPARING):
            raise IllegalTransition(phase, act)
        return replace(p, phase=Phase.SERVED, amount_due=_total(p.order_items, catalog))
    if isinstance(act, Remedy):
        if act.obj in p.order_items and phase in (Phase.PREPARING, Phase.SERVED):
            return replace(p, phase=Phase.PREPARING)  # remake
        return p

    if phase is Phase.CLOSED:
        raise IllegalTransition(phase, act)

    if act.speaker == p.client:
        return _client_act(p, act, catalog, at)
    return _agent_act(p, act)


def _client_act(p: FunctionalProcess, act: DialogueAct, catalog: Optional[Catalog], at: int) -> FunctionalProcess:
    phase = p.phase
    if act.kind is ActKind.GREET and phase is Phase.IDLE:
        return replace(p, phase=Phase.ENGAGED)
    if act.kind is ActKind.SELF_REPAIR and act.item and p.order_items:
        # a corrected slip replaces the slipped item, no change of mind
        items = list(p.order_items)
        pos = _slot_of(items, act.item, catalog)
        items[pos if pos is not None else -1] = act.item
        return replace(p, order_items=tuple(items))
    if act.kind is not ActKind.REQUEST or act.item == PAYMENT:
        return p
    if catalog is not None and act.item not in catalog:
        return p  # not something this place provides
    item = act.item
    if phase in (Phase.IDLE, Phase.ENGAGED):
        return replace(p, phase=Phase.ORDERING, order_items=(item,), item_sources=(at,))
    if phase in (Phase.ORDERING, Phase.CONFIRMED, Phase.PREPARING):
        if item in p.order_items:
            return p
        items, sources = list(p.order_items), list(p.item_sources)
        pos = _slot_of(items, item, catalog)
        if pos is None:
            return replace(
                p, phase=Phase.ORDERING, order_items=tuple(items + [item]), item_sources=tuple(sources + [at])
            )
        old, old_source = items[pos], sources[pos]
        items[pos], sources[pos] = item, at
        if phase is Phase.ORDERING:
            return replace(p, order_items=tuple(items), item_sources=tuple(sources))
        mark = ChangeMark(old, item, old_source, at)
        return replace(
            p, phase=Phase.CONFIRMED, order_items=tuple(items), item_sources=tuple(sources), change=mark
        )
    raise IllegalTransition(phase, act)


def _slot_of(items: List[str], new: str, catalog: Optional[Catalog]) -> Optional[int]:
    for i in range(len(items) - 1, -1, -1):
        if _same_slot(items[i], new, catalog):
            return i
    return None


def _agent_act(p: FunctionalProcess, act: DialogueAct) -> FunctionalProcess:
    phase = p.phase
    if act.kind in (ActKind.GREET, ActKind.ASK) and phase is Phase.IDLE:
        return replace(p, phase=Phase.ENGAGED)
    if act.kind is ActKind.ACCEPT and phase in (Phase.ORDERING, Phase.CONFIRMED):
        return replace(p, phase=Phase.CONFIRMED)
    if act.kind is ActKind.REQUEST and act.item == PAYMENT:
        if phase is not Phase.SERVED:
            raise IllegalTransition(phase, act)
        return replace(p, phase=Phase.BILLING)
    return p


# -- adjacency pairs and state ----------------------------------------------


@dataclass(frozen=True)
class AdjacencyPair:
    first_part: int
    expected_second: FrozenSet[ActKind]
    from_: str
    to: str
    deadline: int
    first_kind: ActKind


ASK_SECONDS = frozenset({ActKind.ANSWER, ActKind.REQUEST, ActKind.REFUSE})
REQUEST_SECONDS = frozenset({ActKind.ACCEPT, ActKind.REFUSE})


@dataclass(frozen=True)
class Norms:
    """Per-occasion thresholds and topic sets from a culture pack."""

    membrane: FrozenSet[str] = frozenset()
    proxemic_violation_m: float = 0.5
    volume_max: int = 7
    audibility_threshold: int = 6
    queue_policy: str = "fifo"
    timeout_order_start_s: float = 20
    timeout_answer_s: float = 6
    turn_hold_max_s: float = 45
    safe_topics: Tuple[str, ...] = ()


@dataclass(frozen=True)
class InteractionState:
    occasion: str
    participants: Mapping[str, Participant]
    ties: RelationshipMatrix
    processes: Mapping[str, FunctionalProcess]
    positions: Mapping[str, Point]
    landmarks: Mapping[str, Point]
    catalog: Catalog
    norms: Norms
    membrane: FrozenSet[str]
    queue: Tuple[str, ...] = ()
    open_pairs: Tuple[AdjacencyPair, ...] = ()
    topic_history: Tuple[str, ...] = ()
    clock: int = 0
    last_index: int = 0
    history: Tuple[Event, ...] = ()
    noise: Optional[Tuple[int, int]] = None  # (level, last masked index)
    unreceived: FrozenSet[int] = frozenset()
    counter_since: Mapping[str, Tuple[int, int]] = field(default_factory=dict)  # (tick, index) of arrival
    hold: Optional[Tuple[str, int, int]] = None  # (speaker, start tick, start index)
    illegal: Tuple[Tuple[int, str], ...] = ()

    @property
    def agent(self) -> str:
        for p in self.participants.values():
            if p.role is Role.AGENT:
                return p.id
        raise UnknownParticipant("no agent in this interaction")

    def event(self, index: int) -> Event:
        for ev in reversed(self.history):
            if ev.index == index:
                return ev
        raise KeyError(index)

    def is_client(self, pid: str) -> bool:
        p = self.participants.get(pid)
        return p is not None and p.role is Role.CLIENT

    def is_masked(self, index: int) -> bool:
        if self.noise is None:
            return False
        level, until = self.noise
        return index <= until and level >= self.norms.audibility_threshold


def initial_state(
    *,
    occasion: str,
    participants: Iterable[Participant],
    norms: Norms,
    catalog: Catalog = Catalog(),
    ties: RelationshipMatrix = RelationshipMatrix(),
    positions: Optional[Mapping[str, Point]] = None,
    landmarks: Optional[Mapping[str, Point]] = None,
    extra_membrane: Iterable[str] = (),
    clock: int = 0,
) -> InteractionState:
    people = {p.id: p for p in participants}
    if sum(1 for p in people.values() if p.role is Role.AGENT) != 1:
        raise ValueError("exactly one participant must have the agent role")
    positions = dict(positions or {})
    landmarks = dict(landmarks or {})
    processes = {pid: FunctionalProcess(pid) for pid, p in people.items() if p.role is Role.CLIENT}
    state = InteractionState(
        occasion=occasion,
        participants=people,
        ties=ties,
        processes=processes,
        positions=positions,
        landmarks=landmarks,
        catalog=catalog,
        norms=norms,
        membrane=frozenset(norms.membrane) | frozenset(extra_membrane),
        clock=clock,
    )
    since = {
        pid: (clock, 0)
        for pid, p in people.items()
        if p.role is Role.CLIENT and p.present and _at_counter(state, positions.get(pid))
    }
    return replace(state, counter_since=since)


def distance(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _at_counter(state: InteractionState, pos: Optional[Point]) -> bool:
    counter = state.landmarks.get("counter")
    return pos is not None and counter is not None and distance(pos, counter) < COUNTER_ZONE_M


def pending_pairs(state: InteractionState) -> List[AdjacencyPair]:
    overdue = [p for p in state.open_pairs if p.deadline < state.clock]
    return sorted(overdue, key=lambda p: p.first_part)


def apply_event(state: InteractionState, event: Event) -> InteractionState:
    if event.index != state.last_index + 1:
        raise StaleEvent(f"expected index {state.last_index + 1}, got {event.index}")
    if event.time < state.clock:
        raise StaleEvent(f"time {event.time} is before clock {state.clock}")
    for pid in payload_participants(event.payload):
        if pid not in state.participants:
            raise UnknownParticipant(pid)

    s = replace(state, clock=event.time, last_index=event.index, history=state.history + (event,))
    payload = event.payload

    if isinstance(payload, Say):
        return _apply_say(s, event.index, payload.act)
    if isinstance(payload, Move):
        return _move(s, payload.participant, payload.position)
    if isinstance(payload, Noise):
        return replace(s, noise=(payload.level, event.index + payload.span))
    if isinstance(payload, Enter):
        s = _set_participant(s, payload.participant, present=True)
        if payload.position is not None:
            s = _move(s, payload.participant, payload.position)
        return s
    if isinstance(payload, Depart):
        pid = payload.participant
        s = _set_participant(s, pid, present=False)
        since = {k: v for k, v in s.counter_since.items() if k != pid}
        s = replace(s, queue=tuple(q for q in s.queue if q != pid), counter_since=since)
        return _transition(s, pid, payload, event.index)
    if isinstance(payload, QueueJoin):
        pid = payload.participant
        if pid in s.queue or not s.is_client(pid) or not s.participants[pid].present:
            return s
        return replace(s, queue=s.queue + (pid,))
    if isinstance(payload, (Prepare, Serve)):
        return _transition(s, payload.client, payload, event.index)
    if isinstance(payload, Pay):
        return _transition(s, payload.client, payload, event.index)
    if isinstance(payload, Remedy):
        for pid in sorted(s.processes):
            s = _transition(s, pid, payload, event.index)
        return s
    return s  # Physical, BystanderReaction: recorded in history only


def _set_participant(s: InteractionState, pid: str, **changes) -> InteractionState:
    people = dict(s.participants)
    people[pid] = replace(people[pid], **changes)
    return replace(s, participants=people)


def _move(s: InteractionState, pid: str, pos: Point) -> InteractionState:
    positions = dict(s.positions)
    positions[pid] = (float(pos[0]), float(pos[1]))
    since = dict(s.counter_since)
    if s.is_client(pid):
        if _at_counter(s, positions[pid]):
            since.setdefault(pid, (s.clock, s.last_index))
        else:
            since.pop(pid, None)
    return replace(s, positions=positions, counter_since=since)


def _transition(s: InteractionState, client: str, act: ProcessInput, index: int) -> InteractionState:
    proc = s.processes.get(client)
    if proc is None:
        return s
    try:
        new = functional_transition(proc, act, catalog=s.catalog, at=index)
    except IllegalTransition as exc:
        return replace(s, illegal=s.illegal + ((index, str(exc)),))
    processes = dict(s.processes)
    processes[client] = new
    queue = s.queue
    if new.phase >= Phase.SERVED and client in queue:
        queue = tuple(q for q in queue if q != client)
    return replace(s, processes=processes, queue=queue)


def _apply_say(s: InteractionState, index: int, act: DialogueAct) -> InteractionState:
    masked = s.is_masked(index)
    agent = s.agent
    if masked:
        s = replace(s, unreceived=s.unreceived | {index})

    hold = s.hold if s.hold and s.hold[0] == act.speaker else (act.speaker, s.clock, index)
    s = replace(s, hold=hold, topic_history=s.topic_history + tuple(act.topics))

    # the agent cannot act on what it did not hear
    if masked and act.speaker != agent:
        return s

    pairs = [
        p
        for p in s.open_pairs
        if not (p.to == act.speaker and p.from_ in act.addressees and act.kind in p.expected_second)
    ]
    deadline = s.clock + int(math.ceil(s.norms.timeout_answer_s))
    if act.kind in (ActKind.ASK, ActKind.REQUEST):
        expected = ASK_SECONDS if act.kind is ActKind.ASK else REQUEST_SECONDS
        for to in act.addressees:
            pairs.append(AdjacencyPair(index, expected, act.speaker, to, deadline, act.kind))
    s = replace(s, open_pairs=tuple(pairs))

    if s.is_client(act.speaker):
        s = _transition(s, act.speaker, act, index)
    elif act.speaker == agent:
        for to in act.addressees:
            if s.is_client(to):
                s = _transition(s, to, act, index)
    return s

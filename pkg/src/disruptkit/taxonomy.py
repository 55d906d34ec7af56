"""Disruption catalogue: kinds, intentionality, recovery status and default chains.

Everything here is pure data plus pure functions; nothing holds state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import FrozenSet, Iterable, Optional, Tuple


class Order(Enum):
    FUNCTIONAL = "functional"
    SOCIAL = "social"


class DisruptionKind(Enum):
    F1 = "F1"
    F2 = "F2"
    F3 = "F3"
    F4 = "F4"
    F5 = "F5"
    S6 = "S6"
    S7 = "S7"
    S8 = "S8"
    S9 = "S9"
    S10 = "S10"
    S11 = "S11"
    S12 = "S12"

    @property
    def row(self) -> int:
        return int(self.value[1:])

    @property
    def order(self) -> Order:
        return Order.FUNCTIONAL if self.value[0] == "F" else Order.SOCIAL

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, text: str) -> "DisruptionKind":
        return cls(text)


_LABELS = {
    DisruptionKind.F1: "change of agreed order",
    DisruptionKind.F2: "process not started",
    DisruptionKind.F3: "process not proceeding",
    DisruptionKind.F4: "process abandoned",
    DisruptionKind.F5: "performative mistake",
    DisruptionKind.S6: "common definition of the situation",
    DisruptionKind.S7: "tacit norms",
    DisruptionKind.S8: "proxemic norms",
    DisruptionKind.S9: "conversational norms",
    DisruptionKind.S10: "conversational repairable",
    DisruptionKind.S11: "membrane",
    DisruptionKind.S12: "dispreferred action",
}

ALL_KINDS: Tuple[DisruptionKind, ...] = tuple(DisruptionKind)


class Repairable(Enum):
    """Sub-kinds of S10, carried on the instance."""

    NON_RECEPTION = "non_reception"
    MISUNDERSTANDING = "misunderstanding"
    SPEECH_ERROR = "speech_error"
    INDEXICAL = "indexical"


class Actual(Enum):
    INTENDED = "intended"
    UNINTENDED = "unintended"
    UNKNOWN = "unknown"


class Perceived(Enum):
    INTENDED = "intended"
    UNINTENDED = "unintended"
    AMBIGUOUS = "ambiguous"


@dataclass(frozen=True)
class IntentionalityAssessment:
    actual: Actual
    perceived: Perceived

    def __str__(self) -> str:
        return f"actual={self.actual.value} perceived={self.perceived.value}"


class RecoveryStatus(IntEnum):
    TOLERATED = 0
    RECOVERY_OPTIONAL = 1
    RECOVERY_NECESSARY = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, text: str) -> "RecoveryStatus":
        return cls[text.upper()]


class Form(Enum):
    MUST = "must"
    MAY = "may"


class Strategy(Enum):
    APOLOGIZE = "apologize"
    EXCUSE = "excuse"
    JUSTIFY = "justify"
    MINIMIZE = "minimize"
    OFFER_COMPENSATION = "offer_compensation"
    INITIATE_PROCESS = "initiate_process"
    REPEAT_QUESTION = "repeat_question"
    ASK_TO_PROCEED = "ask_to_proceed"
    REMEDIATE_PHYSICAL = "remediate_physical"
    TREAT_AS_IRRELEVANT = "treat_as_irrelevant"
    TRIANGLING = "triangling"
    STATE_NORM = "state_norm"
    REQUEST_REPEAT = "request_repeat"
    SIGNAL_MISUNDERSTANDING = "signal_misunderstanding"
    SELF_REPAIR = "self_repair"
    CLARIFY_REFERENT = "clarify_referent"
    IGNORE_AND_CONTINUE = "ignore_and_continue"
    BENEVOLENT_JOKE = "benevolent_joke"
    CRITICIZE = "criticize"
    CHANGE_TOPIC = "change_topic"
    HESITATION_PREFACE = "hesitation_preface"
    BOUNDARY_STATEMENT = "boundary_statement"

    @property
    def form(self) -> Form:
        # non-reception blocks the exchange until repeated
        return Form.MUST if self is Strategy.REQUEST_REPEAT else Form.MAY


# Evidence flags understood by perceive_intentionality.
TALK_BASED = "talk_based"
PHYSICAL_MISHAP = "physical_mishap"
THIRD_PARTY_MOCKS = "third_party_mocks"
THIRD_PARTY_NEUTRAL = "third_party_neutral"
EXPLICIT_EXCUSE_GIVEN = "explicit_excuse_given"
EVIDENCE_FLAGS = frozenset(
    {TALK_BASED, PHYSICAL_MISHAP, THIRD_PARTY_MOCKS, THIRD_PARTY_NEUTRAL, EXPLICIT_EXCUSE_GIVEN}
)


@dataclass(frozen=True)
class StatusContext:
    """Facts that make a kind's status conditional."""

    compatible_change: bool = False
    process_abandoned: bool = False
    severity_within_tolerance: bool = False
    perceived: Perceived = Perceived.AMBIGUOUS
    subkind: Optional[Repairable] = None


@dataclass(frozen=True)
class DisruptionInstance:
    kind: DisruptionKind
    breaching_actor: str
    affected: Tuple[str, ...]
    evidence: Tuple[int, ...]
    intent: IntentionalityAssessment
    status: RecoveryStatus
    at: int
    subkind: Optional[Repairable] = None
    flags: FrozenSet[str] = frozenset()
    context: StatusContext = field(default_factory=StatusContext)
    note: str = ""

    def __post_init__(self) -> None:
        if not self.evidence:
            raise ValueError("a disruption needs at least one evidence event")
        if self.at != max(self.evidence):
            raise ValueError(f"at={self.at} must equal the last evidence index {max(self.evidence)}")
        if (self.kind is DisruptionKind.S10) != (self.subkind is not None):
            raise ValueError("S10 instances (and only those) carry a repairable sub-kind")

    @property
    def key(self) -> str:
        return f"{self.kind.value}@{self.at}"

    def describe(self) -> str:
        sub = f" sub={self.subkind.value}" if self.subkind else ""
        affected = ",".join(self.affected)
        evidence = ",".join(str(i) for i in self.evidence)
        return (
            f"{self.kind.value}{sub} by={self.breaching_actor} affected=[{affected}] "
            f"evidence=[{evidence}] {self.intent} status={self.status.label}"
        )


def perceive_intentionality(
    kind: DisruptionKind, evidence_flags: Iterable[str]
) -> IntentionalityAssessment:
    flags = frozenset(evidence_flags)
    unknown = flags - EVIDENCE_FLAGS
    if unknown:
        raise ValueError(f"unknown evidence flags: {sorted(unknown)}")
    if THIRD_PARTY_MOCKS in flags and THIRD_PARTY_NEUTRAL in flags:
        raise ValueError("third_party_mocks and third_party_neutral are mutually exclusive")

    actual = Actual.UNINTENDED if EXPLICIT_EXCUSE_GIVEN in flags else Actual.UNKNOWN

    if kind in (DisruptionKind.S9, DisruptionKind.S12):
        perceived = Perceived.INTENDED
    elif kind in (DisruptionKind.F5, DisruptionKind.S10, DisruptionKind.F1):
        perceived = Perceived.UNINTENDED
    elif kind is DisruptionKind.S6:
        if THIRD_PARTY_MOCKS in flags:
            perceived = Perceived.INTENDED
        elif THIRD_PARTY_NEUTRAL in flags:
            perceived = Perceived.UNINTENDED
        else:
            perceived = Perceived.AMBIGUOUS
    elif TALK_BASED in flags:
        perceived = Perceived.INTENDED
    elif PHYSICAL_MISHAP in flags:
        perceived = Perceived.UNINTENDED
    else:
        perceived = Perceived.AMBIGUOUS
    return IntentionalityAssessment(actual, perceived)


_ALWAYS_NECESSARY = frozenset(
    {DisruptionKind.F4, DisruptionKind.F5, DisruptionKind.S8, DisruptionKind.S11, DisruptionKind.S12}
)


def classify_status(kind: DisruptionKind, context: StatusContext = StatusContext()) -> RecoveryStatus:
    necessary, optional = RecoveryStatus.RECOVERY_NECESSARY, RecoveryStatus.RECOVERY_OPTIONAL
    if kind in _ALWAYS_NECESSARY:
        return necessary
    if kind is DisruptionKind.F1:
        return optional if context.compatible_change else necessary
    if kind is DisruptionKind.F2:
        return optional if context.severity_within_tolerance else necessary
    if kind is DisruptionKind.F3:
        return optional if context.process_abandoned else necessary
    if kind is DisruptionKind.S6:
        return necessary if context.perceived is Perceived.INTENDED else optional
    if kind is DisruptionKind.S7:
        return RecoveryStatus.TOLERATED if context.severity_within_tolerance else necessary
    if kind is DisruptionKind.S9:
        return optional
    if kind is DisruptionKind.S10:
        if context.subkind in (Repairable.MISUNDERSTANDING, Repairable.SPEECH_ERROR):
            return optional
        return necessary
    raise AssertionError(kind)  # pragma: no cover


S = Strategy


def default_strategy_chain(
    kind: DisruptionKind,
    breaching_actor_is_agent: bool,
    perceived: Perceived = Perceived.AMBIGUOUS,
    subkind: Optional[Repairable] = None,
) -> Tuple[Strategy, ...]:
    """Agent-side portion of the catalogue's recovery chain for ``kind``.

    For S10 the sub-kind selects the chain; it defaults to non-reception.
    """
    agent = breaching_actor_is_agent
    K = DisruptionKind
    if kind is K.F1:
        return (S.APOLOGIZE,) if agent else (S.MINIMIZE,)
    if kind is K.F2:
        return (S.INITIATE_PROCESS,)
    if kind is K.F3:
        return (S.REPEAT_QUESTION,)
    if kind is K.F4:
        return (S.ASK_TO_PROCEED, S.MINIMIZE)
    if kind is K.F5:
        return (S.APOLOGIZE, S.REMEDIATE_PHYSICAL) if agent else (S.MINIMIZE,)
    if kind is K.S6:
        return (S.TRIANGLING,) if perceived is Perceived.UNINTENDED else (S.TREAT_AS_IRRELEVANT,)
    if kind is K.S7:
        return (S.STATE_NORM,)
    if kind is K.S8:
        return (S.APOLOGIZE,) if agent else (S.MINIMIZE,)
    if kind is K.S9:
        return (S.APOLOGIZE, S.EXCUSE) if agent else (S.BOUNDARY_STATEMENT,)
    if kind is K.S10:
        sub = subkind or Repairable.NON_RECEPTION
        if sub is Repairable.NON_RECEPTION:
            return (S.REQUEST_REPEAT,)
        if sub is Repairable.MISUNDERSTANDING:
            return (S.SIGNAL_MISUNDERSTANDING,)
        if sub is Repairable.SPEECH_ERROR:
            # someone else's slip is already self-repaired in the evidence
            return (S.SELF_REPAIR,) if agent else (S.IGNORE_AND_CONTINUE,)
        return (S.CLARIFY_REFERENT,)
    if kind is K.S11:
        return (S.IGNORE_AND_CONTINUE, S.BENEVOLENT_JOKE, S.CRITICIZE)
    if kind is K.S12:
        return (S.HESITATION_PREFACE, S.MINIMIZE) if agent else (S.MINIMIZE,)
    raise AssertionError(kind)  # pragma: no cover


def chain_family(kind: DisruptionKind) -> FrozenSet[Strategy]:
    """Every strategy any default chain for ``kind`` may contain."""
    out = set()
    subkinds = list(Repairable) if kind is DisruptionKind.S10 else [None]
    for agent in (True, False):
        for perceived in Perceived:
            for sub in subkinds:
                out.update(default_strategy_chain(kind, agent, perceived, sub))
    return frozenset(out)


def default_reachable() -> FrozenSet[Strategy]:
    out = set()
    for kind in ALL_KINDS:
        out |= chain_family(kind)
    return frozenset(out)

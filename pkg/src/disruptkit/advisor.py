"""Competence requirements per disruption kind, and a static checklist report."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Mapping, Set, Tuple

from .errors import SchemaError
from .taxonomy import ALL_KINDS, DisruptionKind as K

COMPETENCES = frozenset(
    {"perceptual", "conversational", "representational", "functional", "reasoning", "spatial", "self_perception", "self_assessment"}
)
KNOWLEDGE = frozenset(
    {"scenario", "functional_process", "tacit_norms", "proxemic_norms", "conversational_norms", "illocutionary_acts", "social_norms"}
)
REPRESENTATION = frozenset({"current_scenario", "situating_scenario", "spatial_status", "communication_status"})
PLANNING = frozenset({"functional", "recovery_acts", "recovery_illocutionary", "spatial"})

VOCABULARIES: Dict[str, FrozenSet[str]] = {
    "competences": COMPETENCES,
    "knowledge": KNOWLEDGE,
    "representation": REPRESENTATION,
    "planning": PLANNING,
}
QUESTIONS = tuple(f"q{i}" for i in range(1, 15))


@dataclass(frozen=True)
class CompetenceProfile:
    competences: FrozenSet[str] = frozenset()
    knowledge: FrozenSet[str] = frozenset()
    representation: FrozenSet[str] = frozenset()
    planning: FrozenSet[str] = frozenset()

    def __post_init__(self) -> None:
        for column, vocab in VOCABULARIES.items():
            values = frozenset(getattr(self, column))
            object.__setattr__(self, column, values)
            unknown = sorted(values - vocab)
            if unknown:
                raise SchemaError(column, f"unknown {column} entries: {', '.join(unknown)}")

    @classmethod
    def full(cls) -> "CompetenceProfile":
        return cls(COMPETENCES, KNOWLEDGE, REPRESENTATION, PLANNING)

    def covers(self, other: "CompetenceProfile") -> bool:
        return all(getattr(other, c) <= getattr(self, c) for c in VOCABULARIES)

    def to_json(self) -> Dict[str, list]:
        return {c: sorted(getattr(self, c)) for c in VOCABULARIES}


def _req(comp: str, know: str, rep: str, plan: str) -> CompetenceProfile:
    return CompetenceProfile(*(frozenset(s.split()) for s in (comp, know, rep, plan)))


# Empty cells mean no requirement. The reasoning column has no profile field.
REQUIREMENTS: Dict[K, CompetenceProfile] = {
    K.F1: _req("conversational representational", "scenario", "current_scenario situating_scenario", "functional"),
    K.F2: _req("representational perceptual", "functional_process", "", "functional"),
    K.F3: _req("representational", "functional_process", "current_scenario situating_scenario", "functional"),
    K.F4: _req("representational", "functional_process", "situating_scenario", "functional"),
    K.F5: _req("representational functional reasoning", "functional_process", "situating_scenario", "functional recovery_acts"),
    K.S6: _req("representational", "scenario", "current_scenario", "recovery_acts recovery_illocutionary"),
    K.S7: _req("representational reasoning", "tacit_norms", "situating_scenario", "recovery_illocutionary"),
    K.S8: _req(
        "representational perceptual spatial", "proxemic_norms", "spatial_status", "spatial recovery_acts recovery_illocutionary"
    ),
    K.S9: _req("conversational representational perceptual", "conversational_norms", "communication_status", "recovery_illocutionary"),
    K.S10: _req(
        "conversational perceptual self_perception self_assessment",
        "illocutionary_acts",
        "communication_status",
        "recovery_illocutionary",
    ),
    K.S11: _req("conversational", "social_norms scenario", "current_scenario", "recovery_acts recovery_illocutionary"),
    K.S12: _req("conversational spatial", "social_norms", "", "recovery_acts recovery_illocutionary"),
}


def manageable_disruptions(profile: CompetenceProfile) -> Set[K]:
    return {k for k in ALL_KINDS if profile.covers(REQUIREMENTS[k])}


@dataclass(frozen=True)
class AdvisorAnswers:
    answers: Tuple[bool, ...]

    def __post_init__(self) -> None:
        if len(self.answers) != len(QUESTIONS):
            raise SchemaError("answers", f"expected {len(QUESTIONS)} answers, got {len(self.answers)}")

    def __getitem__(self, q: int) -> bool:
        return self.answers[q - 1]

    @classmethod
    def from_mapping(cls, data: Mapping[str, object]) -> "AdvisorAnswers":
        missing = [q for q in QUESTIONS if q not in data]
        if missing:
            raise SchemaError(missing[0], "missing answer")
        extra = sorted(set(data) - set(QUESTIONS))
        if extra:
            raise SchemaError(extra[0], "unknown question")
        return cls(tuple(_yes_no(q, data[q]) for q in QUESTIONS))


def _yes_no(key: str, value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("yes", "no"):
        return value.lower() == "yes"
    raise SchemaError(key, f"expected yes or no, got {value!r}")


# (topic, guidance if yes, guidance if no)
GUIDANCE: Tuple[Tuple[str, str, str], ...] = (
    (
        "social agent",
        "Encounters will carry an expressive order; disruption handling applies directly.",
        "Designed around other interaction concerns, yet expressive-order phenomena could still occur.",
    ),
    (
        "observed expressive failures",
        "Log those failures and use them to drive detectors and recovery chains.",
        "Watch for breaches on the human side too; the agent can help recover them.",
    ),
    (
        "known social contexts",
        "Describe each context as an occasion; it guides detection and recovery keeps it intact.",
        "Check questions 4 and 5: the deployment may still pull the agent into a social context.",
    ),
    (
        "co-present multi-party",
        "Several people around the agent make a social context, with its own disruptions.",
        "A single user can still be surrounded by others who make the encounter social.",
    ),
    (
        "social presence goal",
        "Managing the expressive order supports presence and presence invites it.",
        "Disruptions still need handling whenever the expressive order shows up.",
    ),
    (
        "competences",
        "See the manageable kinds below for what the current profile can handle.",
        "See the manageable kinds below for what the current profile can handle.",
    ),
    (
        "planning module",
        "Recovery goals can go through the planner with lookahead (Architecture B).",
        "You can use a reactive approach as depicted in Architecture A.",
    ),
    (
        "culturally adaptive",
        "The existing adaptivity can host per-culture recovery beyond what packs offer.",
        "Detection carries over between cultures; recovery wording does not, so ship one pack per culture.",
    ),
    (
        "several cultural deployments",
        "Select a culture pack statically for each deployment.",
        "One culture pack is enough.",
    ),
    (
        "culture-relevant activity",
        "Tune the pack carefully, proxemic thresholds in particular.",
        "The recovery side stays simple.",
    ),
    (
        "cultural differences among those present",
        "This needs per-person dynamic adaptation; Architectures A and B do NOT cover this.",
        "The recovery side stays simple.",
    ),
    (
        "multicultural context",
        "Either adapt dynamically or pick a neutral international pack.",
        "Treat cultural differences as incidental; a multicultural pack may help.",
    ),
    (
        "culture-based misunderstandings",
        "Detecting these is outside Architectures A and B.",
        "The expressive order stays within reach of this engine.",
    ),
    (
        "cultural mediator",
        "The hardest case; Architectures A and B do NOT cover this.",
        "The expressive order stays within reach of this engine.",
    ),
)


def recommended_architecture(answers: AdvisorAnswers) -> str:
    return "B" if answers[7] else "A"


def advise(answers: AdvisorAnswers, profile: CompetenceProfile) -> str:
    lines = ["# disruption handling advice", ""]
    for i, (topic, yes, no) in enumerate(GUIDANCE, 1):
        said = answers[i]
        lines.append(f"q{i} {topic}: {'YES' if said else 'NO'}")
        lines.append(f"  {yes if said else no}")
    lines.append("")
    arch = recommended_architecture(answers)
    lines.append(f"architecture: {arch}")
    manageable = sorted(manageable_disruptions(profile), key=lambda k: k.row)
    lines.append("manageable: " + (", ".join(k.value for k in manageable) or "none"))
    for k in sorted(set(ALL_KINDS) - set(manageable), key=lambda k: k.row):
        lacking = _lacking(REQUIREMENTS[k], profile)
        lines.append(f"  {k.value} needs {lacking}")
    unsupported = [q for q in (11, 14) if answers[q]]
    if unsupported:
        lines.append("unsupported: " + ", ".join(f"q{q}" for q in unsupported) + " (Architectures A and B do NOT cover this)")
    return "\n".join(lines) + "\n"


def _lacking(need: CompetenceProfile, have: CompetenceProfile) -> str:
    parts = []
    for column in VOCABULARIES:
        gap = sorted(getattr(need, column) - getattr(have, column))
        if gap:
            parts.append(f"{column}={','.join(gap)}")
    return " ".join(parts)


def profile_from_mapping(data: Mapping[str, Iterable[str]]) -> CompetenceProfile:
    extra = sorted(set(data) - set(VOCABULARIES))
    if extra:
        raise SchemaError(extra[0], "unknown profile column")
    return CompetenceProfile(**{c: frozenset(data.get(c, ())) for c in VOCABULARIES})


def load_answers(path: str) -> AdvisorAnswers:
    with open(path, encoding="utf-8") as fh:
        return AdvisorAnswers.from_mapping(json.load(fh))


def load_profile(path: str) -> CompetenceProfile:
    with open(path, encoding="utf-8") as fh:
        return profile_from_mapping(json.load(fh))

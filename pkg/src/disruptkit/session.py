"""Session runner: folds a script through detection, recovery and execution.

Architecture A maps each disruption straight to one rendered act.
Architecture B maps it to a goal, plans with lookahead and prefaces every
agent act that would come across as dispreferred.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from .culture import CulturePack
from .detection import DetectionConfig, ENHANCED, assess, detect, reaction_flag
from .execution import execute
from .interaction import ActKind, DialogueAct, Event, InteractionState, Say, apply_event
from .planning import plan, preface_if_dispreferred
from .recovery import CommunicativeAct, chain_for, map_reactive, map_strategy
from .scenario import (
    ExpectDisruption,
    ExpectNone,
    ExpectRecovery,
    Expectation,
    Scenario,
    ScriptEvent,
    serialize_expectation,
    serialize_payload,
)
from .taxonomy import DisruptionInstance, DisruptionKind, RecoveryStatus

ARCHES = ("A", "B")
ACCEPT_SURFACE = "Very well."


@dataclass(frozen=True)
class Detection:
    instance: DisruptionInstance
    ordinal: int  # script event that led to it
    emitted: bool = False  # raised by one of the agent's own emitted events


@dataclass(frozen=True)
class RecoveryRecord:
    disruption: str
    strategy: str
    surface: str
    ordinal: int
    events: Tuple[Event, ...] = ()


@dataclass
class Transcript:
    scenario: str
    pack: str
    arch: str
    lines: List[str] = field(default_factory=list)
    detections: List[Detection] = field(default_factory=list)
    recoveries: List[RecoveryRecord] = field(default_factory=list)
    emitted: List[Tuple[int, Event]] = field(default_factory=list)
    verdicts: List[Tuple[Expectation, Optional[bool]]] = field(default_factory=list)
    unsatisfiable: List[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + "\n"

    @property
    def passed(self) -> bool:
        return all(v is not False for _, v in self.verdicts)

    @property
    def detection_log(self) -> str:
        keep = ("  detect ", "  assess ")
        return "".join(line + "\n" for line in self.lines if line.startswith(keep))

    def kinds(self) -> Counter:
        return Counter(d.instance.kind for d in self.detections)


class Session:
    """Incremental runner; ``feed`` one script event at a time, then ``finish``."""

    def __init__(
        self,
        scenario: Scenario,
        pack: CulturePack,
        arch: str = "A",
        *,
        window: int = 8,
        seed: int = 0,
        autopilot: Optional[bool] = None,
    ):
        if arch not in ARCHES:
            raise ValueError(f"architecture must be A or B, not {arch!r}")
        self.scenario = scenario
        self.pack = pack
        self.arch = arch
        self.config = DetectionConfig("reactive", window) if arch == "A" else ENHANCED
        self.seed = seed
        self.autopilot = scenario.autopilot if autopilot is None else autopilot
        self.state: InteractionState = scenario.initial_state(pack)
        self.ordinal = 0
        self.uses: Counter = Counter()
        self.held: Optional[Tuple[DisruptionInstance, int]] = None  # with its script ordinal
        self.script: List[ScriptEvent] = []
        self.transcript = Transcript(scenario.id, pack.id, arch)
        self.transcript.lines.append(
            f"# scenario {scenario.id} pack {pack.id} arch {arch}" + (f" window {window}" if arch == "A" else "")
        )
        self._out: List[str] = []

    # -- logging

    def _log(self, line: str) -> None:
        self.transcript.lines.append(line)
        self._out.append(line)

    def _drain(self) -> List[str]:
        out, self._out = self._out, []
        return out

    # -- main loop

    def feed(self, item: ScriptEvent) -> List[str]:
        self.script.append(item)
        self.ordinal += 1
        payload = item.payload
        is_reaction = reaction_flag(Event(0, 0, payload)) is not None

        if self.held is not None and not is_reaction:
            self._settle_held(())

        if self.arch == "B" and isinstance(payload, Say) and payload.act.speaker == self.state.agent:
            softened = preface_if_dispreferred(payload.act, self.state, self.pack)[0]
            if softened != payload.act:
                self._log(f"  preface script#{self.ordinal} {softened.surface!r}")
                payload = Say(softened)

        event = Event(self.state.last_index + 1, item.time, payload)
        found = self._step(event)
        self._log_event(event, found, emitted=False)

        if self.held is not None and is_reaction:
            self._settle_held((reaction_flag(event),))

        now = [d for d in found if d.kind is not DisruptionKind.S6]
        for d in found:
            if d.kind is DisruptionKind.S6:
                self.held = (d, self.ordinal)  # wait one event for bystanders to react
        fired = self._recover(now)
        if self.autopilot and not fired:
            self._autopilot(event)
        return self._drain()

    def finish(self) -> Transcript:
        if self.held is not None:
            self._settle_held(())
        self._evaluate()
        return self.transcript

    # -- internals

    def _step(self, event: Event) -> List[DisruptionInstance]:
        post = apply_event(self.state, event)
        found = detect(self.state, event, self.config, post)
        self.state = post
        return found

    def _log_event(self, event: Event, found: List[DisruptionInstance], emitted: bool, origin: str = "") -> None:
        if emitted:
            self._log(f"  [{event.index}] emit t={event.time} {serialize_payload(event.payload)}{origin}")
        else:
            self._log(f"[{event.index}] script#{self.ordinal} t={event.time} {serialize_payload(event.payload)}")
        for d in found:
            self._log(f"  detect script#{self.ordinal} {d.key} {d.describe()}" + (f" ({d.note})" if d.note else ""))
            if emitted or d.kind is not DisruptionKind.S6:
                self.transcript.detections.append(Detection(d, self.ordinal, emitted))

    def _settle_held(self, reactions) -> None:
        held, ordinal = self.held
        self.held = None
        d = assess(held, self.state, [r for r in reactions if r])
        self._log(f"  assess script#{ordinal} {d.key} {d.intent} status={d.status.label}")
        self.transcript.detections.append(Detection(d, ordinal))
        self._recover([d])

    def _recover(self, found: List[DisruptionInstance]) -> bool:
        for d in found:
            if d.status is RecoveryStatus.TOLERATED:
                self._log(f"  tolerated {d.key}")
        todo = sorted(
            (d for d in found if d.status is not RecoveryStatus.TOLERATED),
            key=lambda d: (-d.status, d.kind.row),
        )
        if not todo:
            return False
        head, rest = todo[0], todo[1:]
        if self.arch == "A":
            step = map_reactive(head, self.pack, self._counter(head), self.state)
            self._log(f"  recover {head.key} {step.strategy.value}")
            self._emit(step, head)
        else:
            goal = map_strategy(head, self.pack, self.state)
            chain = ", ".join(s.value for s in goal.chain)
            avoid = ", ".join(sorted(goal.avoid_topics))
            self._log(f"  goal {head.key} chain=[{chain}] avoid=[{avoid}] must_form={str(goal.must_form).lower()}")
            p = plan(goal, self.state, self.pack, self.seed + self.uses[goal.chain[0]])
            self.uses[goal.chain[0]] += 1
            for why in p.chosen_rationale:
                self._log(f"  plan {why}")
            if p.unsatisfiable_must_form:
                self.transcript.unsatisfiable.append(head.key)
                self._log(f"  plan {head.key} UnsatisfiableMustForm")
            if not p.steps:
                self._log(f"  null {head.key} (every step skipped)")
                self.transcript.recoveries.append(RecoveryRecord(head.key, "", "", self.ordinal))
            for step in p.steps:
                self._emit(step, head)
        for d in rest:
            self._log(f"  queue {d.key}")
        return True

    def _counter(self, d: DisruptionInstance) -> int:
        strategy = chain_for(d, self.pack, self.state.agent)[0]
        n = self.seed + self.uses[strategy]
        self.uses[strategy] += 1
        return n

    def _emit(self, step: CommunicativeAct, d: DisruptionInstance) -> None:
        tag = f" from={d.key}/{step.strategy.value}"
        if step.act is None:
            self._log(f"  null {d.key}/{step.strategy.value}")
            self.transcript.recoveries.append(RecoveryRecord(d.key, step.strategy.value, "", self.ordinal))
            return
        before = self.state
        action, _ = execute(step, before)
        events = []
        for ev in action.events:
            found = self._step(ev)
            events.append(ev)
            self.transcript.emitted.append((self.ordinal, ev))
            self._log_event(ev, found, emitted=True, origin=tag)
            for extra in found:
                self._log(f"  queue {extra.key} (raised by the agent's own act)")
        self.transcript.recoveries.append(
            RecoveryRecord(d.key, step.strategy.value, step.surface, self.ordinal, tuple(events))
        )

    def _autopilot(self, event: Event) -> None:
        p = event.payload
        if not isinstance(p, Say):
            return
        act = p.act
        agent = self.state.agent
        if (
            act.kind is not ActKind.REQUEST
            or agent not in act.addressees
            or act.item not in self.state.catalog
            or event.index in self.state.unreceived
        ):
            return
        reply = DialogueAct(ActKind.ACCEPT, agent, (act.speaker,), item=act.item, surface=ACCEPT_SURFACE)
        ev = Event(self.state.last_index + 1, self.state.clock, Say(reply))
        found = self._step(ev)
        self.transcript.emitted.append((self.ordinal, ev))
        self._log_event(ev, found, emitted=True, origin=" from=autopilot")

    # -- verdicts

    def _evaluate(self) -> None:
        t = self.transcript
        for ex in self.scenario.expectations:
            if ex.arch is not None and ex.arch != self.arch:
                verdict: Optional[bool] = None
            else:
                verdict = check_expectation(ex, t)
            t.verdicts.append((ex, verdict))
            label = {True: "PASS", False: "FAIL", None: "SKIP"}[verdict]
            t.lines.append(f"verdict {label} {serialize_expectation(ex)}")
        checked = [v for _, v in t.verdicts if v is not None]
        t.lines.append(f"result {'PASS' if t.passed else 'FAIL'} {sum(checked)}/{len(checked)}")


def check_expectation(ex: Expectation, t: Transcript) -> bool:
    if isinstance(ex, ExpectDisruption):
        return any(
            d.instance.kind is ex.kind and d.ordinal == ex.at and (ex.status is None or d.instance.status is ex.status)
            for d in t.detections
        )
    if isinstance(ex, ExpectRecovery):
        return any(
            r.strategy == ex.strategy.value and r.ordinal <= ex.by and (ex.surface is None or r.surface == ex.surface)
            for r in t.recoveries
        )
    return not any(
        ex.start <= d.ordinal <= ex.end and (ex.actor is None or d.instance.breaching_actor == ex.actor)
        for d in t.detections
    )


def run_session(
    scenario: Scenario, pack: CulturePack, mode: str = "A", *, window: int = 8, seed: int = 0
) -> Transcript:
    arch = mode[-1].upper() if mode.lower().startswith("arch") else mode
    session = Session(scenario, pack, arch, window=window, seed=seed)
    for item in scenario.events:
        session.feed(item)
    return session.finish()

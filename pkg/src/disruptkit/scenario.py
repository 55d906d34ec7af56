"""Scenario scripts: cast, catalog, timed events and expectations."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .culture import CulturePack
from .errors import ParseError
from .interaction import (
    PAYMENT,
    ActKind,
    BystanderReaction,
    Catalog,
    Depart,
    DialogueAct,
    Enter,
    InteractionState,
    Item,
    MISHAPS,
    Move,
    Noise,
    Participant,
    Pay,
    Payload,
    Physical,
    Prepare,
    QuestionForm,
    QueueJoin,
    RelationshipMatrix,
    Remedy,
    Role,
    Say,
    Serve,
    Tie,
    initial_state,
)
from .lexer import Cursor, Token, quote, tokenize
from .taxonomy import DisruptionKind, RecoveryStatus, Strategy

Point = Tuple[float, float]


@dataclass(frozen=True)
class CastMember:
    id: str
    role: Role
    position: Optional[Point] = None
    with_group: Optional[str] = None
    absent: bool = False


@dataclass(frozen=True)
class ScriptEvent:
    time: int
    payload: Payload


@dataclass(frozen=True)
class ExpectDisruption:
    kind: DisruptionKind
    at: int
    status: Optional[RecoveryStatus] = None
    arch: Optional[str] = None


@dataclass(frozen=True)
class ExpectRecovery:
    strategy: Strategy
    by: int
    surface: Optional[str] = None
    arch: Optional[str] = None


@dataclass(frozen=True)
class ExpectNone:
    start: int
    end: int
    actor: Optional[str] = None
    arch: Optional[str] = None


Expectation = Union[ExpectDisruption, ExpectRecovery, ExpectNone]


@dataclass(frozen=True)
class Scenario:
    id: str
    occasion: str
    cast: Tuple[CastMember, ...]
    landmarks: Tuple[Tuple[str, Point], ...]
    events: Tuple[ScriptEvent, ...] = ()
    expectations: Tuple[Expectation, ...] = ()
    ties: Tuple[Tuple[str, str, Tie], ...] = ()
    items: Tuple[Item, ...] = ()
    compatible: Tuple[Tuple[str, str], ...] = ()
    foreign: Tuple[str, ...] = ()
    objects: Tuple[str, ...] = ()
    deixis: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    membrane: Tuple[str, ...] = ()
    pack: Optional[str] = None
    golden: Optional[DisruptionKind] = None
    autopilot: bool = False

    @property
    def agent(self) -> str:
        return next(m.id for m in self.cast if m.role is Role.AGENT)

    def catalog(self) -> Catalog:
        return Catalog(
            items=self.items,
            compatible_pairs=frozenset(frozenset(p) for p in self.compatible),
            foreign=frozenset(self.foreign),
            objects=frozenset(self.objects),
            deixis=self.deixis,
        )

    def initial_state(self, pack: CulturePack) -> InteractionState:
        return initial_state(
            occasion=self.occasion,
            participants=[Participant(m.id, m.role, m.with_group, not m.absent) for m in self.cast],
            norms=pack.norms(self.occasion),
            catalog=self.catalog(),
            ties=RelationshipMatrix.from_pairs(self.ties),
            positions={m.id: m.position for m in self.cast if m.position is not None},
            landmarks=dict(self.landmarks),
            extra_membrane=self.membrane,
        )


def expectation_span(ex: Expectation) -> Tuple[int, int]:
    if isinstance(ex, ExpectNone):
        return ex.start, ex.end
    n = ex.at if isinstance(ex, ExpectDisruption) else ex.by
    return n, n


# -- parsing ----------------------------------------------------------------


class _ScenarioParser:
    def __init__(self, text: str):
        self.cur = Cursor(tokenize(text))
        self.id: Optional[str] = None
        self.occasion: Optional[str] = None
        self.pack: Optional[str] = None
        self.golden: Optional[DisruptionKind] = None
        self.autopilot = False
        self.cast: Dict[str, CastMember] = {}
        self.landmarks: Dict[str, Point] = {}
        self.ties: List[Tuple[str, str, Tie]] = []
        self.items: Dict[str, Item] = {}
        self.compatible: List[Tuple[str, str]] = []
        self.foreign: List[str] = []
        self.objects: List[str] = []
        self.deixis: Dict[str, Tuple[str, ...]] = {}
        self.membrane: List[str] = []
        self.events: List[ScriptEvent] = []
        self.expects: List[Tuple[Token, Expectation]] = []

    # small helpers

    def ident(self, what: str) -> Token:
        return self.cur.expect("ident", what=what)

    def number(self, what: str = "number") -> float:
        return float(self.cur.expect("number", what=what).text)

    def integer(self, what: str = "integer") -> int:
        tok = self.cur.expect("number", what=what)
        if "." in tok.text:
            raise ParseError(f"{tok.text} is not an integer", tok.line, tok.column, what)
        return int(tok.text)

    def point(self) -> Point:
        x = self.number("x coordinate")
        self.cur.expect("punct", ",")
        return x, self.number("y coordinate")

    def keyword(self, name: str) -> None:
        self.cur.expect("ident", name, f"'{name}'")
        self.cur.expect("punct", "=")

    def participant(self, what: str = "participant id") -> str:
        tok = self.ident(what)
        if tok.text not in self.cast:
            raise ParseError(f"undeclared participant {tok.text}", tok.line, tok.column, "a declared participant")
        return tok.text

    def option_key(self, allowed: Sequence[str]) -> Optional[Token]:
        """Next `key=` or bare flag on the line, if any."""
        if self.cur.at("ident") and self.cur.peek.text in allowed:
            return self.cur.next()
        return None

    # top level

    def parse(self) -> Scenario:
        cur = self.cur
        for _ in cur.lines():
            word = self.ident("a scenario line keyword")
            handler = getattr(self, f"line_{word.text}", None)
            if handler is None:
                raise ParseError(f"unknown line kind {word.text}", word.line, word.column)
            handler(word)
            cur.end_of_line()
        return self.finish()

    def finish(self) -> Scenario:
        end = self.cur.peek
        if self.id is None:
            raise ParseError("missing 'scenario' line", end.line, end.column)
        if self.occasion is None:
            raise ParseError("missing 'occasion' line", end.line, end.column)
        agents = [m for m in self.cast.values() if m.role is Role.AGENT]
        if len(agents) != 1:
            raise ParseError("exactly one participant must be the agent", end.line, end.column)
        if "counter" not in self.landmarks:
            raise ParseError("landmark counter is required", end.line, end.column)
        n = len(self.events)
        for tok, ex in self.expects:
            lo, hi = expectation_span(ex)
            if not 1 <= lo <= hi <= n:
                raise ParseError(f"expectation refers to event {lo}..{hi} but the script has {n}", tok.line, tok.column)
        return Scenario(
            id=self.id,
            occasion=self.occasion,
            cast=tuple(self.cast.values()),
            landmarks=tuple(self.landmarks.items()),
            events=tuple(self.events),
            expectations=tuple(ex for _, ex in self.expects),
            ties=tuple(self.ties),
            items=tuple(self.items.values()),
            compatible=tuple(self.compatible),
            foreign=tuple(self.foreign),
            objects=tuple(self.objects),
            deixis=tuple(self.deixis.items()),
            membrane=tuple(self.membrane),
            pack=self.pack,
            golden=self.golden,
            autopilot=self.autopilot,
        )

    # header lines

    def line_scenario(self, word: Token) -> None:
        self.id = self.ident("scenario id").text

    def line_occasion(self, word: Token) -> None:
        self.occasion = self.ident("occasion id").text

    def line_pack(self, word: Token) -> None:
        self.pack = self.ident("pack name").text

    def line_golden(self, word: Token) -> None:
        self.golden = self.kind()

    def line_autopilot(self, word: Token) -> None:
        self.autopilot = True

    def line_landmark(self, word: Token) -> None:
        name = self.ident("landmark name").text
        self.landmarks[name] = (self.number("x coordinate"), self.number("y coordinate"))

    def line_participant(self, word: Token) -> None:
        tok = self.ident("participant id")
        if tok.text in self.cast:
            raise ParseError(f"participant {tok.text} declared twice", tok.line, tok.column)
        self.keyword("role")
        role_tok = self.ident("client, agent or bystander")
        try:
            role = Role(role_tok.text)
        except ValueError:
            raise ParseError(f"unknown role {role_tok.text}", role_tok.line, role_tok.column, "client, agent or bystander") from None
        pos, group, absent = None, None, False
        while True:
            key = self.option_key(("pos", "with", "absent"))
            if key is None:
                break
            if key.text == "absent":
                absent = True
                continue
            self.cur.expect("punct", "=")
            if key.text == "pos":
                pos = self.point()
            else:
                group = self.ident("group id").text
        self.cast[tok.text] = CastMember(tok.text, role, pos, group, absent)

    def line_tie(self, word: Token) -> None:
        a = self.participant()
        b = self.participant()
        tok = self.ident("strangers, acquainted or close")
        self.ties.append((a, b, self.tie(tok)))

    def tie(self, tok: Token) -> Tie:
        try:
            return Tie.parse(tok.text)
        except KeyError:
            raise ParseError(f"unknown tie {tok.text}", tok.line, tok.column, "strangers, acquainted or close") from None

    def line_item(self, word: Token) -> None:
        tok = self.ident("item id")
        if tok.text == PAYMENT:
            raise ParseError("'payment' is reserved", tok.line, tok.column)
        self.keyword("price")
        ptok = self.cur.expect("number", what="price")
        category = None
        if self.option_key(("category",)):
            self.cur.expect("punct", "=")
            category = self.ident("category").text
        self.items[tok.text] = Item(tok.text, Decimal(ptok.text), category)

    def known_item(self) -> str:
        tok = self.ident("item id")
        if tok.text not in self.items:
            raise ParseError(f"unknown item {tok.text}", tok.line, tok.column, "a declared item")
        return tok.text

    def line_compatible(self, word: Token) -> None:
        self.compatible.append((self.known_item(), self.known_item()))

    def line_foreign(self, word: Token) -> None:
        self.foreign.append(self.ident("item id").text)

    def line_object(self, word: Token) -> None:
        self.objects.append(self.ident("object id").text)

    def line_deixis(self, word: Token) -> None:
        tok = self.ident("deictic token")
        self.cur.expect("punct", "=")
        self.deixis[tok.text] = tuple(self.cur.ident_list())

    def line_membrane(self, word: Token) -> None:
        self.membrane.extend(self.cur.ident_list())

    # events

    def line_event(self, word: Token) -> None:
        self.keyword("t")
        tok = self.cur.peek
        t = self.integer("time in ticks")
        if t < 0 or (self.events and t < self.events[-1].time):
            raise ParseError("event times must be non-negative and non-decreasing", tok.line, tok.column)
        self.events.append(ScriptEvent(t, self.payload()))

    def payload(self) -> Payload:
        verb = self.ident("event verb")
        v = verb.text
        if v == "say":
            return Say(self.say())
        if v == "move":
            return Move(self.participant(), (self.number("x coordinate"), self.number("y coordinate")))
        if v == "physical":
            who = self.participant()
            mishap = self.ident("spill, drop or bump")
            if mishap.text not in MISHAPS:
                raise ParseError(f"unknown mishap {mishap.text}", mishap.line, mishap.column, "spill, drop or bump")
            return Physical(who, mishap.text, self.ident("object").text)
        if v == "noise":
            self.keyword("level")
            level = self.level()
            self.keyword("span")
            return Noise(level, self.integer("span"))
        if v == "enter":
            who = self.participant()
            pos = None
            if self.option_key(("pos",)):
                self.cur.expect("punct", "=")
                pos = self.point()
            return Enter(who, pos)
        if v == "depart":
            return Depart(self.participant())
        if v == "queue":
            return QueueJoin(self.participant())
        if v == "react":
            tok = self.ident("mock or neutral")
            if tok.text not in ("mock", "neutral"):
                raise ParseError(f"unknown reaction {tok.text}", tok.line, tok.column, "mock or neutral")
            return BystanderReaction(tok.text)
        if v == "prepare":
            return Prepare(self.participant("agent id"), self.participant("client id"))
        if v == "serve":
            return Serve(self.participant("agent id"), self.participant("client id"), self.known_item())
        if v == "pay":
            who = self.participant("client id")
            tok = self.cur.expect("number", what="amount")
            return Pay(who, Decimal(tok.text))
        if v == "remedy":
            who = self.participant()
            token = self.ident("remedy token").text
            obj = self.cur.next().text if self.cur.at("ident") else None
            return Remedy(who, token, obj)
        raise ParseError(f"unknown event verb {v}", verb.line, verb.column)

    def level(self) -> int:
        tok = self.cur.peek
        n = self.integer("level 0..10")
        if not 0 <= n <= 10:
            raise ParseError("levels run from 0 to 10", tok.line, tok.column)
        return n

    def say(self) -> DialogueAct:
        start = self.cur.peek
        speaker = self.participant("speaker")
        self.cur.expect("arrow", what="'->'")
        to = [self.participant("addressee")]
        while self.cur.accept("punct", ","):
            to.append(self.participant("addressee"))
        self.keyword("act")
        ktok = self.ident("act kind")
        try:
            kind = ActKind(ktok.text)
        except ValueError:
            raise ParseError(f"unknown act kind {ktok.text}", ktok.line, ktok.column) from None
        fields: Dict[str, object] = {}
        seen = set()
        keys = ("item", "qform", "polarity", "ref", "tie", "topics", "vol", "mitigated")
        while True:
            key = self.option_key(keys)
            if key is None:
                break
            if key.text in seen:
                raise ParseError(f"{key.text} given twice", key.line, key.column)
            seen.add(key.text)
            if key.text == "mitigated":
                fields["mitigated"] = True
                continue
            self.cur.expect("punct", "=")
            if key.text == "item":
                tok = self.ident("item id")
                known = tok.text in self.items or tok.text in self.foreign or tok.text in self.objects
                if not known and tok.text != PAYMENT:
                    raise ParseError(f"unknown item {tok.text}", tok.line, tok.column, "a declared item, object or foreign item")
                fields["item"] = tok.text
            elif key.text == "qform":
                fields["question_form"] = self.qform()
            elif key.text == "polarity":
                tok = self.ident("yes or no")
                if tok.text not in ("yes", "no"):
                    raise ParseError(f"bad polarity {tok.text}", tok.line, tok.column, "yes or no")
                fields["answer_polarity"] = tok.text
            elif key.text == "ref":
                fields["referent"] = self.ident("deictic token").text
            elif key.text == "tie":
                fields["presupposed_tie"] = self.tie(self.ident("tie"))
            elif key.text == "topics":
                fields["topics"] = tuple(self.cur.ident_list())
            elif key.text == "vol":
                fields["volume"] = self.level()
        surface = self.cur.next().value if self.cur.at("string") else None
        try:
            return DialogueAct(kind, speaker, tuple(to), surface=surface, **fields)
        except ValueError as exc:
            raise ParseError(str(exc), start.line, start.column) from None

    def qform(self) -> QuestionForm:
        tok = self.ident("yes_no, open or alt(..)")
        if tok.text in ("yes_no", "open"):
            return QuestionForm(tok.text)
        if tok.text != "alt":
            raise ParseError(f"unknown question form {tok.text}", tok.line, tok.column, "yes_no, open or alt(..)")
        self.cur.expect("punct", "(")
        options = [self.ident("option").text]
        while self.cur.accept("punct", ","):
            options.append(self.ident("option").text)
        self.cur.expect("punct", ")")
        if len(options) < 2:
            raise ParseError("an alternative question offers at least two options", tok.line, tok.column)
        return QuestionForm("alternative", tuple(options))

    # expectations

    def kind(self) -> DisruptionKind:
        tok = self.ident("disruption kind")
        try:
            return DisruptionKind.parse(tok.text)
        except ValueError:
            raise ParseError(f"unknown disruption kind {tok.text}", tok.line, tok.column, "F1..F5 or S6..S12") from None

    def arch(self, fields: Dict[str, object]) -> None:
        tok = self.ident("A or B")
        if tok.text not in ("A", "B"):
            raise ParseError(f"unknown architecture {tok.text}", tok.line, tok.column, "A or B")
        fields["arch"] = tok.text

    def line_expect(self, word: Token) -> None:
        what = self.ident("disruption, recovery or none")
        fields: Dict[str, object] = {}
        if what.text == "disruption":
            kind = self.kind()
            self.cur.expect("ident", "at", "'at'")
            at = self.integer("event number")
            while (key := self.option_key(("status", "arch"))) is not None:
                self.cur.expect("punct", "=")
                if key.text == "status":
                    tok = self.ident("status")
                    try:
                        fields["status"] = RecoveryStatus.parse(tok.text)
                    except KeyError:
                        raise ParseError(f"unknown status {tok.text}", tok.line, tok.column) from None
                else:
                    self.arch(fields)
            ex: Expectation = ExpectDisruption(kind, at, **fields)
        elif what.text == "recovery":
            tok = self.ident("strategy")
            try:
                strategy = Strategy(tok.text)
            except ValueError:
                raise ParseError(f"unknown strategy {tok.text}", tok.line, tok.column) from None
            self.cur.expect("ident", "by", "'by'")
            by = self.integer("event number")
            if self.cur.at("string"):
                fields["surface"] = self.cur.next().value
            if self.option_key(("arch",)):
                self.cur.expect("punct", "=")
                self.arch(fields)
            ex = ExpectRecovery(strategy, by, **fields)
        elif what.text == "none":
            start = self.integer("first event number")
            self.cur.expect("range", what="'..'")
            end = self.integer("last event number")
            while (key := self.option_key(("actor", "arch"))) is not None:
                self.cur.expect("punct", "=")
                if key.text == "actor":
                    fields["actor"] = self.participant()
                else:
                    self.arch(fields)
            ex = ExpectNone(start, end, **fields)
        else:
            raise ParseError(f"unknown expectation {what.text}", what.line, what.column, "disruption, recovery or none")
        self.expects.append((word, ex))


def parse_scenario(text: str) -> Scenario:
    return _ScenarioParser(text).parse()


def parse_event_line(line: str, scenario: Scenario) -> ScriptEvent:
    """Parse one `event ...` line against an already parsed scenario header."""
    p = _ScenarioParser(line)
    p.cast = {m.id: m for m in scenario.cast}
    p.items = {i.name: i for i in scenario.items}
    p.foreign = list(scenario.foreign)
    p.objects = list(scenario.objects)
    p.events = list(scenario.events)
    p.cur.skip_newlines()
    word = p.cur.expect("ident", "event", "'event'")
    p.line_event(word)
    p.cur.end_of_line()
    p.cur.skip_newlines()
    if not p.cur.at("eof"):
        raise p.cur.error("end of input")
    return p.events[-1]


# -- serialization ----------------------------------------------------------


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _point(p: Point) -> str:
    return f"{_num(p[0])},{_num(p[1])}"


def serialize_act(act: DialogueAct) -> str:
    parts = [f"say {act.speaker} -> {','.join(act.addressees)} act={act.kind.value}"]
    if act.item is not None:
        parts.append(f"item={act.item}")
    if act.question_form is not None:
        qf = act.question_form
        parts.append("qform=" + (f"alt({','.join(qf.options)})" if qf.kind == "alternative" else qf.kind))
    if act.answer_polarity is not None:
        parts.append(f"polarity={act.answer_polarity}")
    if act.referent is not None:
        parts.append(f"ref={act.referent}")
    if act.presupposed_tie is not None:
        parts.append(f"tie={act.presupposed_tie.label}")
    if act.topics:
        parts.append(f"topics=[{','.join(act.topics)}]")
    if act.volume != 5:
        parts.append(f"vol={act.volume}")
    if act.mitigated:
        parts.append("mitigated")
    if act.surface is not None:
        parts.append(quote(act.surface))
    return " ".join(parts)


def serialize_payload(p: Payload) -> str:
    if isinstance(p, Say):
        return serialize_act(p.act)
    if isinstance(p, Move):
        return f"move {p.participant} {_num(p.position[0])} {_num(p.position[1])}"
    if isinstance(p, Physical):
        return f"physical {p.participant} {p.mishap} {p.obj}"
    if isinstance(p, Noise):
        return f"noise level={p.level} span={p.span}"
    if isinstance(p, Enter):
        return f"enter {p.participant}" + (f" pos={_point(p.position)}" if p.position else "")
    if isinstance(p, Depart):
        return f"depart {p.participant}"
    if isinstance(p, QueueJoin):
        return f"queue {p.participant}"
    if isinstance(p, BystanderReaction):
        return f"react {p.reaction}"
    if isinstance(p, Prepare):
        return f"prepare {p.agent} {p.client}"
    if isinstance(p, Serve):
        return f"serve {p.agent} {p.client} {p.item}"
    if isinstance(p, Pay):
        return f"pay {p.client} {p.amount}"
    if isinstance(p, Remedy):
        return f"remedy {p.participant} {p.token}" + (f" {p.obj}" if p.obj else "")
    raise TypeError(p)  # pragma: no cover


def serialize_event(ev: ScriptEvent) -> str:
    return f"event t={ev.time} {serialize_payload(ev.payload)}"


def _arch(a: Optional[str]) -> str:
    return f" arch={a}" if a else ""


def serialize_expectation(ex: Expectation) -> str:
    if isinstance(ex, ExpectDisruption):
        status = f" status={ex.status.label}" if ex.status is not None else ""
        return f"expect disruption {ex.kind.value} at {ex.at}{status}{_arch(ex.arch)}"
    if isinstance(ex, ExpectRecovery):
        surface = f" {quote(ex.surface)}" if ex.surface is not None else ""
        return f"expect recovery {ex.strategy.value} by {ex.by}{surface}{_arch(ex.arch)}"
    actor = f" actor={ex.actor}" if ex.actor else ""
    return f"expect none {ex.start}..{ex.end}{actor}{_arch(ex.arch)}"


def serialize_header(s: Scenario) -> List[str]:
    lines = [f"scenario {s.id}", f"occasion {s.occasion}"]
    if s.pack:
        lines.append(f"pack {s.pack}")
    if s.golden:
        lines.append(f"golden {s.golden.value}")
    if s.autopilot:
        lines.append("autopilot")
    for name, (x, y) in s.landmarks:
        lines.append(f"landmark {name} {_num(x)} {_num(y)}")
    for m in s.cast:
        line = f"participant {m.id} role={m.role.value}"
        if m.position is not None:
            line += f" pos={_point(m.position)}"
        if m.with_group:
            line += f" with={m.with_group}"
        if m.absent:
            line += " absent"
        lines.append(line)
    for a, b, tie in s.ties:
        lines.append(f"tie {a} {b} {tie.label}")
    for item in s.items:
        line = f"item {item.name} price={item.price}"
        if item.category:
            line += f" category={item.category}"
        lines.append(line)
    lines += [f"compatible {a} {b}" for a, b in s.compatible]
    lines += [f"foreign {f}" for f in s.foreign]
    lines += [f"object {o}" for o in s.objects]
    lines += [f"deixis {tok} = [{', '.join(targets)}]" for tok, targets in s.deixis]
    if s.membrane:
        lines.append(f"membrane [{', '.join(s.membrane)}]")
    return lines


def serialize_scenario(s: Scenario) -> str:
    lines = serialize_header(s)
    lines.append("")
    lines += [serialize_event(ev) for ev in s.events]
    if s.expectations:
        lines.append("")
        lines += [serialize_expectation(ex) for ex in s.expectations]
    return "\n".join(lines) + "\n"

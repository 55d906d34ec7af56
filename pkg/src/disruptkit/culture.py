"""Culture packs: per-occasion norms, strategy overrides and recovery templates."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

from .errors import MissingSlot, NoTemplate, ParseError, SchemaError, UnknownOccasion
from .interaction import Norms
from .lexer import Cursor, Token, quote, tokenize
from .taxonomy import (
    ALL_KINDS,
    DisruptionKind,
    Perceived,
    Repairable,
    Strategy,
    default_strategy_chain,
)

SELF, OTHER = "self", "other"
NULL_STRATEGIES = frozenset({Strategy.TREAT_AS_IRRELEVANT})
DEFAULT_HESITATION = "Hm, "

_NUMBER_KEYS = (
    "proxemic_violation_m",
    "timeout_order_start_s",
    "timeout_answer_s",
    "turn_hold_max_s",
)
_LEVEL_KEYS = ("volume_max", "audibility_threshold")
_LIST_KEYS = ("membrane", "safe_topics")
REQUIRED_KEYS = _NUMBER_KEYS[:1] + _LEVEL_KEYS + _NUMBER_KEYS[1:]
ALL_KEYS = REQUIRED_KEYS + _LIST_KEYS + ("queue_policy",)
QUEUE_POLICIES = ("fifo", "none")


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # error | warning
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class CulturePack:
    id: str
    occasions: Mapping[str, Norms]
    overrides: Mapping[Tuple[DisruptionKind, str], Tuple[Strategy, ...]] = field(default_factory=dict)
    templates: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    # source positions for diagnostics; not part of pack identity
    locations: Mapping[str, Tuple[int, int]] = field(default_factory=dict, compare=False, repr=False)

    def norms(self, occasion: str) -> Norms:
        try:
            return self.occasions[occasion]
        except KeyError:
            raise UnknownOccasion(f"pack {self.id!r} has no occasion {occasion!r}") from None

    @property
    def hesitation_token(self) -> str:
        return self.templates.get(Strategy.HESITATION_PREFACE.value, (DEFAULT_HESITATION,))[0]

    def has_template(self, strategy: Strategy) -> bool:
        if strategy.value in self.templates:
            return True
        prefix = strategy.value + "."
        return any(k.startswith(prefix) for k in self.templates)


# -- chain resolution -------------------------------------------------------


def resolve_chain(
    pack: CulturePack,
    kind: DisruptionKind,
    breaching_actor_is_agent: bool,
    perceived: Perceived = Perceived.AMBIGUOUS,
    subkind: Optional[Repairable] = None,
) -> Tuple[Strategy, ...]:
    side = SELF if breaching_actor_is_agent else OTHER
    override = pack.overrides.get((kind, side))
    if override:
        return override
    return default_strategy_chain(kind, breaching_actor_is_agent, perceived, subkind)


def reachable_strategies(pack: CulturePack, kinds: Iterable[DisruptionKind] = ALL_KINDS) -> FrozenSet[Strategy]:
    out = set()
    for kind in kinds:
        subs = list(Repairable) if kind is DisruptionKind.S10 else [None]
        for agent in (True, False):
            for perceived in Perceived:
                for sub in subs:
                    out.update(resolve_chain(pack, kind, agent, perceived, sub))
    return frozenset(out)


def validate_pack(pack: CulturePack, reachable: Optional[Iterable[Strategy]] = None) -> List[Diagnostic]:
    reach = frozenset(reachable_strategies(pack) if reachable is None else reachable)
    out: List[Diagnostic] = []
    for strategy in sorted(reach - NULL_STRATEGIES, key=lambda s: s.value):
        if not pack.has_template(strategy):
            out.append(Diagnostic("error", 0, 0, f"no template for reachable strategy {strategy.value}"))
    for key in pack.templates:
        if Strategy(key.split(".")[0]) not in reach:
            line, col = pack.locations.get(key, (0, 0))
            out.append(Diagnostic("warning", line, col, f"template {key} is never used"))
    return out


# -- rendering --------------------------------------------------------------

_SLOT = re.compile(r"\{([a-z_]+)\}")


def template_key(strategy: Strategy, topic: Optional[str] = None) -> str:
    return f"{strategy.value}.{topic}" if topic else strategy.value


def render_template(
    pack: CulturePack,
    strategy: Strategy,
    slots: Mapping[str, str],
    counter: int,
    *,
    key: Optional[str] = None,
) -> str:
    """Pick template ``counter mod len`` and fill its ``{slot}`` placeholders."""
    key = key or strategy.value
    options = pack.templates.get(key)
    if not options:
        raise NoTemplate(f"pack {pack.id!r} has no template for {key}")
    chosen = options[counter % len(options)]
    return fill_slots(chosen, slots)


def fill_slots(text: str, slots: Mapping[str, str]) -> str:
    def sub(m: "re.Match[str]") -> str:
        name = m.group(1)
        if name not in slots:
            raise MissingSlot(name)
        return str(slots[name])

    return _SLOT.sub(sub, text)


def template_slots(text: str) -> FrozenSet[str]:
    return frozenset(_SLOT.findall(text))


# -- parsing ----------------------------------------------------------------


def parse_culture_pack(text: str) -> CulturePack:
    cur = Cursor(tokenize(text))
    cur.skip_newlines()
    cur.expect("ident", "culture", "'culture'")
    pack_id = cur.expect("string", what="pack id string").value
    if not pack_id:
        raise cur.error("non-empty pack id")
    cur.end_of_line()

    occasions: Dict[str, Norms] = {}
    overrides: Dict[Tuple[DisruptionKind, str], Tuple[Strategy, ...]] = {}
    templates: Dict[str, Tuple[str, ...]] = {}
    locations: Dict[str, Tuple[int, int]] = {}

    for _ in cur.lines():
        word = cur.expect("ident", what="'occasion', 'template' or 'strategy'")
        if word.text == "occasion":
            name_tok = cur.expect("ident", what="occasion name")
            if name_tok.text in occasions:
                raise SchemaError(name_tok.text, f"duplicate occasion {name_tok.text}", name_tok.line, name_tok.column)
            occasions[name_tok.text] = _occasion_body(cur, name_tok)
        elif word.text == "template":
            key, where = _template_key(cur)
            if key in templates:
                raise SchemaError(key, f"duplicate template {key}", *where)
            cur.expect("punct", "=")
            templates[key] = _string_list(cur)
            locations[key] = where
            cur.end_of_line()
        elif word.text == "strategy":
            kind_tok = cur.expect("ident", what="disruption kind")
            try:
                kind = DisruptionKind.parse(kind_tok.text)
            except ValueError:
                raise ParseError(f"unknown disruption kind {kind_tok.text}", kind_tok.line, kind_tok.column, "F1..F5 or S6..S12") from None
            cur.expect("punct", ".")
            side_tok = cur.expect("ident", what="'self' or 'other'")
            if side_tok.text not in (SELF, OTHER):
                raise cur.error("'self' or 'other'", side_tok)
            if (kind, side_tok.text) in overrides:
                raise SchemaError(f"{kind.value}.{side_tok.text}", "duplicate strategy override", kind_tok.line, kind_tok.column)
            cur.expect("arrow", what="'->'")
            list_tok = cur.peek
            chain = tuple(_strategy(name, list_tok) for name in cur.ident_list())
            if not chain:
                raise SchemaError(f"{kind.value}.{side_tok.text}", "strategy chain is empty", list_tok.line, list_tok.column)
            if Strategy.REQUEST_REPEAT in chain and chain[0] is not Strategy.REQUEST_REPEAT:
                raise SchemaError(f"{kind.value}.{side_tok.text}", "request_repeat must lead its chain", list_tok.line, list_tok.column)
            overrides[(kind, side_tok.text)] = chain
            cur.end_of_line()
        else:
            raise cur.error("'occasion', 'template' or 'strategy'", word)

    if not occasions:
        raise SchemaError("occasion", "a pack needs at least one occasion", cur.peek.line, cur.peek.column)
    return CulturePack(pack_id, occasions, overrides, templates, locations)


def _strategy(name: str, tok: Token) -> Strategy:
    try:
        return Strategy(name)
    except ValueError:
        raise SchemaError(name, f"unknown strategy {name}", tok.line, tok.column) from None


def _template_key(cur: Cursor) -> Tuple[str, Tuple[int, int]]:
    tok = cur.expect("ident", what="strategy name")
    strategy = _strategy(tok.text, tok)
    key = strategy.value
    if cur.accept("punct", "."):
        topic = cur.expect("ident", what="topic tag").text
        if strategy is not Strategy.CHANGE_TOPIC:
            raise SchemaError(key, "only change_topic templates take a topic qualifier", tok.line, tok.column)
        key = f"{key}.{topic}"
    return key, (tok.line, tok.column)


def _string_list(cur: Cursor) -> Tuple[str, ...]:
    open_tok = cur.expect("punct", "[")
    out = []
    while True:
        tok = cur.expect("string", what="template string")
        if not tok.value:
            raise SchemaError("template", "template strings must be non-empty", tok.line, tok.column)
        out.append(tok.value)
        if not cur.accept("punct", ","):
            break
    cur.expect("punct", "]")
    if not out:  # pragma: no cover - grammar requires one string
        raise SchemaError("template", "empty template list", open_tok.line, open_tok.column)
    return tuple(out)


def _occasion_body(cur: Cursor, name_tok: Token) -> Norms:
    cur.expect("punct", "{")
    cur.end_of_line()
    values: Dict[str, object] = {}
    while True:
        cur.skip_newlines()
        if cur.accept("punct", "}"):
            break
        key_tok = cur.expect("ident", what="setting name or '}'")
        key = key_tok.text
        if key not in ALL_KEYS:
            raise SchemaError(key, f"unknown setting {key}", key_tok.line, key_tok.column)
        if key in values:
            raise SchemaError(key, f"duplicate setting {key}", key_tok.line, key_tok.column)
        cur.expect("punct", "=")
        if key in _LIST_KEYS:
            values[key] = tuple(cur.ident_list())
        elif key == "queue_policy":
            tok = cur.expect("ident", what="fifo or none")
            if tok.text not in QUEUE_POLICIES:
                raise SchemaError(key, f"queue_policy must be fifo or none, not {tok.text}", tok.line, tok.column)
            values[key] = tok.text
        else:
            tok = cur.expect("number", what="number")
            num = float(tok.text)
            if num <= 0:
                raise SchemaError(key, f"{key} must be strictly positive", tok.line, tok.column)
            if key in _LEVEL_KEYS:
                if "." in tok.text or num > 10:
                    raise SchemaError(key, f"{key} is an integer level 1..10", tok.line, tok.column)
                values[key] = int(num)
            else:
                values[key] = int(num) if num.is_integer() else num
        cur.end_of_line()
    cur.end_of_line()

    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise SchemaError(missing[0], f"occasion {name_tok.text} lacks {missing[0]}", name_tok.line, name_tok.column)
    membrane = values.get("membrane", ())
    safe = values.get("safe_topics", ())
    clash = sorted(set(membrane) & set(safe))
    if clash:
        raise SchemaError("safe_topics", f"safe topics inside the membrane: {', '.join(clash)}", name_tok.line, name_tok.column)
    if len(set(safe)) != len(safe):
        raise SchemaError("safe_topics", "safe_topics repeats a topic", name_tok.line, name_tok.column)
    return Norms(
        membrane=frozenset(membrane),
        proxemic_violation_m=values["proxemic_violation_m"],
        volume_max=values["volume_max"],
        audibility_threshold=values["audibility_threshold"],
        queue_policy=values.get("queue_policy", "fifo"),
        timeout_order_start_s=values["timeout_order_start_s"],
        timeout_answer_s=values["timeout_answer_s"],
        turn_hold_max_s=values["turn_hold_max_s"],
        safe_topics=tuple(safe),
    )


# -- serialization ----------------------------------------------------------


def _num(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def serialize_pack(pack: CulturePack) -> str:
    lines = [f"culture {quote(pack.id)}"]
    for name, n in pack.occasions.items():
        lines += ["", f"occasion {name} {{"]
        for key in REQUIRED_KEYS:
            lines.append(f"  {key} = {_num(getattr(n, key))}")
        lines.append(f"  membrane = [{', '.join(sorted(n.membrane))}]")
        lines.append(f"  safe_topics = [{', '.join(n.safe_topics)}]")
        lines.append(f"  queue_policy = {n.queue_policy}")
        lines.append("}")
    if pack.templates:
        lines.append("")
    for key, options in pack.templates.items():
        lines.append(f"template {key} = [{', '.join(quote(o) for o in options)}]")
    if pack.overrides:
        lines.append("")
    for (kind, side), chain in pack.overrides.items():
        lines.append(f"strategy {kind.value}.{side} -> [{', '.join(s.value for s in chain)}]")
    return "\n".join(lines) + "\n"


def builtin_pack_names() -> List[str]:
    base = resources.files("disruptkit") / "data" / "packs"
    return sorted(p.name[: -len(".pack")] for p in base.iterdir() if p.name.endswith(".pack"))


def builtin_pack_text(name: str) -> str:
    return (resources.files("disruptkit") / "data" / "packs" / f"{name}.pack").read_text(encoding="utf-8")


def load_builtin_pack(name: str = "generic") -> CulturePack:
    return parse_culture_pack(builtin_pack_text(name))

"""Interactive session: type event lines, watch the agent respond.

Accepted lines use the scenario event syntax; the leading ``event`` keyword and
``t=`` are optional (time defaults to the previous event's time plus one).
"""

from __future__ import annotations

import sys
from dataclasses import replace
from typing import List, Optional, TextIO

from .culture import CulturePack
from .errors import DisruptkitError, ParseError
from .scenario import Scenario, ScriptEvent, parse_event_line, parse_scenario, serialize_event, serialize_header
from .session import Session, Transcript

DEFAULT_HEADER = """\
scenario repl
occasion {occasion}
autopilot
landmark counter 0 0
participant agent role=agent pos=0,-0.5
participant client1 role=client pos=0,0.6
participant client2 role=client pos=1.2,0.6
participant client3 role=client pos=3,3
item coffee price=1.30 category=coffee
item coffee_with_milk price=1.40 category=coffee
item espresso price=1.00 category=coffee
item latte price=1.50 category=coffee
item water price=2.00 category=water
compatible coffee coffee_with_milk
object sugar_box
object cup
"""

HELP = ":trace toggles the detection log, :save FILE writes the session as a script, :quit ends"
TRACE_PREFIXES = ("  detect ", "  assess ", "  goal ", "  plan ", "  queue ", "  tolerated ")


def default_scenario(occasion: str = "bar") -> Scenario:
    return parse_scenario(DEFAULT_HEADER.format(occasion=occasion))


class Repl:
    def __init__(self, pack: CulturePack, header: Scenario, *, arch: str = "A", trace: bool = False):
        self.header = replace(header, events=(), expectations=())
        self.pack = pack
        self.trace = trace
        self.session = Session(self.header, pack, arch, autopilot=header.autopilot)
        self.recorded: List[ScriptEvent] = []
        self.done = False

    @property
    def last_time(self) -> int:
        return self.recorded[-1].time if self.recorded else -1

    def script(self) -> Scenario:
        return replace(self.header, events=tuple(self.recorded))

    def script_text(self) -> str:
        lines = serialize_header(self.header) + [""] + [serialize_event(ev) for ev in self.recorded]
        return "\n".join(lines) + "\n"

    def normalize(self, line: str) -> str:
        body = line.strip()
        if body.startswith("event "):
            body = body[len("event ") :].lstrip()
        if not body.startswith("t="):
            body = f"t={max(self.last_time + 1, 0)} {body}"
        return "event " + body

    def handle(self, line: str) -> List[str]:
        """Output lines for one input line; never raises on bad input."""
        text = line.strip()
        if not text or text.startswith("#"):
            return []
        if text.startswith(":"):
            return self._command(text)
        try:
            item = parse_event_line(self.normalize(text), replace(self.header, events=tuple(self.recorded)))
        except ParseError as exc:
            return [f"error: {exc}"]
        try:
            out = self.session.feed(item)
        except DisruptkitError as exc:
            return [f"error: {exc}"]
        self.recorded.append(item)
        return [ln for ln in out if self.trace or not ln.startswith(TRACE_PREFIXES)]

    def _command(self, text: str) -> List[str]:
        word, _, arg = text.partition(" ")
        if word == ":quit":
            self.done = True
            return []
        if word == ":trace":
            self.trace = not self.trace
            return [f"trace {'on' if self.trace else 'off'}"]
        if word == ":save":
            if not arg.strip():
                return ["error: :save needs a file name"]
            with open(arg.strip(), "w", encoding="utf-8") as fh:
                fh.write(self.script_text())
            return [f"saved {len(self.recorded)} events to {arg.strip()}"]
        if word == ":help":
            return [HELP]
        return [f"error: unknown command {word}; {HELP}"]

    def finish(self) -> Transcript:
        return self.session.finish()


def repl(
    pack: CulturePack,
    header: Scenario,
    *,
    arch: str = "A",
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
    record: Optional[str] = None,
) -> Transcript:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    r = Repl(pack, header, arch=arch)
    interactive = stdin.isatty()
    print(HELP, file=stdout, flush=True)
    while not r.done:
        if interactive:
            print("> ", end="", file=stdout, flush=True)
        line = stdin.readline()
        if not line:
            break
        for out in r.handle(line):
            print(out, file=stdout, flush=True)
    if record:
        with open(record, "w", encoding="utf-8") as fh:
            fh.write(r.script_text())
    return r.finish()

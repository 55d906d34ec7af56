"""Fixture-suite runner and the per-kind coverage matrix."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from .culture import CulturePack, builtin_pack_names, load_builtin_pack, parse_culture_pack
from .scenario import Scenario, parse_scenario
from .session import ARCHES, Transcript, run_session
from .taxonomy import ALL_KINDS, DisruptionKind, chain_family


def builtin_scenario_dir() -> Path:
    return Path(str(resources.files("disruptkit") / "data" / "scenarios"))


def load_scenarios(directory: Optional[Path] = None) -> List[Tuple[Path, Scenario]]:
    directory = Path(directory) if directory is not None else builtin_scenario_dir()
    return [(p, parse_scenario(p.read_text(encoding="utf-8"))) for p in sorted(directory.glob("*.scn"))]


def resolve_pack(name: Optional[str], near: Optional[Path] = None) -> CulturePack:
    """A built-in pack by name, else ``<name>.pack`` next to ``near``, else a file path."""
    name = name or "generic"
    if name in builtin_pack_names():
        return load_builtin_pack(name)
    candidates = [Path(name)]
    if near is not None:
        candidates.insert(0, near.parent / f"{name}.pack")
    for path in candidates:
        if path.is_file():
            return parse_culture_pack(path.read_text(encoding="utf-8"))
    raise FileNotFoundError(f"no culture pack named {name!r}")


@dataclass(frozen=True)
class Row:
    kind: DisruptionKind
    script: Optional[str]
    own: int  # detections in its golden script
    elsewhere: int  # detections in the other golden scripts
    family_ok: bool
    passed: bool  # expectations of the golden script

    @property
    def ok(self) -> bool:
        return self.script is not None and self.own == 1 and self.elsewhere == 0 and self.family_ok and self.passed


@dataclass
class SuiteResult:
    arch: str
    transcripts: Dict[str, Transcript]
    rows: List[Row]

    @property
    def all_passed(self) -> bool:
        return all(t.passed for t in self.transcripts.values())

    def rows_ok(self, kinds: Sequence[DisruptionKind] = ALL_KINDS) -> int:
        return sum(1 for r in self.rows if r.kind in kinds and r.ok)


def _first_strategy(t: Transcript, kind: DisruptionKind) -> Optional[str]:
    keys = {d.instance.key for d in t.detections if d.instance.kind is kind}
    return next((r.strategy for r in t.recoveries if r.disruption in keys), None)


def coverage_rows(scenarios: Sequence[Scenario], transcripts: Dict[str, Transcript]) -> List[Row]:
    golden = {s.golden: s.id for s in scenarios if s.golden is not None}
    rows = []
    for kind in ALL_KINDS:
        sid = golden.get(kind)
        if sid is None:
            rows.append(Row(kind, None, 0, 0, False, False))
            continue
        t = transcripts[sid]
        own = t.kinds()[kind]
        elsewhere = sum(transcripts[s].kinds()[kind] for s in golden.values() if s != sid)
        first = _first_strategy(t, kind)
        family = {s.value for s in chain_family(kind)}
        rows.append(Row(kind, sid, own, elsewhere, first is not None and first in family, t.passed))
    return rows


def run_suite(
    directory: Optional[Path] = None,
    arch: str = "B",
    *,
    pack: Optional[CulturePack] = None,
    window: int = 8,
    workers: int = 4,
) -> SuiteResult:
    """Every fixture under ``arch``; sessions share only the immutable packs."""
    if arch not in ARCHES:
        raise ValueError(f"architecture must be A or B, not {arch!r}")
    loaded = load_scenarios(directory)

    def one(item: Tuple[Path, Scenario]) -> Tuple[str, Transcript]:
        path, sc = item
        return sc.id, run_session(sc, pack or resolve_pack(sc.pack, path), arch, window=window)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        transcripts = dict(pool.map(one, loaded))
    scenarios = [sc for _, sc in loaded]
    return SuiteResult(arch, transcripts, coverage_rows(scenarios, transcripts))


def format_matrix(results: Sequence[SuiteResult]) -> str:
    head = f"{'kind':<5} {'script':<24}" + "".join(f" arch{r.arch}" for r in results)
    lines = [head]
    for i, kind in enumerate(ALL_KINDS):
        script = results[0].rows[i].script or "-"
        cells = []
        for res in results:
            row = res.rows[i]
            cells.append(f" {'pass' if row.ok else 'FAIL':>5}")
        lines.append(f"{kind.value:<5} {script:<24}" + "".join(cells))
    lines.append("")
    for res in results:
        functional = [k for k in ALL_KINDS if k.order.value == "functional"]
        lines.append(
            f"arch{res.arch}: rows {res.rows_ok()}/{len(ALL_KINDS)}, functional {res.rows_ok(functional)}/{len(functional)}, "
            f"fixtures {sum(t.passed for t in res.transcripts.values())}/{len(res.transcripts)}"
        )
        for sid, t in sorted(res.transcripts.items()):
            if not t.passed:
                lines.append(f"  fixture {sid} FAIL")
    return "\n".join(lines) + "\n"

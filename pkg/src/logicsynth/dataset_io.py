"""JSON Lines datasets: record schema, emission, verification and scoring.

One record per line, UTF-8, LF endings, keys in ``RECORD_KEYS`` order and
records sorted by id, so the same inputs always give the same bytes.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence

from . import GENERATOR_VERSION
from .errors import DuplicateId, LogicSynthError, MalformedLine
from .generators import InstanceParams, slot_fills, solve
from .instances import build_instance
from .rewards import DEFAULT_FORMAT_BONUS, Scheme, extract_answer, score, total_reward
from .seeding import derive_seed
from .task_model import LANGUAGES, LEVELS, Registry, ScoringMethod
from .templating import TemplateRepository, compose_question, default_repository

SCHEMA_VERSION = 1

RECORD_KEYS = (
    "id", "family_id", "taxonomy", "difficulty", "language", "template_id", "question",
    "answer", "answer_value", "answer_kind", "scoring_method", "params", "generator_version",
)


def record_id(family_id: str, seed: int, difficulty: int, language: str, template_id: str) -> str:
    key = json.dumps([family_id, seed, difficulty, language, template_id], ensure_ascii=False)
    return hashlib.sha256(key.encode("utf-8")).hexdigest()[:32]


@dataclass(frozen=True)
class DatasetRecord:
    id: str
    family_id: str
    taxonomy: Mapping[str, str]
    difficulty: int
    language: str
    template_id: str
    question: str
    answer: str
    answer_value: Any
    answer_kind: str
    scoring_method: str
    params: Mapping[str, Any]
    generator_version: str = GENERATOR_VERSION

    def to_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in RECORD_KEYS}

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, separators=(",", ":"))

    @property
    def instance_params(self) -> InstanceParams:
        return InstanceParams.from_dict(self.params)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "DatasetRecord":
        missing = [k for k in RECORD_KEYS if k not in data]
        if missing:
            raise KeyError(f"missing keys {missing}")
        return cls(**{k: data[k] for k in RECORD_KEYS})


@dataclass(frozen=True)
class MixEntry:
    family_id: str
    difficulty: int
    language: str
    count: int

    def __post_init__(self):
        if self.difficulty not in LEVELS:
            raise ValueError(f"difficulty must be in 1..10, got {self.difficulty}")
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language {self.language!r}")
        if self.count < 0:
            raise ValueError("count must be >= 0")


def expand_mix(families: Iterable[str], difficulties: Iterable[int], languages: Iterable[str],
               count: int) -> list[MixEntry]:
    return [MixEntry(f, d, lang, count) for f in families for d in difficulties for lang in languages]


def record_seed(master: int, family_id: str, difficulty: int, index: int) -> int:
    # language is deliberately not an input: en and zh records share params
    return derive_seed(master, "record", family_id, difficulty, index)


def make_record(registry: Registry, family_id: str, difficulty: int, language: str, seed: int,
                repo: TemplateRepository | None = None) -> DatasetRecord:
    descriptor = registry[family_id]
    inst = build_instance(descriptor, difficulty, seed, language, repo=repo)
    return DatasetRecord(
        id=record_id(family_id, seed, difficulty, language, inst.template_id),
        family_id=family_id,
        taxonomy=descriptor.taxonomy.to_dict(),
        difficulty=difficulty,
        language=language,
        template_id=inst.template_id,
        question=inst.question,
        answer=inst.truth.text(language),
        answer_value=inst.truth.value,
        answer_kind=inst.answer_kind.value,
        scoring_method=descriptor.scoring_method.value,
        params=inst.params.to_dict(),
    )


@dataclass
class EmissionReport:
    output: str
    total: int = 0
    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    sha256: str = ""
    forced: bool = False
    ungated: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema_version": SCHEMA_VERSION,
            "generator_version": GENERATOR_VERSION,
            "output": self.output,
            "total": self.total,
            "counts": self.counts,
            "sha256": self.sha256,
            "forced": self.forced,
            "ungated": self.ungated,
        }


class GateNotPassed(LogicSynthError):
    """Emission refused because a family has not passed the validation gate."""


def write_json(path: str | Path, data: Any) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def report_path(out: str | Path) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".report.json")


def emit_dataset(registry: Registry, mix: Sequence[MixEntry], master_seed: int, out: str | Path,
                 force: bool = False, repo: TemplateRepository | None = None,
                 parallelism: int = 1) -> EmissionReport:
    """Generate every record in ``mix`` and write them to ``out``.

    Writes ``<out>.report.json`` alongside. Raises GateNotPassed when a family
    in the mix has not passed the validation gate, unless ``force``.
    """
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    repo = repo or default_repository()
    ungated = sorted({e.family_id for e in mix if not registry[e.family_id].gate_passed})
    if ungated and not force:
        raise GateNotPassed(f"families without a passed validation gate: {', '.join(ungated)} (use force to override)")

    jobs = [(e.family_id, e.difficulty, e.language, record_seed(master_seed, e.family_id, e.difficulty, i))
            for e in mix for i in range(e.count)]

    def build(job):
        return make_record(registry, *job[:3], seed=job[3], repo=repo)

    if parallelism > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(pool.map(build, jobs))
    else:
        records = [build(j) for j in jobs]

    seen: set[str] = set()
    for rec in records:
        if rec.id in seen:
            raise DuplicateId(f"duplicate record id {rec.id} ({rec.family_id} level {rec.difficulty} {rec.language})")
        seen.add(rec.id)
    records.sort(key=lambda r: r.id)

    out = Path(out)
    payload = "".join(r.to_line() + "\n" for r in records).encode("utf-8")
    out.write_bytes(payload)

    counts: dict[str, Counter] = {}
    for rec in records:
        counts.setdefault(rec.family_id, Counter())[f"{rec.difficulty}/{rec.language}"] += 1
    report = EmissionReport(
        output=str(out),
        total=len(records),
        counts={f: dict(sorted(c.items())) for f, c in sorted(counts.items())},
        sha256=hashlib.sha256(payload).hexdigest(),
        forced=bool(ungated) and force,
        ungated=ungated,
    )
    write_json(report_path(out), report.to_dict())
    return report


def read_records(path: str | Path) -> Iterator[tuple[int, DatasetRecord]]:
    """Yield ``(line_number, record)``; raises MalformedLine on the first bad line."""
    with Path(path).open("rb") as fh:
        for n, raw in enumerate(fh, 1):
            if not raw.endswith(b"\n"):
                raise MalformedLine(n, "missing line terminator (truncated file?)")
            try:
                data = json.loads(raw.decode("utf-8"))
                if not isinstance(data, dict):
                    raise ValueError("not an object")
                yield n, DatasetRecord.from_dict(data)
            except (UnicodeDecodeError, ValueError, KeyError, TypeError) as exc:
                raise MalformedLine(n, str(exc)) from None


@dataclass(frozen=True)
class Mismatch:
    line: int
    field: str
    detail: str


@dataclass
class VerificationReport:
    path: str
    records: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict[str, Any]:
        return {
            "path": self.path,
            "records": self.records,
            "ok": self.ok,
            "mismatches": [m.__dict__ for m in self.mismatches],
        }


def _check_record(n: int, rec: DatasetRecord, repo: TemplateRepository) -> list[Mismatch]:
    out = []
    params = rec.instance_params
    if params.family_id != rec.family_id or params.difficulty != rec.difficulty:
        out.append(Mismatch(n, "params", "family or difficulty disagrees with the record"))
    expected_id = record_id(rec.family_id, params.seed, rec.difficulty, rec.language, rec.template_id)
    if rec.id != expected_id:
        out.append(Mismatch(n, "id", f"expected {expected_id}"))
    try:
        truth = solve(params)
        template = repo.get(rec.template_id)
        question = compose_question(template, slot_fills(params, rec.language), repo)
    except (LogicSynthError, KeyError) as exc:
        out.append(Mismatch(n, "params", f"cannot re-solve or re-render: {exc}"))
        return out
    if question != rec.question:
        out.append(Mismatch(n, "question", "re-rendered question differs"))
    if truth.text(rec.language) != rec.answer:
        out.append(Mismatch(n, "answer", f"expected {truth.text(rec.language)!r}, found {rec.answer!r}"))
    if truth.value != rec.answer_value:
        out.append(Mismatch(n, "answer_value", f"expected {truth.value!r}, found {rec.answer_value!r}"))
    if truth.kind.value != rec.answer_kind:
        out.append(Mismatch(n, "answer_kind", f"expected {truth.kind.value}"))
    return out


def verify_dataset(path: str | Path, repo: TemplateRepository | None = None) -> VerificationReport:
    """Re-render and re-solve every record, listing mismatches by line."""
    repo = repo or default_repository()
    report = VerificationReport(str(path))
    seen: dict[str, int] = {}
    for n, rec in read_records(path):
        report.records += 1
        if rec.id in seen:
            report.mismatches.append(Mismatch(n, "id", f"duplicate of line {seen[rec.id]}"))
        seen.setdefault(rec.id, n)
        report.mismatches.extend(_check_record(n, rec, repo))
    return report


# responses and scores

def read_responses(path: str | Path) -> dict[str, str]:
    """Responses file: JSON Lines of ``{"id": ..., "response": ...}``."""
    out: dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
                out[str(data["id"])] = str(data["response"])
            except (ValueError, KeyError, TypeError) as exc:
                raise MalformedLine(n, str(exc)) from None
    return out


def write_responses(path: str | Path, responses: Iterable[tuple[str, str]]) -> Path:
    path = Path(path)
    lines = [json.dumps({"id": i, "response": r}, ensure_ascii=False) + "\n" for i, r in responses]
    path.write_bytes("".join(lines).encode("utf-8"))
    return path


@dataclass
class ScoreReport:
    scheme: str
    scored: int = 0
    mean_total: float = 0.0
    missing_responses: list[str] = field(default_factory=list)
    unknown_ids: list[str] = field(default_factory=list)

    @property
    def mismatch(self) -> bool:
        return bool(self.missing_responses or self.unknown_ids)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scheme": self.scheme,
            "scored": self.scored,
            "mean_total": self.mean_total,
            "mismatch": self.mismatch,
            "missing_responses": self.missing_responses,
            "unknown_ids": self.unknown_ids,
        }


def score_dataset(dataset: str | Path, responses: str | Path, out: str | Path, scheme: Scheme | str = Scheme.BIPOLAR,
                  bonus: float = DEFAULT_FORMAT_BONUS) -> ScoreReport:
    """Score every response against its record; writes one JSON line per scored record."""
    scheme = Scheme(scheme)
    answers = read_responses(responses)
    report = ScoreReport(scheme.value)
    lines, totals, known = [], [], set()
    for _, rec in read_records(dataset):
        known.add(rec.id)
        if rec.id not in answers:
            report.missing_responses.append(rec.id)
            continue
        truth = solve(rec.instance_params)
        extracted = extract_answer(answers[rec.id], truth.kind, rec.language)
        S = score(extracted.parsed, truth, ScoringMethod(rec.scoring_method), rec.language)
        value = total_reward(S, scheme, extracted.format_ok, bonus)
        totals.append(value.total)
        lines.append(json.dumps({
            "id": rec.id, "S": value.S, "scheme": scheme.value, "format_ok": extracted.format_ok,
            "mapped": value.mapped, "bonus": value.bonus, "total": value.total,
        }, ensure_ascii=False) + "\n")
    report.unknown_ids = sorted(set(answers) - known)
    report.scored = len(totals)
    report.mean_total = sum(totals) / len(totals) if totals else 0.0
    Path(out).write_bytes("".join(lines).encode("utf-8"))
    return report


@dataclass(frozen=True)
class _RecordContext:
    seed: int
    language: str
    truth: Any
    level_params: dict


def respond_dataset(dataset: str | Path, model_for: Callable[[str], Any], registry: Registry,
                    out: str | Path) -> Path:
    """Ask ``model_for(family_id)`` every question in ``dataset``; writes a responses file."""
    pairs = []
    for _, rec in read_records(dataset):
        params = rec.instance_params
        ctx = _RecordContext(params.seed, rec.language, solve(params),
                             registry[rec.family_id].ladder.params(rec.difficulty))
        pairs.append((rec.id, model_for(rec.family_id).answer(rec.question, ctx)))
    return write_responses(out, pairs)

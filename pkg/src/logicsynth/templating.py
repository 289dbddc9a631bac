"""Bilingual question templates with ``[Slot n]`` markers.

Template files live in ``data/templates/<family>.<lang>.yaml``; extra
directories can be layered on with :meth:`TemplateRepository.load_directory`
or single templates added with :meth:`TemplateRepository.add`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import yaml

from .errors import ArityMismatch, LanguageMismatch, NoTemplateForLanguage, ResidualMarker
from .generators.base import SlotFills
from .seeding import derive_seed
from .task_model import DATA_DIR, LANGUAGES

MARKER = re.compile(r"\[Slot (\d+)\]")
RESIDUAL = re.compile(r"\[\s*Slot\b", re.IGNORECASE)
# bracketed literals with separators or quotes, empty brackets, or key: value braces
RAW_DATA = re.compile(r"\[[^\]\n]*[,'\"][^\]\n]*\]|\[\s*\]|\{[^}\n]*:[^}\n]*\}")


@dataclass(frozen=True)
class Template:
    template_id: str
    family_id: str
    language: str
    body: str
    arity: int


@dataclass(frozen=True)
class TemplateReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def has_raw_data_syntax(text: str) -> bool:
    return bool(RAW_DATA.search(MARKER.sub("", text)))


def validate_template(template: Template) -> TemplateReport:
    violations = []
    if template.language not in LANGUAGES:
        violations.append(f"unsupported language {template.language!r}")
    numbers = sorted({int(n) for n in MARKER.findall(template.body)})
    for n in range(1, template.arity + 1):
        if n not in numbers:
            violations.append(f"missing [Slot {n}]")
    for n in numbers:
        if n > template.arity or n < 1:
            violations.append(f"[Slot {n}] exceeds arity {template.arity}")
    if RESIDUAL.search(MARKER.sub("", template.body)):
        violations.append("malformed slot marker")
    if has_raw_data_syntax(template.body):
        violations.append("raw data format")
    return TemplateReport(tuple(violations))


def render(template: Template, fills: SlotFills) -> str:
    if fills.language != template.language:
        raise LanguageMismatch(f"fills are {fills.language!r}, template {template.template_id} is {template.language!r}")
    if len(fills.fills) != template.arity:
        raise ArityMismatch(f"{template.template_id} takes {template.arity} fills, got {len(fills.fills)}")
    present = {int(n) for n in MARKER.findall(template.body)}
    missing = [n for n in range(1, template.arity + 1) if n not in present]
    if missing:
        raise ArityMismatch(f"{template.template_id} body lacks [Slot {missing[0]}]")

    def fill(match: re.Match) -> str:
        n = int(match.group(1))
        return fills.fills[n - 1] if 1 <= n <= template.arity else match.group(0)

    # residual check runs on the body so fill text can never trigger it
    body_rest = MARKER.sub(lambda m: "" if 1 <= int(m.group(1)) <= template.arity else m.group(0), template.body)
    if RESIDUAL.search(body_rest):
        raise ResidualMarker(f"{template.template_id} leaves an unfilled slot marker")
    return MARKER.sub(fill, template.body)


class TemplateRepository:
    def __init__(self):
        self._by_key: dict[tuple[str, str], list[Template]] = {}
        self._by_id: dict[str, Template] = {}
        self._answer_format: dict[tuple[str, str], str] = {}

    def add(self, template: Template, answer_format: str | None = None) -> None:
        if template.template_id in self._by_id:
            raise ValueError(f"duplicate template id {template.template_id!r}")
        self._by_id[template.template_id] = template
        self._by_key.setdefault((template.family_id, template.language), []).append(template)
        if answer_format is not None:
            self._answer_format[(template.family_id, template.language)] = answer_format

    def load_file(self, path: str | Path) -> None:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
        family, lang = data["family_id"], data["language"]
        for entry in data["templates"]:
            self.add(Template(entry["id"], family, lang, entry["body"].rstrip("\n"), int(entry["arity"])))
        if "answer_format" in data:
            self._answer_format[(family, lang)] = data["answer_format"].strip()

    def load_directory(self, directory: str | Path) -> "TemplateRepository":
        for path in sorted(Path(directory).glob("*.yaml")):
            self.load_file(path)
        return self

    def variants(self, family_id: str, language: str) -> list[Template]:
        return list(self._by_key.get((family_id, language), []))

    def get(self, template_id: str) -> Template:
        return self._by_id[template_id]

    def answer_format(self, family_id: str, language: str) -> str:
        return self._answer_format.get((family_id, language), "")

    def all(self) -> list[Template]:
        return list(self._by_id.values())

    def pick(self, family_id: str, language: str, seed: int) -> Template:
        options = self.variants(family_id, language) if language in LANGUAGES else []
        if not options:
            raise NoTemplateForLanguage(f"no {language!r} template for {family_id}")
        return options[derive_seed(seed, "template", family_id, language) % len(options)]


@lru_cache(maxsize=1)
def default_repository() -> TemplateRepository:
    return TemplateRepository().load_directory(DATA_DIR / "templates")


def pick_template(family_id: str, language: str, seed: int, repo: TemplateRepository | None = None) -> Template:
    return (repo or default_repository()).pick(family_id, language, seed)


def compose_question(template: Template, fills: SlotFills, repo: TemplateRepository | None = None) -> str:
    """Rendered template followed by the answer-format instruction."""
    text = render(template, fills)
    hint = (repo or default_repository()).answer_format(template.family_id, template.language)
    return f"{text}\n\n{hint}" if hint else text

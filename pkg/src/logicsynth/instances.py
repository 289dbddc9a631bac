from __future__ import annotations

from dataclasses import dataclass, field

from .errors import TemplateError
from .generators import generate
from .generators.base import GroundTruth, InstanceParams, SlotFills
from .task_model import AnswerKind, ScoringMethod, TaskDescriptor
from .templating import Template, TemplateRepository, compose_question, default_repository, pick_template


@dataclass(frozen=True)
class ProblemInstance:
    """Rendered question plus everything needed to check an answer to it."""

    params: InstanceParams
    fills: SlotFills
    template_id: str
    question: str
    truth: GroundTruth
    scoring_method: ScoringMethod
    level_params: dict = field(default_factory=dict)

    @property
    def seed(self) -> int:
        return self.params.seed

    @property
    def language(self) -> str:
        return self.fills.language

    @property
    def answer_kind(self) -> AnswerKind:
        return self.truth.kind


def build_instance(descriptor: TaskDescriptor, difficulty: int, seed: int, language: str,
                   template: Template | None = None, repo: TemplateRepository | None = None,
                   strict: bool = True) -> ProblemInstance:
    """Generate, solve and render one instance.

    The template is chosen from ``seed`` unless one is forced (the validation
    gate forces each variant in turn). With ``strict=False`` a template that
    fails to render yields its raw body as the question, which no model can
    answer; otherwise rendering errors propagate.
    """
    repo = repo or default_repository()
    params, fills, truth = generate(descriptor, difficulty, seed, language)
    template = template or pick_template(descriptor.family_id, language, seed, repo)
    try:
        question = compose_question(template, fills, repo)
    except TemplateError:
        if strict:
            raise
        question = template.body
    return ProblemInstance(
        params=params,
        fills=fills,
        template_id=template.template_id,
        question=question,
        truth=truth,
        scoring_method=descriptor.scoring_method,
        level_params=descriptor.ladder.params(difficulty),
    )

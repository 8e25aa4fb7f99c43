"""Instance generation loops: instruction learning and chain of thought, with bounded repair."""

from __future__ import annotations

import dataclasses
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from ..cd_parser import format_class_diagram
from ..conformance import CheckResult, full_check
from ..errors import ProviderError
from ..model import ClassModel, InstanceModel, RunProvenance
from ..resolve import to_tree
from .prompts import Category, render_prompt
from .providers import ChatSession, Provider, ProviderConfig, provider_send

IL = "IL"
COT = "CoT"


class Status(str, Enum):
    ACCEPTED = "accepted"
    FAILED_SYNTAX = "failed-syntax"
    FAILED_CONFORMANCE = "failed-conformance"
    EXPECTED_NONCONFORMING = "expected-nonconforming"


@dataclass(frozen=True)
class GenerationConfig:
    num_instances: int = 30
    max_checks: int = 2
    strategy: str = IL
    categories: tuple[Category, ...] = ()
    provider: ProviderConfig | None = None
    seed_note: str | None = None

    def __post_init__(self):
        if self.num_instances < 1:
            raise ValueError("num_instances must be positive")
        if self.max_checks < 0:
            raise ValueError("max_checks must be non-negative")
        if self.strategy not in (IL, COT):
            raise ValueError(f"strategy must be {IL} or {COT}, not {self.strategy!r}")
        object.__setattr__(self, "categories",
                           tuple(c if isinstance(c, Category) else Category.parse(c) for c in self.categories))
        if self.strategy == COT and not self.categories:
            raise ValueError("the CoT strategy needs at least one category")
        if len(set(self.categories)) != len(self.categories):
            raise ValueError("categories must not repeat")


@dataclass
class GeneratedInstance:
    soil_text: str
    instance: InstanceModel | None
    status: Status
    repair_rounds_syntax: int = 0
    repair_rounds_conformance: int = 0
    session_index: int = 0
    transcript_slice: tuple[int, int] = (0, 0)  # message range within the session
    strategy: str = IL
    category: Category | None = None
    scenario: str | None = None
    check: CheckResult | None = field(default=None, repr=False, compare=False)

    @property
    def provider_calls(self) -> int:
        return 1 + self.repair_rounds_syntax + self.repair_rounds_conformance

    @property
    def provenance(self) -> RunProvenance:
        return RunProvenance(self.strategy, self.category.value if self.category else None,
                             self.repair_rounds_syntax, self.repair_rounds_conformance)


class GenerationAborted(ProviderError):
    """A provider failure stopped the run; what was produced so far is kept."""

    def __init__(self, cause: ProviderError, instances: list[GeneratedInstance],
                 sessions: list[ChatSession]):
        super().__init__(cause.kind, str(cause).split(": ", 1)[-1])
        self.cause = cause
        self.instances = instances
        self.sessions = sessions


_FENCE = re.compile(r"```[^\n]*\n(.*?)```", re.S)


def extract_soil(response: str) -> str:
    """Body of the first fenced code block, or the whole response when there is none."""
    m = _FENCE.search(response)
    return m.group(1) if m else response


def check_and_repair(tentative: str, model: ClassModel, max_checks: int, session: ChatSession,
                     provider: Provider, *, repair_conformance: bool = True,
                     expected_nonconforming: bool = False) -> GeneratedInstance:
    """Check ``tentative`` and ask for corrections, syntax first, then conformance.

    Each phase gets at most ``max_checks`` correction prompts, and the
    conformance phase only runs once the syntax phase has passed.
    """
    soil = extract_soil(tentative)
    result = full_check(soil, model)

    def repair() -> None:
        nonlocal soil, result
        session.add_user(render_prompt("correct", {"error": result.render()}))
        soil = extract_soil(provider_send(provider, session))
        result = full_check(soil, model)

    syntax_rounds = 0
    while not result.syntax_passed and syntax_rounds < max_checks:
        repair()
        syntax_rounds += 1
    conformance_rounds = 0
    if result.syntax_passed and repair_conformance:
        while not result.passed and conformance_rounds < max_checks:
            repair()
            conformance_rounds += 1

    if result.passed:
        status = Status.ACCEPTED
    elif not result.syntax_passed:
        status = Status.FAILED_SYNTAX
    elif expected_nonconforming:
        status = Status.EXPECTED_NONCONFORMING
    else:
        status = Status.FAILED_CONFORMANCE
    return GeneratedInstance(soil, result.instance, status, syntax_rounds, conformance_rounds,
                             check=result)


def _produce(session: ChatSession, session_index: int, prompt: str, model: ClassModel,
             config: GenerationConfig, provider: Provider, **tags) -> GeneratedInstance:
    start = session.add_user(prompt)
    category = tags.get("category")
    overconstraint = category is not None and category.expected_nonconforming
    item = check_and_repair(provider_send(provider, session), model, config.max_checks, session, provider,
                            repair_conformance=not overconstraint, expected_nonconforming=overconstraint)
    item.session_index = session_index
    item.transcript_slice = (start, len(session.messages))
    item.strategy = config.strategy
    item.category = category
    item.scenario = tags.get("scenario")
    if item.instance is not None:
        item.instance = dataclasses.replace(item.instance, provenance=item.provenance)
    return item


def _diagram_text(model: ClassModel, model_text: str | None) -> str:
    return model_text if model_text is not None else format_class_diagram(to_tree(model))


def run_instruction_learning(model: ClassModel, shot: str, config: GenerationConfig, provider: Provider,
                             *, model_text: str | None = None,
                             log: list[ChatSession] | None = None) -> list[GeneratedInstance]:
    """One session: the full instruction prompt once, then "another instance" prompts.

    ``log`` receives the session so callers can persist the transcript.
    """
    log = [] if log is None else log
    session = ChatSession(render_prompt("il_system"))
    log.append(session)
    index = len(log) - 1
    first = render_prompt("il_user", {"classDiagram": _diagram_text(model, model_text), "syntaxExample": shot})
    results: list[GeneratedInstance] = []
    try:
        for k in range(config.num_instances):
            prompt = first if k == 0 else render_prompt("next_instance")
            results.append(_produce(session, index, prompt, model, config, provider))
    except ProviderError as exc:
        raise GenerationAborted(exc, results, log) from exc
    return results


def split_counts(total: int, parts: int) -> list[int]:
    """Even split of ``total`` over ``parts``; earlier parts take the remainder."""
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _reuse_hint(previous: list[GeneratedInstance]) -> str:
    names = [o.object_id for item in previous if item.instance is not None for o in item.instance.objects]
    if not names:
        return ""
    return "\nObject names already used in previous instances (do not reuse them): " + ", ".join(names)


def run_chain_of_thought(model: ClassModel, shot: str, config: GenerationConfig, provider: Provider,
                         *, model_text: str | None = None, log: list[ChatSession] | None = None,
                         jobs: int = 1) -> list[GeneratedInstance]:
    """Analysis, then scenario descriptions per category, then one fresh session per scenario.

    Categories are instantiated concurrently when ``jobs > 1``; scenarios of
    one category stay sequential so each can see the names used before it.
    The result is ordered by (category, scenario index) either way.
    """
    log = [] if log is None else log
    diagram = _diagram_text(model, model_text)
    results: list[GeneratedInstance] = []
    try:
        analysis = ChatSession(render_prompt("analysis_system"))
        log.append(analysis)
        analysis.add_user(render_prompt("analysis_user", {"classDiagram": diagram}))
        description = provider_send(provider, analysis)

        scenarios: list[tuple[Category, list[str]]] = []
        for category, count in zip(config.categories, split_counts(config.num_instances, len(config.categories))):
            if count == 0:
                continue
            session = ChatSession(render_prompt("scenario_system"))
            log.append(session)
            texts = []
            for k in range(count):
                session.add_user(render_prompt("scenario_user", {"modelDescription": description,
                                                                  "categoryPrompt": category.prompt_text})
                                 if k == 0 else render_prompt("next_instance"))
                texts.append(provider_send(provider, session))
            scenarios.append((category, texts))
    except ProviderError as exc:
        raise GenerationAborted(exc, results, log) from exc

    # sessions are created up front so their log positions do not depend on scheduling
    plans = []
    for category, texts in scenarios:
        plan = []
        for text in texts:
            log.append(ChatSession(render_prompt("instantiate_system")))
            plan.append((len(log) - 1, text))
        plans.append((category, plan))

    def instantiate(category: Category, plan) -> tuple[list[GeneratedInstance], ProviderError | None]:
        done: list[GeneratedInstance] = []
        for index, scenario in plan:
            prompt = render_prompt("instantiate_user", {"classDiagram": diagram, "syntaxExample": shot,
                                                         "scenario": scenario}) + _reuse_hint(done)
            try:
                done.append(_produce(log[index], index, prompt, model, config, provider,
                                     category=category, scenario=scenario))
            except ProviderError as exc:
                return done, exc
        return done, None

    if jobs > 1 and len(plans) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(lambda p: instantiate(*p), plans))
    else:
        outcomes = []
        for p in plans:
            outcomes.append(instantiate(*p))
            if outcomes[-1][1] is not None:
                break
    failure = None
    for done, exc in outcomes:
        results.extend(done)
        failure = failure or exc
    if failure is not None:
        raise GenerationAborted(failure, results, log) from failure
    return results


def run_generation(model: ClassModel, shot: str, config: GenerationConfig, provider: Provider,
                   *, model_text: str | None = None, log: list[ChatSession] | None = None,
                   jobs: int = 1) -> list[GeneratedInstance]:
    if config.strategy == IL:
        return run_instruction_learning(model, shot, config, provider, model_text=model_text, log=log)
    return run_chain_of_thought(model, shot, config, provider, model_text=model_text, log=log, jobs=jobs)

"""Parameterized completion items.

A template is a prompt with ``{{name}}`` placeholders, parameter domains,
and an answer expression. Instantiating it for a student draws one value
per parameter deterministically, renders the prompt, and computes the
expected numeric answer, so every student gets a different test whose
items differ only in the numbers plugged in.
"""
from __future__ import annotations

import json
import math
import random
import re
from dataclasses import dataclass, field
from typing import Union

from latticetest.expr import (
    EvalError,
    Expr,
    ExprSyntaxError,
    eval_expr,
    format_expr,
    free_variables,
    parse_expr,
)

_PLACEHOLDER = re.compile(r"\{\{(\w+)\}\}")


class TemplateError(ValueError):
    """Malformed template document."""


@dataclass(frozen=True)
class Tolerance:
    relative: float = 1e-4
    absolute: float = 1e-9

    def __post_init__(self) -> None:
        if self.relative < 0 or self.absolute < 0:
            raise TemplateError("tolerances must be non-negative")

    def to_dict(self) -> dict:
        return {"relative": self.relative, "absolute": self.absolute}


@dataclass(frozen=True)
class IntRange:
    """Inclusive arithmetic progression of integers."""

    lo: int
    hi: int
    step: int = 1

    def values(self) -> tuple[float, ...]:
        return tuple(float(v) for v in range(self.lo, self.hi + 1, self.step))

    def to_dict(self) -> dict:
        return {"range": {"min": self.lo, "max": self.hi, "step": self.step}}


@dataclass(frozen=True)
class ValueList:
    """Explicit list of numeric values (decimal or choice list)."""

    values_: tuple[float, ...]

    def values(self) -> tuple[float, ...]:
        return self.values_

    def to_dict(self) -> dict:
        return {"values": [_plain(v) for v in self.values_]}


@dataclass(frozen=True)
class Derived:
    """Parameter computed from earlier parameters, e.g. hi = lo + 1."""

    expression: Expr

    def to_dict(self) -> dict:
        return {"expr": format_expr(self.expression)}


Domain = Union[IntRange, ValueList, Derived]


@dataclass(frozen=True)
class ItemTemplate:
    id: str
    level: int
    prompt: str
    params: tuple[tuple[str, Domain], ...]  # declaration order matters for Derived
    answer: Expr
    tolerance: Tolerance = field(default_factory=Tolerance)
    distractors: tuple[Expr, ...] = ()

    @property
    def n_choices(self) -> int | None:
        """Options per item for multiple-choice rendering; None for completion."""
        return len(self.distractors) + 1 if self.distractors else None

    def param_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.params)

    def to_dict(self) -> dict:
        doc: dict = {
            "id": self.id,
            "level": self.level,
            "prompt": self.prompt,
            "params": {name: domain.to_dict() for name, domain in self.params},
            "answer": format_expr(self.answer),
            "tolerance": self.tolerance.to_dict(),
        }
        if self.distractors:
            doc["choices"] = [format_expr(d) for d in self.distractors]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class ItemInstance:
    template_id: str
    level: int
    bindings: tuple[tuple[str, float], ...]
    rendered_prompt: str
    expected_answer: float
    tolerance: Tolerance = field(default_factory=Tolerance)
    choice_values: tuple[float, ...] = ()

    def binding(self, name: str) -> float:
        return dict(self.bindings)[name]


def _plain(value: float) -> int | float:
    return int(value) if value == int(value) and abs(value) < 1e15 else value


def _fmt_number(value: float) -> str:
    return str(_plain(value))


def _parse_domain(name: str, doc: object) -> Domain:
    if not isinstance(doc, dict) or len(doc) != 1:
        raise TemplateError(
            f"parameter {name!r} must be one of {{'range': ...}}, "
            f"{{'values': [...]}} or {{'expr': '...'}}"
        )
    kind, body = next(iter(doc.items()))
    if kind == "range":
        if not isinstance(body, dict) or "min" not in body or "max" not in body:
            raise TemplateError(f"range for {name!r} needs 'min' and 'max'")
        lo, hi, step = body["min"], body["max"], body.get("step", 1)
        if not all(isinstance(v, int) for v in (lo, hi, step)) or step < 1:
            raise TemplateError(f"range for {name!r} must use integers with step >= 1")
        domain = IntRange(lo, hi, step)
        if len(domain.values()) < 2:
            raise TemplateError(f"parameter {name!r} needs at least 2 possible values")
        return domain
    if kind == "values":
        if not isinstance(body, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in body):
            raise TemplateError(f"values for {name!r} must be a list of numbers")
        if len(set(body)) < 2:
            raise TemplateError(f"parameter {name!r} needs at least 2 distinct values")
        return ValueList(tuple(float(v) for v in body))
    if kind == "expr":
        if not isinstance(body, str):
            raise TemplateError(f"expr for {name!r} must be expression source text")
        try:
            return Derived(parse_expr(body))
        except ExprSyntaxError as exc:
            raise TemplateError(f"bad expression for parameter {name!r}: {exc}") from exc
    raise TemplateError(f"unknown domain kind {kind!r} for parameter {name!r}")


def parse_template(document: str | dict) -> ItemTemplate:
    """Parse and validate a template document (JSON text or decoded object)."""
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise TemplateError(
                f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})"
            ) from exc
    if not isinstance(document, dict):
        raise TemplateError("template document must be a JSON object")

    missing = {"id", "level", "prompt", "params", "answer"} - document.keys()
    if missing:
        raise TemplateError(f"template is missing fields: {sorted(missing)}")
    template_id = document["id"]
    level = document["level"]
    prompt = document["prompt"]
    if not isinstance(template_id, str) or not template_id:
        raise TemplateError("template id must be a non-empty string")
    if not isinstance(level, int) or level < 1:
        raise TemplateError(f"template level must be a positive integer, got {level!r}")
    if not isinstance(prompt, str):
        raise TemplateError("prompt must be a string")

    raw_params = document["params"]
    if not isinstance(raw_params, dict):
        raise TemplateError("params must be an object of name -> domain")
    params: list[tuple[str, Domain]] = []
    for name, raw in raw_params.items():
        params.append((name, _parse_domain(name, raw)))
    declared = {name for name, _ in params}

    # derived parameters may only reference parameters declared before them
    seen: set[str] = set()
    for name, domain in params:
        if isinstance(domain, Derived):
            unknown = free_variables(domain.expression) - seen
            if unknown:
                raise TemplateError(
                    f"derived parameter {name!r} references undeclared or "
                    f"later parameters: {sorted(unknown)}"
                )
        seen.add(name)

    for placeholder in _PLACEHOLDER.findall(prompt):
        if placeholder not in declared:
            raise TemplateError(f"prompt placeholder {{{{{placeholder}}}}} is not a declared parameter")

    try:
        answer = parse_expr(document["answer"])
    except ExprSyntaxError as exc:
        raise TemplateError(f"bad answer expression: {exc}") from exc
    unknown = free_variables(answer) - declared
    if unknown:
        raise TemplateError(f"answer references undeclared parameters: {sorted(unknown)}")

    tolerance = Tolerance()
    if "tolerance" in document:
        tol_doc = document["tolerance"]
        if not isinstance(tol_doc, dict):
            raise TemplateError("tolerance must be an object")
        tolerance = Tolerance(
            relative=float(tol_doc.get("relative", Tolerance.relative)),
            absolute=float(tol_doc.get("absolute", Tolerance.absolute)),
        )

    distractors: list[Expr] = []
    for i, source in enumerate(document.get("choices", [])):
        try:
            distractor = parse_expr(source)
        except ExprSyntaxError as exc:
            raise TemplateError(f"bad choice expression #{i + 1}: {exc}") from exc
        unknown = free_variables(distractor) - declared
        if unknown:
            raise TemplateError(
                f"choice #{i + 1} references undeclared parameters: {sorted(unknown)}"
            )
        distractors.append(distractor)

    return ItemTemplate(
        id=template_id,
        level=level,
        prompt=prompt,
        params=tuple(params),
        answer=answer,
        tolerance=tolerance,
        distractors=tuple(distractors),
    )


def instantiate(template: ItemTemplate, student_key: str, seed: int | str) -> ItemInstance:
    """Draw one concrete item for a student.

    The draw is a pure function of (template id, student_key, seed): the
    same inputs always produce the same bindings, prompt and expected
    answer. Evaluation errors from the answer expression propagate, so a
    template whose answer is undefined for some binding fails here rather
    than at grading time.
    """
    rng = random.Random(f"item:{seed}:{student_key}:{template.id}")
    bindings: dict[str, float] = {}
    for name, domain in template.params:
        if isinstance(domain, Derived):
            bindings[name] = eval_expr(domain.expression, bindings)
        else:
            bindings[name] = rng.choice(domain.values())

    rendered = _PLACEHOLDER.sub(lambda m: _fmt_number(bindings[m.group(1)]), template.prompt)
    expected = eval_expr(template.answer, bindings)
    choice_values = tuple(eval_expr(d, bindings) for d in template.distractors)
    return ItemInstance(
        template_id=template.id,
        level=template.level,
        bindings=tuple(bindings.items()),
        rendered_prompt=rendered,
        expected_answer=expected,
        tolerance=template.tolerance,
        choice_values=choice_values,
    )


def check_answer(
    instance: ItemInstance,
    submitted: object,
    tolerance: Tolerance | None = None,
) -> bool:
    """Whether a submission matches the expected answer within tolerance.

    Anything that does not convert to a finite number is simply wrong,
    never an error.
    """
    tol = tolerance if tolerance is not None else instance.tolerance
    if isinstance(submitted, bool):
        return False
    try:
        value = float(submitted)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        return False
    if not math.isfinite(value):
        return False
    expected = instance.expected_answer
    return abs(value - expected) <= max(tol.absolute, tol.relative * abs(expected))

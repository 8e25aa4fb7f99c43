"""Pairwise diversity of attribute values within one instance and across a corpus."""

from __future__ import annotations

import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence

from ..errors import KindMismatch
from ..model import ClassModel, InstanceModel, IntV, RealV, StringV


class ScoreKind(str, Enum):
    NUMERIC = "Numeric"
    STRING_EXACT = "StringExact"
    STRING_LEVENSHTEIN = "StringLevenshtein"


def levenshtein(a: str, b: str) -> int:
    """Edit distance with unit-cost insertions, deletions and substitutions."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1,
                               current[j - 1] + 1,
                               previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


def _kind(x) -> str:
    if isinstance(x, bool):
        return "bool"
    if isinstance(x, (int, float)):
        return "numeric"
    if isinstance(x, str):
        return "string"
    return type(x).__name__


def pair_diversity_exact(x, y) -> int:
    """1 when the two values differ, 0 when they are equal."""
    if _kind(x) != _kind(y):
        raise KindMismatch(f"cannot compare {_kind(x)} value {x!r} with {_kind(y)} value {y!r}")
    return 0 if x == y else 1


def pair_diversity_levenshtein(a: str, b: str) -> float:
    """Edit distance normalised by the longer length; 0.0 for two empty strings."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return levenshtein(a, b) / longest


@dataclass(frozen=True)
class DiversityScore:
    kind: ScoreKind
    value: float | None  # None means not applicable
    pair_count: int

    @property
    def applicable(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        return {"value": self.value, "pairs": self.pair_count}

    def __str__(self):
        return "-" if self.value is None else f"{self.value:.2f}"


def set_diversity(elems: Sequence, pair_fn: Callable[[object, object], float],
                  kind: ScoreKind = ScoreKind.NUMERIC) -> DiversityScore:
    """Mean of ``pair_fn`` over all unordered pairs of positions in the bag."""
    n = len(elems)
    if n < 2:
        return DiversityScore(kind, None, 0)
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += pair_fn(elems[i], elems[j])
    pairs = n * (n - 1) // 2
    return DiversityScore(kind, total / pairs, pairs)


def value_bags(instance: InstanceModel) -> tuple[list[float | int], list[str]]:
    """Numeric and string slot values in object then slot order; other kinds are left out."""
    numbers: list[float | int] = []
    strings: list[str] = []
    for obj in instance.objects:
        for value in obj.slots.values():
            if isinstance(value, (IntV, RealV)):
                numbers.append(value.value)
            elif isinstance(value, StringV):
                strings.append(value.value)
    return numbers, strings


def _scores(numbers, strings) -> dict[ScoreKind, DiversityScore]:
    return {
        ScoreKind.NUMERIC: set_diversity(numbers, pair_diversity_exact, ScoreKind.NUMERIC),
        ScoreKind.STRING_EXACT: set_diversity(strings, pair_diversity_exact, ScoreKind.STRING_EXACT),
        ScoreKind.STRING_LEVENSHTEIN: set_diversity(strings, pair_diversity_levenshtein,
                                                    ScoreKind.STRING_LEVENSHTEIN),
    }


def diversity_within(instance: InstanceModel, model: ClassModel | None = None) -> dict[ScoreKind, DiversityScore]:
    return _scores(*value_bags(instance))


@dataclass(frozen=True)
class MeanStd:
    mean: float | None
    std: float | None
    count: int

    def to_dict(self) -> dict:
        return {"mean": self.mean, "std": self.std, "instances": self.count}

    def __str__(self):
        return "-" if self.mean is None else f"{self.mean:.2f} ± {self.std:.2f}"


def mean_std(values: Iterable[float]) -> MeanStd:
    values = list(values)
    if not values:
        return MeanStd(None, None, 0)
    return MeanStd(statistics.fmean(values), statistics.pstdev(values), len(values))


@dataclass(frozen=True)
class CorpusDiversity:
    across: dict[ScoreKind, DiversityScore]
    within: dict[ScoreKind, MeanStd]
    per_instance: list[dict[ScoreKind, DiversityScore]]

    def to_dict(self) -> dict:
        return {kind.value: {"across": self.across[kind].to_dict(), "within": self.within[kind].to_dict()}
                for kind in ScoreKind}


def diversity_across(corpus: Sequence[InstanceModel], model: ClassModel | None = None) -> CorpusDiversity:
    """Scores over the pooled bags, plus mean and population std of the per-instance scores.

    Instances whose score is not applicable do not count towards the mean.
    """
    numbers: list = []
    strings: list = []
    per_instance = []
    for instance in corpus:
        n, s = value_bags(instance)
        numbers.extend(n)
        strings.extend(s)
        per_instance.append(_scores(n, s))
    within = {kind: mean_std(scores[kind].value for scores in per_instance if scores[kind].applicable)
              for kind in ScoreKind}
    return CorpusDiversity(_scores(numbers, strings), within, per_instance)

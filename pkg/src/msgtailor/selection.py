"""Probability-proportional (roulette-wheel) selection."""

from __future__ import annotations

import random
from bisect import bisect_left
from collections.abc import Sequence
from dataclasses import dataclass
from itertools import accumulate
from typing import Generic, TypeVar

T = TypeVar("T")


class SelectionError(ValueError):
    pass


@dataclass(frozen=True)
class CandidateDistribution(Generic[T]):
    options: tuple[T, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.options) != len(self.weights):
            raise SelectionError("options and weights differ in length")
        if any(not w >= 0 for w in self.weights):
            raise SelectionError(f"weights must be non-negative: {self.weights}")

    @classmethod
    def of(cls, options: Sequence[T], weights: Sequence[float]) -> "CandidateDistribution[T]":
        return cls(tuple(options), tuple(float(w) for w in weights))

    def probabilities(self) -> tuple[float, ...]:
        total = sum(self.weights)
        if total == 0:
            return tuple(1.0 / len(self.weights) for _ in self.weights)
        return tuple(w / total for w in self.weights)


def roulette_select(dist: CandidateDistribution[T], rng: random.Random) -> T:
    """Pick option k with probability ``weights[k] / sum(weights)``.

    A uniform draw ``r`` in ``(0, total]`` lands in the first cumulative
    interval whose upper edge is ``>= r``; zero-width intervals can never be
    hit. An all-zero weight vector falls back to a uniform pick.
    """
    if not dist.options:
        raise SelectionError("cannot select from an empty option list")
    cumulative = list(accumulate(dist.weights))
    total = cumulative[-1]
    if total == 0:
        return dist.options[rng.randrange(len(dist.options))]
    r = total * (1.0 - rng.random())
    return dist.options[bisect_left(cumulative, r)]

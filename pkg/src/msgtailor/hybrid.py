"""Topic scoring by weighted hybridisation of three recommenders.

    score(u, t) = b_dem(u) * demographic(u, t)
                + b_util(u) * utility(u, t)
                + b_content(u) * content(u, t)

``b_dem`` and ``b_util`` grow with the neighbour and rating counts along
``1 - 50 / (x**2 + 50)``; ``b_content`` takes what is left of their mean, so
a cold-start user is scored by declared interests alone.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

from .domain import N_TOPICS, TOPICS, Topic, UserProfile
from .snapshot import CohortSnapshot

WEIGHT_SCALE = 50.0
UNINFORMED = 0.5
LIKERT_TO_UNIT = (0.0, 0.5, 1.0)

AGE_RANGE = 82.0
QUIT_DATE_RANGE_DAYS = 365.0
TEST_SCORE_RANGE = 10.0

Vector = tuple[float, ...]


@dataclass(frozen=True)
class HybridWeights:
    beta_demographic: float
    beta_utility: float
    beta_content: float


@dataclass(frozen=True)
class ComponentScores:
    demographic: Vector
    utility: Vector
    content: Vector


@dataclass(frozen=True)
class TopicDistribution:
    scores: Vector

    def argmax(self) -> Topic:
        return Topic(max(range(N_TOPICS), key=lambda t: (self.scores[t], -t)))

    def probabilities(self) -> Vector:
        total = sum(self.scores)
        if total == 0:
            return (1.0 / N_TOPICS,) * N_TOPICS
        return tuple(s / total for s in self.scores)


def _saturating(x: int) -> float:
    return 1.0 - WEIGHT_SCALE / (x * x + WEIGHT_SCALE)


def beta_demographic(n_neighbors: int) -> float:
    if n_neighbors < 0:
        raise ValueError("n_neighbors must be >= 0")
    return _saturating(n_neighbors)


def beta_utility(n_ratings: int) -> float:
    if n_ratings < 0:
        raise ValueError("n_ratings must be >= 0")
    return _saturating(n_ratings)


def beta_content(bd: float, bu: float) -> float:
    return 1.0 - (bd + bu) / 2.0


def hybrid_weights(n_neighbors: int, n_ratings: int) -> HybridWeights:
    bd = beta_demographic(n_neighbors)
    bu = beta_utility(n_ratings)
    return HybridWeights(bd, bu, beta_content(bd, bu))


# -- similarity ------------------------------------------------------------


def pearson_rating_similarity(ratings_a: Mapping[str, float], ratings_b: Mapping[str, float]) -> float:
    """Pearson correlation over co-rated messages; 0 if fewer than two or flat."""
    common = [m for m in ratings_a if m in ratings_b]
    n = len(common)
    if n < 2:
        return 0.0
    xs = [ratings_a[m] for m in common]
    ys = [ratings_b[m] for m in common]
    mx = sum(xs) / n
    my = sum(ys) / n
    sxy = sxx = syy = 0.0
    for x, y in zip(xs, ys):
        dx, dy = x - mx, y - my
        sxy += dx * dy
        sxx += dx * dx
        syy += dy * dy
    if sxx == 0 or syy == 0:
        return 0.0
    return max(-1.0, min(1.0, sxy / math.sqrt(sxx * syy)))


def _closeness(diff: float, span: float) -> float:
    return 1.0 - min(abs(diff), span) / span


def attribute_similarity(a: UserProfile, b: UserProfile) -> float:
    """Mean of six per-attribute similarities, each in [0, 1].

    Categorical attributes are 1 when equal, 0 otherwise; numeric ones fall
    off linearly with the absolute difference over the attribute's range.
    """
    parts = (
        1.0 if a.gender == b.gender else 0.0,
        1.0 if a.employment_status == b.employment_status else 0.0,
        _closeness(a.age - b.age, AGE_RANGE),
        _closeness((a.quit_date - b.quit_date).days, QUIT_DATE_RANGE_DAYS),
        _closeness(a.fagerstrom - b.fagerstrom, TEST_SCORE_RANGE),
        _closeness(a.richmond - b.richmond, TEST_SCORE_RANGE),
    )
    return sum(parts) / len(parts)


def user_similarity(a: str, b: str, snapshot: CohortSnapshot) -> float:
    pearson = pearson_rating_similarity(snapshot.stats[a].ratings, snapshot.stats[b].ratings)
    attrs = attribute_similarity(snapshot.profiles[a], snapshot.profiles[b])
    return ((pearson + 1.0) / 2.0 + attrs) / 2.0


# -- component recommenders --------------------------------------------------


def explicit_topic_rate(user_id: str, topic: Topic, snapshot: CohortSnapshot) -> float | None:
    return snapshot.stats[user_id].explicit[topic]


def implicit_topic_rate(user_id: str, topic: Topic, snapshot: CohortSnapshot) -> float:
    return snapshot.stats[user_id].implicit[topic]


def blend_explicit_implicit(n_votes: int, explicit: float | None, implicit: float) -> float:
    """``(1 - 1/v) * e + (1/v) * i``; pure implicit rate when there are no votes."""
    if n_votes == 0:
        return implicit
    e = UNINFORMED if explicit is None else explicit
    return (1.0 - 1.0 / n_votes) * e + (1.0 / n_votes) * implicit


def utility_scores(user_id: str, snapshot: CohortSnapshot) -> Vector:
    stats = snapshot.stats[user_id]
    return tuple(
        blend_explicit_implicit(stats.n_ratings, stats.explicit[t], stats.implicit[t]) for t in range(N_TOPICS)
    )


def content_scores(profile: UserProfile) -> Vector:
    """Cosine between the declared-interest vector and each topic's unit vector."""
    mapped = [LIKERT_TO_UNIT[level] for level in profile.interests]
    norm = math.sqrt(sum(x * x for x in mapped))
    if norm == 0:
        return (1.0 / N_TOPICS,) * N_TOPICS
    return tuple(x / norm for x in mapped)


class HybridRecommender:
    """Scores users of one snapshot, memoising pairwise user similarity."""

    def __init__(self, snapshot: CohortSnapshot):
        self.snapshot = snapshot
        self._sim: dict[tuple[str, str], float] = {}

    def similarity(self, a: str, b: str) -> float:
        key = (a, b) if a < b else (b, a)
        value = self._sim.get(key)
        if value is None:
            value = self._sim[key] = user_similarity(key[0], key[1], self.snapshot)
        return value

    def demographic_scores(self, user_id: str) -> Vector:
        num = [0.0] * N_TOPICS
        den = [0.0] * N_TOPICS
        for other in self.snapshot.active:
            if other == user_id:
                continue
            explicit = self.snapshot.stats[other].explicit
            if all(e is None for e in explicit):
                continue
            sim = self.similarity(user_id, other)
            for t in range(N_TOPICS):
                if explicit[t] is not None:
                    num[t] += sim * explicit[t]
                    den[t] += sim
        return tuple(num[t] / den[t] if den[t] > 0 else UNINFORMED for t in range(N_TOPICS))

    def components(self, user_id: str) -> ComponentScores:
        return ComponentScores(
            demographic=self.demographic_scores(user_id),
            utility=utility_scores(user_id, self.snapshot),
            content=content_scores(self.snapshot.profiles[user_id]),
        )

    def weights(self, user_id: str) -> HybridWeights:
        stats = self.snapshot.stats[user_id]
        return hybrid_weights(stats.n_neighbors, stats.n_ratings)

    def scores(self, user_id: str) -> TopicDistribution:
        w = self.weights(user_id)
        c = self.components(user_id)
        return TopicDistribution(
            tuple(
                w.beta_demographic * c.demographic[t] + w.beta_utility * c.utility[t] + w.beta_content * c.content[t]
                for t in range(N_TOPICS)
            )
        )


def demographic_scores(user_id: str, snapshot: CohortSnapshot) -> Vector:
    return HybridRecommender(snapshot).demographic_scores(user_id)


def hybrid_scores(user_id: str, snapshot: CohortSnapshot) -> TopicDistribution:
    return HybridRecommender(snapshot).scores(user_id)


__all__ = [
    "TOPICS",
    "ComponentScores",
    "HybridRecommender",
    "HybridWeights",
    "TopicDistribution",
    "attribute_similarity",
    "beta_content",
    "beta_demographic",
    "beta_utility",
    "blend_explicit_implicit",
    "content_scores",
    "demographic_scores",
    "explicit_topic_rate",
    "hybrid_scores",
    "hybrid_weights",
    "implicit_topic_rate",
    "pearson_rating_similarity",
    "user_similarity",
    "utility_scores",
]

"""Message catalog: five topic pools loaded from JSONL ``{id, topic, body}``."""

from __future__ import annotations

import json
import random
from collections.abc import Callable, Collection, Iterable
from pathlib import Path

from .domain import TOPICS, DomainError, Message, Topic


class CatalogError(DomainError):
    """Misconfigured message catalog (missing file, empty pool, bad row)."""


class Catalog:
    def __init__(self, messages: Iterable[Message]):
        self.messages: dict[str, Message] = {}
        self.pools: dict[Topic, list[Message]] = {t: [] for t in TOPICS}
        for msg in messages:
            if msg.id in self.messages:
                raise CatalogError(f"duplicate message id {msg.id!r}")
            self.messages[msg.id] = msg
            self.pools[msg.topic].append(msg)
        for pool in self.pools.values():
            pool.sort(key=lambda m: m.id)

    def __len__(self) -> int:
        return len(self.messages)

    def __contains__(self, message_id: object) -> bool:
        return message_id in self.messages

    def topic_of(self, message_id: str) -> Topic:
        return self.messages[message_id].topic

    def require_complete(self) -> None:
        empty = [t.slug for t, pool in self.pools.items() if not pool]
        if empty:
            raise CatalogError(f"empty message pools: {', '.join(empty)}")

    @classmethod
    def load(cls, path: str | Path) -> "Catalog":
        try:
            fh = open(path, encoding="utf-8")
        except OSError as exc:
            raise CatalogError(f"{path}: {exc.strerror}") from exc
        messages = []
        with fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                    messages.append(Message(str(row["id"]), Topic.from_slug(row["topic"]), str(row["body"])))
                except (json.JSONDecodeError, KeyError, TypeError, DomainError) as exc:
                    raise CatalogError(f"{path}:{lineno}: {exc}") from exc
        return cls(messages)

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for topic in TOPICS:
                for msg in self.pools[topic]:
                    fh.write(json.dumps({"id": msg.id, "topic": topic.slug, "body": msg.body}) + "\n")


def pick_message(
    pool: Collection[Message],
    delivered: Collection[str],
    rng: random.Random,
    accept: Callable[[Message], bool] | None = None,
) -> Message:
    """Uniformly draw a message the user has not been sent yet.

    Once every acceptable message has been delivered the no-repeat window
    resets and the whole acceptable pool is eligible again. ``accept`` narrows
    the pool (e.g. PPAL templates that do not need activity data); if it
    rejects everything it is ignored.
    """
    if not pool:
        raise CatalogError("empty message pool")
    candidates = sorted(pool, key=lambda m: m.id)
    if accept is not None:
        candidates = [m for m in candidates if accept(m)] or candidates
    fresh = [m for m in candidates if m.id not in delivered]
    return rng.choice(fresh or candidates)


_OPENERS = {
    Topic.GENERAL_MOTIVATION: [
        "Every smoke-free hour counts.",
        "You decided to quit for a reason. Remember it today.",
        "Cravings pass. You stay.",
        "Think of the money you are saving this week.",
        "Your lungs start recovering from day one.",
        "Be proud of how far you have come.",
    ],
    Topic.DIET_TIPS: [
        "Keep a bottle of water at hand to beat cravings.",
        "Swap sugary snacks for a piece of fruit.",
        "Crunchy vegetables keep your hands and mouth busy.",
        "Avoid coffee right after meals if it triggers a craving.",
        "Eat regular meals so hunger does not feel like a craving.",
        "Try a handful of nuts instead of a cigarette break.",
    ],
    Topic.EXERCISE_ACTIVE_LIFE: [
        "A ten minute walk can cut a craving short.",
        "Take the stairs today.",
        "Stretch for five minutes when you wake up.",
        "Get off the bus one stop early.",
        "Plan a bike ride this weekend.",
        "Dance to your favourite song.",
    ],
    Topic.SMOKING_CONSEQUENCES: [
        "Smoking narrows your blood vessels.",
        "Smokers heal more slowly after surgery.",
        "Tobacco smoke damages the lining of your airways.",
        "Smoking raises the risk of gum disease.",
        "Smokers are more likely to develop Reinke's edema.",
        "Smoking dulls your sense of taste and smell.",
    ],
}

_CLOSERS = [
    "Keep going!",
    "You can do it.",
    "One day at a time.",
    "We are with you.",
    "Well done so far.",
]

_PPAL_TEMPLATES = [
    "Hello {name}! Yesterday you were {delta_minutes} min over your average activity time. Keep it up!",
    "{name}, your activity yesterday differed from your average by {delta_minutes} min.",
    "Hi {name}! Activity check: {delta_minutes} min compared with your usual day.",
    "{name}, you moved {delta_minutes} min more than your average yesterday. Great job!",
]

_PPAL_FALLBACK = [
    "Hello {name}! Staying active helps you beat cravings.",
    "{name}, a short walk today is a great way to stay smoke-free.",
    "Moving more is one of the best companions to quitting, {name}.",
]


def generate_catalog(pool_size: int = 150, seed: int = 0) -> Catalog:
    """Build a synthetic catalog with ``pool_size`` messages per topic.

    One in five PPAL messages is a fallback template with no activity data.
    """
    rng = random.Random(seed)
    messages = []
    for topic in TOPICS:
        for k in range(pool_size):
            if topic is Topic.PPAL:
                source = _PPAL_FALLBACK if k % 5 == 4 else _PPAL_TEMPLATES
                body = rng.choice(source)
            else:
                body = f"{rng.choice(_OPENERS[topic])} {rng.choice(_CLOSERS)}"
            messages.append(Message(f"{topic.slug}-{k + 1:03d}", topic, body))
    return Catalog(messages)

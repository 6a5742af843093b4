"""Straight-line recomputation of the hybrid topic scores.

Deliberately shares no scoring code with :mod:`msgtailor.hybrid`: it reads
the raw latest-vote map, interaction counters and profiles off the snapshot
and evaluates every formula inline. Used only to cross-check the engine.
"""

from __future__ import annotations

import math

from ..snapshot import CohortSnapshot

LIKE, NEUTRAL, DISLIKE = "like", "neutral", "dislike"


def _score(vote) -> float:
    value = vote.value
    if value == LIKE:
        return 1.0
    if value == NEUTRAL:
        return 0.5
    if value == DISLIKE:
        return 0.0
    raise ValueError(value)


def oracle_hybrid_scores(u: str, snapshot: CohortSnapshot) -> tuple[float, ...]:
    profiles = snapshot.profiles
    votes = snapshot.votes
    topic_of = snapshot.message_topics

    n_u = 0
    for v in snapshot.active:
        if v != u:
            n_u += 1
    u_votes = votes.get(u, {})
    r_u = len(u_votes)
    b_dem = 1 - 50 / (n_u**2 + 50)
    b_util = 1 - 50 / (r_u**2 + 50)
    b_cont = 1 - (b_dem + b_util) / 2

    def explicit(user: str, t: int):
        scores = [_score(val) for m, val in votes.get(user, {}).items() if int(topic_of[m]) == t]
        if not scores:
            return None
        return sum(scores) / len(scores)

    def pearson(a: str, b: str) -> float:
        ra = votes.get(a, {})
        rb = votes.get(b, {})
        shared = sorted(set(ra) & set(rb))
        if len(shared) < 2:
            return 0.0
        x = [_score(ra[m]) for m in shared]
        y = [_score(rb[m]) for m in shared]
        xbar = sum(x) / len(x)
        ybar = sum(y) / len(y)
        num = sum((xi - xbar) * (yi - ybar) for xi, yi in zip(x, y))
        den_x = math.sqrt(sum((xi - xbar) ** 2 for xi in x))
        den_y = math.sqrt(sum((yi - ybar) ** 2 for yi in y))
        if den_x == 0 or den_y == 0:
            return 0.0
        return num / (den_x * den_y)

    def attributes(a: str, b: str) -> float:
        pa, pb = profiles[a], profiles[b]
        total = 0.0
        total += 1.0 if pa.gender == pb.gender else 0.0
        total += 1.0 if pa.employment_status == pb.employment_status else 0.0
        total += max(0.0, 1 - abs(pa.age - pb.age) / 82)
        total += max(0.0, 1 - abs((pa.quit_date - pb.quit_date).days) / 365)
        total += max(0.0, 1 - abs(pa.fagerstrom - pb.fagerstrom) / 10)
        total += max(0.0, 1 - abs(pa.richmond - pb.richmond) / 10)
        return total / 6

    stats = snapshot.stats[u]
    sections = stats.section_counts
    reads = stats.read_counts
    levels = [{0: 0.0, 1: 0.5, 2: 1.0}[x] for x in profiles[u].interests]
    length = math.sqrt(sum(x * x for x in levels))

    out = []
    for t in range(5):
        num = den = 0.0
        for v in snapshot.active:
            if v == u:
                continue
            e_v = explicit(v, t)
            if e_v is None:
                continue
            sim = 0.5 * ((pearson(u, v) + 1) / 2 + attributes(u, v))
            num += sim * e_v
            den += sim
        demographic = num / den if den > 0 else 0.5

        sec_q = sections[t] / sum(sections) if sum(sections) > 0 else 0.2
        read_q = reads[t] / sum(reads) if sum(reads) > 0 else 0.2
        i_t = 0.5 * (sec_q + read_q)
        e_t = explicit(u, t)
        if r_u == 0:
            utility = i_t
        else:
            utility = (1 - 1 / r_u) * (0.5 if e_t is None else e_t) + (1 / r_u) * i_t

        content = levels[t] / length if length > 0 else 0.2

        out.append(b_dem * demographic + b_util * utility + b_cont * content)
    return tuple(out)

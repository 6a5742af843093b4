"""Nightly message-topic and send-time recommender for a quit-smoking app."""

from .catalog import Catalog, generate_catalog, pick_message
from .config import EngineConfig, load_config
from .domain import (
    DeliveryRecord,
    EventRecord,
    Message,
    TimeWindow,
    Topic,
    UserProfile,
    VoteValue,
    vote_value_to_score,
)
from .eventlog import EventLog
from .hybrid import HybridRecommender, hybrid_scores
from .pipeline import NightlyPlan, eligible_users, record_delivery_outcomes, run_nightly
from .selection import CandidateDistribution, roulette_select
from .snapshot import CohortSnapshot, build_snapshot

__version__ = "0.1.0"

__all__ = [
    "CandidateDistribution",
    "Catalog",
    "CohortSnapshot",
    "DeliveryRecord",
    "EngineConfig",
    "EventLog",
    "EventRecord",
    "HybridRecommender",
    "Message",
    "NightlyPlan",
    "TimeWindow",
    "Topic",
    "UserProfile",
    "VoteValue",
    "build_snapshot",
    "eligible_users",
    "generate_catalog",
    "hybrid_scores",
    "load_config",
    "pick_message",
    "record_delivery_outcomes",
    "roulette_select",
    "run_nightly",
    "vote_value_to_score",
]

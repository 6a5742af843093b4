from .cohort import random_cohort_log
from .oracle import oracle_hybrid_scores
from .simulator import Persona, Scenario, ScenarioError, SimReport, load_scenario, report_to_csv, scenario_from_dict, simulate

__all__ = [
    "Persona",
    "Scenario",
    "ScenarioError",
    "SimReport",
    "load_scenario",
    "oracle_hybrid_scores",
    "random_cohort_log",
    "report_to_csv",
    "scenario_from_dict",
    "simulate",
]

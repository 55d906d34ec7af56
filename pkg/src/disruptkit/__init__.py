"""Detect breaches of the functional and expressive order in scripted
encounters and answer them with culture-configured recovery acts."""

from .advisor import AdvisorAnswers, CompetenceProfile, advise, manageable_disruptions
from .culture import CulturePack, load_builtin_pack, parse_culture_pack, serialize_pack, validate_pack
from .detection import DetectionConfig, ENHANCED, detect
from .execution import execute
from .interaction import DialogueAct, Event, InteractionState, apply_event, initial_state
from .planning import Plan, forecast, plan, preface_if_dispreferred
from .recovery import CommunicativeAct, RecoveryGoal, map_reactive, map_strategy
from .scenario import Scenario, parse_scenario, serialize_scenario
from .session import Session, Transcript, run_session
from .taxonomy import DisruptionInstance, DisruptionKind, RecoveryStatus, Strategy

__version__ = "0.1.0"

__all__ = [
    "AdvisorAnswers",
    "CommunicativeAct",
    "CompetenceProfile",
    "CulturePack",
    "DetectionConfig",
    "DialogueAct",
    "DisruptionInstance",
    "DisruptionKind",
    "ENHANCED",
    "Event",
    "InteractionState",
    "Plan",
    "RecoveryGoal",
    "RecoveryStatus",
    "Scenario",
    "Session",
    "Strategy",
    "Transcript",
    "advise",
    "apply_event",
    "detect",
    "execute",
    "forecast",
    "initial_state",
    "load_builtin_pack",
    "manageable_disruptions",
    "map_reactive",
    "map_strategy",
    "parse_culture_pack",
    "parse_scenario",
    "plan",
    "preface_if_dispreferred",
    "run_session",
    "serialize_pack",
    "serialize_scenario",
    "validate_pack",
]

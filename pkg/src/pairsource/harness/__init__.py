from .scenario import (
    ACCEPTED_CORRECT,
    ACCEPTED_WRONG,
    REJECTED,
    ScenarioConfig,
    ScenarioReport,
    default_adversaries,
    one_malicious_matrix,
    run_scenario,
)
from .server import ServerBehavior, ServerLogic
from .transport import FlakyConnection, RemoteServer, connect, serve

__all__ = [
    "ACCEPTED_CORRECT",
    "ACCEPTED_WRONG",
    "REJECTED",
    "FlakyConnection",
    "RemoteServer",
    "ScenarioConfig",
    "ScenarioReport",
    "ServerBehavior",
    "ServerLogic",
    "connect",
    "default_adversaries",
    "one_malicious_matrix",
    "run_scenario",
    "serve",
]

from .config import RunConfig
from .events import EventKind, EventLog, PhaseId, PipelineEvent, SubscriberLagged
from .runner import ConfigRejected, PipelineRun, RunRegistry, RunStatus
from .server import create_app

__all__ = [
    "ConfigRejected",
    "EventKind",
    "EventLog",
    "PhaseId",
    "PipelineEvent",
    "PipelineRun",
    "RunConfig",
    "RunRegistry",
    "RunStatus",
    "SubscriberLagged",
    "create_app",
]

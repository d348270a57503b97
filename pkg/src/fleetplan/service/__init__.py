from .core import Cluster, JobRecord, MissionControl, ServiceError, StalePlanError
from .store import EventStore

__all__ = [
    "Cluster",
    "EventStore",
    "JobRecord",
    "MissionControl",
    "ServiceError",
    "StalePlanError",
]

"""Request bodies for the HTTP API."""
from __future__ import annotations

from pydantic import BaseModel, Field


class DetectionIn(BaseModel):
    x: float
    y: float
    robot: str = ""
    note: str = ""
    ts: str = ""


class ClusterApproveIn(BaseModel):
    obstacle_type: str = "Obs1"
    location: str | None = None
    secure_duration: str | None = None  # rational, e.g. "900"


class PlanRequestIn(BaseModel):
    variant: str | None = None  # natural | optimized | flag labels
    supersede: bool = False


class ReallocateIn(BaseModel):
    action_id: int = Field(ge=0)
    vehicle: str

"""Artifact manifest models used to make pipeline stages resumable."""

from typing import Dict, List

from pydantic import Field

from .common import Schema, TimestampMixin


class ArtifactRecord(Schema):
    """A produced file and its content hash (path relative to the workdir)."""

    path: str
    sha256: str


class StageRecord(TimestampMixin):
    """Completion record of one pipeline stage."""

    name: str
    seed: int
    fingerprint: str = Field(..., description="Hash of stage config and input hashes")
    outputs: List[ArtifactRecord] = Field(default_factory=list)


class ArtifactManifest(Schema):
    """Every artifact produced in a workdir, grouped by stage."""

    format_version: int = 1
    config_fingerprint: str = ""
    stages: Dict[str, StageRecord] = Field(default_factory=dict)
    environment: Dict[str, str] = Field(
        default_factory=dict,
        description="Library versions and platform notes affecting reproducibility",
    )

"""Evaluation and pipeline report models."""

from typing import Any, Dict, List, Optional

from pydantic import Field, model_validator

from .common import Schema


class EvalReport(Schema):
    """Top-1 evaluation of an object classifier on a labeled test set."""

    method: str = Field(..., description="adapted-johnson, adapted-adain, photo-only, ...")
    top1_accuracy: float = Field(..., ge=0, le=1)
    per_class_accuracy: Dict[str, Optional[float]] = Field(default_factory=dict)
    confusion_matrix: List[List[int]] = Field(
        ..., description="Rows are true classes, columns predictions"
    )
    class_names: List[str]
    sample_count: int = Field(..., ge=1)
    model_fingerprint: str
    config_fingerprint: str

    @model_validator(mode="after")
    def _rows_match_count(self) -> "EvalReport":
        total = sum(sum(row) for row in self.confusion_matrix)
        if total != self.sample_count:
            raise ValueError("confusion matrix does not sum to sample_count")
        return self


class ModalityReport(Schema):
    """Held-out accuracy of the modality head (0.5 means fully confused)."""

    accuracy: float = Field(..., ge=0, le=1)
    real_count: int = Field(..., ge=0)
    synthetic_count: int = Field(..., ge=0)


class PipelineReport(Schema):
    """Final report of a full pipeline run."""

    method: str
    seed: int
    target_pool_size: int
    adapted: EvalReport
    baseline: Optional[EvalReport] = None
    gain: Optional[float] = Field(
        None, description="Adapted minus baseline top-1 accuracy"
    )
    modality: Optional[ModalityReport] = None
    config: Dict[str, Any] = Field(default_factory=dict, description="Config snapshot")

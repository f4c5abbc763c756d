"""
Common model components and shared types for the domain layer.
Provides the base schema, shared enums and timestamp mixins.
"""

from datetime import datetime, timezone
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


# Base Schema with standardized configuration for all models
class Schema(BaseModel):
    """
    Base schema with standardized configuration for all domain models.

    Tensors, arrays and torch modules are allowed as field types; they are
    validated by isinstance checks only.
    """

    model_config = ConfigDict(
        from_attributes=True,
        populate_by_name=True,
        arbitrary_types_allowed=True,
        protected_namespaces=(),
    )


class TimestampMixin(Schema):
    """Mixin for records that track when they were produced."""

    created_at: Optional[datetime] = Field(
        default_factory=lambda: datetime.now(timezone.utc),
        description="Creation timestamp",
    )


class Modality(str, Enum):
    """Training modality of a sample."""

    REAL = "real"
    SYNTHETIC = "synthetic"


class Split(str, Enum):
    """Dataset split of a sample."""

    TRAIN = "train"
    TEST = "test"


class TransferMethod(str, Enum):
    """Style transfer technique used to build the synthetic modality."""

    JOHNSON = "johnson"
    ADAIN = "adain"


class OptimizerName(str, Enum):
    """Optimizers available to the training loops."""

    SGD = "sgd"
    ADAM = "adam"

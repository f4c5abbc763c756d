"""Domain services."""

from .adain_transfer_service import AdainTransferService, adain_transfer_service, channel_stats
from .adapt_service import (
    REAL,
    SYNTHETIC,
    AdaptBatch,
    AdaptLoss,
    AdaptService,
    Prediction,
    adapt_service,
)
from .dataset_service import DatasetService, IngestResult, dataset_service
from .feature_service import FeatureService, feature_service
from .johnson_transfer_service import JohnsonTransferService, johnson_transfer_service
from .pipeline_service import (
    PipelineContext,
    PipelineResult,
    PipelineService,
    load_config_section,
    load_pipeline_config,
    pipeline_service,
)
from .style_selection_service import StyleSelectionService, style_selection_service
from .synthesis_service import SynthesisService, synthesis_service
from .toy_domain_service import ToyDomainService, toy_domain_service

__all__ = [
    "REAL",
    "SYNTHETIC",
    "AdainTransferService",
    "AdaptBatch",
    "AdaptLoss",
    "AdaptService",
    "DatasetService",
    "FeatureService",
    "IngestResult",
    "JohnsonTransferService",
    "PipelineContext",
    "PipelineResult",
    "PipelineService",
    "Prediction",
    "StyleSelectionService",
    "SynthesisService",
    "ToyDomainService",
    "adain_transfer_service",
    "adapt_service",
    "channel_stats",
    "dataset_service",
    "feature_service",
    "johnson_transfer_service",
    "load_config_section",
    "load_pipeline_config",
    "pipeline_service",
    "style_selection_service",
    "synthesis_service",
    "toy_domain_service",
]

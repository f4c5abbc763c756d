"""Domain models."""

from .artifacts import ArtifactManifest, ArtifactRecord, StageRecord
from .common import Modality, OptimizerName, Schema, Split, TransferMethod
from .dataset import ClassVocabulary, LabeledDataset, Sample, ToyDomains, UnlabeledPool
from .features import FeatureStack, GramMatrix
from .pipeline import PathsConfig, PipelineConfig, RenderStyle, ToyDomainSpec
from .report import EvalReport, ModalityReport, PipelineReport
from .style import PcaProjection, StyleClusters, StyleRepresentative, StyleRepresentatives
from .trained import AdaptModel, EncoderDecoder, TransformNetwork
from .training import (
    AdaptConfig,
    AdaptLogRecord,
    DecoderTrainConfig,
    EncoderTrainConfig,
    OptimizerSettings,
    ReconstructionRecord,
    SelectionConfig,
    SynthesisConfig,
    TransferLossRecord,
    TransferTrainConfig,
)

__all__ = [
    "AdaptConfig",
    "AdaptModel",
    "AdaptLogRecord",
    "ArtifactManifest",
    "ArtifactRecord",
    "ClassVocabulary",
    "DecoderTrainConfig",
    "EncoderDecoder",
    "EncoderTrainConfig",
    "EvalReport",
    "FeatureStack",
    "GramMatrix",
    "LabeledDataset",
    "Modality",
    "ModalityReport",
    "OptimizerName",
    "OptimizerSettings",
    "PathsConfig",
    "PcaProjection",
    "PipelineConfig",
    "PipelineReport",
    "ReconstructionRecord",
    "RenderStyle",
    "Sample",
    "Schema",
    "SelectionConfig",
    "Split",
    "StageRecord",
    "StyleClusters",
    "StyleRepresentative",
    "StyleRepresentatives",
    "SynthesisConfig",
    "ToyDomainSpec",
    "ToyDomains",
    "TransferLossRecord",
    "TransferMethod",
    "TransferTrainConfig",
    "TransformNetwork",
    "UnlabeledPool",
]

"""End-to-end orchestration: data → encoder → styles → transfer → synthesis → adapt → evaluate."""

import platform
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Any, Dict, List, NamedTuple, Optional, Type, TypeVar, Union

import torch
from pydantic import BaseModel, ValidationError

from styleadapt.core.exceptions import ConfigurationError, ContractViolationError
from styleadapt.core.logging import get_logger
from styleadapt.core.reports import ReportRenderer
from styleadapt.core.stages import PipelineStage, StageRunner
from styleadapt.core.utils import derive_stage_seed, fingerprint
from styleadapt.domain.models import (
    AdaptConfig,
    AdaptModel,
    ArtifactManifest,
    EncoderDecoder,
    EvalReport,
    LabeledDataset,
    Modality,
    ModalityReport,
    PipelineConfig,
    PipelineReport,
    Split,
    StyleRepresentatives,
    TransferMethod,
    TransformNetwork,
    UnlabeledPool,
)
from styleadapt.domain.networks import PerceptualEncoder
from styleadapt.domain.services.adain_transfer_service import (
    AdainTransferService,
    adain_transfer_service,
)
from styleadapt.domain.services.adapt_service import AdaptService, adapt_service
from styleadapt.domain.services.dataset_service import DatasetService, dataset_service
from styleadapt.domain.services.feature_service import FeatureService, feature_service
from styleadapt.domain.services.johnson_transfer_service import (
    JohnsonTransferService,
    johnson_transfer_service,
)
from styleadapt.domain.services.style_selection_service import (
    StyleSelectionService,
    style_selection_service,
)
from styleadapt.domain.services.synthesis_service import (
    MANIFEST_NAME,
    SynthesisService,
    synthesis_service,
)
from styleadapt.domain.services.toy_domain_service import (
    ToyDomainService,
    toy_domain_service,
)
from styleadapt.infrastructure.storage import (
    DocumentRepository,
    ImageRepository,
    TableRepository,
    document_repository,
    image_repository,
    table_repository,
)

logger = get_logger(__name__)

MANIFEST_FILE = "manifest.json"
TRACKED_PACKAGES = ("torch", "numpy", "scikit-learn", "pandas", "pillow", "pydantic")

SchemaT = TypeVar("SchemaT", bound=BaseModel)


def load_pipeline_config(path: Union[str, Path]) -> PipelineConfig:
    """
    Read a TOML run configuration.

    Raises:
        ConfigurationError: If the file is missing, is not valid TOML or
            fails validation
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}")
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"Invalid TOML in {path}: {e}") from e
    try:
        return PipelineConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid pipeline config {path}",
            details={"errors": e.errors(include_url=False)},
        ) from e


def load_config_section(
    path: Optional[Union[str, Path]], section: str, model_class: Type[SchemaT], **overrides: Any
) -> SchemaT:
    """
    Validate one table of a TOML run config, with keyword overrides.

    A missing path or table yields the model defaults. Overrides that are
    ``None`` are ignored.

    Raises:
        ConfigurationError: If the file or the merged values are invalid
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            data = dict(tomllib.loads(path.read_text(encoding="utf-8")).get(section, {}))
        except tomllib.TOMLDecodeError as e:
            raise ConfigurationError(f"Invalid TOML in {path}: {e}") from e
    data.update({key: value for key, value in overrides.items() if value is not None})
    try:
        return model_class.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(
            f"Invalid [{section}] settings",
            details={"errors": e.errors(include_url=False)},
        ) from e


def environment_snapshot() -> Dict[str, str]:
    """Library versions and platform facts that affect reproducibility."""
    info = {"python": platform.python_version(), "platform": platform.platform()}
    for package in TRACKED_PACKAGES:
        try:
            info[package] = version(package)
        except PackageNotFoundError:
            info[package] = "missing"
    info["torch_threads"] = str(torch.get_num_threads())
    info["note"] = "results are bitwise reproducible only for identical versions and thread counts"
    return info


@dataclass
class PipelineContext:
    """Mutable state shared by the pipeline stages."""

    config: PipelineConfig
    workdir: Path
    source: Optional[LabeledDataset] = None
    target_pool: Optional[UnlabeledPool] = None
    target_test: Optional[LabeledDataset] = None
    encoder: Optional[PerceptualEncoder] = None
    representatives: Optional[StyleRepresentatives] = None
    networks: List[TransformNetwork] = field(default_factory=list)
    encoder_decoder: Optional[EncoderDecoder] = None
    synthetic: Optional[LabeledDataset] = None
    adapted: Optional[AdaptModel] = None
    baseline: Optional[AdaptModel] = None
    report: Optional[PipelineReport] = None

    def stage_seed(self, stage: str) -> int:
        return derive_stage_seed(self.config.seed, stage)

    def path(self, *parts: str) -> Path:
        return self.workdir.joinpath(*parts)


class PipelineResult(NamedTuple):
    report: PipelineReport
    manifest: ArtifactManifest
    executed: List[str]
    skipped: List[str]


class PipelineService:
    """Builds the stage list for a config and runs it in a workdir."""

    def __init__(
        self,
        datasets: Optional[DatasetService] = None,
        toy: Optional[ToyDomainService] = None,
        features: Optional[FeatureService] = None,
        selection: Optional[StyleSelectionService] = None,
        johnson: Optional[JohnsonTransferService] = None,
        adain: Optional[AdainTransferService] = None,
        synthesis: Optional[SynthesisService] = None,
        adapt: Optional[AdaptService] = None,
        images: Optional[ImageRepository] = None,
        tables: Optional[TableRepository] = None,
        documents: Optional[DocumentRepository] = None,
    ) -> None:
        self.datasets = datasets or dataset_service
        self.toy = toy or toy_domain_service
        self.features = features or feature_service
        self.selection = selection or style_selection_service
        self.johnson = johnson or johnson_transfer_service
        self.adain = adain or adain_transfer_service
        self.synthesis = synthesis or synthesis_service
        self.adapt = adapt or adapt_service
        self.images = images or image_repository
        self.tables = tables or table_repository
        self.documents = documents or document_repository

    def build_runner(self, context: PipelineContext, manifest: ArtifactManifest) -> StageRunner:
        """Register the stages the config calls for, in execution order."""
        runner: StageRunner[PipelineContext] = StageRunner(context.workdir, manifest)
        runner.register_stage(DataStage(self))
        runner.register_stage(EncoderStage(self))
        if context.config.method == TransferMethod.JOHNSON:
            runner.register_stage(StyleStage(self))
            runner.register_stage(JohnsonTransferStage(self))
        else:
            runner.register_stage(DecoderStage(self))
        runner.register_stage(SynthesisStage(self))
        runner.register_stage(AdaptStage(self))
        if context.config.run_baseline:
            runner.register_stage(BaselineStage(self))
        runner.register_stage(EvaluateStage(self))
        return runner

    def run_pipeline(self, config: PipelineConfig) -> PipelineResult:
        """
        Run (or resume) the full method in ``config.paths.workdir``.

        Completed stages whose outputs still hash as recorded are skipped and
        their results reloaded. The artifact manifest is rewritten after
        every stage.

        Returns:
            PipelineResult with the final report and the artifact manifest

        Raises:
            StageFailedError: Naming the stage that failed; artifacts of the
                earlier stages are kept
        """
        workdir = Path(config.paths.workdir)
        workdir.mkdir(parents=True, exist_ok=True)
        manifest_path = workdir / MANIFEST_FILE
        if manifest_path.is_file():
            manifest = self.documents.load(manifest_path, ArtifactManifest)
        else:
            manifest = ArtifactManifest()
        manifest.config_fingerprint = fingerprint(config)
        manifest.environment = environment_snapshot()

        context = PipelineContext(config=config, workdir=workdir)
        runner = self.build_runner(context, manifest)
        logger.info(
            "Pipeline starting",
            extra={
                "method": config.method.value,
                "seed": config.seed,
                "workdir": str(workdir),
                "stages": runner.stage_names,
            },
        )
        runner.run_all(context, on_record=lambda m: self.documents.save(m, manifest_path))
        self.documents.save(manifest, manifest_path)

        logger.info(
            "Pipeline finished",
            extra={
                "executed": runner.executed,
                "skipped": runner.skipped,
                "top1": context.report.adapted.top1_accuracy,
            },
        )
        return PipelineResult(context.report, manifest, runner.executed, runner.skipped)

    def baseline_photo_only(
        self, source: LabeledDataset, target_test: LabeledDataset, config: AdaptConfig
    ) -> EvalReport:
        """Train the same classifier on the source train split alone and evaluate it."""
        model, _ = self.adapt.train_photo_only(source, config)
        return self.adapt.evaluate(model, target_test, method="photo-only")

    def load_data(self, context: PipelineContext) -> None:
        """Ingest (or generate) source, target pool and target test."""
        config = context.config
        data_seed = context.stage_seed("data")
        if config.toy is not None:
            domains = self.toy.generate_toy_domains(config.toy, data_seed, context.path("data"))
            source, pool, test = domains.source, domains.target_pool, domains.target_test
        else:
            paths = config.paths
            source = self.datasets.ingest_dataset(paths.source_manifest or paths.source_dir)
            pool = self.datasets.ingest_target_pool(paths.target_dir)
            test = self.datasets.ingest_dataset(paths.target_test_manifest, source.class_names)
        context.source = source
        context.target_pool = self.datasets.limit_pool(pool, config.target_pool_limit, data_seed)
        context.target_test = test
        logger.info(
            "Pipeline data ready",
            extra={
                "source": len(source),
                "target_pool": len(context.target_pool),
                "target_test": len(test),
            },
        )

    def modality_confusion(self, context: PipelineContext) -> Optional[ModalityReport]:
        """Modality head accuracy on held-out real and synthetic source test images."""
        real = context.source.subset(split=Split.TEST)
        synthetic = context.synthetic.subset(split=Split.TEST, modality=Modality.SYNTHETIC)
        if len(real) == 0 or len(synthetic) == 0:
            logger.warning("No held-out images for the modality confusion check")
            return None
        real_x = self.images.load_batch(real.paths())
        synth_x = self.images.load_batch(synthetic.paths(), size=tuple(real_x.shape[-2:]))
        return self.adapt.evaluate_modality(context.adapted, real_x, synth_x)


class PipelineServiceStage(PipelineStage[PipelineContext]):
    """Stage with access to the pipeline's services."""

    seed_key: str = ""

    def __init__(self, service: PipelineService) -> None:
        self.service = service

    def seed(self, context: PipelineContext) -> int:
        return context.stage_seed(self.seed_key or self.name)


class DataStage(PipelineServiceStage):
    name = "data"

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        config = context.config
        return {
            "toy": config.toy.model_dump(mode="json") if config.toy else None,
            "paths": config.paths.model_dump(exclude={"workdir"}),
            "target_pool_limit": config.target_pool_limit,
        }

    def run(self, context: PipelineContext) -> List[Path]:
        self.service.load_data(context)
        tables, documents = self.service.tables, self.service.documents
        source = tables.save_dataset(context.source, context.path("data", "source.csv"))
        test = tables.save_dataset(context.target_test, context.path("data", "target_test.csv"))
        return [
            source,
            tables.vocabulary_path(source),
            test,
            documents.save(context.target_pool, context.path("data", "target_pool.json")),
        ]

    def load(self, context: PipelineContext) -> None:
        tables = self.service.tables
        context.source = tables.load_dataset(context.path("data", "source.csv"))
        context.target_test = tables.load_dataset(
            context.path("data", "target_test.csv"), context.source.class_names
        )
        context.target_pool = self.service.documents.load(
            context.path("data", "target_pool.json"), UnlabeledPool
        )


class EncoderStage(PipelineServiceStage):
    name = "encoder"
    depends_on = ("data",)

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        return context.config.encoder.model_dump(mode="json")

    def run(self, context: PipelineContext) -> List[Path]:
        seed = self.seed(context)
        features = self.service.features
        context.encoder = features.train_perceptual_encoder(
            context.source, context.config.encoder, seed
        )
        return [features.save_encoder(context.encoder, context.path("encoder", "encoder.ckpt"), seed)]

    def load(self, context: PipelineContext) -> None:
        context.encoder = self.service.features.load_encoder(context.path("encoder", "encoder.ckpt"))


class StyleStage(PipelineServiceStage):
    name = "styles"
    depends_on = ("data", "encoder")

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        return {"k": context.config.k, "selection": context.config.selection.model_dump(mode="json")}

    def run(self, context: PipelineContext) -> List[Path]:
        pool = context.target_pool
        logger.info("Johnson path consuming target pool", extra={"pool_size": len(pool)})
        pool_images = self.service.images.load_batch(pool.paths)
        if pool_images.shape[0] != len(pool):
            raise ContractViolationError("target pool images differ from the pool listing")

        representatives = self.service.selection.select_styles(
            pool_images,
            pool.paths,
            context.encoder,
            context.config.k,
            self.seed(context),
            context.config.selection,
        )
        if representatives.pool_size != len(pool):
            raise ContractViolationError(
                "style selection consumed a different number of target images",
                details={"pool_size": len(pool), "consumed": representatives.pool_size},
            )
        context.representatives = representatives
        return [
            self.service.documents.save(
                representatives, context.path("styles", "representatives.json")
            )
        ]

    def load(self, context: PipelineContext) -> None:
        context.representatives = self.service.documents.load(
            context.path("styles", "representatives.json"), StyleRepresentatives
        )


class JohnsonTransferStage(PipelineServiceStage):
    name = "transfer"
    depends_on = ("data", "encoder", "styles")

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        return {"method": "johnson", "transfer": context.config.transfer.model_dump(mode="json")}

    @staticmethod
    def network_path(context: PipelineContext, j: int) -> Path:
        return context.path("transfer", f"net_{j:02d}.ckpt")

    def run(self, context: PipelineContext) -> List[Path]:
        images = self.service.images
        source_images = images.load_batch(context.source.subset(split=Split.TRAIN).paths())
        size = tuple(source_images.shape[-2:])
        seed = self.seed(context)

        outputs: List[Path] = []
        context.networks = []
        for j, style_id in enumerate(context.representatives.image_ids):
            config = context.config.transfer.model_copy(update={"seed": seed + j})
            network = self.service.johnson.train_transfer_network(
                source_images,
                images.load(style_id, size=size),
                context.encoder,
                config,
                style_image_id=style_id,
            )
            context.networks.append(network)
            outputs.append(self.service.johnson.save_network(network, self.network_path(context, j)))
        return outputs

    def load(self, context: PipelineContext) -> None:
        context.networks = self.service.synthesis.load_networks(
            [self.network_path(context, j) for j in range(len(context.representatives.entries))]
        )


class DecoderStage(PipelineServiceStage):
    name = "transfer"
    depends_on = ("data", "encoder")

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        return {"method": "adain", "decoder": context.config.decoder.model_dump(mode="json")}

    def run(self, context: PipelineContext) -> List[Path]:
        seed = self.seed(context)
        source_images = self.service.images.load_batch(
            context.source.subset(split=Split.TRAIN).paths()
        )
        context.encoder_decoder = self.service.adain.train_decoder(
            source_images, context.encoder, context.config.decoder, seed
        )
        return [
            self.service.adain.save_model(
                context.encoder_decoder, context.path("transfer", "decoder.ckpt"), seed
            )
        ]

    def load(self, context: PipelineContext) -> None:
        context.encoder_decoder = self.service.adain.load_model(
            context.path("transfer", "decoder.ckpt")
        )


class SynthesisStage(PipelineServiceStage):
    name = "synthesis"
    depends_on = ("data", "transfer")

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        config = context.config
        snapshot = {"method": config.method.value, "synthesis": config.synthesis.model_dump()}
        if config.method == TransferMethod.ADAIN:
            snapshot["styles_per_image"] = config.styles_per_image
        return snapshot

    def run(self, context: PipelineContext) -> List[Path]:
        config = context.config
        out_dir = context.path("synthetic")
        synthesis = self.service.synthesis
        if config.method == TransferMethod.JOHNSON:
            context.synthetic = synthesis.build_synthetic_johnson(
                context.source, context.networks, out_dir, batch_size=config.synthesis.batch_size
            )
        else:
            context.synthetic = synthesis.build_synthetic_adain(
                context.source,
                context.target_pool,
                context.encoder_decoder,
                out_dir,
                styles_per_image=config.styles_per_image,
                seed=self.seed(context),
            )
        return [Path(p) for p in context.synthetic.paths()] + [out_dir / MANIFEST_NAME]

    def load(self, context: PipelineContext) -> None:
        context.synthetic = self.service.tables.load_dataset(
            context.path("synthetic", MANIFEST_NAME), context.source.class_names
        )


class AdaptStage(PipelineServiceStage):
    name = "adapt"
    depends_on = ("data", "synthesis")

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        return {
            "method": context.config.method.value,
            "adapt": context.config.adapt.model_dump(mode="json", exclude={"seed"}),
        }

    def run(self, context: PipelineContext) -> List[Path]:
        config = context.config.adapt.model_copy(update={"seed": self.seed(context)})
        model, log = self.service.adapt.train_adapt(context.source, context.synthetic, config)
        model.method = f"adapted-{context.config.method.value}"
        context.adapted = model
        return [
            self.service.adapt.save_model(model, context.path("models", "adapt.ckpt")),
            self.service.tables.save_records(log, context.path("reports", "adapt_log.csv")),
        ]

    def load(self, context: PipelineContext) -> None:
        context.adapted = self.service.adapt.load_model(context.path("models", "adapt.ckpt"))


class BaselineStage(PipelineServiceStage):
    name = "baseline"
    depends_on = ("data",)

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        # photo-only training ignores the modality branch settings
        return context.config.adapt.model_dump(
            mode="json",
            exclude={"seed", "alpha", "modality_head_weight", "use_modality_head"},
        )

    def run(self, context: PipelineContext) -> List[Path]:
        config = context.config.adapt.model_copy(update={"seed": self.seed(context)})
        model, log = self.service.adapt.train_photo_only(context.source, config)
        context.baseline = model
        return [
            self.service.adapt.save_model(model, context.path("models", "baseline.ckpt")),
            self.service.tables.save_records(log, context.path("reports", "baseline_log.csv")),
        ]

    def load(self, context: PipelineContext) -> None:
        context.baseline = self.service.adapt.load_model(context.path("models", "baseline.ckpt"))


class EvaluateStage(PipelineServiceStage):
    name = "evaluate"
    depends_on = ("data", "adapt", "baseline")

    def config_snapshot(self, context: PipelineContext) -> Dict[str, Any]:
        return {"method": context.config.method.value, "run_baseline": context.config.run_baseline}

    def run(self, context: PipelineContext) -> List[Path]:
        adapt = self.service.adapt
        adapted = adapt.evaluate(context.adapted, context.target_test)
        baseline = (
            adapt.evaluate(context.baseline, context.target_test, method="photo-only")
            if context.baseline is not None
            else None
        )
        modality = (
            self.service.modality_confusion(context) if context.adapted.config.use_modality_head else None
        )
        context.report = PipelineReport(
            method=context.config.method.value,
            seed=context.config.seed,
            target_pool_size=len(context.target_pool),
            adapted=adapted,
            baseline=baseline,
            gain=adapted.top1_accuracy - baseline.top1_accuracy if baseline else None,
            modality=modality,
            config=context.config.model_dump(mode="json"),
        )
        text_path = context.path("reports", "report.txt")
        text_path.parent.mkdir(parents=True, exist_ok=True)
        text_path.write_text(ReportRenderer.pipeline_table(context.report) + "\n", encoding="utf-8")
        return [
            self.service.documents.save(context.report, context.path("reports", "report.json")),
            text_path,
        ]

    def load(self, context: PipelineContext) -> None:
        context.report = self.service.documents.load(
            context.path("reports", "report.json"), PipelineReport
        )


# Global pipeline service instance
pipeline_service = PipelineService()

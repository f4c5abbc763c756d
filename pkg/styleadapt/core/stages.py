"""Resumable pipeline stage runner."""

from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Callable, Dict, Generic, List, Optional, Sequence, TypeVar

from styleadapt.core.exceptions import StageFailedError
from styleadapt.core.logging import get_logger
from styleadapt.core.utils import fingerprint, sha256_file
from styleadapt.domain.models import ArtifactManifest, ArtifactRecord, StageRecord

logger = get_logger(__name__)

ContextT = TypeVar("ContextT")


class PipelineStage(ABC, Generic[ContextT]):
    """One resumable unit of work."""

    depends_on: Sequence[str] = ()

    @property
    @abstractmethod
    def name(self) -> str:
        """Stage name used in the manifest and in logs."""
        pass

    @abstractmethod
    def seed(self, context: ContextT) -> int:
        """Seed the stage draws from."""
        pass

    @abstractmethod
    def config_snapshot(self, context: ContextT) -> Dict[str, Any]:
        """Every setting that influences the stage's outputs."""
        pass

    @abstractmethod
    def run(self, context: ContextT) -> List[Path]:
        """Execute the stage, update the context and return the files written."""
        pass

    @abstractmethod
    def load(self, context: ContextT) -> None:
        """Restore the stage's results into the context from its artifacts."""
        pass


class StageRunner(Generic[ContextT]):
    """Runs registered stages in order, skipping those already complete.

    A stage is complete when the manifest holds a record with the same
    fingerprint and every recorded output still exists with its recorded
    hash. The fingerprint covers the stage config, its seed and the output
    hashes of the stages it depends on, so a rerun upstream invalidates
    everything downstream.
    """

    def __init__(self, workdir: Path, manifest: ArtifactManifest) -> None:
        self.workdir = Path(workdir)
        self.manifest = manifest
        self._stages: List[PipelineStage[ContextT]] = []
        self.executed: List[str] = []
        self.skipped: List[str] = []

    def register_stage(self, stage: PipelineStage[ContextT]) -> None:
        """Register a stage; stages run in registration order."""
        self._stages.append(stage)

    @property
    def stage_names(self) -> List[str]:
        return [stage.name for stage in self._stages]

    def stage_fingerprint(self, stage: PipelineStage[ContextT], context: ContextT) -> str:
        upstream = {}
        for dependency in stage.depends_on:
            record = self.manifest.stages.get(dependency)
            upstream[dependency] = (
                [o.sha256 for o in record.outputs] if record is not None else None
            )
        return fingerprint(
            {
                "stage": stage.name,
                "seed": stage.seed(context),
                "config": stage.config_snapshot(context),
                "upstream": upstream,
            }
        )

    def is_complete(self, stage_name: str, stage_fingerprint: str) -> bool:
        record: Optional[StageRecord] = self.manifest.stages.get(stage_name)
        if record is None or record.fingerprint != stage_fingerprint:
            return False
        for output in record.outputs:
            path = self.workdir / output.path
            if not path.is_file() or sha256_file(path) != output.sha256:
                return False
        return True

    def run_all(
        self,
        context: ContextT,
        on_record: Optional[Callable[[ArtifactManifest], None]] = None,
    ) -> None:
        """Run every registered stage.

        Args:
            context: Shared mutable state passed to each stage
            on_record: Called after each completed stage (used to persist the
                manifest so partial progress survives a later failure)

        Raises:
            StageFailedError: Naming the failing stage; artifacts of the
                stages before it are kept
        """
        logger.info("Starting pipeline stages: %s", ", ".join(self.stage_names))

        for stage in self._stages:
            stage_fp = self.stage_fingerprint(stage, context)
            try:
                if self.is_complete(stage.name, stage_fp):
                    logger.info(f"Stage {stage.name} up to date, skipping")
                    stage.load(context)
                    self.skipped.append(stage.name)
                    continue

                logger.info(f"Running stage {stage.name}...", extra={"seed": stage.seed(context)})
                outputs = stage.run(context)
            except StageFailedError:
                raise
            except Exception as e:
                logger.error(f"Stage {stage.name} failed: {e}")
                raise StageFailedError(stage.name, e) from e

            self.manifest.stages[stage.name] = StageRecord(
                name=stage.name,
                seed=stage.seed(context),
                fingerprint=stage_fp,
                outputs=[self._record(path) for path in outputs],
            )
            self.executed.append(stage.name)
            if on_record is not None:
                on_record(self.manifest)
            logger.info(f"Stage {stage.name} completed", extra={"outputs": len(outputs)})

        logger.info("All pipeline stages completed")

    def _record(self, path: Path) -> ArtifactRecord:
        path = Path(path)
        try:
            relative = path.resolve().relative_to(self.workdir.resolve())
        except ValueError:
            relative = path
        return ArtifactRecord(path=relative.as_posix(), sha256=sha256_file(path))

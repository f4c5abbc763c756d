"""Exceptions, seeding, hashing, the stage runner and report rendering."""

import logging
from pathlib import Path
from typing import Any, Dict, List

import pytest
import torch

from styleadapt.core.exceptions import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_DIVERGENCE,
    EXIT_UNEXPECTED,
    ArtifactIOError,
    ConfigurationError,
    DataError,
    StageFailedError,
    TrainingDivergenceError,
)
from styleadapt.core.logging import FieldsFormatter, record_fields
from styleadapt.core.reports import ReportRenderer
from styleadapt.core.stages import PipelineStage, StageRunner
from styleadapt.core.utils import (
    derive_stage_seed,
    fingerprint,
    seed_everything,
    sha256_file,
    state_dict_fingerprint,
)
from styleadapt.domain.models import (
    AdaptConfig,
    ArtifactManifest,
    EvalReport,
    StageRecord,
    StyleRepresentatives,
)
from styleadapt.infrastructure.storage import document_repository


class TestExitCodes:
    def test_codes_follow_error_family(self):
        assert ConfigurationError("x").exit_code == EXIT_CONFIG == 2
        assert DataError("x").exit_code == EXIT_DATA == 3
        assert TrainingDivergenceError("x", iteration=7).exit_code == EXIT_DIVERGENCE == 4

    def test_divergence_carries_iteration(self):
        error = TrainingDivergenceError("nan", iteration=12)
        assert error.iteration == 12
        assert error.details["iteration"] == 12

    def test_stage_failure_inherits_cause_code(self):
        assert StageFailedError("adapt", DataError("bad")).exit_code == EXIT_DATA
        assert StageFailedError("adapt", RuntimeError("boom")).exit_code == EXIT_UNEXPECTED
        assert "adapt" in StageFailedError("adapt", RuntimeError("boom")).message


class TestSeeding:
    def test_stage_seeds_are_distinct_except_baseline(self):
        seeds = {stage: derive_stage_seed(5, stage) for stage in ("data", "encoder", "styles", "adapt")}
        assert len(set(seeds.values())) == 4
        assert derive_stage_seed(5, "baseline") == derive_stage_seed(5, "adapt")

    def test_seed_everything_repeats_draws(self):
        seed_everything(11)
        first = torch.rand(4)
        seed_everything(11)
        assert torch.equal(first, torch.rand(4))


class TestHashing:
    def test_fingerprint_ignores_key_order(self):
        assert fingerprint({"a": 1, "b": 2}) == fingerprint({"b": 2, "a": 1})

    def test_fingerprint_of_model_matches_its_dump(self):
        config = AdaptConfig(beta=2.0)
        assert fingerprint(config) == fingerprint(config.model_dump(mode="json"))

    def test_state_dict_fingerprint_sees_values(self):
        state = {"w": torch.zeros(3)}
        changed = {"w": torch.tensor([0.0, 0.0, 1e-6])}
        assert state_dict_fingerprint(state) != state_dict_fingerprint(changed)

    def test_file_hash(self, tmp_path):
        path = tmp_path / "a.txt"
        path.write_bytes(b"abc")
        assert sha256_file(path) == (
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        )


class CountingStage(PipelineStage[Dict[str, Any]]):
    def __init__(self, name: str, depends_on=(), fail: bool = False) -> None:
        self._name = name
        self.depends_on = depends_on
        self.fail = fail
        self.runs = 0
        self.loads = 0

    @property
    def name(self) -> str:
        return self._name

    def seed(self, context) -> int:
        return context["seed"]

    def config_snapshot(self, context) -> Dict[str, Any]:
        return {"value": context["value"]}

    def run(self, context) -> List[Path]:
        if self.fail:
            raise DataError("broken input")
        self.runs += 1
        path = context["workdir"] / f"{self.name}.txt"
        path.write_text(f"{self.name}:{context['value']}")
        return [path]

    def load(self, context) -> None:
        self.loads += 1


class TestStageRunner:
    def _runner(self, workdir, manifest, stages):
        runner = StageRunner(workdir, manifest)
        for stage in stages:
            runner.register_stage(stage)
        return runner

    def test_rerun_skips_completed_stages(self, tmp_path):
        context = {"workdir": tmp_path, "seed": 1, "value": "a"}
        manifest = ArtifactManifest()
        first, second = CountingStage("first"), CountingStage("second", ("first",))
        self._runner(tmp_path, manifest, [first, second]).run_all(context)

        runner = self._runner(tmp_path, manifest, [first, second])
        runner.run_all(context)
        assert runner.skipped == ["first", "second"]
        assert (first.runs, first.loads) == (1, 1)
        assert manifest.stages["second"].outputs[0].path == "second.txt"

    def test_deleted_output_reruns_only_that_stage(self, tmp_path):
        context = {"workdir": tmp_path, "seed": 1, "value": "a"}
        manifest = ArtifactManifest()
        first, second = CountingStage("first"), CountingStage("second", ("first",))
        self._runner(tmp_path, manifest, [first, second]).run_all(context)

        (tmp_path / "second.txt").unlink()
        runner = self._runner(tmp_path, manifest, [first, second])
        runner.run_all(context)
        assert runner.executed == ["second"]
        assert runner.skipped == ["first"]

    def test_config_change_invalidates_downstream(self, tmp_path):
        manifest = ArtifactManifest()
        first, second = CountingStage("first"), CountingStage("second", ("first",))
        context = {"workdir": tmp_path, "seed": 1, "value": "a"}
        self._runner(tmp_path, manifest, [first, second]).run_all(context)

        context["value"] = "b"
        runner = self._runner(tmp_path, manifest, [first, second])
        runner.run_all(context)
        assert runner.executed == ["first", "second"]

    def test_failure_names_stage_and_keeps_earlier_records(self, tmp_path):
        manifest = ArtifactManifest()
        recorded = []
        runner = self._runner(
            tmp_path, manifest, [CountingStage("first"), CountingStage("broken", fail=True)]
        )
        with pytest.raises(StageFailedError) as excinfo:
            runner.run_all(
                {"workdir": tmp_path, "seed": 0, "value": "a"},
                on_record=lambda m: recorded.append(sorted(m.stages)),
            )
        assert excinfo.value.stage == "broken"
        assert excinfo.value.exit_code == EXIT_DATA
        assert recorded == [["first"]]
        assert (tmp_path / "first.txt").is_file()


class TestReportRenderer:
    def _report(self) -> EvalReport:
        return EvalReport(
            method="photo-only",
            top1_accuracy=0.75,
            per_class_accuracy={"circle": 1.0, "square": 0.5, "star": None},
            confusion_matrix=[[2, 0, 0], [1, 1, 0], [0, 0, 0]],
            class_names=["circle", "square", "star"],
            sample_count=4,
            model_fingerprint="m",
            config_fingerprint="c",
        )

    def test_eval_table_lists_classes_and_accuracy(self):
        table = ReportRenderer.eval_table(self._report())
        assert "top-1 accuracy: 0.7500 (4 samples)" in table
        assert "n/a" in table
        for name in ("circle", "square", "star"):
            assert name in table

    def test_confusion_matrix_must_sum_to_count(self):
        data = self._report().model_dump()
        data["sample_count"] = 5
        with pytest.raises(ValueError):
            EvalReport.model_validate(data)


class TestLogFields:
    def make_record(self, **extra: Any) -> logging.LogRecord:
        record = logging.makeLogRecord({"name": "styleadapt.x", "msg": "stage done", "levelname": "INFO"})
        for key, value in extra.items():
            setattr(record, key, value)
        return record

    def test_only_extra_fields_are_collected(self):
        record = self.make_record(stage="adapt", seed=505)
        assert record_fields(record) == {"stage": "adapt", "seed": 505}

    def test_formatter_appends_fields(self):
        formatter = FieldsFormatter(fmt="%(message)s")
        assert formatter.format(self.make_record(pool_size=10)) == "stage done | pool_size=10"
        assert formatter.format(self.make_record()) == "stage done"


class TestStageRecord:
    def test_created_at_defaults_to_now(self):
        record = StageRecord(name="data", seed=1, fingerprint="abc")
        assert record.created_at is not None
        assert record.created_at.tzinfo is not None

    def test_created_at_survives_a_manifest_round_trip(self):
        record = StageRecord(name="data", seed=1, fingerprint="abc")
        manifest = ArtifactManifest(stages={"data": record})
        reloaded = ArtifactManifest.model_validate_json(manifest.model_dump_json())
        assert reloaded.stages["data"].created_at == manifest.stages["data"].created_at


class TestDocumentRepository:
    def test_load_validates_as_the_given_model(self, tmp_path):
        saved = StyleRepresentatives(k=3, pool_size=7, seed=2)
        path = document_repository.save(saved, tmp_path / "styles.json")
        loaded = document_repository.load(path, StyleRepresentatives)
        assert loaded == saved

    def test_load_rejects_another_document(self, tmp_path):
        path = document_repository.save(AdaptConfig(), tmp_path / "adapt.json")
        with pytest.raises(ArtifactIOError):
            document_repository.load(path, StyleRepresentatives)

    def test_missing_document(self, tmp_path):
        with pytest.raises(ArtifactIOError):
            document_repository.load(tmp_path / "absent.json", StyleRepresentatives)

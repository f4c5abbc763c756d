"""Dataset ingestion, target pools and the toy two-domain generator."""

import json
from pathlib import Path

import pytest
import torch
from pydantic import ValidationError

from styleadapt.core.exceptions import ConfigurationError, DataError
from styleadapt.domain.models import (
    LabeledDataset,
    Modality,
    Sample,
    Split,
    ToyDomainSpec,
    UnlabeledPool,
)
from styleadapt.domain.services import dataset_service, toy_domain_service
from styleadapt.infrastructure.storage import image_repository, table_repository


def write_image(path, value: float = 0.5):
    image_repository.save(torch.full((3, 32, 32), value), path)
    return path


@pytest.fixture
def class_folders(tmp_path):
    root = tmp_path / "source"
    for name, count in (("cat", 3), ("ant", 2)):
        for i in range(count):
            write_image(root / name / f"{i}.png", 0.1 * (i + 1))
    return root


class TestIngestDirectory:
    def test_counts_and_sorted_vocabulary(self, class_folders):
        dataset = dataset_service.ingest_dataset(class_folders)
        assert dataset.class_names == ["ant", "cat"]
        assert dataset.class_histogram() == {"ant": 2, "cat": 3}
        assert all(s.modality == Modality.REAL for s in dataset.samples)

    def test_samples_ordered_by_path(self, class_folders):
        dataset = dataset_service.ingest_dataset(class_folders)
        assert dataset.paths() == sorted(dataset.paths())

    def test_fixed_vocabulary_keeps_its_order(self, class_folders):
        dataset = dataset_service.ingest_dataset(class_folders, class_names=["cat", "ant", "bee"])
        assert dataset.class_names == ["cat", "ant", "bee"]
        assert dataset.class_histogram()["bee"] == 0

    def test_corrupt_file_is_skipped(self, class_folders):
        (class_folders / "cat" / "broken.png").write_bytes(b"not an image")
        result = dataset_service.scan_dataset(class_folders)
        assert len(result.dataset) == 5
        assert [p.endswith("broken.png") for p in result.skipped] == [True]

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DataError):
            dataset_service.ingest_dataset(tmp_path / "absent")

    def test_directory_without_images(self, tmp_path):
        (tmp_path / "empty" / "cat").mkdir(parents=True)
        with pytest.raises(DataError):
            dataset_service.ingest_dataset(tmp_path / "empty")


class TestIngestManifest:
    def _manifest(self, tmp_path, rows):
        for path, _, _ in rows:
            write_image(tmp_path / path)
        lines = ["path,label,split"] + [",".join(row) for row in rows]
        manifest = tmp_path / "manifest.csv"
        manifest.write_text("\n".join(lines) + "\n")
        return manifest

    def test_relative_paths_and_splits(self, tmp_path):
        manifest = self._manifest(
            tmp_path, [("b.png", "dog", "test"), ("a.png", "cat", "train")]
        )
        dataset = dataset_service.ingest_dataset(manifest)
        assert dataset.paths() == [str(tmp_path / "a.png"), str(tmp_path / "b.png")]
        assert [s.split for s in dataset.samples] == [Split.TRAIN, Split.TEST]

    def test_duplicate_path_names_its_rows(self, tmp_path):
        manifest = self._manifest(
            tmp_path, [("a.png", "cat", "train"), ("a.png", "dog", "train")]
        )
        with pytest.raises(DataError) as excinfo:
            dataset_service.ingest_dataset(manifest)
        assert excinfo.value.details["rows"] == [2, 3]

    def test_unknown_label_names_its_row(self, tmp_path):
        manifest = self._manifest(
            tmp_path, [("a.png", "cat", "train"), ("b.png", "emu", "train")]
        )
        with pytest.raises(DataError) as excinfo:
            dataset_service.ingest_dataset(manifest, class_names=["cat", "dog"])
        assert excinfo.value.details["rows"] == [3]

    def test_invalid_split(self, tmp_path):
        manifest = self._manifest(tmp_path, [("a.png", "cat", "holdout")])
        with pytest.raises(DataError):
            dataset_service.ingest_dataset(manifest)


class TestSavedVocabulary:
    @pytest.fixture
    def unsorted(self, tmp_path):
        samples = [
            Sample(path=str(write_image(tmp_path / f"{i}.png")), label=i % 2) for i in range(4)
        ]
        return LabeledDataset(class_names=["square", "circle"], samples=samples)

    def test_manifest_reload_keeps_class_order(self, unsorted, tmp_path):
        path = table_repository.save_dataset(unsorted, tmp_path / "source.csv")
        assert table_repository.vocabulary_path(path).is_file()
        reloaded = table_repository.load_dataset(path)
        assert reloaded.class_names == ["square", "circle"]
        assert reloaded.labels() == unsorted.labels()

    def test_ingest_uses_saved_class_order(self, unsorted, tmp_path):
        path = table_repository.save_dataset(unsorted, tmp_path / "source.csv")
        dataset = dataset_service.ingest_dataset(path)
        assert dataset.class_names == ["square", "circle"]
        assert dataset.class_histogram() == {"square": 2, "circle": 2}

    def test_explicit_vocabulary_wins(self, unsorted, tmp_path):
        path = table_repository.save_dataset(unsorted, tmp_path / "source.csv")
        reloaded = table_repository.load_dataset(path, ["circle", "square"])
        assert reloaded.class_names == ["circle", "square"]

    def test_corrupt_vocabulary(self, unsorted, tmp_path):
        path = table_repository.save_dataset(unsorted, tmp_path / "source.csv")
        table_repository.vocabulary_path(path).write_text(json.dumps({"class_names": []}))
        with pytest.raises(DataError):
            table_repository.load_dataset(path)


class TestOriginSplits:
    def test_real_image_in_both_splits_is_rejected(self):
        samples = [
            Sample(path="a.png", label=0, split=Split.TRAIN),
            Sample(path="a.png", label=0, split=Split.TEST),
        ]
        with pytest.raises(ValidationError, match="both train and test"):
            LabeledDataset(class_names=["cat"], samples=samples)

    def test_synthetic_copy_of_a_test_image_is_rejected(self):
        samples = [
            Sample(path="a.png", label=0, split=Split.TEST),
            Sample(
                path="a_style0.png",
                label=0,
                modality=Modality.SYNTHETIC,
                split=Split.TRAIN,
                origin_path="a.png",
            ),
        ]
        with pytest.raises(ValidationError, match="both train and test"):
            LabeledDataset(class_names=["cat"], samples=samples)

    def test_synthetic_copies_in_the_origin_split_are_accepted(self):
        samples = [Sample(path="a.png", label=0, split=Split.TRAIN)] + [
            Sample(
                path=f"a_style{j}.png",
                label=0,
                modality=Modality.SYNTHETIC,
                origin_path="a.png",
            )
            for j in range(3)
        ]
        assert len(LabeledDataset(class_names=["cat"], samples=samples)) == 4

    def test_leaking_manifest_is_a_data_error(self, tmp_path):
        write_image(tmp_path / "a.png")
        (tmp_path / "synthetic.csv").write_text(
            "path,label,modality,split,origin_path\n"
            "a.png,cat,real,test,\n"
            "b.png,cat,synthetic,train,a.png\n"
        )
        with pytest.raises(DataError):
            table_repository.load_dataset(tmp_path / "synthetic.csv")


class TestTargetPool:
    def test_pool_carries_paths_only(self, class_folders):
        pool = dataset_service.ingest_target_pool(class_folders)
        assert len(pool) == 5
        assert set(UnlabeledPool.model_fields) == {"paths"}

    def test_limit_is_seeded_and_sorted(self):
        pool = UnlabeledPool(paths=[f"p{i:02d}.png" for i in range(30)])
        a = dataset_service.limit_pool(pool, 10, seed=4)
        b = dataset_service.limit_pool(pool, 10, seed=4)
        assert a.paths == b.paths
        assert len(a) == 10
        assert a.paths == sorted(a.paths)

    def test_limit_larger_than_pool_keeps_everything(self):
        pool = UnlabeledPool(paths=["a.png", "b.png"])
        assert dataset_service.limit_pool(pool, 10, seed=0).paths == pool.paths

    def test_missing_pool(self, tmp_path):
        with pytest.raises(DataError):
            dataset_service.ingest_target_pool(tmp_path / "absent")


class TestToyDomains:
    def test_layout_and_class_balance(self, toy_domains, toy_spec):
        assert toy_domains.source.class_histogram() == {name: 40 for name in toy_spec.classes}
        test_counts = toy_domains.target_test.class_histogram()
        assert all(count == 1 for count in test_counts.values())
        assert len(toy_domains.target_pool) == 3 * 9
        assert len(toy_domains.source.subset(split=Split.TEST)) == 3 * 4

    def test_pool_file_names_carry_no_class(self, toy_domains, toy_spec):
        for path in toy_domains.target_pool.paths:
            assert not any(name in Path(path).name for name in toy_spec.classes)

    def test_manifests_reload(self, toy_domains, toy_spec):
        root = Path(toy_domains.source.samples[0].path).parents[2]
        reloaded = dataset_service.ingest_dataset(
            root / "source" / "manifest.csv", class_names=toy_spec.classes
        )
        assert reloaded.labels() == toy_domains.source.labels()
        assert [s.split for s in reloaded.samples] == [s.split for s in toy_domains.source.samples]
        pool = json.loads((root / "target" / "pool.json").read_text())
        assert len(pool["paths"]) == len(toy_domains.target_pool)

    def test_same_seed_gives_identical_bytes(self, tmp_path):
        spec = ToyDomainSpec(
            classes=["circle", "star"], source_samples_per_class=40, target_samples_per_class=4
        )
        a = toy_domain_service.generate_toy_domains(spec, seed=8, out_dir=tmp_path / "a")
        b = toy_domain_service.generate_toy_domains(spec, seed=8, out_dir=tmp_path / "b")
        for x, y in zip(a.source.paths() + a.target_pool.paths, b.source.paths() + b.target_pool.paths):
            with open(x, "rb") as fx, open(y, "rb") as fy:
                assert fx.read() == fy.read()

    def test_domains_differ_in_rendering(self, toy_domains):
        source = image_repository.load_batch(toy_domains.source.paths()[:20])
        target = image_repository.load_batch(toy_domains.target_pool.paths[:20])
        assert abs(float(source.mean()) - float(target.mean())) > 0.02

    @pytest.mark.parametrize(
        "overrides",
        [
            {"image_size": 16},
            {"classes": ["circle"]},
            {"source_samples_per_class": 10},
            {"target_samples_per_class": 1},
        ],
    )
    def test_invalid_spec(self, overrides, tmp_path):
        spec = ToyDomainSpec(**{"classes": ["circle", "square"], **overrides})
        with pytest.raises(ConfigurationError):
            toy_domain_service.generate_toy_domains(spec, seed=0, out_dir=tmp_path)

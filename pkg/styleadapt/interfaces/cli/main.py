"""Command line interface: one verb per pipeline operation plus the full run."""

import argparse
import sys
from typing import Callable, List, Optional

import torch

from styleadapt.core.config.settings import settings
from styleadapt.core.exceptions import (
    EXIT_OK,
    EXIT_UNEXPECTED,
    BaseCustomException,
    ConfigurationError,
)
from styleadapt.core.logging import LoggerConfig, get_logger
from styleadapt.core.reports import ReportRenderer
from styleadapt.core.utils import seed_everything
from styleadapt.domain.models import (
    AdaptConfig,
    DecoderTrainConfig,
    EncoderTrainConfig,
    SelectionConfig,
    Split,
    StyleRepresentatives,
    ToyDomainSpec,
    TransferTrainConfig,
)
from styleadapt.domain.networks import PerceptualEncoder
from styleadapt.domain.services import (
    adain_transfer_service,
    adapt_service,
    dataset_service,
    feature_service,
    johnson_transfer_service,
    load_config_section,
    load_pipeline_config,
    pipeline_service,
    style_selection_service,
    synthesis_service,
    toy_domain_service,
)
from styleadapt.infrastructure.storage import (
    document_repository,
    image_repository,
    table_repository,
)

logger = get_logger(__name__)


def _encoder(path: Optional[str], seed: int) -> PerceptualEncoder:
    if path:
        return feature_service.load_encoder(path)
    logger.info("No --encoder given, using a randomly initialised encoder", extra={"seed": seed})
    return feature_service.build_perceptual_encoder(seed)


def _train_images(source: str) -> torch.Tensor:
    dataset = dataset_service.ingest_dataset(source)
    return image_repository.load_batch(dataset.subset(split=Split.TRAIN).paths())


def _style_image(style: str, index: int) -> str:
    """Resolve ``--style``: a representatives JSON picked by ``--index``, or an image path."""
    if not style.lower().endswith(".json"):
        return style
    representatives = document_repository.load(style, StyleRepresentatives)
    if not 0 <= index < len(representatives.entries):
        raise ConfigurationError(
            f"--index {index} outside the {len(representatives.entries)} representatives in {style}"
        )
    return representatives.entries[index].image_id


def cmd_toygen(args: argparse.Namespace) -> int:
    spec = load_config_section(
        args.config,
        "toy",
        ToyDomainSpec,
        image_size=args.image_size,
        source_samples_per_class=args.source_per_class,
        target_samples_per_class=args.target_per_class,
    )
    domains = toy_domain_service.generate_toy_domains(spec, args.seed, args.out)
    print(f"source: {len(domains.source)} images  ({args.out}/source/manifest.csv)")
    print(f"target pool: {len(domains.target_pool)} unlabeled images  ({args.out}/target/pool.json)")
    print(f"target test: {len(domains.target_test)} images  ({args.out}/target/test_manifest.csv)")
    return EXIT_OK


def cmd_train_encoder(args: argparse.Namespace) -> int:
    config = load_config_section(args.config, "encoder", EncoderTrainConfig, iterations=args.iterations)
    source = dataset_service.ingest_dataset(args.source)
    encoder = feature_service.train_perceptual_encoder(source, config, args.seed)
    path = feature_service.save_encoder(encoder, args.out, args.seed)
    print(f"encoder written to {path} (train accuracy {encoder.train_accuracy:.4f})")
    return EXIT_OK


def cmd_select_styles(args: argparse.Namespace) -> int:
    config = load_config_section(args.config, "selection", SelectionConfig, strategy=args.strategy)
    pool = dataset_service.ingest_target_pool(args.target_dir, limit=args.limit, seed=args.seed)
    images = image_repository.load_batch(pool.paths)
    representatives = style_selection_service.select_styles(
        images, pool.paths, _encoder(args.encoder, args.seed), args.k, args.seed, config
    )
    document_repository.save(representatives, args.out)
    for entry in representatives.entries:
        print(f"cluster {entry.cluster_index:3d}  size {entry.cluster_size:4d}  {entry.image_id}")
    for warning in representatives.warnings:
        print(f"warning: {warning}")
    return EXIT_OK


def cmd_train_transfer(args: argparse.Namespace) -> int:
    config = load_config_section(
        args.config,
        "transfer",
        TransferTrainConfig,
        iterations=args.iterations,
        lambda_s=args.lambda_s,
        lambda_t=args.lambda_t,
        seed=args.seed,
    )
    style_id = _style_image(args.style, args.index)
    source_images = _train_images(args.source_dir)
    style = image_repository.load(style_id, size=tuple(source_images.shape[-2:]))
    network = johnson_transfer_service.train_transfer_network(
        source_images, style, _encoder(args.encoder, args.seed), config, style_image_id=style_id
    )
    path = johnson_transfer_service.save_network(network, args.out)
    initial, final = network.style_loss_progress()
    print(f"transfer network written to {path} (style loss {initial:.4g} -> {final:.4g})")
    return EXIT_OK


def cmd_train_decoder(args: argparse.Namespace) -> int:
    config = load_config_section(
        args.config,
        "decoder",
        DecoderTrainConfig,
        iterations=args.iterations,
        style_augmented=True if args.style_augmented else None,
    )
    model = adain_transfer_service.train_decoder(
        _train_images(args.source_dir), _encoder(args.encoder, args.seed), config, args.seed
    )
    path = adain_transfer_service.save_model(model, args.out, args.seed)
    initial, final = model.reconstruction_progress()
    print(f"decoder written to {path} (reconstruction loss {initial:.4g} -> {final:.4g})")
    return EXIT_OK


def cmd_stylize(args: argparse.Namespace) -> int:
    content = image_repository.load(args.content)
    if args.network:
        output = johnson_transfer_service.apply_transfer(
            johnson_transfer_service.load_network(args.network), content
        )
    elif args.decoder and args.style:
        output = adain_transfer_service.stylize(
            content, image_repository.load(args.style), adain_transfer_service.load_model(args.decoder)
        )
    else:
        raise ConfigurationError("stylize needs --network, or --decoder together with --style")
    print(f"stylized image written to {image_repository.save(output, args.out)}")
    return EXIT_OK


def cmd_synthesize(args: argparse.Namespace) -> int:
    source = dataset_service.ingest_dataset(args.source)
    if args.networks:
        synthetic = synthesis_service.build_synthetic_johnson(
            source, synthesis_service.load_networks(args.networks), args.out
        )
    elif args.decoder and args.target:
        pool = dataset_service.ingest_target_pool(args.target, limit=args.limit, seed=args.seed)
        synthetic = synthesis_service.build_synthetic_adain(
            source,
            pool,
            adain_transfer_service.load_model(args.decoder),
            args.out,
            styles_per_image=args.styles_per_image,
            seed=args.seed,
        )
    else:
        raise ConfigurationError("synthesize needs --networks, or --decoder together with --target")
    print(f"{len(synthetic)} synthetic images written under {args.out}")
    return EXIT_OK


def cmd_train_adapt(args: argparse.Namespace) -> int:
    config = load_config_section(
        args.config,
        "adapt",
        AdaptConfig,
        alpha=args.alpha,
        beta=args.beta,
        max_iterations=args.iterations,
        seed=args.seed,
    )
    source = dataset_service.ingest_dataset(args.real)
    synthetic = table_repository.load_dataset(args.synthetic, source.class_names)
    model, log = adapt_service.train_adapt(source, synthetic, config)
    path = adapt_service.save_model(model, args.out)
    if args.log:
        table_repository.save_records(log, args.log)
    print(f"adapted classifier written to {path}")
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = adapt_service.load_model(args.model)
    test = dataset_service.ingest_dataset(args.test, model.class_names)
    report = adapt_service.evaluate(model, test)
    if args.out:
        document_repository.save(report, args.out)
    print(ReportRenderer.eval_table(report))
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    config = load_config_section(
        args.config, "adapt", AdaptConfig, max_iterations=args.iterations, seed=args.seed
    )
    source = dataset_service.ingest_dataset(args.source)
    test = dataset_service.ingest_dataset(args.test, source.class_names)
    report = pipeline_service.baseline_photo_only(source, test, config)
    if args.out:
        document_repository.save(report, args.out)
    print(ReportRenderer.eval_table(report))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = load_pipeline_config(args.config)
    if args.workdir:
        config = config.model_copy(
            update={"paths": config.paths.model_copy(update={"workdir": args.workdir})}
        )
    result = pipeline_service.run_pipeline(config)
    print(ReportRenderer.pipeline_table(result.report))
    if result.skipped:
        print(f"\nskipped up-to-date stages: {', '.join(result.skipped)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Style-transfer based unsupervised domain adaptation",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {settings.app_version}"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    def verb(name: str, handler: Callable[[argparse.Namespace], int], help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        p.add_argument("--config", help="TOML run config supplying section defaults")
        p.add_argument("--seed", type=int, default=0, help="Seed (default: 0)")
        return p

    p = verb("toygen", cmd_toygen, "Render the toy source and target domains")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--image-size", type=int)
    p.add_argument("--source-per-class", type=int)
    p.add_argument("--target-per-class", type=int)

    p = verb("train-encoder", cmd_train_encoder, "Train the perceptual encoder on the source")
    p.add_argument("--source", required=True, help="Source folder or manifest")
    p.add_argument("--out", required=True, help="Encoder checkpoint path")
    p.add_argument("--iterations", type=int)

    p = verb("select-styles", cmd_select_styles, "Choose k style representatives from a target pool")
    p.add_argument("--target-dir", required=True, help="Unlabeled target image folder")
    p.add_argument("--k", type=int, default=10, help="Number of styles (default: 10)")
    p.add_argument("--encoder", help="Encoder checkpoint (random encoder if omitted)")
    p.add_argument("--strategy", choices=["cluster", "random"])
    p.add_argument("--limit", type=int, help="Use at most this many target images")
    p.add_argument("--out", required=True, help="Representatives JSON path")

    p = verb("train-transfer", cmd_train_transfer, "Train one feed-forward transfer network")
    p.add_argument(
        "--style", required=True, help="Representatives JSON from select-styles, or a style image"
    )
    p.add_argument(
        "--index", type=int, default=0, help="Representative to use from --style (default: 0)"
    )
    p.add_argument("--source-dir", required=True, help="Source folder or manifest")
    p.add_argument("--encoder", help="Encoder checkpoint (random encoder if omitted)")
    p.add_argument("--out", required=True, help="Network checkpoint path")
    p.add_argument("--iterations", type=int)
    p.add_argument("--lambda-s", type=float, help="Content loss weight")
    p.add_argument("--lambda-t", type=float, help="Style loss weight")

    p = verb("train-decoder", cmd_train_decoder, "Train the AdaIN decoder")
    p.add_argument("--source-dir", required=True, help="Source folder or manifest")
    p.add_argument("--encoder", help="Encoder checkpoint (random encoder if omitted)")
    p.add_argument("--out", required=True, help="Decoder checkpoint path")
    p.add_argument("--iterations", type=int)
    p.add_argument("--style-augmented", action="store_true", help="Add AdaIN content/style losses")

    p = verb("stylize", cmd_stylize, "Stylize one image")
    p.add_argument("--content", required=True, help="Content image")
    p.add_argument("--network", help="Transfer network checkpoint")
    p.add_argument("--decoder", help="Decoder checkpoint")
    p.add_argument("--style", help="Style image (with --decoder)")
    p.add_argument("--out", required=True, help="Output PNG")

    p = verb("synthesize", cmd_synthesize, "Build the synthetic labeled modality")
    p.add_argument("--source", required=True, help="Source folder or manifest")
    p.add_argument("--networks", nargs="+", help="Transfer network checkpoints")
    p.add_argument("--decoder", help="Decoder checkpoint")
    p.add_argument("--target", help="Unlabeled target image folder (with --decoder)")
    p.add_argument("--styles-per-image", type=int, default=10)
    p.add_argument("--limit", type=int, help="Use at most this many target images")
    p.add_argument("--out", required=True, help="Output directory")

    p = verb("train-adapt", cmd_train_adapt, "Train the dual-head classifier")
    p.add_argument("--real", required=True, help="Labeled real (source) folder or manifest")
    p.add_argument("--synthetic", required=True, help="Synthetic manifest CSV")
    p.add_argument("--out", required=True, help="Model checkpoint path")
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--iterations", type=int)
    p.add_argument("--log", help="Training log CSV path")

    p = verb("evaluate", cmd_evaluate, "Evaluate a classifier on a labeled test set")
    p.add_argument("--model", required=True, help="Model checkpoint")
    p.add_argument("--test", required=True, help="Test folder or manifest")
    p.add_argument("--out", help="Write the report as JSON")

    p = verb("baseline", cmd_baseline, "Train and evaluate the photo-only baseline")
    p.add_argument("--source", required=True, help="Source folder or manifest")
    p.add_argument("--test", required=True, help="Test folder or manifest")
    p.add_argument("--iterations", type=int)
    p.add_argument("--out", help="Write the report as JSON")

    p = verb("run", cmd_run, "Run (or resume) the full pipeline")
    p.set_defaults(config_required=True)
    p.add_argument("--workdir", help="Override paths.workdir")

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config_required", False) and not args.config:
        parser.error(f"{args.command} requires --config")

    LoggerConfig.setup_logging(
        log_level="DEBUG" if args.verbose else settings.log_level,
        log_file=settings.log_file or None,
        use_colors=settings.log_colors,
        force=True,
    )
    if settings.num_threads:
        torch.set_num_threads(settings.num_threads)
    seed_everything(args.seed)

    try:
        return args.handler(args)
    except BaseCustomException as exc:
        logger.error(
            f"{args.command} failed: {exc.message}",
            extra={"exit_code": exc.exit_code, "details": exc.details},
        )
        print(f"error: {exc.message}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.exception(f"Unexpected error in {args.command}: {exc}")
        print(f"unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())

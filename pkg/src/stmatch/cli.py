"""Command-line entry points.

Subcommands: ``train``, ``evaluate``, ``identify``, ``synth`` and
``dump-weights``.  Inputs are validated before any computation starts, and
failures print a single machine-readable ``error category=<cat>: <message>``
line on stderr with a category-specific exit status.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__
from .config import FeatureSpec, load_config
from .errors import (
    ConfigError,
    DimensionError,
    EmptyInputError,
    FeatureSpaceError,
    IllPosedError,
    ImageFormatError,
    ManifestError,
    ModelFormatError,
    NotEnrolledError,
    NumericError,
    PairingError,
    StmatchError,
)
from .evaluation import ProtocolConfig, synth_generate
from .identification import identify
from .manifest import (
    DatasetManifest,
    ManifestRecord,
    parse_manifest,
    resolve_paths,
    write_manifest,
)
from .model_io import load_model, save_model
from .pgm import write_pgm
from .pipeline import gallery_from_manifest, run_protocol, train_on_manifest
from .reports import (
    write_cmc_csv,
    write_config_json,
    write_fit_report_csv,
    write_fold_fit_reports_csv,
    write_ranked_csv,
    write_summary_csv,
)

_CATEGORIES = [
    (ConfigError, "config", 2),
    (IllPosedError, "hyperparameters", 2),
    (ManifestError, "manifest", 3),
    (ModelFormatError, "model-file", 3),
    (ImageFormatError, "image", 3),
    (FeatureSpaceError, "feature-space", 3),
    (NotEnrolledError, "not-enrolled", 3),
    (PairingError, "pairing", 3),
    (DimensionError, "dimension", 3),
    (EmptyInputError, "empty-input", 3),
    (NumericError, "numeric", 4),
    (FileNotFoundError, "missing-file", 3),
    (StmatchError, "internal", 4),
]


def _categorize(exc: BaseException) -> tuple[str, int]:
    for kind, category, code in _CATEGORIES:
        if isinstance(exc, kind):
            return category, code
    return "internal", 4


def _load_manifest(path) -> DatasetManifest:
    if not os.path.exists(path):
        raise FileNotFoundError(f"manifest not found: {path}")
    return resolve_paths(parse_manifest(path), os.path.dirname(os.path.abspath(path)))


def _ensure_out(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def _check_inputs_exist(manifest: DatasetManifest) -> None:
    for rec in manifest.records:
        if not os.path.exists(rec.image_path):
            raise FileNotFoundError(f"input file not found: {rec.image_path}")


def _cmd_train(args) -> int:
    config = load_config(args.config, seed_override=args.seed, out_override=args.out)
    out = _ensure_out(config.out_dir or args.out)
    manifest = _load_manifest(args.manifest)
    _check_inputs_exist(manifest)
    model, report = train_on_manifest(manifest, config)
    config_json = config.echo_json()
    save_model(model, os.path.join(out, "model.stml"))
    write_fit_report_csv(report, os.path.join(out, "fit_report.csv"),
                         config.seed, config_json)
    write_config_json(config.echo_dict(), os.path.join(out, "run_config.json"))
    print(f"trained {model.feature_dim}x{model.feature_dim} transform "
          f"({model.param_count} parameters), "
          f"{report.iterations_run} iterations, "
          f"final objective {report.final_objective!r}")
    return 0


def _cmd_evaluate(args) -> int:
    config = load_config(args.config, seed_override=args.seed, out_override=args.out)
    out = _ensure_out(config.out_dir or args.out)
    manifest = _load_manifest(args.manifest)
    _check_inputs_exist(manifest)
    protocol = config.protocol
    extended = None
    extended_path = args.extended_manifest or protocol.extended_manifest
    if extended_path is not None:
        extended = _load_manifest(extended_path)
        _check_inputs_exist(extended)
        protocol = ProtocolConfig(protocol=protocol.protocol, n_folds=protocol.n_folds,
                                  extended_manifest=str(extended_path), seed=protocol.seed)
    if protocol.protocol == "P2" and extended is None:
        raise ConfigError("protocol P2 requires --extended-manifest "
                          "(or protocol.extended_manifest in the config)")
    report = run_protocol(manifest, protocol, config, extended=extended)
    config_json = config.echo_json()
    write_summary_csv(report, os.path.join(out, "summary.csv"), config_json)
    write_cmc_csv(report, os.path.join(out, "cmc.csv"), config_json)
    write_fold_fit_reports_csv(report, os.path.join(out, "fit_reports.csv"), config_json)
    write_config_json(config.echo_dict(), os.path.join(out, "run_config.json"))
    print(f"{report.protocol}: rank-1 {report.mean_rank1:.4f} "
          f"(std {report.std_rank1:.4f}), rank-5 {report.mean_rank5:.4f} "
          f"(std {report.std_rank5:.4f}) over {report.n_folds} folds")
    return 0


def _cmd_identify(args) -> int:
    config = load_config(args.config, seed_override=args.seed, out_override=args.out)
    out = _ensure_out(config.out_dir or args.out)
    if not os.path.exists(args.model):
        raise FileNotFoundError(f"model file not found: {args.model}")
    if not os.path.exists(args.probe):
        raise FileNotFoundError(f"probe not found: {args.probe}")
    model = load_model(args.model)
    manifest = _load_manifest(args.manifest)
    _check_inputs_exist(manifest)
    gallery = gallery_from_manifest(model, manifest)
    spec = FeatureSpec.from_tag(model.feature_space_tag)
    probe = spec.load_and_extract(args.probe)
    ranked = identify(model, probe, gallery)
    write_ranked_csv(ranked, os.path.join(out, "ranked.csv"),
                     config.seed, config.echo_json())
    write_config_json(config.echo_dict(), os.path.join(out, "run_config.json"))
    best_id, best_dist = ranked.entries[0]
    print(f"best match: {best_id} (distance {best_dist!r}); "
          f"{len(ranked)} identities ranked")
    return 0


def _cmd_synth(args) -> int:
    config = load_config(args.config, seed_override=args.seed, out_override=args.out)
    out = _ensure_out(config.out_dir or args.out)
    cfg = config.synthetic
    x_skull, x_face, labels = synth_generate(cfg)
    feat_dir = os.path.join(out, "features")
    os.makedirs(feat_dir, exist_ok=True)
    records = []
    for i, label in enumerate(labels):
        skull_name = os.path.join("features", f"{label}_skull.npy")
        face_name = os.path.join("features", f"{label}_face.npy")
        np.save(os.path.join(out, skull_name), x_skull[:, i])
        np.save(os.path.join(out, face_name), x_face[:, i])
        # paths are relative to the manifest's own directory
        records.append(ManifestRecord(label, "skull", skull_name))
        records.append(ManifestRecord(label, "face", face_name))
    manifest = DatasetManifest(records=tuple(records))
    write_manifest(manifest, os.path.join(out, "manifest.csv"))
    write_config_json(config.echo_dict(), os.path.join(out, "run_config.json"))
    print(f"generated {cfg.n_subjects} mated pairs "
          f"(feature_dim {cfg.feature_dim}, latent_dim {cfg.latent_dim}, "
          f"seed {cfg.seed}) under {out}")
    return 0


def _cmd_dump_weights(args) -> int:
    config = load_config(args.config, seed_override=args.seed, out_override=args.out)
    out = _ensure_out(config.out_dir or args.out)
    if not os.path.exists(args.model):
        raise FileNotFoundError(f"model file not found: {args.model}")
    model = load_model(args.model)
    n = model.feature_dim
    side = math.isqrt(n)
    square = side * side == n
    count = n if args.rows is None else min(args.rows, n)
    for i in range(count):
        row = model.transform[i]
        low, high = float(row.min()), float(row.max())
        if high > low:
            scaled = (row - low) / (high - low) * 255.0
        else:
            scaled = np.zeros_like(row)
        img = np.rint(scaled).astype(np.uint8)
        img = img.reshape(side, side) if square else img.reshape(1, n)
        write_pgm(os.path.join(out, f"weight_row_{i:04d}.pgm"), img)
    write_config_json(config.echo_dict(), os.path.join(out, "run_config.json"))
    print(f"wrote {count} weight image(s) to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stmatch",
        description="Skull-to-face identification with a shared sparsifying transform",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", default=None, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p_train = sub.add_parser("train", help="fit a model on a mated-pair manifest")
    common(p_train)
    p_train.add_argument("--manifest", required=True)
    p_train.set_defaults(func=_cmd_train)

    p_eval = sub.add_parser("evaluate", help="run a protocol with cross validation")
    common(p_eval)
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--extended-manifest", default=None,
                        help="distractor faces for protocol P2")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_id = sub.add_parser("identify", help="rank gallery identities for one probe")
    common(p_id)
    p_id.add_argument("--model", required=True)
    p_id.add_argument("--manifest", required=True, help="gallery manifest")
    p_id.add_argument("--probe", required=True, help="probe image (or .npy features)")
    p_id.set_defaults(func=_cmd_identify)

    p_synth = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    common(p_synth)
    p_synth.set_defaults(func=_cmd_synth)

    p_dump = sub.add_parser("dump-weights", help="write per-row weight images")
    common(p_dump)
    p_dump.add_argument("--model", required=True)
    p_dump.add_argument("--rows", type=int, default=None,
                        help="only dump the first N rows")
    p_dump.set_defaults(func=_cmd_dump_weights)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point for the CLI
        category, code = _categorize(exc)
        print(f"error category={category}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())

"""Manifest-driven pipelines: feature extraction, training, protocol runs.

Augmentation is applied to training images only; galleries and probes use
each image unaugmented.  The augmented skull and face variants of a subject
are paired index-for-index (both sides use the same deterministic variant
order), so mated columns stay mated after augmentation.
"""

from __future__ import annotations

import numpy as np

from .config import FeatureSpec, RunConfig
from .errors import ConfigError, EmptyInputError, ManifestError
from .evaluation import EvalReport, ProtocolConfig, make_folds
from .features import augment
from .identification import Gallery, build_gallery
from .manifest import DatasetManifest
from .model import FitReport, SharedTransformModel, fit
from .pgm import load_image


def _pair_features(manifest: DatasetManifest, spec: FeatureSpec):
    """Per mated subject: (augmented skull variants, augmented face variants).

    Variant 0 is always the unaugmented image, reused for galleries/probes.
    """
    pairs = manifest.mated_pairs()
    if not pairs:
        raise EmptyInputError("manifest contains no mated skull/face pairs")
    per_subject = {}
    for pair in pairs:
        if spec.supports_augmentation:
            skull_imgs = augment(load_image(pair.skull_path), spec.augmentation)
            face_imgs = augment(load_image(pair.face_path), spec.augmentation)
            skull_vecs = [spec.extract_from_image(img) for img in skull_imgs]
            face_vecs = [spec.extract_from_image(img) for img in face_imgs]
        else:
            skull_vecs = [spec.load_and_extract(pair.skull_path)]
            face_vecs = [spec.load_and_extract(pair.face_path)]
        per_subject[pair.subject_id] = (skull_vecs, face_vecs)
    return pairs, per_subject


def _stack(columns) -> np.ndarray:
    return np.column_stack(columns)


def train_on_manifest(manifest: DatasetManifest, config: RunConfig
                      ) -> tuple[SharedTransformModel, FitReport]:
    """Fit on every mated pair of the manifest (with training augmentation)."""
    _, per_subject = _pair_features(manifest, config.features)
    skull_cols = []
    face_cols = []
    for subject in sorted(per_subject):
        skull_vecs, face_vecs = per_subject[subject]
        skull_cols.extend(skull_vecs)
        face_cols.extend(face_vecs)
    xs = _stack(skull_cols)
    xd = _stack(face_cols)
    hyper = config.hyper.resolve(xs.shape[0])
    return fit(xs, xd, hyper, init=config.init,
               feature_space_tag=config.features.tag)


def _load_distractors(extended: DatasetManifest | None, spec: FeatureSpec,
                      mated_ids) -> tuple[np.ndarray | None, tuple[str, ...]]:
    if extended is None:
        return None, ()
    records = extended.distractors()
    collisions = {sid for sid, _ in records} & set(mated_ids)
    if collisions:
        raise ManifestError(
            f"extended gallery identities collide with mated subjects: {sorted(collisions)}"
        )
    if not records:
        return np.empty((0, 0)), ()
    vecs = [spec.load_and_extract(path) for _, path in records]
    return _stack(vecs), tuple(sid for sid, _ in records)


def run_protocol(manifest: DatasetManifest, protocol: ProtocolConfig,
                 config: RunConfig,
                 extended: DatasetManifest | None = None) -> EvalReport:
    """Cross-validated protocol run over a mated-pair manifest.

    Per fold: fit on the training subjects' augmented features, enroll the
    test subjects' (and, for P2, all distractor) face images unaugmented,
    probe with each test skull, and accumulate CMC statistics.
    """
    spec = config.features
    if protocol.protocol == "P2" and extended is None:
        raise ConfigError("protocol P2 requires an extended gallery manifest")
    pairs, per_subject = _pair_features(manifest, spec)
    subjects = [p.subject_id for p in pairs]
    # training matrices use every variant; galleries/probes use variant 0
    xs_train_cols = {s: per_subject[s][0] for s in subjects}
    xd_train_cols = {s: per_subject[s][1] for s in subjects}
    xs_probe = {s: per_subject[s][0][0] for s in subjects}
    xd_gallery = {s: per_subject[s][1][0] for s in subjects}

    # only P2 enrolls distractors; P1 galleries are the test faces alone
    if protocol.protocol == "P2":
        distractor_feats, distractor_ids = _load_distractors(extended, spec, subjects)
    else:
        distractor_feats, distractor_ids = None, ()

    n = next(iter(xs_probe.values())).shape[0]
    hyper = config.hyper.resolve(n)
    folds = make_folds(subjects, protocol.n_folds, protocol.seed)

    from .evaluation import compute_cmc  # local to keep module import light
    from .identification import identify, rank_of_true_match

    fold_curves = []
    fold_rank1 = []
    fold_rank5 = []
    gallery_counts = []
    fit_reports = []
    for split in folds:
        xs_fit = _stack([v for s in split.train_subjects for v in xs_train_cols[s]])
        xd_fit = _stack([v for s in split.train_subjects for v in xd_train_cols[s]])
        model, report = fit(xs_fit, xd_fit, hyper, init=config.init,
                            feature_space_tag=spec.tag)
        fit_reports.append(report)

        gal_cols = [xd_gallery[s] for s in split.test_subjects]
        gal_labels = list(split.test_subjects)
        if distractor_feats is not None and len(distractor_ids) > 0:
            gal_cols.extend(distractor_feats.T)
            gal_labels.extend(distractor_ids)
        gallery = build_gallery(model, _stack(gal_cols), gal_labels)
        n_ids = len(gallery.identities)
        gallery_counts.append(n_ids)

        ranks = []
        for subject in split.test_subjects:
            ranked = identify(model, xs_probe[subject], gallery)
            ranks.append(rank_of_true_match(ranked, subject))
        curve = compute_cmc(ranks, n_ids)
        fold_curves.append(curve)
        fold_rank1.append(curve.at_rank(1))
        fold_rank5.append(curve.at_rank(min(5, n_ids)))

    return EvalReport(
        protocol=protocol.protocol,
        n_folds=protocol.n_folds,
        seed=protocol.seed,
        fold_curves=tuple(fold_curves),
        fold_rank1=tuple(fold_rank1),
        fold_rank5=tuple(fold_rank5),
        mean_rank1=float(np.mean(fold_rank1)),
        std_rank1=float(np.std(fold_rank1)),
        mean_rank5=float(np.mean(fold_rank5)),
        std_rank5=float(np.std(fold_rank5)),
        gallery_identity_counts=tuple(gallery_counts),
        fit_reports=tuple(fit_reports),
        config_echo=config.echo_dict(),
    )


def gallery_from_manifest(model: SharedTransformModel,
                          manifest: DatasetManifest) -> Gallery:
    """Enroll every face and distractor-face image of a manifest, unaugmented."""
    spec = FeatureSpec.from_tag(model.feature_space_tag)
    cols = []
    labels = []
    for pair in manifest.mated_pairs():
        cols.append(spec.load_and_extract(pair.face_path))
        labels.append(pair.subject_id)
    for sid, path in manifest.distractors():
        cols.append(spec.load_and_extract(path))
        labels.append(sid)
    if not cols:
        raise EmptyInputError("manifest contains no face or distractor_face records")
    return build_gallery(model, _stack(cols), labels)

"""End-to-end manifest -> images -> features -> protocol runs."""

import numpy as np
import pytest

from stmatch.config import FeatureSpec, config_from_dict
from stmatch.errors import ConfigError
from stmatch.evaluation import ProtocolConfig
from stmatch.features import AugmentationPolicy, HogParams
from stmatch.manifest import DatasetManifest, ManifestRecord
from stmatch.pgm import write_pgm
from stmatch.pipeline import gallery_from_manifest, run_protocol, train_on_manifest


def _make_dataset(tmp_path, n_subjects=10, size=12, seed=0, n_distractors=0):
    """Mated skull/face PGM pairs; the two domains are different renderings
    of a shared per-subject pattern so identification is learnable."""
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_subjects):
        base = rng.integers(30, 220, size=(size, size))
        skull = np.clip(base + rng.integers(-12, 13, size=(size, size)), 0, 255)
        face = np.clip(255 - base + rng.integers(-12, 13, size=(size, size)), 0, 255)
        sp = tmp_path / f"s{i:02d}_skull.pgm"
        fp = tmp_path / f"s{i:02d}_face.pgm"
        write_pgm(sp, skull.astype(np.uint8))
        write_pgm(fp, face.astype(np.uint8))
        records.append(ManifestRecord(f"s{i:02d}", "skull", str(sp)))
        records.append(ManifestRecord(f"s{i:02d}", "face", str(fp)))
    distractor_records = []
    for i in range(n_distractors):
        img = rng.integers(0, 256, size=(size, size), dtype=np.uint8)
        dp = tmp_path / f"d{i:02d}.pgm"
        write_pgm(dp, img)
        distractor_records.append(ManifestRecord(f"d{i:02d}", "distractor_face", str(dp)))
    return (DatasetManifest(records=tuple(records)),
            DatasetManifest(records=tuple(distractor_records)))


def _config(**overrides):
    data = {
        "seed": 5,
        "hyper": {"tau": 8, "max_iters": 6},
        "features": {"kind": "raw", "raw_size": 8},
        "augmentation": {"flip": True, "brightness_deltas": [20],
                         "contrast_factors": [1.1]},
        "protocol": {"protocol": "P1", "n_folds": 5},
    }
    data.update(overrides)
    return config_from_dict(data)


class TestRunProtocol:
    def test_p1_toy_run_shapes_and_terminal_cmc(self, tmp_path):
        manifest, _ = _make_dataset(tmp_path)
        config = _config()
        report = run_protocol(manifest, config.protocol, config)
        assert report.n_folds == 5
        assert report.gallery_identity_counts == (2,) * 5
        for curve in report.fold_curves:
            assert curve.accuracy_at_rank[-1] == 1.0
            assert len(curve.accuracy_at_rank) == 2

    def test_p2_empty_extended_matches_p1(self, tmp_path):
        manifest, empty_extended = _make_dataset(tmp_path)
        config = _config()
        p1 = run_protocol(manifest, config.protocol, config)
        p2_proto = ProtocolConfig(protocol="P2", n_folds=5,
                                  extended_manifest="given", seed=config.protocol.seed)
        p2 = run_protocol(manifest, p2_proto, config, extended=empty_extended)
        assert p2.fold_rank1 == p1.fold_rank1
        assert p2.gallery_identity_counts == p1.gallery_identity_counts

    def test_p2_gallery_grows_by_distractor_count(self, tmp_path):
        manifest, extended = _make_dataset(tmp_path, n_distractors=6)
        config = _config()
        proto = ProtocolConfig(protocol="P2", n_folds=5,
                               extended_manifest="given", seed=config.protocol.seed)
        report = run_protocol(manifest, proto, config, extended=extended)
        assert report.gallery_identity_counts == (2 + 6,) * 5

    def test_p1_ignores_distractors(self, tmp_path):
        manifest, extended = _make_dataset(tmp_path, n_distractors=6)
        config = _config()
        report = run_protocol(manifest, config.protocol, config, extended=extended)
        assert report.gallery_identity_counts == (2,) * 5

    def test_p2_requires_extended_manifest(self, tmp_path):
        manifest, _ = _make_dataset(tmp_path)
        config = _config()
        proto = ProtocolConfig(protocol="P2", n_folds=5,
                               extended_manifest="given", seed=0)
        with pytest.raises(ConfigError):
            run_protocol(manifest, proto, config, extended=None)

    def test_reproducible_bitwise(self, tmp_path):
        manifest, _ = _make_dataset(tmp_path)
        config = _config()
        a = run_protocol(manifest, config.protocol, config)
        b = run_protocol(manifest, config.protocol, config)
        assert a.fold_rank1 == b.fold_rank1
        for ca, cb in zip(a.fold_curves, b.fold_curves):
            assert ca.accuracy_at_rank == cb.accuracy_at_rank
        for fa, fb in zip(a.fit_reports, b.fit_reports):
            assert fa.objective_trace == fb.objective_trace

    def test_hog_feature_space(self, tmp_path):
        manifest, _ = _make_dataset(tmp_path, n_subjects=6, size=20)
        config = _config(
            features={"kind": "hog",
                      "hog": {"canonical_size": 16, "cell_size": 8}},
            hyper={"tau": 10, "max_iters": 4},
            protocol={"protocol": "P1", "n_folds": 3},
        )
        report = run_protocol(manifest, config.protocol, config)
        assert report.n_folds == 3
        assert all(c.accuracy_at_rank[-1] == 1.0 for c in report.fold_curves)


class TestTrainAndGallery:
    def test_train_uses_augmented_variant_counts(self, tmp_path):
        manifest, _ = _make_dataset(tmp_path, n_subjects=4)
        config = _config(hyper={"tau": 8, "max_iters": 3})
        model, report = train_on_manifest(manifest, config)
        assert model.feature_dim == 64  # raw 8x8
        assert model.feature_space_tag == "raw-8"
        assert report.iterations_run >= 1

    def test_default_tau_resolves_to_half_dimension(self, tmp_path):
        manifest, _ = _make_dataset(tmp_path, n_subjects=4)
        config = _config(hyper={"max_iters": 3})
        model, _ = train_on_manifest(manifest, config)
        assert model.hyper.tau == 32  # ceil(0.5 * 64)

    def test_gallery_from_manifest_enrolls_faces_and_distractors(self, tmp_path):
        manifest, extended = _make_dataset(tmp_path, n_subjects=4, n_distractors=3)
        config = _config(hyper={"tau": 8, "max_iters": 3})
        model, _ = train_on_manifest(manifest, config)
        gallery = gallery_from_manifest(model, manifest)
        assert len(gallery.identities) == 4
        both = DatasetManifest(records=manifest.records + extended.records)
        gallery2 = gallery_from_manifest(model, both)
        assert len(gallery2.identities) == 7


class TestFeatureSpecTag:
    def test_raw_tag_round_trip(self):
        spec = FeatureSpec(kind="raw", raw_size=32)
        again = FeatureSpec.from_tag(spec.tag)
        assert again.kind == "raw" and again.raw_size == 32

    def test_hog_tag_round_trip(self):
        spec = FeatureSpec(kind="hog", hog=HogParams(canonical_size=32, cell_size=4,
                                                     block_size=2, block_stride=2,
                                                     orientation_bins=6, clip=0.3))
        again = FeatureSpec.from_tag(spec.tag)
        assert again.hog == spec.hog

    def test_precomputed_tag_round_trip(self):
        assert FeatureSpec.from_tag("precomputed").kind == "precomputed"

    def test_augmentation_pairing_is_index_aligned(self, tmp_path):
        # each training column pairs skull variant j with face variant j
        manifest, _ = _make_dataset(tmp_path, n_subjects=2)
        config = _config(hyper={"tau": 8, "max_iters": 1})
        policy = config.features.augmentation
        assert isinstance(policy, AugmentationPolicy)
        from stmatch.pipeline import _pair_features

        pairs, per_subject = _pair_features(manifest, config.features)
        for pair in pairs:
            skulls, faces = per_subject[pair.subject_id]
            assert len(skulls) == len(faces) == policy.variant_count

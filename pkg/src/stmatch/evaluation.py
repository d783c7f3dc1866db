"""Protocol evaluation: seeded folds, CMC metrics, synthetic paired data.

Protocol P1 runs five-fold cross validation over the mated pairs; each
fold's gallery holds the test subjects' face images.  Protocol P2 enlarges
every fold's gallery with a fixed set of distractor faces.  A seeded
synthetic generator provides desk-scale paired data with a shared latent
factor per subject so the whole pipeline can be exercised without images.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import HyperParams, as_matrix
from .errors import (
    ConfigError,
    DimensionError,
    EmptyInputError,
    NumericError,
    PairingError,
)
from .identification import build_gallery, identify, rank_of_true_match
from .model import FitReport, InitPolicy, fit

PROTOCOLS = ("P1", "P2")
STD_CONVENTION = "population"  # divisor n_folds, labeled in every report


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    train_subjects: tuple[str, ...]
    test_subjects: tuple[str, ...]


@dataclass(frozen=True)
class ProtocolConfig:
    protocol: str = "P1"
    n_folds: int = 5
    extended_manifest: str | None = None
    seed: int = 0

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ConfigError(f"protocol must be one of {PROTOCOLS}, got {self.protocol!r}")
        if not isinstance(self.n_folds, (int, np.integer)) or self.n_folds < 2:
            raise ConfigError(
                f"n_folds must be an integer >= 2 (a single fold leaves no training data), "
                f"got {self.n_folds!r}"
            )


@dataclass(frozen=True)
class CmcCurve:
    """Cumulative match characteristic: accuracy_at_rank[k-1] is rank-k accuracy."""

    accuracy_at_rank: tuple[float, ...]

    def __post_init__(self):
        acc = self.accuracy_at_rank
        if len(acc) == 0:
            raise EmptyInputError("CMC curve needs at least one rank")
        if any(b < a for a, b in zip(acc, acc[1:])):
            raise NumericError("CMC curve must be non-decreasing")
        if any(v < 0.0 or v > 1.0 for v in acc):
            raise NumericError("CMC accuracies must lie in [0, 1]")

    def at_rank(self, k: int) -> float:
        if k < 1 or k > len(self.accuracy_at_rank):
            raise DimensionError(f"rank {k} outside [1, {len(self.accuracy_at_rank)}]")
        return self.accuracy_at_rank[k - 1]


@dataclass(frozen=True)
class EvalReport:
    protocol: str
    n_folds: int
    seed: int
    fold_curves: tuple[CmcCurve, ...]
    fold_rank1: tuple[float, ...]
    fold_rank5: tuple[float, ...]
    mean_rank1: float
    std_rank1: float
    mean_rank5: float
    std_rank5: float
    gallery_identity_counts: tuple[int, ...]
    fit_reports: tuple[FitReport, ...] = field(repr=False, default=())
    std_convention: str = STD_CONVENTION
    config_echo: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class SyntheticConfig:
    """Seeded generator settings: shared latent factors, per-domain mixing."""

    n_subjects: int = 40
    latent_dim: int = 8
    feature_dim: int = 32
    noise_sigma_skull: float = 0.05
    noise_sigma_face: float = 0.05
    seed: int = 7

    def __post_init__(self):
        if self.n_subjects < 1:
            raise ConfigError("n_subjects must be positive")
        if self.latent_dim < 1 or self.feature_dim < 1:
            raise ConfigError("latent_dim and feature_dim must be positive")
        if self.latent_dim > self.feature_dim:
            raise ConfigError(
                f"latent_dim {self.latent_dim} must not exceed feature_dim {self.feature_dim}"
            )
        for name in ("noise_sigma_skull", "noise_sigma_face"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")


def make_folds(subjects, n_folds: int, seed: int) -> list[FoldSplit]:
    """Seeded shuffle followed by a contiguous partition into test sets.

    Fold sizes differ by at most one; the union of the test sets covers all
    subjects exactly once.  The same seed always produces the same splits.
    """
    subjects = [str(s) for s in subjects]
    if len(set(subjects)) != len(subjects):
        raise ConfigError("subjects must be unique")
    if not isinstance(n_folds, (int, np.integer)) or n_folds < 2:
        raise ConfigError(
            "n_folds must be >= 2: with a single fold the training set is empty"
        )
    if n_folds > len(subjects):
        raise ConfigError(f"cannot make {n_folds} folds from {len(subjects)} subjects")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(subjects))
    shuffled = [subjects[i] for i in order]
    base, extra = divmod(len(subjects), n_folds)
    folds = []
    start = 0
    for index in range(n_folds):
        size = base + (1 if index < extra else 0)
        test = tuple(shuffled[start:start + size])
        train = tuple(shuffled[:start] + shuffled[start + size:])
        folds.append(FoldSplit(fold_index=index, train_subjects=train, test_subjects=test))
        start += size
    return folds


def compute_cmc(ranks, n_gallery_identities: int) -> CmcCurve:
    """Fraction of probes whose true identity appears within each rank."""
    ranks = list(ranks)
    if len(ranks) == 0:
        raise EmptyInputError("cannot compute a CMC curve from zero probes")
    if n_gallery_identities < 1:
        raise DimensionError("gallery must contain at least one identity")
    for r in ranks:
        if not isinstance(r, (int, np.integer)) or r < 1 or r > n_gallery_identities:
            raise DimensionError(
                f"rank {r!r} outside [1, {n_gallery_identities}]"
            )
    counts = np.bincount(ranks, minlength=n_gallery_identities + 1)[1:]
    accuracies = np.cumsum(counts) / len(ranks)
    return CmcCurve(accuracy_at_rank=tuple(float(v) for v in accuracies))


def synth_generate(cfg: SyntheticConfig) -> tuple[np.ndarray, np.ndarray, tuple[str, ...]]:
    """Generate mated feature pairs from shared latent factors.

    Per subject a latent vector is drawn once and pushed through two fixed
    seeded mixing matrices (one per domain) with additive Gaussian noise;
    columns are unit-normalized.  Generation is bit-reproducible per seed.
    """
    rng = np.random.default_rng(cfg.seed)
    n, k = cfg.feature_dim, cfg.latent_dim
    mix_skull = rng.standard_normal((n, k))
    mix_face = rng.standard_normal((n, k))
    for name, m in (("skull", mix_skull), ("face", mix_face)):
        if np.linalg.matrix_rank(m) < k:
            raise NumericError(f"{name} mixing matrix is rank-deficient; change the seed")
    x_skull = np.empty((n, cfg.n_subjects))
    x_face = np.empty((n, cfg.n_subjects))
    for i in range(cfg.n_subjects):
        latent = rng.standard_normal(k)
        x_skull[:, i] = mix_skull @ latent + cfg.noise_sigma_skull * rng.standard_normal(n)
        x_face[:, i] = mix_face @ latent + cfg.noise_sigma_face * rng.standard_normal(n)
    for mat in (x_skull, x_face):
        norms = np.linalg.norm(mat, axis=0)
        if np.any(norms == 0.0):
            raise NumericError("degenerate zero column in synthetic data")
        mat /= norms
    labels = tuple(f"s{i:03d}" for i in range(cfg.n_subjects))
    return x_skull, x_face, labels


def _population_std(values) -> float:
    return float(np.std(np.asarray(values, dtype=np.float64)))


def _rank5(curve: CmcCurve) -> float:
    return curve.at_rank(min(5, len(curve.accuracy_at_rank)))


def evaluate_feature_pairs(
    x_skull,
    x_face,
    labels,
    hyper: HyperParams,
    protocol: ProtocolConfig,
    init: InitPolicy = InitPolicy(),
    distractor_features=None,
    distractor_labels=(),
    feature_space_tag: str = "",
    config_echo: dict | None = None,
) -> EvalReport:
    """Cross-validated identification over precomputed feature pairs.

    Column ``i`` of both feature matrices belongs to ``labels[i]``.  Per
    fold the model is fitted on the training pairs, the gallery is built
    from the test subjects' face features (plus all distractors under P2),
    and every test skull column is used as a probe.
    """
    xs = as_matrix(x_skull, "x_skull")
    xd = as_matrix(x_face, "x_face")
    labels = tuple(str(l) for l in labels)
    if xs.shape != xd.shape:
        raise PairingError(f"feature matrices disagree in shape: {xs.shape} vs {xd.shape}")
    if xs.shape[1] != len(labels):
        raise DimensionError(f"{xs.shape[1]} columns but {len(labels)} labels")
    if protocol.protocol == "P2":
        if distractor_features is None:
            raise ConfigError("protocol P2 requires an extended gallery source")
        distractor_labels = tuple(str(l) for l in distractor_labels)
        if len(distractor_labels) != np.shape(distractor_features)[1]:
            raise DimensionError("distractor labels must align with distractor columns")
        collisions = set(distractor_labels) & set(labels)
        if collisions:
            raise ConfigError(
                f"distractor identities collide with mated subjects: {sorted(collisions)}"
            )
    index_of = {label: i for i, label in enumerate(labels)}
    folds = make_folds(labels, protocol.n_folds, protocol.seed)

    fold_curves = []
    fold_rank1 = []
    fold_rank5 = []
    gallery_counts = []
    fit_reports = []
    for split in folds:
        train_idx = [index_of[s] for s in split.train_subjects]
        test_idx = [index_of[s] for s in split.test_subjects]
        model, report = fit(
            xs[:, train_idx], xd[:, train_idx], hyper,
            init=init, feature_space_tag=feature_space_tag,
        )
        fit_reports.append(report)

        gal_feats = xd[:, test_idx]
        gal_labels = list(split.test_subjects)
        if protocol.protocol == "P2" and len(distractor_labels) > 0:
            gal_feats = np.hstack((gal_feats, as_matrix(distractor_features, "distractors")))
            gal_labels.extend(distractor_labels)
        gallery = build_gallery(model, gal_feats, gal_labels)
        n_identities = len(gallery.identities)
        gallery_counts.append(n_identities)

        ranks = []
        for subject, col in zip(split.test_subjects, test_idx):
            ranked = identify(model, xs[:, col], gallery)
            ranks.append(rank_of_true_match(ranked, subject))
        curve = compute_cmc(ranks, n_identities)
        fold_curves.append(curve)
        fold_rank1.append(curve.at_rank(1))
        fold_rank5.append(_rank5(curve))

    return EvalReport(
        protocol=protocol.protocol,
        n_folds=protocol.n_folds,
        seed=protocol.seed,
        fold_curves=tuple(fold_curves),
        fold_rank1=tuple(fold_rank1),
        fold_rank5=tuple(fold_rank5),
        mean_rank1=float(np.mean(fold_rank1)),
        std_rank1=_population_std(fold_rank1),
        mean_rank5=float(np.mean(fold_rank5)),
        std_rank5=_population_std(fold_rank5),
        gallery_identity_counts=tuple(gallery_counts),
        fit_reports=tuple(fit_reports),
        config_echo=dict(config_echo or {}),
    )


def raw_nearest_neighbor_rank1(x_skull, x_face, labels,
                               protocol: ProtocolConfig) -> float:
    """Training-free baseline: mean rank-1 of cross-domain nearest neighbor
    on the raw features, over the same folds the model evaluation uses."""
    xs = as_matrix(x_skull, "x_skull")
    xd = as_matrix(x_face, "x_face")
    labels = tuple(str(l) for l in labels)
    index_of = {label: i for i, label in enumerate(labels)}
    folds = make_folds(labels, protocol.n_folds, protocol.seed)
    fold_acc = []
    for split in folds:
        test_idx = [index_of[s] for s in split.test_subjects]
        gallery = xd[:, test_idx]
        hits = 0
        for position, col in enumerate(test_idx):
            diffs = gallery - xs[:, col][:, None]
            dists = np.sum(diffs * diffs, axis=0)
            if int(np.argmin(dists)) == position:
                hits += 1
        fold_acc.append(hits / len(test_idx))
    return float(np.mean(fold_acc))

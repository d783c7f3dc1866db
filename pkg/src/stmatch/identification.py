"""Closed-set identification: encoded galleries and least-distance ranking.

A probe is encoded through the fitted transform and compared against every
enrolled code by squared Euclidean distance.  Each identity is scored by its
best-matching enrolled image, and the ranked list orders identities by
ascending distance (ties broken lexicographically for determinism).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_matrix
from .errors import (
    DimensionError,
    EmptyInputError,
    FeatureSpaceError,
    NotEnrolledError,
)
from .model import SharedTransformModel, encode


@dataclass(frozen=True)
class Gallery:
    """Encoded enrollment set: one code column per enrolled image."""

    codes: np.ndarray
    labels: tuple[str, ...]
    feature_space_tag: str = ""

    def __post_init__(self):
        codes = as_matrix(self.codes, "codes")
        if codes.shape[1] != len(self.labels):
            raise DimensionError(
                f"gallery has {codes.shape[1]} code columns but {len(self.labels)} labels"
            )
        if len(self.labels) == 0:
            raise EmptyInputError("gallery must enroll at least one image")
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "labels", tuple(str(l) for l in self.labels))

    @property
    def identities(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for label in self.labels:
            seen.setdefault(label, None)
        return tuple(seen)


@dataclass(frozen=True)
class RankedList:
    """Identities ordered by ascending distance; one entry per identity."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        if len(self.entries) == 0:
            raise EmptyInputError("ranked list cannot be empty")
        dists = [d for _, d in self.entries]
        if any(not np.isfinite(d) or d < 0 for d in dists):
            raise DimensionError("distances must be finite and >= 0")
        if any(b < a for a, b in zip(dists, dists[1:])):
            raise DimensionError("distances must be non-decreasing")
        ids = [i for i, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise DimensionError("each identity may appear only once")

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def identities(self) -> tuple[str, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def distances(self) -> tuple[float, ...]:
        return tuple(d for _, d in self.entries)

    @property
    def best_identity(self) -> str:
        return self.entries[0][0]


def build_gallery(model: SharedTransformModel, gallery_features, labels,
                  features_tag: str | None = None) -> Gallery:
    """Encode gallery feature columns and attach their identity labels."""
    feats = as_matrix(gallery_features, "gallery_features")
    labels = tuple(str(l) for l in labels)
    if feats.shape[1] != len(labels):
        raise DimensionError(
            f"{feats.shape[1]} gallery columns but {len(labels)} labels"
        )
    if feats.shape[0] != model.feature_dim:
        raise FeatureSpaceError(
            f"gallery features have {feats.shape[0]} rows, model expects {model.feature_dim}"
        )
    if features_tag is not None and features_tag != model.feature_space_tag:
        raise FeatureSpaceError(
            f"feature tag {features_tag!r} does not match the model's "
            f"{model.feature_space_tag!r}"
        )
    codes = encode(model, feats)
    return Gallery(codes=codes, labels=labels,
                   feature_space_tag=model.feature_space_tag)


def identify(model: SharedTransformModel, probe_feature,
             gallery: Gallery) -> RankedList:
    """Rank gallery identities against one probe.

    The probe is encoded through the model, squared Euclidean distances to
    every enrolled code are computed, each identity keeps its minimum, and
    identities are sorted by (distance, identity).
    """
    if gallery.feature_space_tag != model.feature_space_tag:
        raise FeatureSpaceError(
            f"gallery was built in feature space {gallery.feature_space_tag!r}, "
            f"model expects {model.feature_space_tag!r}"
        )
    probe = np.asarray(probe_feature, dtype=np.float64).ravel()
    if probe.shape[0] != model.feature_dim:
        raise DimensionError(
            f"probe feature length {probe.shape[0]} != model dimension {model.feature_dim}"
        )
    if not np.all(np.isfinite(probe)):
        raise DimensionError("probe feature contains non-finite entries")
    code = encode(model, probe)
    diffs = gallery.codes - code[:, None]
    dists = np.sum(diffs * diffs, axis=0)
    best: dict[str, float] = {}
    for label, dist in zip(gallery.labels, dists):
        d = float(dist)
        if label not in best or d < best[label]:
            best[label] = d
    ordered = sorted(best.items(), key=lambda item: (item[1], item[0]))
    return RankedList(entries=tuple(ordered))


def rank_of_true_match(ranked: RankedList, true_identity: str) -> int:
    """1-based position of ``true_identity`` in the ranked list."""
    for position, (identity, _) in enumerate(ranked.entries, start=1):
        if identity == str(true_identity):
            return position
    raise NotEnrolledError(f"identity {true_identity!r} is not in the ranked list")

"""Run configuration: JSON in, validated dataclasses out, full echo back.

Defaults shipped here are documented starting points, not tuned values:
lambda1 = lambda2 = 1.0, lambda3 = 0.5, tau = ceil(0.5 * n) resolved at fit
time, 50 iterations, rel_tol 1e-6.  Every output artifact embeds the echoed
configuration and seed so runs can be reproduced from their outputs alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import HyperParams
from .errors import ConfigError, FeatureSpaceError
from .evaluation import ProtocolConfig, SyntheticConfig
from .features import AugmentationPolicy, HogParams, extract_hog, extract_raw
from .model import InitPolicy
from .pgm import load_image

FEATURE_KINDS = ("raw", "hog", "precomputed")


@dataclass(frozen=True)
class HyperSettings:
    """HyperParams with an optional tau (resolved once the dimension is known)."""

    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 0.5
    tau: int | None = None
    max_iters: int = 50
    rel_tol: float = 1e-6

    def resolve(self, feature_dim: int) -> HyperParams:
        tau = self.tau if self.tau is not None else math.ceil(0.5 * feature_dim)
        return HyperParams(
            tau=int(tau),
            lambda1=self.lambda1,
            lambda2=self.lambda2,
            lambda3=self.lambda3,
            max_iters=self.max_iters,
            rel_tol=self.rel_tol,
        )


@dataclass(frozen=True)
class FeatureSpec:
    """Which feature extractor feeds the model, plus training augmentation."""

    kind: str = "raw"
    raw_size: int = 64
    hog: HogParams = HogParams()
    augmentation: AugmentationPolicy = AugmentationPolicy()

    def __post_init__(self):
        if self.kind not in FEATURE_KINDS:
            raise ConfigError(f"feature kind must be one of {FEATURE_KINDS}, got {self.kind!r}")
        if self.kind == "raw" and self.raw_size < 1:
            raise ConfigError(f"raw_size must be positive, got {self.raw_size}")

    @property
    def tag(self) -> str:
        if self.kind == "raw":
            return f"raw-{self.raw_size}"
        if self.kind == "hog":
            h = self.hog
            return (f"hog-{h.canonical_size}-c{h.cell_size}-b{h.block_size}"
                    f"-s{h.block_stride}-o{h.orientation_bins}-cl{h.clip:g}")
        return "precomputed"

    def extract_from_image(self, img: np.ndarray) -> np.ndarray:
        if self.kind == "raw":
            return extract_raw(img, self.raw_size)
        if self.kind == "hog":
            return extract_hog(img, self.hog)
        raise FeatureSpaceError("precomputed features cannot be extracted from images")

    def load_and_extract(self, path) -> np.ndarray:
        if self.kind == "precomputed":
            vec = np.load(path)
            vec = np.asarray(vec, dtype=np.float64).ravel()
            if vec.size == 0 or not np.all(np.isfinite(vec)):
                raise FeatureSpaceError(f"{path}: empty or non-finite feature vector")
            return vec
        return self.extract_from_image(load_image(path))

    @property
    def supports_augmentation(self) -> bool:
        return self.kind != "precomputed"

    @staticmethod
    def from_tag(tag: str) -> "FeatureSpec":
        """Rebuild the extractor configuration a model was trained with."""
        if tag.startswith("raw-"):
            return FeatureSpec(kind="raw", raw_size=int(tag.split("-")[1]))
        if tag.startswith("hog-"):
            parts = tag.split("-")
            try:
                size = int(parts[1])
                fields = {p[0]: p[1:] for p in parts[2:] if not p.startswith("cl")}
                clip = next(p[2:] for p in parts[2:] if p.startswith("cl"))
                hog = HogParams(
                    cell_size=int(fields["c"]),
                    block_size=int(fields["b"]),
                    block_stride=int(fields["s"]),
                    orientation_bins=int(fields["o"]),
                    clip=float(clip),
                    canonical_size=size,
                )
            except (KeyError, ValueError, StopIteration) as exc:
                raise FeatureSpaceError(f"cannot parse feature tag {tag!r}") from exc
            return FeatureSpec(kind="hog", hog=hog)
        if tag == "precomputed":
            return FeatureSpec(kind="precomputed")
        raise FeatureSpaceError(f"unknown feature space tag {tag!r}")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    out_dir: str | None = None
    hyper: HyperSettings = HyperSettings()
    features: FeatureSpec = FeatureSpec()
    protocol: ProtocolConfig = ProtocolConfig()
    synthetic: SyntheticConfig = SyntheticConfig()
    init: InitPolicy = InitPolicy()
    extra: dict = field(default_factory=dict, repr=False)

    def echo_dict(self) -> dict:
        """Canonical JSON-ready dump of every setting, for provenance."""
        h = self.hyper
        f = self.features
        hp = f.hog
        a = f.augmentation
        p = self.protocol
        s = self.synthetic
        return {
            "seed": self.seed,
            "out_dir": self.out_dir,
            "hyper": {
                "lambda1": h.lambda1, "lambda2": h.lambda2, "lambda3": h.lambda3,
                "tau": h.tau, "max_iters": h.max_iters, "rel_tol": h.rel_tol,
            },
            "features": {
                "kind": f.kind,
                "raw_size": f.raw_size,
                "hog": {
                    "cell_size": hp.cell_size, "block_size": hp.block_size,
                    "block_stride": hp.block_stride,
                    "orientation_bins": hp.orientation_bins,
                    "clip": hp.clip, "canonical_size": hp.canonical_size,
                },
            },
            "augmentation": {
                "flip": a.flip,
                "brightness_deltas": list(a.brightness_deltas),
                "contrast_factors": list(a.contrast_factors),
            },
            "protocol": {
                "protocol": p.protocol, "n_folds": p.n_folds,
                "extended_manifest": p.extended_manifest, "seed": p.seed,
            },
            "synthetic": {
                "n_subjects": s.n_subjects, "latent_dim": s.latent_dim,
                "feature_dim": s.feature_dim,
                "noise_sigma_skull": s.noise_sigma_skull,
                "noise_sigma_face": s.noise_sigma_face, "seed": s.seed,
            },
            "init": {"kind": self.init.kind, "seed": self.init.seed},
            "std_convention": "population",
        }

    def echo_json(self) -> str:
        return json.dumps(self.echo_dict(), sort_keys=True, separators=(",", ":"))


def _take(section: dict, key, default):
    return section[key] if key in section else default


def _check_keys(section: dict, allowed, where: str):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown {where} keys: {sorted(unknown)}")


def config_from_dict(data: dict, seed_override: int | None = None,
                     out_override: str | None = None) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("run configuration must be a JSON object")
    _check_keys(data, ("seed", "out_dir", "hyper", "features", "augmentation",
                       "protocol", "synthetic", "init"), "config")
    seed = seed_override if seed_override is not None else int(_take(data, "seed", 0))
    out_dir = out_override if out_override is not None else _take(data, "out_dir", None)

    hyper_d = _take(data, "hyper", {})
    _check_keys(hyper_d, ("lambda1", "lambda2", "lambda3", "tau", "max_iters", "rel_tol"), "hyper")
    tau = _take(hyper_d, "tau", None)
    hyper = HyperSettings(
        lambda1=float(_take(hyper_d, "lambda1", 1.0)),
        lambda2=float(_take(hyper_d, "lambda2", 1.0)),
        lambda3=float(_take(hyper_d, "lambda3", 0.5)),
        tau=None if tau is None else int(tau),
        max_iters=int(_take(hyper_d, "max_iters", 50)),
        rel_tol=float(_take(hyper_d, "rel_tol", 1e-6)),
    )

    feat_d = _take(data, "features", {})
    _check_keys(feat_d, ("kind", "raw_size", "hog"), "features")
    hog_d = _take(feat_d, "hog", {})
    _check_keys(hog_d, ("cell_size", "block_size", "block_stride",
                        "orientation_bins", "clip", "canonical_size"), "hog")
    hog = HogParams(
        cell_size=int(_take(hog_d, "cell_size", 8)),
        block_size=int(_take(hog_d, "block_size", 2)),
        block_stride=int(_take(hog_d, "block_stride", 1)),
        orientation_bins=int(_take(hog_d, "orientation_bins", 9)),
        clip=float(_take(hog_d, "clip", 0.2)),
        canonical_size=int(_take(hog_d, "canonical_size", 64)),
    )
    aug_d = _take(data, "augmentation", {})
    _check_keys(aug_d, ("flip", "brightness_deltas", "contrast_factors"), "augmentation")
    augmentation = AugmentationPolicy(
        flip=bool(_take(aug_d, "flip", True)),
        brightness_deltas=tuple(int(v) for v in _take(aug_d, "brightness_deltas", (25, -25))),
        contrast_factors=tuple(float(v) for v in _take(aug_d, "contrast_factors", (1.25, 0.8))),
    )
    features = FeatureSpec(
        kind=str(_take(feat_d, "kind", "raw")),
        raw_size=int(_take(feat_d, "raw_size", 64)),
        hog=hog,
        augmentation=augmentation,
    )

    proto_d = _take(data, "protocol", {})
    _check_keys(proto_d, ("protocol", "n_folds", "extended_manifest", "seed"), "protocol")
    protocol = ProtocolConfig(
        protocol=str(_take(proto_d, "protocol", "P1")),
        n_folds=int(_take(proto_d, "n_folds", 5)),
        extended_manifest=_take(proto_d, "extended_manifest", None),
        seed=int(_take(proto_d, "seed", seed)),
    )

    synth_d = _take(data, "synthetic", {})
    _check_keys(synth_d, ("n_subjects", "latent_dim", "feature_dim",
                          "noise_sigma", "noise_sigma_skull", "noise_sigma_face", "seed"),
                "synthetic")
    sigma = float(_take(synth_d, "noise_sigma", 0.05))
    synthetic = SyntheticConfig(
        n_subjects=int(_take(synth_d, "n_subjects", 40)),
        latent_dim=int(_take(synth_d, "latent_dim", 8)),
        feature_dim=int(_take(synth_d, "feature_dim", 32)),
        noise_sigma_skull=float(_take(synth_d, "noise_sigma_skull", sigma)),
        noise_sigma_face=float(_take(synth_d, "noise_sigma_face", sigma)),
        seed=int(_take(synth_d, "seed", 7)),
    )

    init_d = _take(data, "init", {})
    _check_keys(init_d, ("kind", "seed"), "init")
    init = InitPolicy(
        kind=str(_take(init_d, "kind", "identity")),
        seed=int(_take(init_d, "seed", 0)),
    )
    return RunConfig(seed=seed, out_dir=out_dir, hyper=hyper, features=features,
                     protocol=protocol, synthetic=synthetic, init=init)


def load_config(path=None, seed_override: int | None = None,
                out_override: str | None = None) -> RunConfig:
    """Load a JSON run configuration; ``path=None`` gives pure defaults."""
    if path is None:
        data: dict = {}
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return config_from_dict(data, seed_override=seed_override, out_override=out_override)

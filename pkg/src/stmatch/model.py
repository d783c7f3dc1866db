"""Fitting the shared transform over paired domains, and encoding through it.

The fit alternates three exact block minimizers: the closed-form transform
update on the horizontally stacked domains, then the skull-code update, then
the face-code update (each code step uses the latest values of the other
blocks).  Every step can only lower the joint objective, so the reported
objective trace is non-increasing up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    HyperParams,
    SparsityPolicy,
    as_matrix,
    _as_square,
    hard_threshold,
    project_columns,
    shared_objective,
    update_transform,
)
from .errors import (
    DimensionError,
    EmptyInputError,
    FeatureSpaceError,
    IllPosedError,
    NumericError,
    PairingError,
)

INIT_KINDS = ("identity", "random-orthonormal")


@dataclass(frozen=True)
class InitPolicy:
    """How the transform is initialized before the first iteration."""

    kind: str = "identity"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in INIT_KINDS:
            raise IllPosedError(
                f"init kind must be one of {INIT_KINDS}, got {self.kind!r}"
            )

    def build(self, n: int) -> np.ndarray:
        if self.kind == "identity":
            return np.eye(n)
        rng = np.random.default_rng(self.seed)
        q, r = np.linalg.qr(rng.standard_normal((n, n)))
        # fix the sign convention so the factorization is unique
        q = q * np.sign(np.diag(r))
        return q


@dataclass(frozen=True)
class SharedTransformModel:
    """A fitted n x n shared transform plus the settings that produced it.

    The model carries exactly ``feature_dim ** 2`` learned parameters; there
    are no per-domain transforms.
    """

    transform: np.ndarray
    hyper: HyperParams
    feature_dim: int
    feature_space_tag: str = ""

    def __post_init__(self):
        t = _as_square(self.transform, name="transform")
        if t.shape[0] != self.feature_dim:
            raise DimensionError(
                f"transform side {t.shape[0]} != feature_dim {self.feature_dim}"
            )
        sign, logdet = np.linalg.slogdet(t)
        if sign == 0 or not np.isfinite(logdet):
            raise NumericError("model transform must be nonsingular")
        object.__setattr__(self, "transform", t)

    @property
    def param_count(self) -> int:
        return int(self.transform.size)


@dataclass(frozen=True)
class FitReport:
    """Optimization trace of one fit: objective per completed outer iteration."""

    objective_trace: tuple[float, ...]
    iterations_run: int
    converged: bool
    final_objective: float
    final_code_skull: np.ndarray | None = field(default=None, repr=False)
    final_code_face: np.ndarray | None = field(default=None, repr=False)


def _coupled_code_update(transform, data, partner_codes, lambda3, policy):
    t = _as_square(transform)
    x = as_matrix(data, "data")
    partner = as_matrix(partner_codes, "partner_codes")
    if x.shape[0] != t.shape[0]:
        raise DimensionError(f"data rows {x.shape[0]} != transform side {t.shape[0]}")
    if partner.shape != (t.shape[0], x.shape[1]):
        raise DimensionError(
            f"partner codes must be {t.shape[0]} x {x.shape[1]}, got {partner.shape}"
        )
    if not np.isfinite(lambda3) or lambda3 < 0:
        raise IllPosedError(f"lambda3 must be finite and >= 0, got {lambda3!r}")
    # Entrywise the objective is (b - v)^2 + lambda3 (c - v)^2 with uniform
    # curvature 1 + lambda3, so the weighted average is the unconstrained
    # minimizer and keeping the tau largest |minimizer| entries per column
    # is globally optimal for the tau-sparse projection.
    target = (project_columns(t, x) + lambda3 * partner) / (1.0 + lambda3)
    return hard_threshold(target, policy)


def update_code_skull(transform, x_skull, codes_face, lambda3,
                      policy: SparsityPolicy) -> np.ndarray:
    """Exact tau-sparse minimizer of the skull-code block:
    ``min_A ||T X_s - A||_F^2 + lambda3 ||A_face - A||_F^2`` per column."""
    return _coupled_code_update(transform, x_skull, codes_face, lambda3, policy)


def update_code_face(transform, x_face, codes_skull, lambda3,
                     policy: SparsityPolicy) -> np.ndarray:
    """Exact tau-sparse minimizer of the face-code block; the formula is
    symmetric to :func:`update_code_skull` with the domain roles swapped."""
    return _coupled_code_update(transform, x_face, codes_skull, lambda3, policy)


def fit(x_skull, x_face, hyper: HyperParams,
        init: InitPolicy = InitPolicy(),
        feature_space_tag: str = "") -> tuple[SharedTransformModel, FitReport]:
    """Fit the shared transform on mated feature pairs.

    ``x_skull`` and ``x_face`` are each ``n x N`` with column ``i`` of both
    matrices belonging to subject ``i``.  Returns the fitted model and a
    report whose objective trace has one entry per completed outer
    iteration.  The result is a pure function of the inputs: rerunning with
    identical arguments reproduces the model bit for bit.
    """
    xs = as_matrix(x_skull, "x_skull")
    xd = as_matrix(x_face, "x_face")
    if xs.size == 0 or xd.size == 0:
        raise EmptyInputError("fit requires non-empty data matrices")
    if xs.shape[0] != xd.shape[0]:
        raise DimensionError(
            f"domains must share the feature dimension, got {xs.shape[0]} and {xd.shape[0]}"
        )
    if xs.shape[1] != xd.shape[1]:
        raise PairingError(
            f"mated pairs require equal column counts, got {xs.shape[1]} and {xd.shape[1]}"
        )
    n = xs.shape[0]
    if hyper.tau > n:
        raise DimensionError(f"tau={hyper.tau} exceeds the feature dimension {n}")
    if hyper.lambda1 <= 0 or hyper.lambda2 <= 0:
        raise IllPosedError("fit requires lambda1 > 0 and lambda2 > 0")

    policy = hyper.sparsity_policy
    transform = init.build(n)
    codes_s = hard_threshold(project_columns(transform, xs), policy)
    codes_d = hard_threshold(project_columns(transform, xd), policy)

    stacked_x = np.hstack((xs, xd))
    trace: list[float] = []
    converged = False
    for _ in range(hyper.max_iters):
        transform = update_transform(
            stacked_x, np.hstack((codes_s, codes_d)), hyper.lambda1, hyper.lambda2
        )
        codes_s = update_code_skull(transform, xs, codes_d, hyper.lambda3, policy)
        codes_d = update_code_face(transform, xd, codes_s, hyper.lambda3, policy)
        objective = shared_objective(transform, xs, xd, codes_s, codes_d, hyper)
        trace.append(objective)
        if len(trace) >= 2:
            prev = trace[-2]
            if abs(prev - objective) <= hyper.rel_tol * max(1.0, abs(prev)):
                converged = True
                break

    model = SharedTransformModel(
        transform=transform,
        hyper=hyper,
        feature_dim=n,
        feature_space_tag=feature_space_tag,
    )
    report = FitReport(
        objective_trace=tuple(trace),
        iterations_run=len(trace),
        converged=converged,
        final_objective=trace[-1],
        final_code_skull=codes_s,
        final_code_face=codes_d,
    )
    return model, report


def encode(model: SharedTransformModel, x) -> np.ndarray:
    """Project features through the fitted transform and sparsify.

    Accepts an ``n x N`` matrix or a single length-``n`` vector (the probe
    case); the output keeps the input's dimensionality.  Every encoded
    column has at most ``model.hyper.tau`` nonzeros.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[:, None]
    arr = as_matrix(arr, "x")
    if arr.shape[0] != model.feature_dim:
        raise FeatureSpaceError(
            f"features have {arr.shape[0]} rows, model expects {model.feature_dim}"
        )
    codes = hard_threshold(project_columns(model.transform, arr), model.hyper.sparsity_policy)
    return codes[:, 0] if single else codes

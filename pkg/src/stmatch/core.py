"""Core matrix operations for sparsifying-transform learning.

Data matrices hold one sample per column (shape ``n x N``).  Everything is
computed in float64, inputs are validated to be finite, and all public
operations are pure functions of their arguments.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import threshold_columns
from .errors import DimensionError, IllPosedError, NumericError, PairingError


class SingularTransformWarning(RuntimeWarning):
    """Emitted when an objective is evaluated at a singular transform."""


class SparsityScope(Enum):
    PER_COLUMN = "per-column"


@dataclass(frozen=True)
class SparsityPolicy:
    """Sparsity budget: at most ``tau`` nonzero entries per column."""

    tau: int
    scope: SparsityScope = SparsityScope.PER_COLUMN

    def __post_init__(self):
        if not isinstance(self.tau, (int, np.integer)) or self.tau < 1:
            raise IllPosedError(f"tau must be a positive integer, got {self.tau!r}")
        if self.scope is not SparsityScope.PER_COLUMN:
            raise IllPosedError(f"unsupported sparsity scope {self.scope!r}")


@dataclass(frozen=True)
class HyperParams:
    """Weights and controls for the coupled transform-learning objective.

    ``lambda1`` scales the Frobenius penalty on the transform, ``lambda2``
    the log-determinant penalty (both must be strictly positive for the
    transform update to be well-posed), ``lambda3`` the intra-class coupling
    between the two domains' codes, and ``tau`` is the per-column sparsity
    budget.  ``max_iters``/``rel_tol`` control the outer loop.
    """

    tau: int
    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda3: float = 0.5
    max_iters: int = 50
    rel_tol: float = 1e-6

    def __post_init__(self):
        if not isinstance(self.tau, (int, np.integer)) or self.tau < 1:
            raise IllPosedError(f"tau must be a positive integer, got {self.tau!r}")
        for name in ("lambda1", "lambda2", "lambda3"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise IllPosedError(f"{name} must be finite and >= 0, got {value!r}")
        if not isinstance(self.max_iters, (int, np.integer)) or self.max_iters < 1:
            raise IllPosedError(f"max_iters must be a positive integer, got {self.max_iters!r}")
        if not np.isfinite(self.rel_tol) or self.rel_tol <= 0:
            raise IllPosedError(f"rel_tol must be positive, got {self.rel_tol!r}")

    @property
    def sparsity_policy(self) -> SparsityPolicy:
        return SparsityPolicy(tau=int(self.tau))


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Validate ``x`` as a finite 2-D float64 matrix with positive dimensions."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"{name} contains non-finite entries")
    return arr


def _as_square(t, n_expected: int | None = None, name: str = "transform") -> np.ndarray:
    t = as_matrix(t, name)
    if t.shape[0] != t.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {t.shape}")
    if n_expected is not None and t.shape[0] != n_expected:
        raise DimensionError(f"{name} has side {t.shape[0]}, expected {n_expected}")
    return t


def project_columns(transform, x) -> np.ndarray:
    """Column-by-column product ``transform @ x``.

    Computing each column independently keeps a column's bits identical no
    matter which batch it arrives in, so encoding one probe and encoding it
    inside a gallery matrix give the same code (batched BLAS products may
    round differently for different widths).
    """
    out = np.empty_like(x)
    for j in range(x.shape[1]):
        out[:, j] = transform @ x[:, j]
    return out


def hard_threshold(m, policy: SparsityPolicy) -> np.ndarray:
    """Keep the ``policy.tau`` largest-magnitude entries of every column.

    Kept entries are copied verbatim; the rest become zero.  Equal magnitudes
    are resolved toward the smaller row index so the result is deterministic
    across platforms and backends.
    """
    mat = as_matrix(m, "m")
    if policy.tau > mat.shape[0]:
        raise DimensionError(
            f"tau={policy.tau} exceeds the number of rows ({mat.shape[0]})"
        )
    return threshold_columns(mat, int(policy.tau))


def _log_abs_det(t) -> float:
    sign, logabsdet = np.linalg.slogdet(t)
    if sign == 0 or not np.isfinite(logabsdet):
        return -np.inf
    return float(logabsdet)


def tl_objective(transform, x, a, lambda1: float, lambda2: float) -> float:
    """Transform-learning objective
    ``||T X - A||_F^2 + lambda1 ||T||_F^2 - lambda2 log|det T|``.

    Returns ``+inf`` (with a :class:`SingularTransformWarning`) when the
    transform is singular, so callers never see a silent ``-inf``/NaN.
    """
    t = _as_square(transform)
    x = as_matrix(x, "x")
    a = as_matrix(a, "a")
    if x.shape[0] != t.shape[0] or a.shape != x.shape:
        raise DimensionError(
            f"incompatible shapes: transform {t.shape}, x {x.shape}, a {a.shape}"
        )
    if lambda1 < 0 or lambda2 < 0:
        raise IllPosedError("lambda1 and lambda2 must be >= 0")
    logdet = _log_abs_det(t)
    if logdet == -np.inf:
        warnings.warn(
            "objective evaluated at a singular transform; returning +inf",
            SingularTransformWarning,
            stacklevel=2,
        )
        return float("inf")
    resid = t @ x - a
    return float(
        np.sum(resid * resid) + lambda1 * np.sum(t * t) - lambda2 * logdet
    )


def shared_objective(transform, x_skull, x_face, codes_skull, codes_face,
                     hyper: HyperParams) -> float:
    """Coupled two-domain objective: both domains' fit residuals, the
    transform regularizers, and ``lambda3`` times the squared code distance."""
    t = _as_square(transform)
    xs = as_matrix(x_skull, "x_skull")
    xd = as_matrix(x_face, "x_face")
    a_s = as_matrix(codes_skull, "codes_skull")
    a_d = as_matrix(codes_face, "codes_face")
    if xs.shape[1] != xd.shape[1]:
        raise PairingError(
            f"mated pairs require equal column counts, got {xs.shape[1]} and {xd.shape[1]}"
        )
    for name, mat in (("x_skull", xs), ("x_face", xd),
                      ("codes_skull", a_s), ("codes_face", a_d)):
        if mat.shape[0] != t.shape[0]:
            raise DimensionError(f"{name} rows {mat.shape[0]} != transform side {t.shape[0]}")
    if a_s.shape != xs.shape or a_d.shape != xd.shape:
        raise DimensionError("code matrices must match their data matrices in shape")
    logdet = _log_abs_det(t)
    if logdet == -np.inf:
        warnings.warn(
            "objective evaluated at a singular transform; returning +inf",
            SingularTransformWarning,
            stacklevel=2,
        )
        return float("inf")
    resid_s = t @ xs - a_s
    resid_d = t @ xd - a_d
    coupling = a_d - a_s
    return float(
        np.sum(resid_s * resid_s)
        + np.sum(resid_d * resid_d)
        + hyper.lambda1 * np.sum(t * t)
        - hyper.lambda2 * logdet
        + hyper.lambda3 * np.sum(coupling * coupling)
    )


def update_transform(x, a, lambda1: float, lambda2: float) -> np.ndarray:
    """Closed-form minimizer of the transform objective.

    Solves ``min_T ||T X - A||_F^2 + lambda1 ||T||_F^2 - lambda2 log|det T|``
    by factoring ``X X^T + lambda1 I = L L^T`` (Cholesky), taking the full
    SVD ``L^{-1} X A^T = U S V^T`` and returning
    ``T = 0.5 V (S + (S^2 + 2 lambda2 I)^{1/2}) U^T L^{-1}``.

    The scaled singular values are strictly positive for ``lambda2 > 0``,
    so the returned transform is always nonsingular.
    """
    x = as_matrix(x, "x")
    a = as_matrix(a, "a")
    if a.shape != x.shape:
        raise DimensionError(f"a must match x in shape, got {a.shape} vs {x.shape}")
    if lambda1 <= 0 or lambda2 <= 0:
        raise IllPosedError("the transform update requires lambda1 > 0 and lambda2 > 0")
    n = x.shape[0]
    gram = x @ x.T + lambda1 * np.eye(n)
    try:
        chol = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "Cholesky factorization failed; "
            f"cond(X X^T + lambda1 I) = {np.linalg.cond(gram):.3e}"
        ) from exc
    try:
        b = np.linalg.solve(chol, x @ a.T)
        u, s, vt = np.linalg.svd(b)
    except np.linalg.LinAlgError as exc:
        raise NumericError("SVD of the whitened cross-product failed to converge") from exc
    gains = 0.5 * (s + np.sqrt(s * s + 2.0 * lambda2))
    m = (vt.T * gains) @ u.T
    # T = M L^{-1}  ==>  L^T T^T = M^T
    t = np.linalg.solve(chol.T, m.T).T
    if not np.all(np.isfinite(t)):
        raise NumericError("transform update produced non-finite entries")
    return t


def transform_objective_gradient(transform, x, a, lambda1: float,
                                 lambda2: float) -> np.ndarray:
    """Analytic gradient of the transform objective at ``transform``:
    ``2 (T X - A) X^T + 2 lambda1 T - lambda2 T^{-T}``."""
    t = _as_square(transform)
    x = as_matrix(x, "x")
    a = as_matrix(a, "a")
    if a.shape != x.shape or x.shape[0] != t.shape[0]:
        raise DimensionError("gradient requires T (n x n), X and A both (n x N)")
    try:
        t_inv = np.linalg.inv(t)
    except np.linalg.LinAlgError as exc:
        raise NumericError("gradient undefined at a singular transform") from exc
    return 2.0 * (t @ x - a) @ x.T + 2.0 * lambda1 * t - lambda2 * t_inv.T

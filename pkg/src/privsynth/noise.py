"""Gaussian perturbation of numeric tables.

Covers covariance estimation, multivariate normal density evaluation,
zero-mean noise sampling through a symmetric factorization, and the additive
release step ``output = input + noise``. Two noise shapes are supported:

- ``diagonal_scaled`` (default): each attribute gets independent noise with
  standard deviation ``g * sigma_a``, where ``sigma_a`` is that attribute's
  own spread in the input. The level g is therefore a unit-free knob that
  means the same thing for every column.
- ``full_covariance``: noise drawn with covariance ``g^2 * K`` where K is the
  input's estimated covariance matrix.

Labels are never touched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import (
    ConfigInvalid,
    FactorizationFailure,
    SingularCovariance,
    TooFewRecords,
    ValidationError,
)

DIAGONAL_SCALED = "diagonal_scaled"
FULL_COVARIANCE = "full_covariance"

# eigenvalues above this (negative) floor are treated as numerical zeros
_PSD_TOL = -1e-10


@dataclass(frozen=True)
class NoiseConfig:
    """Perturbation parameters: level g >= 0, noise model, seed."""

    level: float
    model: str = DIAGONAL_SCALED
    seed: int = 0

    def __post_init__(self):
        if self.level < 0:
            raise ConfigInvalid(f"noise level must be >= 0, got {self.level}")
        if self.model not in (DIAGONAL_SCALED, FULL_COVARIANCE):
            raise ConfigInvalid(f"unknown noise model {self.model!r}")


@dataclass(frozen=True)
class GaussianModel:
    """Mean vector and symmetric positive semi-definite covariance."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.covariance, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.size, mean.size):
            raise ValidationError("mean must be length d and covariance d x d")
        if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
            raise ValidationError("covariance must be symmetric within 1e-12")
        eigs = np.linalg.eigvalsh(cov)
        if eigs.size and eigs.min() < _PSD_TOL:
            raise ValidationError(f"covariance not PSD: min eigenvalue {eigs.min():.3e}")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.size


def estimate_covariance(data: Dataset) -> GaussianModel:
    """Column means and the population covariance (1/n) sum (x-mu)(x-mu)^T.

    Raises:
        TooFewRecords: fewer than 2 records.
    """
    x = data.features
    n = x.shape[0]
    if n < 2:
        raise TooFewRecords(f"covariance needs >= 2 records, got {n}")
    mean = x.mean(axis=0)
    centered = x - mean
    cov = centered.T @ centered / n
    cov = (cov + cov.T) / 2.0  # kill float asymmetry exactly
    return GaussianModel(mean, cov)


def gaussian_density(model: GaussianModel, x) -> float:
    """Multivariate normal density at ``x``.

    Computes ``(2 pi)^(-d/2) det(K)^(-1/2) exp(-(x-mu)^T K^-1 (x-mu) / 2)``
    through a Cholesky factorization.

    Raises:
        SingularCovariance: covariance is not strictly positive definite.
        DimensionMismatch-family ValidationError: wrong vector length.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.dim,):
        raise ValidationError(f"point of shape {x.shape}, model dimension {model.dim}")
    try:
        chol = np.linalg.cholesky(model.covariance)
    except np.linalg.LinAlgError:
        raise SingularCovariance("covariance must be strictly positive definite") from None
    z = np.linalg.solve(chol, x - model.mean)
    quad = float(z @ z)
    log_det = 2.0 * float(np.sum(np.log(np.diag(chol))))
    log_f = -0.5 * (model.dim * math.log(2.0 * math.pi) + log_det + quad)
    return math.exp(log_f)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Symmetric factor A with A A^T = cov, tolerating tiny negative eigenvalues."""
    eigvals, eigvecs = np.linalg.eigh(cov)
    if eigvals.size and eigvals.min() < _PSD_TOL:
        raise FactorizationFailure(f"matrix is not PSD: min eigenvalue {eigvals.min():.3e}")
    eigvals = np.clip(eigvals, 0.0, None)
    return eigvecs * np.sqrt(eigvals)


def sample_noise(model: GaussianModel, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` zero-mean Gaussian vectors with the model's covariance.

    The model's mean field is ignored: noise is centred by definition.
    Standard normal deviates are pushed through a symmetric factorization of
    the covariance, so any PSD matrix (including rank-deficient ones) works.
    """
    if count < 0:
        raise ConfigInvalid("count must be non-negative")
    factor = _psd_factor(model.covariance)
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((count, model.dim))
    return z @ factor.T


def perturb(data: Dataset, cfg: NoiseConfig) -> Dataset:
    """Release ``data + noise`` with the label column bit-identical.

    With ``level == 0`` the numeric values are returned exactly unchanged.
    In ``diagonal_scaled`` mode attribute ``a`` receives independent noise of
    standard deviation ``level * std(a)``; constant attributes therefore stay
    constant. In ``full_covariance`` mode the noise covariance is
    ``level^2 * K`` with K estimated from the input.
    """
    feats = data.features
    if cfg.level == 0.0:
        return Dataset(data.schema, feats, data.labels, "perturbed")

    if cfg.model == DIAGONAL_SCALED:
        scale = cfg.level * feats.std(axis=0, ddof=0)
        rng = np.random.default_rng(cfg.seed)
        noise = rng.standard_normal(feats.shape) * scale
    else:
        model = estimate_covariance(data)
        noise = sample_noise(
            GaussianModel(np.zeros(model.dim), (cfg.level ** 2) * model.covariance),
            len(data),
            cfg.seed,
        )
    return Dataset(data.schema, feats + noise, data.labels, "perturbed")

"""Matérn-3/2 covariance, window covariance assembly and GP weight precomputation.

The upsampler never solves a linear system per pixel. Because the kernel is
isotropic and every 5x5 window has the same geometry, the vectors
``k_*^T K^{-1}`` (one per fine-pixel offset) and the prior-mean weights
``K^{-1} 1 / (1^T K^{-1} 1)`` are computed once per (ratio, length scale)
and reused for every window of the image.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

SQRT3 = math.sqrt(3.0)
WINDOW_RADIUS = 2
WINDOW_SIZE = 2 * WINDOW_RADIUS + 1
JITTER_LEVELS = (0.0, 1e-10, 1e-8, 1e-6)
SOLVE_RTOL = 1e-8
REFINE_STEPS = 2


class NotPositiveDefinite(np.linalg.LinAlgError):
    pass


class DuplicateCoordinates(ValueError):
    pass


@dataclass(frozen=True)
class KernelConfig:
    """Matérn hyper-parameters.

    ``ell`` is measured in low-resolution pixel units. ``sigma`` and ``nu``
    are fixed at 1 and 3/2.
    """

    ell: float = 20.0
    sigma: float = 1.0
    nu: float = 1.5

    def __post_init__(self):
        if not (self.ell > 0 and math.isfinite(self.ell)):
            raise ValueError(f"length scale must be positive, got {self.ell}")
        if self.sigma != 1.0:
            raise ValueError("output scale is fixed at 1.0")
        if self.nu != 1.5:
            raise ValueError("only nu = 3/2 is supported")


def matern32(distance, cfg: KernelConfig):
    """Matérn covariance with nu = 3/2.

    ``sigma^2 (1 + sqrt(3) d / ell) exp(-sqrt(3) d / ell)``; accepts scalars
    or arrays of non-negative distances.
    """
    d = np.asarray(distance, dtype=np.float64)
    if np.any(d < 0):
        raise ValueError("distances must be non-negative")
    s = SQRT3 * d / cfg.ell
    out = cfg.sigma**2 * (1.0 + s) * np.exp(-s)
    return float(out) if out.ndim == 0 else out


def squared_exponential(distance, ell: float = 1.0):
    d = np.asarray(distance, dtype=np.float64)
    out = np.exp(-0.5 * (d / ell) ** 2)
    return float(out) if out.ndim == 0 else out


def default_length_scale(h: int, w: int) -> float:
    """Resolution-derived length scale ``20 min(1/h, 1/w)`` in pixel units.

    The normalised formula is rescaled by the longer image side so the result
    is expressed in low-resolution pixel units, which makes it 20 for any
    image size.
    """
    if h < 1 or w < 1:
        raise ValueError(f"image dimensions must be positive, got {h}x{w}")
    return 20.0 * min(1.0 / h, 1.0 / w) * max(h, w)


def window_coords(radius: int = WINDOW_RADIUS) -> np.ndarray:
    """Integer (row, col) offsets of the sample window, row-major."""
    r = np.arange(-radius, radius + 1, dtype=np.float64)
    rows, cols = np.meshgrid(r, r, indexing="ij")
    return np.column_stack([rows.ravel(), cols.ravel()])


def fine_offsets(ratio: int) -> np.ndarray:
    """Centres of the ``ratio x ratio`` subcells of the centre pixel, row-major.

    For ratio 4 each axis uses {-3/8, -1/8, 1/8, 3/8}.
    """
    if ratio < 1:
        raise ValueError("ratio must be positive")
    k = np.arange(ratio, dtype=np.float64)
    axis = -0.5 + (2.0 * k + 1.0) / (2.0 * ratio)
    rows, cols = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([rows.ravel(), cols.ravel()])


@dataclass(frozen=True, eq=False)
class CovMatrix:
    entries: np.ndarray
    jitter_used: float = 0.0

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def build_cov_matrix(coords, cfg: KernelConfig) -> CovMatrix:
    coords = np.asarray(coords, dtype=np.float64)
    dist = cdist(coords, coords)
    off_diag = dist[~np.eye(len(coords), dtype=bool)]
    if off_diag.size and off_diag.min() == 0.0:
        raise DuplicateCoordinates("sample coordinates must be distinct")
    entries = matern32(dist, cfg)
    # cdist is symmetric up to rounding; force exact symmetry
    entries = np.triu(entries) + np.triu(entries, 1).T
    entries.setflags(write=False)
    return CovMatrix(entries)


@dataclass(frozen=True, eq=False)
class CholeskyFactor:
    """Lower-triangular factor of ``K + jitter I``."""

    lower: np.ndarray
    jitter_used: float

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = solve_triangular(self.lower, rhs, lower=True, check_finite=False)
        return solve_triangular(self.lower.T, y, lower=False, check_finite=False)


def _refine(k: np.ndarray, factor: CholeskyFactor, rhs: np.ndarray, steps: int = REFINE_STEPS) -> np.ndarray:
    """Solve, then apply iterative refinement with residuals in extended precision.

    With a condition number near 1e6 a plain float64 solve loses about six
    digits; refining against a long-double residual restores them. On
    platforms where long double is plain double this degrades to ordinary
    refinement.
    """
    x = factor.solve(rhs)
    k_ext = k.astype(np.longdouble)
    rhs_ext = rhs.astype(np.longdouble)
    for _ in range(steps):
        resid = rhs_ext - k_ext @ x.astype(np.longdouble)
        x = x + factor.solve(resid.astype(np.float64))
    return x


def _residual_ok(k: np.ndarray, x: np.ndarray, rhs: np.ndarray) -> bool:
    scale = np.max(np.abs(rhs), axis=0)
    resid = np.max(np.abs(k @ x - rhs), axis=0)
    return bool(np.all(np.isfinite(x)) and np.all(resid <= SOLVE_RTOL * np.maximum(scale, 1e-300)))


def cholesky_factor(cov: CovMatrix | np.ndarray, rhs: np.ndarray | None = None) -> CholeskyFactor:
    """Factor ``cov``, escalating diagonal jitter until it succeeds.

    When ``rhs`` is given a jitter level is accepted only if the solution also
    meets the residual bound against the unjittered matrix.
    """
    k = cov.entries if isinstance(cov, CovMatrix) else np.asarray(cov, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {k.shape}")
    eye = np.eye(k.shape[0])
    for jitter in JITTER_LEVELS:
        try:
            lower = np.linalg.cholesky(k + jitter * eye)
        except np.linalg.LinAlgError:
            continue
        if not np.all(np.isfinite(lower)):
            continue
        factor = CholeskyFactor(lower, jitter)
        if rhs is None or _residual_ok(k, _refine(k, factor, rhs), rhs):
            return factor
    raise NotPositiveDefinite(f"factorization failed at every jitter level {JITTER_LEVELS}")


def cholesky_solve(cov: CovMatrix | np.ndarray, rhs) -> np.ndarray:
    """Solve ``K x = rhs`` by Cholesky factorization and two triangular solves.

    ``rhs`` may be a vector or a matrix of right-hand sides (one per column).
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    k = cov.entries if isinstance(cov, CovMatrix) else np.asarray(cov, dtype=np.float64)
    return _refine(k, cholesky_factor(k, rhs), rhs)


@dataclass(frozen=True, eq=False)
class GpWeights:
    """Precomputed weights for one upsampling ratio.

    interp_weights has shape ``(ratio**2, 25)``; row ``m`` is ``k_*^T K^{-1}``
    for fine-pixel ``offsets[m]``. mle_weights has shape ``(25,)`` and sums to 1.
    """

    ratio: int
    cfg: KernelConfig
    interp_weights: np.ndarray
    mle_weights: np.ndarray
    offsets: np.ndarray
    jitter_used: float = 0.0
    coords: np.ndarray = field(default_factory=window_coords)


def precompute_weights(ratio: int, cfg: KernelConfig) -> GpWeights:
    if not 2 <= ratio <= 8:
        raise ValueError(f"ratio must be in [2, 8], got {ratio}")
    return _precompute_cached(int(ratio), cfg)


@functools.lru_cache(maxsize=32)
def _precompute_cached(ratio: int, cfg: KernelConfig) -> GpWeights:
    coords = window_coords()
    offsets = fine_offsets(ratio)
    cov = build_cov_matrix(coords, cfg)
    k_star = matern32(cdist(offsets, coords), cfg)  # (r^2, 25)
    ones = np.ones((coords.shape[0], 1))
    rhs = np.hstack([k_star.T, ones])
    factor = cholesky_factor(cov, rhs)
    sol = _refine(cov.entries, factor, rhs)
    interp = np.ascontiguousarray(sol[:, :-1].T)
    z = sol[:, -1]
    mle = z / z.sum()
    for arr in (interp, mle, offsets, coords):
        arr.setflags(write=False)
    return GpWeights(ratio, cfg, interp, mle, offsets, factor.jitter_used, coords)


# ---------------------------------------------------------------------------
# 1-D illustration: smooth SE kernel versus Matérn-3/2 on a toy regression
# ---------------------------------------------------------------------------

@dataclass
class DemoFit:
    """Grid and training rows of a 1-D GP fit, sorted by ``x``."""

    x: np.ndarray
    is_train: np.ndarray
    y: np.ndarray  # training ordinates, NaN on grid rows
    se_mean: np.ndarray
    se_sd: np.ndarray
    m32_mean: np.ndarray
    m32_sd: np.ndarray
    se_prior: np.ndarray  # (n_rows, n_draws)
    m32_prior: np.ndarray
    x_train: np.ndarray
    y_train: np.ndarray

    def grid_total_variation(self, which: str) -> float:
        mean = {"se": self.se_mean, "m32": self.m32_mean}[which][~self.is_train]
        return float(np.abs(np.diff(mean)).sum())

    def columns(self) -> list[str]:
        cols = ["x", "y_train_flag", "y", "se_mean", "se_sd", "m32_mean", "m32_sd"]
        cols += [f"se_prior_{i}" for i in range(self.se_prior.shape[1])]
        cols += [f"m32_prior_{i}" for i in range(self.m32_prior.shape[1])]
        return cols

    def rows(self):
        for i in range(len(self.x)):
            yield [
                self.x[i], int(self.is_train[i]), self.y[i],
                self.se_mean[i], self.se_sd[i], self.m32_mean[i], self.m32_sd[i],
                *self.se_prior[i], *self.m32_prior[i],
            ]


def demo_target(x):
    return np.sin((np.asarray(x) - 2.5) ** 2)


def _posterior(kern, x_train, y_train, x_eval):
    k_tt = kern(np.abs(x_train[:, None] - x_train[None, :]))
    k_et = kern(np.abs(x_eval[:, None] - x_train[None, :]))
    rhs = np.column_stack([y_train, k_et.T])
    sol = cholesky_solve(k_tt, rhs)
    mean = k_et @ sol[:, 0]
    var = 1.0 - np.einsum("ij,ji->i", k_et, sol[:, 1:])
    return mean, np.sqrt(np.clip(var, 0.0, None))


def demo_1d_fit(seed: int = 0, n_train: int = 10, n_grid: int = 200, n_draws: int = 3,
                ell: float = 1.0) -> DemoFit:
    """Fit zero-mean, unit-scale GPs with SE and Matérn-3/2 kernels to the toy curve.

    Training inputs are drawn from U(0, 5) with ``numpy.random.default_rng(seed)``;
    prior draws come from the same generator afterwards.
    """
    rng = np.random.default_rng(seed)
    x_train = rng.uniform(0.0, 5.0, n_train)
    y_train = demo_target(x_train)
    grid = np.linspace(0.0, 5.0, n_grid)

    x = np.concatenate([grid, x_train])
    is_train = np.concatenate([np.zeros(n_grid, bool), np.ones(n_train, bool)])
    order = np.argsort(x, kind="stable")
    x, is_train = x[order], is_train[order]
    y = np.full(x.shape, np.nan)
    y[is_train] = demo_target(x[is_train])

    m32_cfg = KernelConfig(ell=ell)
    kernels = {
        "se": lambda d: squared_exponential(d, ell),
        "m32": lambda d: matern32(d, m32_cfg),
    }
    out = {}
    for name, kern in kernels.items():
        mean, sd = _posterior(kern, x_train, y_train, x)
        prior_cov = kern(np.abs(x[:, None] - x[None, :]))
        draws = rng.multivariate_normal(np.zeros(len(x)), prior_cov, size=n_draws, method="eigh")
        out[name] = (mean, sd, draws.T)
    return DemoFit(
        x=x, is_train=is_train, y=y,
        se_mean=out["se"][0], se_sd=out["se"][1],
        m32_mean=out["m32"][0], m32_sd=out["m32"][1],
        se_prior=out["se"][2], m32_prior=out["m32"][2],
        x_train=x_train, y_train=y_train,
    )

"""General Regression Neural Network: a Gaussian-kernel weighted average of
stored training targets, with leave-one-out bandwidth selection.

Kernel weights use squared Euclidean distance in min-max-scaled feature
space.  Prediction sums are accumulated with math.fsum, so exemplar order
cannot change the result.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, NormalizationSpec, Sample, fit_normalizer
from .errors import EmptyDatasetError, InvalidConfigError

# Below this total kernel mass the weighted average is numerically 0/0;
# fall back to the nearest exemplar instead.
UNDERFLOW_GUARD = 1e-300

# 50 log-spaced candidate bandwidths spanning tight interpolation (0.01)
# to near-global averaging (3.0) in scaled-distance units.
DEFAULT_SIGMA_GRID: tuple[float, ...] = tuple(
    float(s) for s in np.logspace(math.log10(0.01), math.log10(3.0), 50)
)


@dataclass(frozen=True)
class GrnnModel:
    """Stored scaled exemplars, the chosen bandwidth, and the normalizer."""

    exemplar_features: np.ndarray  # (n, d), scaled
    exemplar_targets: np.ndarray  # (n,), scaled
    sigma: float
    normalizer: NormalizationSpec

    @property
    def n_exemplars(self) -> int:
        return self.exemplar_features.shape[0]


def _loo_rmse(distances_sq: np.ndarray, targets: np.ndarray, sigma: float) -> float:
    """Leave-one-out RMSE (scaled units) of the kernel average at one bandwidth."""
    weights = np.exp(-distances_sq / (2.0 * sigma * sigma))
    np.fill_diagonal(weights, 0.0)
    mass = weights.sum(axis=1)
    predictions = np.empty_like(targets)
    ok = mass >= UNDERFLOW_GUARD
    predictions[ok] = (weights @ targets)[ok] / mass[ok]
    if not ok.all():
        # Same guard as prediction: nearest other exemplar wins.
        others = distances_sq + np.diag(np.full(len(targets), np.inf))
        predictions[~ok] = targets[others.argmin(axis=1)][~ok]
    residuals = predictions - targets
    return math.sqrt(float(residuals @ residuals) / len(targets))


def grnn_fit(
    train: Dataset,
    sigma_grid: Sequence[float] | None = None,
    features: Iterable[str] | None = None,
) -> GrnnModel:
    """Store the training rows as exemplars and pick sigma by leave-one-out RMSE.

    The grid is searched exhaustively; ties go to the larger bandwidth.  A
    single-exemplar dataset has no leave-one-out estimate, so the grid
    median is used and a warning issued.
    """
    if len(train) == 0:
        raise EmptyDatasetError("cannot fit a GRNN on an empty dataset")
    grid = tuple(sigma_grid) if sigma_grid is not None else DEFAULT_SIGMA_GRID
    if not grid:
        raise InvalidConfigError("sigma grid is empty")
    for s in grid:
        if not (math.isfinite(s) and s > 0):
            raise InvalidConfigError(f"sigma grid values must be positive and finite, got {s}")
    normalizer = fit_normalizer(train, features)
    exemplars = np.array([normalizer.normalize(s) for s in train], dtype=float)
    targets = np.array([normalizer.normalize_target(s.akron_abrasion) for s in train], dtype=float)

    grid = tuple(sorted(grid))
    if len(train) == 1:
        sigma = grid[len(grid) // 2]
        warnings.warn(
            "leave-one-out selection is undefined for a single exemplar; "
            f"falling back to the grid median sigma={sigma}",
            stacklevel=2,
        )
    else:
        diffs = exemplars[:, None, :] - exemplars[None, :, :]
        distances_sq = np.einsum("ijk,ijk->ij", diffs, diffs)
        sigma = grid[0]
        best = math.inf
        for candidate in grid:  # ascending, so <= prefers the larger sigma on ties
            loo = _loo_rmse(distances_sq, targets, candidate)
            if loo <= best:
                best = loo
                sigma = candidate
    return GrnnModel(
        exemplar_features=exemplars,
        exemplar_targets=targets,
        sigma=float(sigma),
        normalizer=normalizer,
    )


def grnn_predict(m: GrnnModel, record: Sample | Mapping[str, float]) -> float:
    """Predict the raw-unit abrasion for one record.

    The scaled prediction is sum(w_i * y_i) / sum(w_i) with Gaussian weights
    w_i = exp(-|x - x_i|^2 / (2 sigma^2)); if the total weight underflows,
    the nearest exemplar's target is returned instead.
    """
    x = m.normalizer.normalize(record)
    if x.shape != (m.exemplar_features.shape[1],):
        raise ValueError(f"query has {x.shape[0]} features, exemplars have {m.exemplar_features.shape[1]}")
    deltas = m.exemplar_features - x
    distances_sq = np.einsum("ij,ij->i", deltas, deltas)
    inv = 1.0 / (2.0 * m.sigma * m.sigma)
    weights = [math.exp(-d2 * inv) for d2 in distances_sq]
    mass = math.fsum(weights)
    targets = m.exemplar_targets
    if mass < UNDERFLOW_GUARD:
        scaled = float(targets[int(distances_sq.argmin())])
    else:
        scaled = math.fsum(w * y for w, y in zip(weights, targets)) / mass
        # A convex combination cannot leave the target hull; pin down the
        # final-rounding ulp so the bound holds exactly.
        scaled = min(max(scaled, float(targets.min())), float(targets.max()))
    return m.normalizer.denormalize_target(scaled)

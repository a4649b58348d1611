"""Single-hidden-layer feed-forward regression network.

tanh hidden units, identity output, trained by deterministic full-batch
gradient descent with momentum on min-max-scaled data.  The returned model
is the best snapshot seen during training, so a patience stop never
degrades the result.
"""

from __future__ import annotations

import math
import time
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, NormalizationSpec, Sample, fit_normalizer
from .errors import DivergenceError, InvalidConfigError

# Scaled-units RMSE under which descent has nothing left to do.
CONVERGED_RMSE = 1e-9


@dataclass
class MlfnModel:
    """Weights, biases, and the normalizer the network was trained with.

    Instances are treated as immutable after training.
    """

    hidden_weights: np.ndarray  # (n_hidden, n_inputs)
    hidden_biases: np.ndarray  # (n_hidden,)
    output_weights: np.ndarray  # (n_hidden,)
    output_bias: float
    activation: str = "tanh"
    normalizer: NormalizationSpec | None = None

    @property
    def n_inputs(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.hidden_weights.shape[0]

    @property
    def n_parameters(self) -> int:
        return self.n_inputs * self.n_hidden + 2 * self.n_hidden + 1


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    max_epochs: int = 20000
    patience_epochs: int = 500
    min_improvement: float = 1e-6  # scaled RMSE units
    rng_seed: int = 0

    def check(self) -> None:
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0):
            raise InvalidConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise InvalidConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.max_epochs < 1:
            raise InvalidConfigError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if self.patience_epochs < 1:
            raise InvalidConfigError(f"patience_epochs must be >= 1, got {self.patience_epochs}")
        if self.min_improvement < 0:
            raise InvalidConfigError(f"min_improvement must be >= 0, got {self.min_improvement}")


@dataclass(frozen=True)
class TrainingHistory:
    """Per-epoch record of a training run.

    epoch_rmse[t] is the scaled-units training RMSE of the parameters
    entering epoch t; best_epoch indexes the entry the returned model
    corresponds to.
    """

    epoch_rmse: tuple[float, ...]
    best_epoch: int
    best_rmse: float
    stop_reason: str  # converged | patience | max_epochs
    wall_time_seconds: float


@dataclass(frozen=True)
class MlfnGradient:
    """Gradient of mean squared error, laid out like the model parameters."""

    hidden_weights: np.ndarray
    hidden_biases: np.ndarray
    output_weights: np.ndarray
    output_bias: float


def mlfn_init(n_inputs: int, n_hidden: int, seed: int | np.random.Generator) -> MlfnModel:
    """Create a network with uniform +/- 1/sqrt(fan_in) weights and zero biases."""
    if n_inputs < 1 or n_hidden < 1:
        raise InvalidConfigError(f"need n_inputs >= 1 and n_hidden >= 1, got ({n_inputs}, {n_hidden})")
    rng = np.random.default_rng(seed)
    hidden_bound = 1.0 / math.sqrt(n_inputs)
    output_bound = 1.0 / math.sqrt(n_hidden)
    return MlfnModel(
        hidden_weights=rng.uniform(-hidden_bound, hidden_bound, size=(n_hidden, n_inputs)),
        hidden_biases=np.zeros(n_hidden),
        output_weights=rng.uniform(-output_bound, output_bound, size=n_hidden),
        output_bias=0.0,
    )


def mlfn_forward(m: MlfnModel, x: Iterable[float]) -> float:
    """Evaluate the network on one scaled feature vector."""
    xv = np.asarray(x, dtype=float)
    if xv.shape != (m.n_inputs,):
        raise ValueError(f"input shape {xv.shape} does not match n_inputs={m.n_inputs}")
    if not np.all(np.isfinite(xv)):
        raise ValueError("input vector contains non-finite values")
    hidden = np.tanh(m.hidden_weights @ xv + m.hidden_biases)
    return float(m.output_weights @ hidden + m.output_bias)


def _forward_batch(
    hidden_weights: np.ndarray,
    hidden_biases: np.ndarray,
    output_weights: np.ndarray,
    output_bias: float,
    inputs: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    hidden = np.tanh(inputs @ hidden_weights.T + hidden_biases)
    return hidden @ output_weights + output_bias, hidden


def mlfn_gradient(m: MlfnModel, inputs: np.ndarray, targets: np.ndarray) -> MlfnGradient:
    """Analytic gradient of L = mean((yhat - y)^2) over a batch.

    `inputs` is (N, n_inputs) in scaled feature space, `targets` (N,) in
    scaled target space.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != m.n_inputs:
        raise ValueError(f"inputs shape {inputs.shape} does not match n_inputs={m.n_inputs}")
    n = inputs.shape[0]
    if n == 0 or targets.shape != (n,):
        raise ValueError("batch must be non-empty with one target per input row")
    predictions, hidden = _forward_batch(
        m.hidden_weights, m.hidden_biases, m.output_weights, m.output_bias, inputs
    )
    scaled_residuals = (2.0 / n) * (predictions - targets)  # dL/dyhat
    upstream = scaled_residuals[:, None] * m.output_weights * (1.0 - hidden * hidden)
    return MlfnGradient(
        hidden_weights=upstream.T @ inputs,
        hidden_biases=upstream.sum(axis=0),
        output_weights=hidden.T @ scaled_residuals,
        output_bias=float(scaled_residuals.sum()),
    )


def mlfn_train(
    train: Dataset,
    n_hidden: int,
    cfg: TrainingConfig | None = None,
    features: Iterable[str] | None = None,
) -> tuple[MlfnModel, TrainingHistory]:
    """Fit a network to a training dataset.

    Fits the normalizer on `train`, runs full-batch gradient descent with
    momentum, and stops on convergence, on `patience_epochs` epochs without
    an RMSE improvement of at least `min_improvement`, or at `max_epochs`.
    Raises DivergenceError if the loss becomes non-finite.
    """
    cfg = cfg if cfg is not None else TrainingConfig()
    cfg.check()
    if n_hidden < 1:
        raise InvalidConfigError(f"n_hidden must be >= 1, got {n_hidden}")
    normalizer = fit_normalizer(train, features)
    inputs = np.array([normalizer.normalize(s) for s in train], dtype=float)
    targets = np.array([normalizer.normalize_target(s.akron_abrasion) for s in train], dtype=float)
    n = len(train)

    started = time.perf_counter()
    init = mlfn_init(normalizer.n_features, n_hidden, cfg.rng_seed)
    w_hidden = init.hidden_weights
    b_hidden = init.hidden_biases
    w_out = init.output_weights
    b_out = init.output_bias
    v_w_hidden = np.zeros_like(w_hidden)
    v_b_hidden = np.zeros_like(b_hidden)
    v_w_out = np.zeros_like(w_out)
    v_b_out = 0.0

    epoch_rmse: list[float] = []
    best = (w_hidden.copy(), b_hidden.copy(), w_out.copy(), b_out)
    best_rmse = math.inf
    best_epoch = 0
    stall = 0
    stop_reason = "max_epochs"

    for epoch in range(1, cfg.max_epochs + 1):
        hidden = np.tanh(inputs @ w_hidden.T + b_hidden)
        residuals = hidden @ w_out + b_out - targets
        rmse = math.sqrt(float(residuals @ residuals) / n)
        if not math.isfinite(rmse):
            raise DivergenceError(epoch)
        epoch_rmse.append(rmse)
        if rmse < best_rmse - cfg.min_improvement:
            best = (w_hidden.copy(), b_hidden.copy(), w_out.copy(), b_out)
            best_rmse = rmse
            best_epoch = epoch - 1
            stall = 0
        else:
            stall += 1
        if rmse <= CONVERGED_RMSE:
            stop_reason = "converged"
            break
        if stall >= cfg.patience_epochs:
            stop_reason = "patience"
            break

        scaled_residuals = (2.0 / n) * residuals
        upstream = scaled_residuals[:, None] * w_out * (1.0 - hidden * hidden)
        v_w_hidden = cfg.momentum * v_w_hidden - cfg.learning_rate * (upstream.T @ inputs)
        v_b_hidden = cfg.momentum * v_b_hidden - cfg.learning_rate * upstream.sum(axis=0)
        v_w_out = cfg.momentum * v_w_out - cfg.learning_rate * (hidden.T @ scaled_residuals)
        v_b_out = cfg.momentum * v_b_out - cfg.learning_rate * float(scaled_residuals.sum())
        w_hidden = w_hidden + v_w_hidden
        b_hidden = b_hidden + v_b_hidden
        w_out = w_out + v_w_out
        b_out = b_out + v_b_out

    model = MlfnModel(
        hidden_weights=best[0],
        hidden_biases=best[1],
        output_weights=best[2],
        output_bias=best[3],
        normalizer=normalizer,
    )
    history = TrainingHistory(
        epoch_rmse=tuple(epoch_rmse),
        best_epoch=best_epoch,
        best_rmse=best_rmse,
        stop_reason=stop_reason,
        wall_time_seconds=time.perf_counter() - started,
    )
    return model, history


def mlfn_predict(m: MlfnModel, record: Sample | Mapping[str, float]) -> float:
    """Predict the raw-unit abrasion for one record."""
    if m.normalizer is None:
        raise InvalidConfigError("model has no bound normalizer; train it first")
    scaled = mlfn_forward(m, m.normalizer.normalize(record))
    return m.normalizer.denormalize_target(scaled)

"""L2-penalized logistic regression, fit by a damped Newton iteration.

Loss = mean negative log-likelihood + lambda * sum(W_i^2). The intercept is
the coefficient of an all-ones column and is penalized by default (switchable).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, diagnostics: dict):
        super().__init__(message)
        self.diagnostics = diagnostics


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _with_intercept(rows: np.ndarray) -> np.ndarray:
    return np.hstack([np.ones((rows.shape[0], 1)), rows])


@dataclass
class LogitModel:
    weights: np.ndarray  # intercept first
    lam: float
    penalize_intercept: bool = True
    n_iterations: int = 0

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "lambda": self.lam,
                "penalize_intercept": self.penalize_intercept,
                "n_iterations": self.n_iterations}

    @classmethod
    def from_dict(cls, raw: dict) -> "LogitModel":
        return cls(weights=np.array(raw["weights"]), lam=raw["lambda"],
                   penalize_intercept=raw.get("penalize_intercept", True),
                   n_iterations=raw.get("n_iterations", 0))


@dataclass
class TrainingSet:
    rows: np.ndarray  # standardized features, no intercept column
    labels: np.ndarray  # 1 = positive (licensed + annotated illegal), 0 = negative
    director_ids: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        self.labels = np.asarray(self.labels, dtype=float)
        if set(np.unique(self.labels)) - {0.0, 1.0}:
            raise ValueError("labels must be 0/1")


def loss_value(w: np.ndarray, x: np.ndarray, y: np.ndarray, lam: float,
               penalize_intercept: bool = True) -> float:
    z = x @ w
    nll = float(np.mean(np.logaddexp(0.0, z) - y * z))
    penalty = w if penalize_intercept else w[1:]
    return nll + lam * float(penalty @ penalty)


def loss_gradient(w: np.ndarray, x: np.ndarray, y: np.ndarray, lam: float,
                  penalize_intercept: bool = True) -> np.ndarray:
    p = _sigmoid(x @ w)
    grad = x.T @ (p - y) / x.shape[0]
    reg = 2.0 * lam * w
    if not penalize_intercept:
        reg[0] = 0.0
    return grad + reg


def fit(ts: TrainingSet, lam: float, penalize_intercept: bool = True,
        tol: float = 1e-8, max_iter: int = 500) -> LogitModel:
    """Damped Newton from W = 0; converged when the gradient inf-norm < tol."""
    if lam <= 0:
        raise ValueError("lambda must be > 0")
    if not (ts.labels.min() == 0.0 and ts.labels.max() == 1.0):
        raise ValueError("both classes must be non-empty")
    x = _with_intercept(ts.rows)
    y = ts.labels
    n, d = x.shape
    w = np.zeros(d)
    current = loss_value(w, x, y, lam, penalize_intercept)
    reg_diag = np.full(d, 2.0 * lam)
    if not penalize_intercept:
        reg_diag[0] = 0.0

    for iteration in range(1, max_iter + 1):
        grad = loss_gradient(w, x, y, lam, penalize_intercept)
        grad_norm = float(np.max(np.abs(grad)))
        if grad_norm < tol:
            return LogitModel(weights=w, lam=lam,
                              penalize_intercept=penalize_intercept,
                              n_iterations=iteration - 1)
        p = _sigmoid(x @ w)
        s = p * (1.0 - p)
        hessian = (x.T * s) @ x / n + np.diag(reg_diag)
        try:
            step = np.linalg.solve(hessian, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hessian, grad, rcond=None)[0]
        # Backtracking keeps the penalized loss strictly decreasing.
        scale = 1.0
        for _ in range(60):
            candidate = w - scale * step
            value = loss_value(candidate, x, y, lam, penalize_intercept)
            if value < current:
                w, current = candidate, value
                break
            scale *= 0.5
        else:
            raise ConvergenceError("line search stalled", {
                "iteration": iteration, "grad_inf_norm": grad_norm, "loss": current})

    grad_norm = float(np.max(np.abs(loss_gradient(w, x, y, lam, penalize_intercept))))
    raise ConvergenceError("Newton iteration did not converge", {
        "iterations": max_iter, "grad_inf_norm": grad_norm, "loss": current})


def predict_proba(model: LogitModel, rows: np.ndarray) -> np.ndarray:
    """Sigmoid of the linear score, clipped to the open interval (0, 1)."""
    p = _sigmoid(_with_intercept(np.asarray(rows, dtype=float)) @ model.weights)
    eps = 1e-12
    return np.clip(p, eps, 1.0 - eps)


def held_out_log_likelihood(model: LogitModel, rows: np.ndarray, labels: np.ndarray) -> float:
    p = predict_proba(model, rows)
    y = np.asarray(labels, dtype=float)
    return float(np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def _stratified_folds(labels: np.ndarray, n_folds: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in (0.0, 1.0):
        idx = np.flatnonzero(labels == cls)
        rng.shuffle(idx)
        for i, row in enumerate(idx):
            folds[i % n_folds].append(int(row))
    return [np.array(sorted(f), dtype=int) for f in folds]


def cross_validate_lambda(ts: TrainingSet, grid: list[float], folds: int = 5,
                          seed: int = 0, penalize_intercept: bool = True) -> float:
    """Lambda maximizing mean held-out log-likelihood; ties pick the larger."""
    if not grid:
        raise ValueError("lambda grid must be non-empty")
    for attempt in range(10):
        fold_idx = _stratified_folds(ts.labels, folds, seed + attempt)
        if all(len(np.unique(ts.labels[np.setdiff1d(np.arange(len(ts.labels)), f)])) == 2
               for f in fold_idx):
            break
    else:
        raise ValueError("could not draw folds with both classes present")

    all_rows = np.arange(len(ts.labels))
    scores: dict[float, float] = {}
    for lam in sorted(set(grid)):
        fold_scores = []
        for fold in fold_idx:
            train = np.setdiff1d(all_rows, fold)
            model = fit(TrainingSet(ts.rows[train], ts.labels[train]), lam,
                        penalize_intercept)
            fold_scores.append(held_out_log_likelihood(model, ts.rows[fold], ts.labels[fold]))
        scores[lam] = float(np.mean(fold_scores))
    best_score = max(scores.values())
    return max(lam for lam, s in scores.items() if s >= best_score - 1e-12)


def default_lambda_grid() -> list[float]:
    return list(np.logspace(-4, 2, 10))


def flag_by_threshold(
    probabilities: dict[str, float],
    threshold: float = 0.01,
    exclude: set[str] = frozenset(),
    knn_flagged: set[str] = frozenset(),
) -> tuple[set[str], dict[str, int]]:
    """Directors with p > threshold and not excluded, plus the confusion
    matrix of logit flags vs kNN flags over the scored universe."""
    new_candidates = {d for d, p in probabilities.items()
                      if p > threshold and d not in exclude}
    logit_flagged = {d for d, p in probabilities.items() if p > threshold}
    universe = set(probabilities)
    confusion = {
        "both": len(logit_flagged & knn_flagged),
        "logit_only": len(logit_flagged - knn_flagged),
        "knn_only": len((knn_flagged & universe) - logit_flagged),
        "neither": len(universe - logit_flagged - knn_flagged),
    }
    return new_candidates, confusion


@dataclass
class BootstrapResult:
    estimates: np.ndarray  # (d,) point estimates from the full data fit
    ci_low: np.ndarray
    ci_high: np.ndarray

    @property
    def significant(self) -> np.ndarray:
        return (self.ci_low > 0) | (self.ci_high < 0)


def coefficient_bootstrap(ts: TrainingSet, lam: float, n_boot: int = 1000,
                          seed: int = 0, penalize_intercept: bool = True) -> BootstrapResult:
    """Percentile CIs for every weight from seeded row resampling."""
    base = fit(ts, lam, penalize_intercept)
    rng = np.random.default_rng(seed)
    n = len(ts.labels)
    draws = np.empty((n_boot, base.weights.shape[0]))
    for b in range(n_boot):
        while True:
            rows = rng.integers(0, n, size=n)
            labels = ts.labels[rows]
            if labels.min() == 0.0 and labels.max() == 1.0:
                break
        draws[b] = fit(TrainingSet(ts.rows[rows], labels), lam,
                       penalize_intercept).weights
    return BootstrapResult(
        estimates=base.weights,
        ci_low=np.quantile(draws, 0.025, axis=0),
        ci_high=np.quantile(draws, 0.975, axis=0),
    )

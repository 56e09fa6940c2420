"""The grade loop: fit, smooth, update the residual, record, repeat.

Each grade solves one convex least-squares problem on the previous residual.
The activation never enters the fit — it only wraps the fitted pre-activation
to build the next grade's features — which is what keeps every grade's
training problem quadratic.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import mlp, qp, smoothing
from .data import Dataset
from .model import Activation, Grade, Model, Pooling, sq_norm
from .records import GradeRecord, TrainReport

SMOOTHING_TARGETS = ("component", "residual", "none")


class TrainError(RuntimeError):
    """Training failure carrying the partial model and report for diagnosis."""

    def __init__(self, message: str, model=None, report=None):
        super().__init__(message)
        self.model = model
        self.report = report


@dataclass
class GradeConfig:
    """Configuration for one grade.

    `activation` may be a single Activation (used as-is) or a sequence of
    candidates: after the fit, the best linear combination of the candidates
    (fitted to the new residual) becomes this grade's activation.
    """

    width: int
    activation: Activation | Sequence[Activation] = Activation("relu")
    tau: float = 0.0
    window: smoothing.Window | None = None
    quad_points: int = 200
    smoothing_target: str = "component"
    solver: qp.SolverConfig = field(default_factory=qp.SolverConfig)

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("grade width must be positive")
        if self.tau < 0.0:
            raise ValueError("tau must be nonnegative")
        if self.tau > 0.0 and self.window is None:
            raise ValueError("tau > 0 needs a smoothing window")
        if self.smoothing_target not in SMOOTHING_TARGETS:
            raise ValueError(f"unknown smoothing_target: {self.smoothing_target!r}")


@dataclass
class TrainConfig:
    grades: list[GradeConfig]
    head: mlp.MlpTrainConfig | None = None
    record_test_metrics: bool = True

    def __post_init__(self):
        if not self.grades and self.head is None:
            raise ValueError("need at least one grade or a head")


def rse(predictions: np.ndarray, targets: np.ndarray) -> float:
    """Relative squared error: sum ||pred - y||^2 / sum ||y||^2."""
    denom = sq_norm(targets)
    if denom == 0.0:
        raise ValueError("rse undefined for all-zero targets")
    return sq_norm(np.asarray(predictions) - np.asarray(targets)) / denom


def select_activation(
    basis: Sequence[Activation],
    pre_activations: np.ndarray,
    pooling: Pooling,
    residual: np.ndarray,
) -> tuple[np.ndarray, bool]:
    """Least-squares weights making the pooled combined activation track the residual.

    Solves the basis-size normal equations; a singular Gram matrix falls back
    to the minimum-norm solution (eigendecomposition, eigenvalues below
    1e-12 * lambda_max dropped) and is flagged.
    """
    pooled = [pooling.apply(act(pre_activations)) for act in basis]
    n = len(pooled)
    gram = np.empty((n, n))
    rhs = np.empty(n)
    for i in range(n):
        rhs[i] = np.sum(pooled[i] * residual)
        for j in range(i, n):
            gram[i, j] = gram[j, i] = np.sum(pooled[i] * pooled[j])
    vals, vecs = np.linalg.eigh(gram)
    cutoff = 1e-12 * max(float(vals[-1]), 0.0)
    keep = vals > cutoff
    flagged = bool(np.any(~keep))
    if not np.any(keep):
        return np.zeros(n), True
    coeffs = (vecs[:, keep].T @ rhs) / vals[keep]
    return vecs[:, keep] @ coeffs, flagged


def train_grade(
    model: Model, dataset: Dataset, residual: np.ndarray, cfg: GradeConfig
) -> tuple[Grade, np.ndarray, GradeRecord]:
    """Fit one grade on the current residual; does not mutate the model.

    Returns the new grade, the next residual, and a record whose rse_train is
    the residual's share of the original target energy (for component-mode
    smoothing this equals the prediction-based rse; rse_test is left for the
    caller, which owns the running test prediction).
    """
    start = time.perf_counter()
    t = dataset.targets.shape[1]
    x = dataset.inputs
    k = len(model.grades)
    try:
        if cfg.width < t:
            raise ValueError(f"grade width {cfg.width} must be >= output dim {t}")
        feats = model.features(x)
        pooling = Pooling(out_dim=t, mu=cfg.width - t)
        ridge = cfg.solver.ridge if cfg.solver.method == "nesterov" else 0.0
        problem = qp.assemble(feats, residual, pooling, ridge)
        weight, bias, stats = qp.solve(problem, cfg.solver)
    except Exception as exc:
        raise RuntimeError(f"grade {k + 1} failed: {exc}") from exc

    candidates = cfg.activation
    single = isinstance(candidates, Activation)
    smoother = None
    if cfg.tau > 0.0 and cfg.smoothing_target == "component":
        smoother = smoothing.Smoother(cfg.tau, cfg.window, cfg.quad_points)
    grade = Grade(
        weight=weight,
        bias=bias,
        pooling=pooling,
        activation=candidates if single else candidates[0],
        smoother=smoother,
    )
    # evaluate the component exactly as the finished model will predict it
    view = Model(model.input_dim, model.output_dim, model.grades + [grade], model.head)
    component = view.component_values(k, x)
    if cfg.tau > 0.0 and cfg.smoothing_target == "residual":
        raw_next = residual - component
        sm = smoothing.Smoother(cfg.tau, cfg.window, cfg.quad_points)
        new_residual = smoothing.smooth_grid(raw_next, sm, x[:, 0])
    else:
        new_residual = residual - component
    if not single:
        pre = feats @ weight.T + bias
        alpha, flagged = select_activation(list(candidates), pre, pooling, new_residual)
        grade.activation = Activation(
            "combination", weights=tuple(float(a) for a in alpha), basis=tuple(candidates)
        )
        if flagged:
            stats.note = (stats.note + "; " if stats.note else "") + (
                "singular activation gram; minimum-norm combination"
            )
    record = GradeRecord(
        grade=k + 1,
        tau=cfg.tau,
        epsilon=cfg.solver.epsilon,
        iterations=stats.iterations,
        train_time_s=time.perf_counter() - start,
        rse_train=sq_norm(new_residual) / sq_norm(dataset.targets),
        rse_test=None,
    )
    return grade, new_residual, record


def train_sal(
    dataset: Dataset, cfg: TrainConfig, test: Dataset | None = None
) -> tuple[Model, TrainReport]:
    """Run the grades in order; the residual starts as the targets themselves
    (minus the head's predictions when a hybrid head is configured)."""
    x, y = dataset.inputs, dataset.targets
    if x.shape[0] == 0:
        raise ValueError("empty dataset")
    model = Model(x.shape[1], y.shape[1])
    records: list[GradeRecord] = []
    start = time.perf_counter()
    residual = y
    track_test = test is not None and cfg.record_test_metrics
    test_pred = np.zeros_like(test.targets) if track_test else None
    grade_offset = 1
    if cfg.head is not None:
        head_params, head_report = mlp.train_ssg(dataset, cfg.head, test=test)
        model.head = head_params
        residual = y - head_params.predict(x)
        if track_test:
            test_pred = head_params.predict(test.inputs)
        records.append(
            GradeRecord(
                grade=1,
                tau=0.0,
                epsilon=cfg.head.epsilon,
                iterations=head_report.metadata.get("epochs_run", cfg.head.epochs),
                train_time_s=head_report.total_time_s,
                rse_train=sq_norm(residual) / sq_norm(y),
                rse_test=rse(test_pred, test.targets) if track_test else None,
            )
        )
        grade_offset = 2
    for i, gcfg in enumerate(cfg.grades):
        if gcfg.solver.init != "zero":
            # vary the random start per grade so equal-width grades do not
            # all begin from the same draw
            gcfg = replace(
                gcfg, solver=replace(gcfg.solver, init_seed=gcfg.solver.init_seed + i)
            )
        try:
            grade, residual, record = train_grade(model, dataset, residual, gcfg)
        except Exception as exc:
            partial = TrainReport(records=records, total_time_s=time.perf_counter() - start)
            raise TrainError(str(exc), model=model, report=partial) from exc
        model.grades.append(grade)
        record.grade = grade_offset + i
        if track_test:
            test_pred = test_pred + model.component_values(i, test.inputs)
            record.rse_test = rse(test_pred, test.targets)
        records.append(record)
    report = TrainReport(
        records=records,
        total_time_s=time.perf_counter() - start,
        metadata={"smoothing_metrics": "after", "hybrid": cfg.head is not None},
    )
    return model, report


def hybrid_train(
    dataset: Dataset,
    head_cfg: mlp.MlpTrainConfig,
    grades: list[GradeConfig],
    test: Dataset | None = None,
) -> tuple[Model, TrainReport]:
    """One non-convexly trained shallow grade, then the convex grades on its residual."""
    return train_sal(dataset, TrainConfig(grades=grades, head=head_cfg), test=test)

"""Model types and evaluation semantics.

A trained model is a *superposition*: each grade contributes one pooled
affine component, and prediction sums the components — the grades are never
composed into a single chain.  Composition happens only inside the feature
recursion, where grade k's activation wraps its pre-pooling affine output to
feed grade k+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import smoothing

FORMAT_VERSION = 1

_BASE_KINDS = ("identity", "relu", "leaky_relu", "tanh", "sincos_half")


@dataclass(frozen=True)
class Activation:
    """Elementwise activation; "combination" is a fixed linear mix of base kinds."""

    kind: str
    slope: float = 0.01
    weights: tuple[float, ...] = ()
    basis: tuple["Activation", ...] = ()

    def __post_init__(self):
        if self.kind == "combination":
            if len(self.weights) == 0 or len(self.weights) != len(self.basis):
                raise ValueError("combination needs weights matching its basis length")
            if any(a.kind == "combination" for a in self.basis):
                raise ValueError("combination basis must be base activation kinds")
        elif self.kind not in _BASE_KINDS:
            raise ValueError(f"unknown activation kind: {self.kind!r}")

    def __call__(self, z: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return np.asarray(z, dtype=float)
        if self.kind == "relu":
            return np.maximum(z, 0.0)
        if self.kind == "leaky_relu":
            return np.where(z >= 0.0, z, self.slope * z)
        if self.kind == "tanh":
            return np.tanh(z)
        if self.kind == "sincos_half":
            return 0.5 * np.sin(z) + 0.5 * np.cos(z)
        out = np.zeros_like(np.asarray(z, dtype=float))
        for w, act in zip(self.weights, self.basis):
            out += w * act(z)
        return out

    def derivative(self, z: np.ndarray) -> np.ndarray:
        """Elementwise derivative; ReLU takes subgradient 0 at the kink."""
        if self.kind == "identity":
            return np.ones_like(np.asarray(z, dtype=float))
        if self.kind == "relu":
            return (np.asarray(z) > 0.0).astype(float)
        if self.kind == "leaky_relu":
            return np.where(np.asarray(z) > 0.0, 1.0, self.slope)
        if self.kind == "tanh":
            t = np.tanh(z)
            return 1.0 - t * t
        if self.kind == "sincos_half":
            return 0.5 * np.cos(z) - 0.5 * np.sin(z)
        out = np.zeros_like(np.asarray(z, dtype=float))
        for w, act in zip(self.weights, self.basis):
            out += w * act.derivative(z)
        return out


IDENTITY = Activation("identity")
RELU = Activation("relu")
TANH = Activation("tanh")
SINCOS_HALF = Activation("sincos_half")


def leaky_relu(slope: float = 0.01) -> Activation:
    return Activation("leaky_relu", slope=slope)


def combination(weights, basis) -> Activation:
    return Activation(
        "combination", weights=tuple(float(w) for w in weights), basis=tuple(basis)
    )


@dataclass(frozen=True)
class Pooling:
    """Sliding-window average over mu+1 entries, stride 1: R^(d+mu) -> R^d.

    The induced matrix has rows of mu+1 copies of 1/(mu+1) shifted one step
    per row; it always has full row rank, and mu=0 is the identity.
    """

    out_dim: int
    mu: int

    def __post_init__(self):
        if self.out_dim < 1:
            raise ValueError("pooling out_dim must be positive")
        if self.mu < 0:
            raise ValueError("pooling mu must be nonnegative")

    @property
    def in_dim(self) -> int:
        return self.out_dim + self.mu

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.in_dim:
            raise ValueError(f"pooling expects last dim {self.in_dim}, got {x.shape[-1]}")
        if self.mu == 0:
            return x.copy()
        return sliding_window_view(x, self.mu + 1, axis=-1).mean(axis=-1)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """Apply the transpose of the induced matrix."""
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.out_dim:
            raise ValueError(f"adjoint expects last dim {self.out_dim}, got {y.shape[-1]}")
        if self.mu == 0:
            return y.copy()
        pad = np.zeros(y.shape[:-1] + (self.mu,))
        z = np.concatenate([pad, y, pad], axis=-1)
        return sliding_window_view(z, self.mu + 1, axis=-1).sum(axis=-1) / (self.mu + 1)

    def matrix(self) -> np.ndarray:
        p = np.zeros((self.out_dim, self.in_dim))
        w = 1.0 / (self.mu + 1)
        for i in range(self.out_dim):
            p[i, i : i + self.mu + 1] = w
        return p


@dataclass
class Grade:
    """One trained grade: pooled affine component plus the feature activation.

    `smoother` being set means the component (not the features) is smoothed;
    prediction then quadratures the raw pooled affine image around each query
    point, exactly as the training residual saw it.
    """

    weight: np.ndarray
    bias: np.ndarray
    pooling: Pooling
    activation: Activation
    smoother: smoothing.Smoother | None = None

    def __post_init__(self):
        self.weight = np.asarray(self.weight, dtype=float)
        self.bias = np.asarray(self.bias, dtype=float)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise ValueError("grade weight must be 2-D and bias 1-D")
        if self.weight.shape[0] != self.bias.shape[0]:
            raise ValueError("grade weight rows must match bias length")
        if self.weight.shape[0] != self.pooling.in_dim:
            raise ValueError("grade width must equal pooling in_dim")

    @property
    def width(self) -> int:
        return self.weight.shape[0]

    @property
    def tau(self) -> float:
        return self.smoother.tau if self.smoother is not None else 0.0


@dataclass
class Model:
    """Superposition model: optional hybrid head plus an ordered list of grades."""

    input_dim: int
    output_dim: int
    grades: list[Grade] = field(default_factory=list)
    head: Any = None  # optional MlpParams; duck-typed (predict / hidden / to_dict)

    def _check_input(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(f"expected inputs of shape (n, {self.input_dim})")
        return x

    def features(self, x: np.ndarray, upto: int | None = None) -> np.ndarray:
        """Feature recursion N_k at the rows of x (k = upto, default all grades).

        N_0 is the input itself (or the hybrid head's last hidden layer output),
        and each grade applies its activation to its pre-pooling affine image.
        """
        x = self._check_input(x)
        if upto is None:
            upto = len(self.grades)
        if not 0 <= upto <= len(self.grades):
            raise IndexError(f"feature depth {upto} out of range")
        a = self.head.hidden(x) if self.head is not None else x
        for g in self.grades[:upto]:
            a = g.activation(a @ g.weight.T + g.bias)
        return a

    def pre_activation(self, k: int, x: np.ndarray) -> np.ndarray:
        g = self.grades[k]
        return self.features(x, upto=k) @ g.weight.T + g.bias

    def _raw_component(self, k: int, x: np.ndarray) -> np.ndarray:
        g = self.grades[k]
        return g.pooling.apply(self.pre_activation(k, x))

    def component_values(self, k: int, x: np.ndarray) -> np.ndarray:
        """Grade k's component at the rows of x — smoothed when the grade says so."""
        x = self._check_input(x)
        g = self.grades[k]
        if g.smoother is None:
            return self._raw_component(k, x)
        if self.input_dim != 1:
            raise ValueError("smoothing supports 1-D input only")

        def f(points: np.ndarray) -> np.ndarray:
            return self._raw_component(k, points[:, None])

        return smoothing.smooth_fn_grid(f, g.smoother, x[:, 0])

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Sum of the per-grade components (plus the head), in grade order."""
        x = self._check_input(x)
        if not self.grades and self.head is None:
            raise ValueError("model has no grades and no head")
        if self.head is not None:
            out = np.asarray(self.head.predict(x), dtype=float)
        else:
            out = np.zeros((x.shape[0], self.output_dim))
        for k in range(len(self.grades)):
            out = out + self.component_values(k, x)
        return out


def inner_product(u: np.ndarray, v: np.ndarray) -> float:
    """Discrete inner product: sum over samples of the per-sample dot products."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    return float(np.sum(u * v))


def sq_norm(u: np.ndarray) -> float:
    return inner_product(u, u)


def norm(u: np.ndarray) -> float:
    return float(np.sqrt(sq_norm(u)))


# --- serialization ----------------------------------------------------------


def _activation_to_dict(a: Activation) -> dict:
    if a.kind == "leaky_relu":
        return {"kind": a.kind, "params": {"slope": a.slope}}
    if a.kind == "combination":
        return {
            "kind": a.kind,
            "params": {
                "weights": list(a.weights),
                "basis": [_activation_to_dict(b) for b in a.basis],
            },
        }
    return {"kind": a.kind, "params": {}}


def _activation_from_dict(d: dict) -> Activation:
    kind = d["kind"]
    params = d.get("params", {})
    if kind == "leaky_relu":
        return Activation(kind, slope=float(params["slope"]))
    if kind == "combination":
        return combination(
            params["weights"], [_activation_from_dict(b) for b in params["basis"]]
        )
    return Activation(kind)


def _smoothing_to_dict(s: smoothing.Smoother | None) -> dict:
    if s is None:
        return {"tau": 0.0}
    if isinstance(s.window, smoothing.GridSteps):
        mode = {"mode": "grid_steps", "count": s.window.count, "step": s.window.step}
    else:
        mode = {"mode": "tau_multiples", "factor": s.window.factor}
    return {"tau": s.tau, "window_mode": mode, "M": s.quad_points}


def _smoothing_from_dict(d: dict) -> smoothing.Smoother | None:
    if d.get("tau", 0.0) == 0.0:
        return None
    wm = d["window_mode"]
    if wm["mode"] == "grid_steps":
        window = smoothing.GridSteps(int(wm["count"]), float(wm["step"]))
    elif wm["mode"] == "tau_multiples":
        window = smoothing.TauMultiples(float(wm["factor"]))
    else:
        raise ValueError(f"unknown window mode: {wm['mode']!r}")
    return smoothing.Smoother(float(d["tau"]), window, int(d["M"]))


def model_to_dict(model: Model) -> dict:
    doc = {
        "format_version": FORMAT_VERSION,
        "input_dim": model.input_dim,
        "output_dim": model.output_dim,
        "grades": [
            {
                "weight": g.weight.tolist(),
                "bias": g.bias.tolist(),
                "mu": g.pooling.mu,
                "activation": _activation_to_dict(g.activation),
                "smoothing": _smoothing_to_dict(g.smoother),
            }
            for g in model.grades
        ],
    }
    if model.head is not None:
        doc["hybrid_head"] = model.head.to_dict()
    return doc


def model_from_dict(doc: dict) -> Model:
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version: {doc.get('format_version')!r}")
    t = int(doc["output_dim"])
    head = None
    if "hybrid_head" in doc:
        from .mlp import MlpParams  # deferred: mlp imports this module

        head = MlpParams.from_dict(doc["hybrid_head"])
    grades = []
    for gd in doc["grades"]:
        weight = np.asarray(gd["weight"], dtype=float)
        grades.append(
            Grade(
                weight=weight,
                bias=np.asarray(gd["bias"], dtype=float),
                pooling=Pooling(out_dim=t, mu=int(gd["mu"])),
                activation=_activation_from_dict(gd["activation"]),
                smoother=_smoothing_from_dict(gd.get("smoothing", {"tau": 0.0})),
            )
        )
    return Model(int(doc["input_dim"]), t, grades, head)

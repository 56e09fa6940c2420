"""Benchmark target functions and deterministic dataset generation.

Training inputs are an endpoint-inclusive equally spaced grid over
[a - delta, b + delta]; test inputs are uniform draws over [a, b] from the
package's own PRNG so every dataset is bit-reproducible.

The oscillatory target's quadratic coefficients ship as a frozen text file
(one line per output index: `k a_k b_k c_k`, 17-significant-digit decimals),
generated once from the package PRNG — see demos/regenerate_coefficients.py
for the exact recipe.  A custom tabulated target can be supplied as a CSV of
x followed by one or more value columns; it is evaluated by linear
interpolation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from typing import Callable

import numpy as np

from .rng import SplitMix64


@dataclass
class Dataset:
    inputs: np.ndarray  # (m, s)
    targets: np.ndarray  # (m, t)
    kind: str  # "train_grid" | "test_uniform"
    a: float
    b: float
    delta: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        if self.inputs.shape[0] != self.targets.shape[0]:
            raise ValueError("inputs and targets must have matching row counts")


@dataclass(frozen=True)
class Target:
    name: str
    output_dim: int
    fn: Callable[[np.ndarray], np.ndarray]  # (n,) -> (n, output_dim)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fn(np.asarray(x, dtype=float))


def _nondiff_values(x: np.ndarray) -> np.ndarray:
    v = np.abs(np.cos(np.pi * (x - 0.3)) - 0.7)
    v = np.abs(np.cos(2.0 * np.pi * (v - 0.5)) - 0.5)
    v = -np.abs(v - 1.3) + 1.3
    v = -np.abs(v - 0.9) + 0.9
    return ((x + 1.0) * v)[:, None]


def target_nondiff() -> Target:
    """Continuous but non-differentiable scalar target on [-1, 1]."""
    return Target("nondiff", 1, _nondiff_values)


def oscillatory_coefficients(path: str | None = None) -> np.ndarray:
    """(20, 3) array of a_k, b_k, c_k; defaults to the packaged frozen file."""
    if path is None:
        text = (resources.files("sal_learn") / "data" / "oscillatory_coeffs.txt").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"coefficient line needs 4 fields, got: {line!r}")
        rows.append([float(parts[1]), float(parts[2]), float(parts[3])])
    coeffs = np.asarray(rows, dtype=float)
    if coeffs.shape != (20, 3):
        raise ValueError(f"expected 20 coefficient rows, got {coeffs.shape[0]}")
    return coeffs


def target_oscillatory(coeff_path: str | None = None) -> Target:
    """20-component target: (a_k x^2 + b_k x + c_k) * sin(100 x)."""
    coeffs = oscillatory_coefficients(coeff_path)
    a, b, c = coeffs[:, 0], coeffs[:, 1], coeffs[:, 2]

    def fn(x: np.ndarray) -> np.ndarray:
        quad = a[None, :] * x[:, None] ** 2 + b[None, :] * x[:, None] + c[None, :]
        return quad * np.sin(100.0 * x)[:, None]

    return Target("oscillatory", 20, fn)


def load_custom_target(path: str) -> Target:
    """Tabulated target from a CSV of x, y1, ..., yt; linear interpolation."""
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    table = np.asarray([[float(v) for v in row] for row in rows])
    if table.ndim != 2 or table.shape[1] < 2 or table.shape[0] < 2:
        raise ValueError(f"custom target file needs >= 2 rows of x plus value columns: {path}")
    order = np.argsort(table[:, 0])
    xs, ys = table[order, 0], table[order, 1:]

    def fn(x: np.ndarray) -> np.ndarray:
        return np.column_stack([np.interp(x, xs, col) for col in ys.T])

    return Target("custom", ys.shape[1], fn)


def get_target(name: str, coeff_path: str | None = None, custom_path: str | None = None) -> Target:
    if name == "nondiff":
        return target_nondiff()
    if name == "oscillatory":
        return target_oscillatory(coeff_path)
    if name == "custom":
        if custom_path is None:
            raise ValueError("custom target requires a file path")
        return load_custom_target(custom_path)
    raise ValueError(f"unknown target: {name!r}")


def train_grid(a: float, b: float, delta: float, m: int) -> np.ndarray:
    """x_n = (a - delta) + (n-1) * (b + delta - (a - delta)) / (m - 1), n = 1..m."""
    if m < 2:
        raise ValueError("train grid needs m >= 2")
    lo = a - delta
    hi = b + delta
    return lo + np.arange(m) * ((hi - lo) / (m - 1))


def make_train(target: Target, a: float, b: float, delta: float, m: int) -> Dataset:
    x = train_grid(a, b, delta, m)
    return Dataset(x[:, None], target(x), "train_grid", a, b, delta=delta)


def make_test(target: Target, a: float, b: float, m_test: int, seed: int) -> Dataset:
    if m_test < 1:
        raise ValueError("test set needs m_test >= 1")
    rng = SplitMix64(seed)
    x = a + (b - a) * rng.uniforms(m_test)
    return Dataset(x[:, None], target(x), "test_uniform", a, b, seed=seed)

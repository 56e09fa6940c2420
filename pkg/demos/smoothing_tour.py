"""What the discrete Gaussian smoother does, numerically.

Four short exhibits:

1. The quadrature weights integrate the Gaussian kernel: with a window of
   six kernel widths and 200 nodes the weight sum is 1 to ~1e-9, so an
   unnormalized smoother is almost mass-preserving.
2. A renormalized smoother reproduces constants bit-exactly and converges
   to the identity as tau shrinks below the grid step.
3. Smoothing a pure carrier sin(w x) multiplies it by roughly
   exp(-(w tau)^2 / 2) — the mechanism that lets a tau ladder pace how fast
   each grade's high-frequency content is attenuated.
4. Shrinking tau along a ladder brings the smoothed function monotonically
   closer to the original.
"""

import numpy as np

from sal_learn.smoothing import Smoother, TauMultiples, quadrature, smooth_at, smooth_grid

# 1: weight sum
sm = Smoother(tau=3e-3, window=TauMultiples(6.0), quad_points=200)
_, weights = quadrature(sm)
print(f"weight sum with TauMultiples(6), M=200: 1 {weights.sum() - 1.0:+.2e}")

# 2: constants and the identity limit
norm = Smoother(tau=3e-3, window=TauMultiples(6.0), quad_points=200, renormalize=True)
c = 2.5
val = smooth_at(lambda xs: np.full((len(xs), 1), c), norm, 0.37)[0]
print(f"renormalized constant {c} -> {val!r} (exact: {val == c})")

grid = np.linspace(-1.0, 1.0, 201)
f_vals = np.sin(3.0 * grid)
for tau in (1e-1, 1e-2, 1e-3):
    sm_tau = Smoother(tau=tau, window=TauMultiples(8.0), quad_points=300, renormalize=True)
    err = np.linalg.norm(smooth_grid(f_vals, sm_tau, grid) - f_vals) / np.linalg.norm(f_vals)
    print(f"identity limit, tau={tau:.0e}: relative error {err:.2e}")

# 3: carrier attenuation
omega = 100.0
xs = np.linspace(0.0, 1.0, 1001)
carrier = np.sin(omega * xs)
for tau in (5e-3, 3e-3, 1e-3):
    sm_c = Smoother(tau=tau, window=TauMultiples(8.0), quad_points=400)
    smoothed = smooth_grid(carrier, sm_c, xs)
    measured = np.linalg.norm(smoothed) / np.linalg.norm(carrier)
    predicted = np.exp(-0.5 * (omega * tau) ** 2)
    print(
        f"carrier sin({omega:.0f}x), tau={tau:.0e}: amplitude ratio {measured:.4f}"
        f" vs exp(-(w tau)^2/2) = {predicted:.4f}"
    )

# 4: a tau ladder approaches the original monotonically
print("tau ladder on a smooth mixture:")
mix = np.sin(3.0 * grid) + 0.3 * np.cos(9.0 * grid)
prev = np.inf
for tau in (2e-2, 1e-2, 5e-3, 2e-3, 1e-3):
    sm_l = Smoother(tau=tau, window=TauMultiples(8.0), quad_points=300, renormalize=True)
    err = np.linalg.norm(smooth_grid(mix, sm_l, grid) - mix)
    print(f"  tau={tau:.0e}: |smoothed - f| = {err:.3e}" + ("  (decreasing)" if err < prev else ""))
    prev = err

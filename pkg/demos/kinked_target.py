"""Grade-by-grade run on the kinked scalar benchmark target.

The target is a composition of absolute values and cosines scaled by (x+1):
continuous but full of kinks.  The run uses oscillatory random features for
the first two grades (half-sine-half-cosine activation, Nesterov from a
random start) and ReLU features afterwards, with a tau ladder that smooths
each fitted component before it joins the superposition: coarse smoothing
early, finer smoothing as the residual sharpens.

By default a down-scaled tour runs in under a minute; pass --full for the
configuration used by the acceptance suite (8 grades, width 100, m=1001,
around five minutes on one core).
"""

import sys
import time

from sal_learn import qp
from sal_learn.data import make_test, make_train, target_nondiff
from sal_learn.model import RELU, SINCOS_HALF
from sal_learn.smoothing import GridSteps
from sal_learn.train import GradeConfig, TrainConfig, train_sal

full = "--full" in sys.argv[1:]
if full:
    m, width, max_iters = 1001, 100, 5000
    taus = [0.0, 6e-3, 6e-3, 6e-3, 3e-3, 3e-3, 1e-3, 1e-3]
else:
    m, width, max_iters = 501, 60, 2500
    taus = [0.0, 6e-3, 3e-3, 1e-3]

target = target_nondiff()
train_set = make_train(target, -1.0, 1.0, 0.1, m)
test_set = make_test(target, -1.0, 1.0, 500, seed=99)

grades = []
for k, tau in enumerate(taus):
    act = SINCOS_HALF if k < 2 else RELU
    init = "randn" if k < 2 else "he"
    grades.append(
        GradeConfig(
            width=width,
            activation=act,
            tau=tau,
            window=GridSteps(100, 4e-4) if tau > 0 else None,
            quad_points=201,
            solver=qp.SolverConfig(
                method="nesterov", epsilon=1e-7, max_iters=max_iters, init=init
            ),
        )
    )

print(f"{'full' if full else 'quick'} run: {len(grades)} grades, width {width}, {m} grid points")
t0 = time.perf_counter()
model, report = train_sal(train_set, TrainConfig(grades=grades), test=test_set)
elapsed = time.perf_counter() - t0

print()
print("grade   tau     iters   rse(train)   rse(test)")
for rec in report.records:
    print(
        f"  {rec.grade}    {rec.tau:.0e}  {rec.iterations:6d}   {rec.rse_train:.3e}"
        f"    {rec.rse_test:.3e}"
    )
print()
print(f"total time {elapsed:.1f} s")

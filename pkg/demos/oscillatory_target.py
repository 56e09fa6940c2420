"""Grade-by-grade run on the 20-component oscillatory benchmark target.

Every output of this target is a quadratic polynomial times sin(100 x), so
the entire signal lives in a narrow frequency band around 100 rad.  ReLU
features cannot resolve 16 periods on [0, 1] at practical widths, and
random oscillatory features at the default scale miss the band.  The fix is
the first grade's init_scale: drawing the random weights with standard
deviation 110 puts a handful of the 128 features at frequencies near the
carrier, and the convex fit then does the rest — the residual drops by five
orders of magnitude in one grade.

The remaining grades are plain direct least-squares solves on ReLU features
under a tau ladder; they polish the residual below 1e-5.  Runs in about a
minute on one core.
"""

import time

from sal_learn import qp
from sal_learn.data import make_test, make_train, target_oscillatory
from sal_learn.model import RELU, SINCOS_HALF
from sal_learn.smoothing import TauMultiples
from sal_learn.train import GradeConfig, TrainConfig, train_sal

target = target_oscillatory()
train_set = make_train(target, 0.0, 1.0, 0.0, 2001)
test_set = make_test(target, 0.0, 1.0, 1000, seed=2)

grades = [
    GradeConfig(
        width=128,
        activation=SINCOS_HALF,
        solver=qp.SolverConfig(
            method="nesterov", epsilon=1e-7, max_iters=1000, init="randn", init_scale=110.0
        ),
    )
]
for tau in (5e-3, 4e-3, 3e-3, 2e-3, 1e-3):
    grades.append(
        GradeConfig(
            width=128,
            activation=RELU,
            tau=tau,
            window=TauMultiples(6.0),
            quad_points=200,
            solver=qp.SolverConfig(method="direct"),
        )
    )

print("6 grades, width 128, 2001 grid points on [0, 1]")
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
first, last = report.records[0].rse_train, report.records[-1].rse_train
print()
print(f"reduction grade 1 -> final: {first / last:.1e}x in {elapsed:.1f} s")

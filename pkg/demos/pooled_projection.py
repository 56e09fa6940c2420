"""Why grade-by-grade training is an orthogonal projection.

Each grade fixes its feature map (the activations of the previous grade)
and solves a convex least-squares problem for one new affine piece.  The
fitted component is the orthogonal projection of the current residual onto
the span of the pooled features, which forces two identities on the
training data:

  orthogonality   <e_{k+1}, f_{k+1}> = 0
  Pythagoras      |e_k|^2 = |e_{k+1}|^2 + |f_{k+1}|^2

and, telescoping over grades, a partial Parseval identity

  |f|^2 = sum_k |f_k|^2 + |e_K|^2.

The first grade below is solved inexactly (Nesterov from a random start,
stopping at a relative change of 1e-10), the remaining two exactly (direct
solver).  The printed defects show the difference: an approximate minimizer
is approximately orthogonal (~1e-7 here), an exact projection is orthogonal
to float rounding.  The random start also matters for a scalar target: the
minimum-norm direct solution would make every feature of the next grade a
copy of the same function.

Accuracy is not the point of this script — three plain grades barely dent
the kinked target.  See demos/kinked_target.py for the run that does.
"""

import numpy as np

from sal_learn import qp
from sal_learn.data import make_train, target_nondiff
from sal_learn.model import sq_norm
from sal_learn.train import GradeConfig, TrainConfig, train_sal

ds = make_train(target_nondiff(), -1.0, 1.0, 0.0, 200)
grades = [
    GradeConfig(
        width=10,
        solver=qp.SolverConfig(method="nesterov", epsilon=1e-10, max_iters=20000, init="randn"),
    )
] + [GradeConfig(width=10, solver=qp.SolverConfig(method="direct")) for _ in range(2)]
model, report = train_sal(ds, TrainConfig(grades=grades))

print(f"target norm^2 on the grid: {sq_norm(ds.targets):.6f}")
print()
print("grade  solver    rse(train)   <e,f>/|e_prev|^2   pythagoras defect")
residual = ds.targets.copy()
component_sum = 0.0
for k, rec in enumerate(report.records):
    comp = model.component_values(k, ds.inputs)
    nxt = residual - comp
    inner = float(np.sum(nxt * comp)) / sq_norm(residual)
    defect = abs(sq_norm(residual) - sq_norm(nxt) - sq_norm(comp)) / sq_norm(residual)
    solver = "nesterov" if k == 0 else "direct"
    print(
        f"  {rec.grade}    {solver:8s}  {rec.rse_train:.3e}      {inner:+.2e}          {defect:.2e}"
    )
    component_sum += sq_norm(comp)
    residual = nxt

parseval = abs(sq_norm(ds.targets) - component_sum - sq_norm(residual)) / sq_norm(ds.targets)
print()
print(f"partial parseval defect after 3 grades: {parseval:.2e}")

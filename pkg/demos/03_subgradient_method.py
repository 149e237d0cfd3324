# # The stochastic subgradient method on a small LASSO
#
# f(x) = 1/2 |Ax - b|^2 + lam |x|_1 on R^2. The minimiser has x_1 = 0, so it
# sits on a kink of f.

# In[1]:

import numpy as np

from tameopt.solvers import (
    DEFAULT_LASSO,
    NoiseModel,
    StepSchedule,
    diagnose_trajectory,
    lasso_critical_points,
    ssm_run,
    validate_schedule,
)
from tameopt.subdiff import lasso_expr

inst = DEFAULT_LASSO
f = lasso_expr(inst.A, inst.b, inst.lam)
print("A =", inst.A.tolist(), "b =", inst.b.tolist(), "lam =", inst.lam)
print("critical points:", [p.round(6).tolist() for p in lasso_critical_points(inst.A, inst.b, inst.lam)])


# Step sizes must be square-summable but not summable. The gate checks this
# in closed form for power schedules c / k^alpha.

# In[2]:

for alpha in (0.3, 0.5, 0.75, 1.0, 1.2):
    verdict = validate_schedule(StepSchedule.power(1.0, alpha))
    print(f"alpha={alpha:<4} {verdict.verdict:<8} {verdict.reason}")


# Noiseless and noisy runs with gamma_k = 1/k.

# In[3]:

for noise in (NoiseModel.none(), NoiseModel.gaussian(0.1, seed=3)):
    traj = ssm_run(f, inst.x0, StepSchedule.power(), noise, iters=20000)
    rep = diagnose_trajectory(traj, f)
    print(noise.kind, "final x", traj.final.round(4), "f", round(float(traj.fs[-1]), 6))
    print("   tail variation of f:", f"{rep.f_tail_variation:.2e}")
    for p in rep.limit_points:
        print(f"   limit point {p.center.round(4)} size {p.size} dist(0, hull) {p.distance:.1e} critical {p.critical}")


# The iterates approach x_1 = 0 but almost never land on it exactly.

# In[4]:

traj = ssm_run(f, inst.x0, StepSchedule.power(), iters=20000)
print("iterations with x_1 == 0:", int(np.sum(traj.xs[:, 0] == 0.0)))
print("smallest |x_1| in the tail:", np.abs(traj.xs[-2000:, 0]).min())

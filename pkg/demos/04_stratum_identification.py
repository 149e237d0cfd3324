# # Which methods find the active manifold?
#
# Prox-gradient sets x_1 to exactly zero after finitely many steps and stays
# there. The subgradient method and nonsmooth BFGS keep x_1 small but nonzero.

# In[1]:

from pathlib import Path

from tameopt.experiments import lasso_compare, path_figure
from tameopt.solvers import DEFAULT_LASSO

results = lasso_compare(DEFAULT_LASSO, iters={"ssm": 5000})
print("method   iters   final x                  f            k*")
for r in results:
    print(f"{r.method:<8} {r.trajectory.iterations:>5}   {str(r.trajectory.final.round(6)):<24} "
          f"{r.trajectory.fs[-1]:.8f}   {r.k_star if r.k_star is not None else 'never'}")


# The summary rows are what the CLI writes to lasso_summary.csv.

# In[2]:

for r in results:
    print(r.row())


# Paths in the plane, with the stratum x_1 = 0 drawn as a vertical line.

# In[3]:

out = Path("demo_output")
out.mkdir(exist_ok=True)
path_figure(results, DEFAULT_LASSO).save(out / "lasso_paths.svg")
print("wrote", out / "lasso_paths.svg")

# # Lower bounds from moment relaxations
#
# min x^4 - x^2 on [-1, 1]. The minimum is -1/4 at x = +-1/sqrt(2), two
# global minimisers, which shows up in the rank of the moment matrix.

# In[1]:

import numpy as np

from tameopt.momsos import PolyProgram, bound_sequence, build_relaxation, extract_minimizer, solve_relaxation

prog = PolyProgram(1, {(4,): 1.0, (2,): -1.0}, [{(0,): 1.0, (2,): -1.0}])
bs = bound_sequence(prog, 4)
for d, v, status in bs.table():
    print(f"order {d}: f_d = {v:+.9f}  ({status})")
print("grid upper bound:", bs.grid.value, "at", bs.grid.point)
print("nondecreasing:", bs.monotone, " below grid:", bs.below_grid)


# Two minimisers give a rank-2 moment matrix, so a single point cannot be read
# off and the extraction says so.

# In[2]:

ex = extract_minimizer(bs.results[-1])
print("rank one:", ex.rank_one, "certified:", ex.certified)


# A convex quadratic on a disc is solved exactly by the first relaxation, and
# the minimiser comes out of the first-order moments.

# In[3]:

quad = PolyProgram(2, {(2, 0): 1.0, (0, 2): 2.0, (1, 0): -1.0, (0, 1): 1.0}, [], ball=1.0)
r = solve_relaxation(build_relaxation(quad, 1))
ex = extract_minimizer(r)
print("f_1 =", r.value, "x* =", ex.x, "certified:", ex.certified)
print("closed form x* =", np.array([0.5, -0.25]))


# The relaxation is an SDP in block form; residuals are reported alongside.

# In[4]:

print("blocks:", r.relaxation.sdp.blocks, "constraints:", r.relaxation.sdp.m)
print({k: f"{v:.1e}" for k, v in r.sdp.residuals.items()})

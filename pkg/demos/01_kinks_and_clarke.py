# # Kinks, selection derivatives and the Clarke subdifferential
#
# Two functions built from ReLUs agree away from 0. Automatic differentiation
# still gives them different derivatives at 0, and neither answer is the
# whole story. The Clarke subdifferential is.

# In[1]:

import numpy as np

import tameopt.expr as E
from tameopt.subdiff import (
    KinkPolicy,
    ad_derivative,
    clarke_generators,
    is_clarke_critical,
    min_norm_element,
    wolfe_min_norm,
)

x = E.var(0)
f = E.relu(x) - 0.5 * E.relu(-x)        # slope 1/2 on the left, 1 on the right
g = (E.relu(-x) + x) - E.relu(x)        # identically zero

print(E.serialize_expr(f))
print([E.evaluate(g, [t]) for t in (-2.0, -0.1, 0.0, 0.3, 5.0)])


# The default kink policy takes relu'(0) = 0. Applied through the chain rule
# this gives f'(0) = 0, a value outside both one-sided slopes, and g'(0) = 1
# for a constant function.

# In[2]:

print("AD f'(0) =", ad_derivative(f, [0.0])[0])
print("AD g'(0) =", ad_derivative(g, [0.0])[0])

right = KinkPolicy().with_rules(relu="right")
print("with relu'(0) = 1:", ad_derivative(f, [0.0], right)[0], ad_derivative(g, [0.0], right)[0])


# For a univariate piecewise-polynomial expression the hull is computed
# exactly from the one-sided derivatives.

# In[3]:

hull = clarke_generators(f, [0.0])
print("exact:", hull.exact, "interval:", hull.interval())
print("dist(0, hull) =", min_norm_element(hull).distance)
print("critical?", is_clarke_critical(f, [0.0]))

habs = clarke_generators(E.abs_(x), [0.0])
print("|x| at 0:", habs.interval(), "critical?", is_clarke_critical(E.abs_(x), [0.0]))


# In several variables the hull is sampled: gradients at random points in
# shrinking balls around the query point, deduplicated, then reduced to the
# min-norm element with Wolfe's algorithm.

# In[4]:

x0, x1 = E.var(0, 2), E.var(1, 2)
h = E.max2(E.relu(x0), E.abs_(x1))
H = clarke_generators(h, [0.0, 0.0], rng_seed=1)
print(len(H.generators), "generators, stabilized:", H.stabilized)
print(np.unique(np.round(H.generators, 6), axis=0))
v, w = wolfe_min_norm(H.generators)
print("min-norm point", v, "weights sum", w.sum())

# # How often does a random ReLU network evaluate a kink?
#
# In exact arithmetic a Gaussian pre-activation is never exactly zero. In
# floating point, and once a whole layer is switched off, it can be.

# In[1]:

from tameopt.experiments import binomial_interval, relu_activity

rep = relu_activity([1, 2, 4, 8], [1, 2, 4], 20000, seed=0, precision="f32")
print(" L   w    hits   probability   95% interval")
for c in rep.cells:
    print(f"{c.depth:>2} {c.width:>3} {c.hits:>7}   {c.probability:.4f}        [{c.lo:.4f}, {c.hi:.4f}]")


# Narrow deep networks hit kinks often: with zero biases a dead layer feeds
# exact zeros to the next one. Wide layers rarely die, so the rate falls
# with width.

# In[2]:

wide = relu_activity([8], [16, 64], 20000, seed=0, precision="f32")
for c in wide.cells:
    print(f"L={c.depth} w={c.width}: {c.hits} hits of {c.samples}")


# Exact Clopper-Pearson intervals keep zero counts honest.

# In[3]:

print(binomial_interval(0, 20000))
print(binomial_interval(3, 20000))

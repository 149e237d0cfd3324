# # Semialgebraic subsets of the line
#
# Every set below is a finite union of points and open intervals with exact
# real algebraic endpoints. Boolean operations never leave that class.

# In[1]:

from fractions import Fraction

from tameopt.strat1d import (
    UnivariateSASet,
    monotonicity_decomposition,
    parse_saset,
    real_roots,
    solve_poly_inequality,
)

roots = real_roots([-2, 0, 1])          # x^2 - 2
print(roots, [float(r) for r in roots])
print("root enclosure:", roots[1].enclosure())


# Solving polynomial sign conditions gives normal forms directly.

# In[2]:

inside = solve_poly_inequality([-2, 0, 1], "<=")   # [-sqrt2, sqrt2]
cubic = solve_poly_inequality([0, -1, 0, 1], ">")  # x^3 - x > 0
print("x^2 <= 2      :", inside)
print("x^3 - x > 0   :", cubic)
print("intersection  :", inside & cubic)
print("complement    :", ~inside)
print("difference    :", inside - cubic)


# The text form round-trips for rational endpoints.

# In[3]:

S = parse_saset("(-inf,-1) | {0} | (1/3,2)")
T = parse_saset("{0} | (0,1) | {1}")  # the closed interval [0, 1]
print(S | T)
print((S | T) == parse_saset(str(S | T)))
print(S.contains(Fraction(1, 2)), S.contains(0), S.contains(Fraction(-1)))


# ## Monotone pieces
#
# A polynomial splits an interval into finitely many pieces on which it is
# strictly increasing, strictly decreasing or constant.

# In[4]:

dec = monotonicity_decomposition([0, -3, 0, 1], -3, 3)  # x^3 - 3x
for lo, hi, label in dec.intervals():
    print(f"({float(lo):+.3f}, {float(hi):+.3f})  {label}")
print("cut points:", [str(c) for c in dec.cuts])

dec = monotonicity_decomposition([0, 0, -1, 0, 1], "-inf", "+inf")  # x^4 - x^2
for lo, hi, label in dec.intervals():
    print(lo, hi, label)

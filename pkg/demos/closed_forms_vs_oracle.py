"""
Checking closed forms against a brute-force program
===================================================

The cdf bounds come from a closed-form map. Independently, one can
discretize the unknown selection function into bins and solve the resulting
box-constrained linear program exactly with a greedy fill. The two should
agree to rounding error.
"""

import numpy as np

from cdepbounds import CdepContext, generic_cdf_bounds, lp_cdf_extremum, uniform_problem
from cdepbounds.oracle import verify_suite

rng = np.random.default_rng(0)
print("   p      c      u    closed-form           program")
for _ in range(5):
    p, c, u = rng.uniform(0.05, 0.95), rng.uniform(0, 0.6), rng.uniform()
    b = generic_cdf_bounds(CdepContext(p, c), u)
    prob = uniform_problem(1000, p, c)
    lo, hi = lp_cdf_extremum(prob, u, "min"), lp_cdf_extremum(prob, u, "max")
    print(f"{p:5.2f} {c:6.2f} {u:6.2f}  [{b.lower:.6f}, {b.upper:.6f}]  [{lo:.6f}, {hi:.6f}]")

# %%
# The same comparison over many random cases, including mean bounds.
res = verify_suite(n_cdf=200, n_mean=20, n_bins=1000)
print(f"\nlargest cdf gap {res['cdf_max_error']:.1e}, largest mean gap {res['mean_max_error']:.1e}")

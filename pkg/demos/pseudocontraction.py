# # Strict pseudocontractions as variational inequalities
#
# If S is k-strictly pseudocontractive then A = I - S is inverse strongly
# monotone with constant (1 - k) / 2. With the identity family, a step of the
# hybrid scheme with lambda = 1 - k is a relaxed projected step of S, and the
# iterates converge to the fixed point of S.

import numpy as np

from fixvi import SchemeSpec, StopRule, gen_pseudocontractive, run_scheme
from fixvi.schemes import ConstantSchedule

k = 0.4
problem = gen_pseudocontractive(3, k, seed=5)
S = problem.extra["S"]
print("certified alpha:", problem.A.alpha, " expected (1 - k)/2 =", (1 - k) / 2)

# ## The reduction identity
#
# At an interior point x with lambda = 1 - k, x - lambda A x equals k x + (1 - k) S x.

x = np.array([0.3, -0.2, 0.1])
lam = 1 - k
lhs = x - lam * problem.A(x)
rhs = k * x + (1 - k) * S(x)
print("identity gap:", np.linalg.norm(lhs - rhs))

# ## Iterate to Fix S = {0}
#
# The step size must stay strictly below 2 alpha = 1 - k, so we back off a little.

spec = SchemeSpec("karahan12", lam=ConstantSchedule(0.9 * lam))
trace = run_scheme(spec, problem, problem.x0, StopRule(tol=1e-10), oracle=np.zeros(3))
print(f"{trace.terminated_by} after {trace.iterations} iterations, |x| = {np.linalg.norm(trace.final.x):.2e}")

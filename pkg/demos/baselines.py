# # Comparing the hybrid scheme against classical baselines
#
# A family of eight scalings shares one fixed point z*. The operator is zero,
# so every scheme is really a fixed-point method here and all of them should
# land on z*. Anchored schemes use a tiny anchor weight so that their limit is
# close to z* rather than pulled toward the anchor.

import numpy as np

from fixvi import SchemeSpec, StopRule, gen_common_fixed_family, run_scheme
from fixvi.schemes import ConstantSchedule

problem = gen_common_fixed_family(5, 8, seed=3)
z = problem.oracle_hint
stop = StopRule(tol=1e-8, max_iter=20_000)
tiny = ConstantSchedule(1e-10)

specs = [
    SchemeSpec("karahan12"),
    SchemeSpec("takahashi-toyoda"),
    SchemeSpec("khan"),
    SchemeSpec("iiduka-takahashi", alpha=tiny),
    SchemeSpec("yao", alpha=tiny, variant="amended", label="yao-amended"),
]

print(f"{'scheme':18s}{'stop':>11s}{'iters':>8s}{'|x - z*|':>12s}")
for spec in specs:
    trace = run_scheme(spec, problem, problem.x0, stop, oracle=z)
    dist = np.linalg.norm(trace.final.x - z)
    print(f"{spec.name:18s}{trace.terminated_by:>11s}{trace.iterations:>8d}{dist:12.2e}")

# ## The verbatim Yao update
#
# Read literally, the Yao-type update subtracts lambda times the point rather
# than lambda times A of the point. With A = 0 that drags the iterate toward
# the origin, so it stalls away from z* within the budget.

trace = run_scheme(SchemeSpec("yao", alpha=tiny), problem, problem.x0, StopRule(tol=1e-8, max_iter=2000), oracle=z)
print("yao (verbatim):", trace.terminated_by, f"distance {np.linalg.norm(trace.final.x - z):.3f}")

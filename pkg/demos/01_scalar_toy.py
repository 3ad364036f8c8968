"""
Three splitting schemes on a one-dimensional problem
====================================================

``min y^2/2 + z^2/2  s.t.  y + z = 2`` has the KKT point
``(y, z, x) = (1, 1, 1)``. Classic ADMM, generalized ADMM and the proximal
generalized scheme all reach it; the relaxation factor changes how fast.
"""

import numpy as np

from pgadmm import SolverConfig, generate, problem_from_dict, solve

toy = problem_from_dict(generate("scalar_toy"))

configs = {
    "classic ADMM, tau=1": SolverConfig("classic_admm", tau=1.0, tol=1e-10),
    "classic ADMM, tau=1.6": SolverConfig("classic_admm", tau=1.6, tol=1e-10),
    "GADMM, rho=1.5": SolverConfig("gadmm", rho=1.5, tol=1e-10),
    "p-GADMM, rho=1.5, S=T=1e-8": SolverConfig(rho=1.5, S=1e-8, T=1e-8, tol=1e-10),
    "p-GADMM, rho=1.9, S=T=I": SolverConfig(rho=1.9, S=1.0, T=1.0, tol=1e-10),
}

for label, cfg in configs.items():
    r = solve(toy, cfg)
    y, z, x = r.state.y[0], r.state.z[0], r.state.x[0]
    print(f"{label:30s} {r.status:10s} k={r.iterations:3d}  (y, z, x) = ({y:.10f}, {z:.10f}, {x:.10f})")

###############################################################################
# The first classic iteration can be checked by hand: from zeros,
# ``y = argmin y^2/2 + (y - 2)^2/2 = 1``, then ``z = argmin z^2/2 + (z - 1)^2/2
# = 0.5`` and ``x = 0 - (1 + 0.5 - 2) = 0.5``.

first = solve(toy, SolverConfig("classic_admm", max_iter=1)).state
print("first classic iterate:", np.concatenate([first.y, first.z, first.x]))

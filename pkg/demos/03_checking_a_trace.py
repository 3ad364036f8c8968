"""
Checking a trace against the convergence analysis
=================================================

Every p-GADMM iteration satisfies three exact identities and three
inequalities. ``trace_diagnostics`` evaluates all of them per iteration;
``check_trace`` lists those that fail. A deliberately broken solver shows
what a failure looks like.
"""

import numpy as np

from pgadmm import SolverConfig, assemble_xi, check_trace, generate, problem_from_dict, solve, trace_diagnostics
from pgadmm.oracle import solve_oracle

problem = problem_from_dict(generate("sep_qp", (10, 8, 6), seed=3))
oracle = solve_oracle(problem)
cfg = SolverConfig(rho=1.7, sigma=0.5, S=1e-3, T=1e-3, tol=1e-10)
run = solve(problem, cfg)
rows = trace_diagnostics(problem, cfg, run.trace, oracle)

print(f"{run.status} after {run.iterations} iterations")
for key in ("residual_bound", "lyapunov_gap", "lyapunov_full", "descent_gap"):
    vals = [r[key] for r in rows if not np.isnan(r[key])]
    print(f"  min {key:15s} {min(vals): .2e}")
for key in ("multiplier", "y_prox", "z_prox"):
    print(f"  max {key:15s} {max(r[key] for r in rows): .2e}")
print("violations:", check_trace(problem, cfg, run.trace, oracle, rows=rows))

###############################################################################
# Fault injection: a multiplier step of ``1.5 sigma`` breaks the multiplier
# recursion immediately; over-relaxing ``y~`` breaks the Lyapunov descent.

toy = problem_from_dict(generate("scalar_toy"))
toy_cfg = SolverConfig(rho=1.5, S=1.0, T=1.0, max_iter=50)
for fault in ("x_update", "relaxation"):
    found = check_trace(toy, toy_cfg, solve(toy, toy_cfg, fault=fault).trace, solve_oracle(toy))
    print(f"{fault}: {len(found)} violations, first: {found[0]}")

###############################################################################
# The weighting operator is only positive semidefinite: at ``rho = 1`` the
# ``z~ - z`` block vanishes.

for rho in (0.5, 1.0, 1.5):
    xi = assemble_xi(problem, cfg.with_(rho=rho))
    print(f"rho={rho}: lambda_min(Xi) = {xi.lambda_min:.3e}, lambda_max(Xi) = {xi.lambda_max:.3e}")

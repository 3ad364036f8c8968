import numpy as np
import pytest

from pgadmm import SolverConfig, generate, problem_from_dict, solve, trace_diagnostics
from pgadmm.oracle import solve_oracle

RHOS = (0.5, 1.0, 1.5, 1.9)
SIGMAS = (0.1, 1.0, 10.0)


def build(family, dims=None, seed=0, **params):
    return problem_from_dict(generate(family, dims, seed, **params))


@pytest.fixture(scope="session")
def toy():
    return build("scalar_toy")


@pytest.fixture(scope="session")
def trace_suite():
    """p-GADMM traces over a rho x sigma grid on three problem families.

    Each entry is ``(problem, config, report, oracle, rows)`` where ``rows``
    are the per-iteration diagnostics.
    """
    problems = [build("scalar_toy"), build("lasso", 8, 1), build("sep_qp", (10, 8, 6), 3)]
    suite = []
    for problem in problems:
        oracle = solve_oracle(problem)
        for rho in RHOS:
            for sigma in SIGMAS:
                cfg = SolverConfig(rho=rho, sigma=sigma, S=1e-4, T=1e-4, tol=1e-10, max_iter=1500)
                report = solve(problem, cfg)
                rows = trace_diagnostics(problem, cfg, report.trace, oracle)
                suite.append((problem, cfg, report, oracle, rows))
    return suite


@pytest.fixture
def rng():
    return np.random.default_rng(20241015)


# criterion number -> (verdict, title, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        verdict, title, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {verdict}  {title}  {detail}")

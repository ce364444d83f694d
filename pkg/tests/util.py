"""Shared generators for randomized solver tests.

The KKT construction here is the independent oracle for solver accuracy:
instances are built backwards from a known optimal primal-dual pair, so the
expected answer never comes from the solver under test.
"""

import numpy as np
import scipy.sparse as sp

from plantsched.qp import QuadraticProgram


def make_random_kkt_qp(rng, n=None):
    """Inverse-engineer a strictly convex QP with a known KKT point.

    Returns (qp, truth) where truth holds x, duals_eq and the per-side
    inequality/bound duals. LICQ is kept by capping the number of active
    constraints at n - m_eq, so the dual solution is unique.
    """
    n = n or int(rng.integers(2, 21))
    m_eq = int(rng.integers(0, n // 2 + 1))
    m_in = int(rng.integers(1, 2 * n + 1))

    B = rng.normal(size=(n, n))
    P = B @ B.T + 0.3 * np.eye(n)
    x_star = rng.normal(scale=2.0, size=n)

    A_eq = rng.normal(size=(m_eq, n))
    b_eq = A_eq @ x_star
    y_star = rng.normal(size=m_eq)

    A_in = rng.normal(size=(m_in, n))
    ax = A_in @ x_star
    lower = np.full(m_in, -np.inf)
    upper = np.full(m_in, np.inf)
    zU = np.zeros(m_in)
    zL = np.zeros(m_in)

    budget = max(0, n - m_eq)
    n_active_rows = int(rng.integers(0, min(budget, m_in) + 1))
    active_rows = rng.choice(m_in, size=n_active_rows, replace=False)
    budget -= n_active_rows

    for i in range(m_in):
        two_sided = rng.random() < 0.4
        if i in active_rows:
            if rng.random() < 0.5:
                upper[i] = ax[i]
                zU[i] = rng.uniform(0.1, 2.0)
                if two_sided:
                    lower[i] = ax[i] - rng.uniform(1.0, 3.0)
            else:
                lower[i] = ax[i]
                zL[i] = rng.uniform(0.1, 2.0)
                if two_sided:
                    upper[i] = ax[i] + rng.uniform(1.0, 3.0)
        else:
            if rng.random() < 0.7:
                upper[i] = ax[i] + rng.uniform(0.2, 3.0)
            if two_sided or not np.isfinite(upper[i]):
                lower[i] = ax[i] - rng.uniform(0.2, 3.0)

    lb = np.full(n, -np.inf)
    ub = np.full(n, np.inf)
    zbU = np.zeros(n)
    zbL = np.zeros(n)
    n_active_bounds = int(rng.integers(0, min(budget, n) + 1))
    for j in rng.choice(n, size=n_active_bounds, replace=False):
        if rng.random() < 0.5:
            ub[j] = x_star[j]
            zbU[j] = rng.uniform(0.1, 2.0)
        else:
            lb[j] = x_star[j]
            zbL[j] = rng.uniform(0.1, 2.0)
    # loose bounds on a few more variables, never active
    for j in rng.choice(n, size=max(0, n // 3), replace=False):
        if not np.isfinite(ub[j]) and zbL[j] == 0:
            ub[j] = x_star[j] + rng.uniform(0.5, 3.0)
        if not np.isfinite(lb[j]) and zbU[j] == 0 and zbL[j] == 0:
            lb[j] = x_star[j] - rng.uniform(0.5, 3.0)

    q = -(P @ x_star + A_eq.T @ y_star + A_in.T @ (zU - zL) + (zbU - zbL))
    qp = QuadraticProgram(
        q=q, P=sp.csr_matrix(P),
        A_eq=sp.csr_matrix(A_eq) if m_eq else None, b_eq=b_eq if m_eq else None,
        A_in=sp.csr_matrix(A_in), lower=lower, upper=upper, lb=lb, ub=ub,
    )
    truth = {
        "x": x_star, "duals_eq": y_star,
        "zU": zU, "zL": zL, "zbU": zbU, "zbL": zbL,
    }
    return qp, truth

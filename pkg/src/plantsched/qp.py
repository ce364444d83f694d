"""Convex quadratic programming with reliable dual recovery.

Solves, with a primal-dual interior point method (Mehrotra predictor-
corrector on the reduced KKT system),

    minimize    0.5 x'Px + q'x
    subject to  A_eq x  = b_eq
                lower <= A_in x <= upper      (two-sided, +-inf sentinels)
                lb <= x <= ub

Dual conventions (everything downstream depends on these):

    L = 0.5 x'Px + q'x + y'(A_eq x - b_eq)
        + zU'(A_in x - upper) - zL'(A_in x - lower) + bound terms

so stationarity reads Px + q + A_eq'y + A_in'(zU - zL) + (zbU - zbL) = 0
with zU, zL, zbU, zbL >= 0, and the sensitivities of the optimal value are
dJ*/d(b_eq) = -y, dJ*/d(upper) = -zU, dJ*/d(lower) = +zL. At most one side
of a two-sided row is active, so `duals_in = zU + zL` is the nonnegative
multiplier of the active side.

Infeasible problems are classified through an elastic phase-1 LP whose
duals form a Farkas ray; the ray is attached to the returned solution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

__all__ = [
    "QuadraticProgram",
    "QPSolution",
    "solve",
    "kkt_residuals",
    "duality_gap",
    "dump_program",
]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
MAX_ITER = "max_iter"

_FIX_TOL = 1e-12


def _csr(mat, shape) -> sp.csr_matrix:
    if mat is None:
        return sp.csr_matrix(shape)
    if sp.issparse(mat):
        out = mat.tocsr().astype(float)
    else:
        out = sp.csr_matrix(np.atleast_2d(np.asarray(mat, dtype=float)))
    if out.shape != shape:
        raise ValueError(f"matrix shape {out.shape} does not match expected {shape}")
    return out


@dataclass(frozen=True)
class QuadraticProgram:
    """Problem data; missing pieces default to empty/unbounded."""

    q: np.ndarray
    P: sp.csr_matrix | None = None
    A_eq: sp.csr_matrix | None = None
    b_eq: np.ndarray | None = None
    A_in: sp.csr_matrix | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    lb: np.ndarray | None = None
    ub: np.ndarray | None = None

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float).ravel()
        n = q.size
        object.__setattr__(self, "q", q)
        if self.P is not None:
            object.__setattr__(self, "P", _csr(self.P, (n, n)))
        m_eq = 0 if self.b_eq is None else np.asarray(self.b_eq, dtype=float).size
        object.__setattr__(self, "A_eq", _csr(self.A_eq, (m_eq, n)))
        object.__setattr__(
            self, "b_eq", np.zeros(0) if self.b_eq is None else np.asarray(self.b_eq, dtype=float).ravel()
        )
        m_in = 0
        for side in (self.lower, self.upper):
            if side is not None:
                m_in = np.asarray(side, dtype=float).size
        object.__setattr__(self, "A_in", _csr(self.A_in, (m_in, n)))
        low = np.full(m_in, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        upp = np.full(m_in, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if low.size != m_in or upp.size != m_in:
            raise ValueError("lower/upper must agree in length")
        if (low > upp).any():
            raise ValueError("lower must not exceed upper")
        object.__setattr__(self, "lower", low)
        object.__setattr__(self, "upper", upp)
        lb = np.full(n, -np.inf) if self.lb is None else np.asarray(self.lb, dtype=float).ravel()
        ub = np.full(n, np.inf) if self.ub is None else np.asarray(self.ub, dtype=float).ravel()
        if lb.size != n or ub.size != n:
            raise ValueError("variable bounds must have length n")
        if (lb > ub).any():
            raise ValueError("lb must not exceed ub")
        object.__setattr__(self, "lb", lb)
        object.__setattr__(self, "ub", ub)

    @property
    def n(self) -> int:
        return self.q.size

    def objective_value(self, x: np.ndarray) -> float:
        val = float(self.q @ x)
        if self.P is not None:
            val += 0.5 * float(x @ (self.P @ x))
        return val


@dataclass
class QPSolution:
    status: str
    x: np.ndarray
    objective: float
    duals_eq: np.ndarray
    duals_in: np.ndarray
    ineq_dual_lower: np.ndarray
    ineq_dual_upper: np.ndarray
    bound_dual_lower: np.ndarray
    bound_dual_upper: np.ndarray
    iterations: int = 0
    certificate: dict | None = None


def _check_psd(P: sp.csr_matrix, n: int) -> None:
    if n == 0 or n > 2500:
        return
    dense = P.toarray()
    scale = max(1.0, float(np.abs(dense).max()))
    if np.abs(dense - dense.T).max() > 1e-8 * scale:
        raise ValueError("quadratic matrix must be symmetric")
    shifted = dense + (1e-8 * scale) * np.eye(n)
    try:
        np.linalg.cholesky(shifted)
    except np.linalg.LinAlgError as exc:
        raise ValueError("quadratic matrix is not positive semidefinite") from exc


# ---------------------------------------------------------------------------
# canonical one-sided form
# ---------------------------------------------------------------------------

_ROW_INEQ_UP = 0
_ROW_INEQ_LO = 1
_ROW_BND_UP = 2
_ROW_BND_LO = 3


def _canonicalize(A_in, lower, upper, lb, ub, n):
    """Fold two-sided rows and bounds into G x <= g with a row map."""
    blocks, rhs, fams, origs = [], [], [], []
    up_rows = np.where(np.isfinite(upper))[0]
    if up_rows.size:
        blocks.append(A_in[up_rows])
        rhs.append(upper[up_rows])
        fams.append(np.full(up_rows.size, _ROW_INEQ_UP))
        origs.append(up_rows)
    lo_rows = np.where(np.isfinite(lower))[0]
    if lo_rows.size:
        blocks.append(-A_in[lo_rows])
        rhs.append(-lower[lo_rows])
        fams.append(np.full(lo_rows.size, _ROW_INEQ_LO))
        origs.append(lo_rows)
    eye = sp.eye(n, format="csr")
    up_b = np.where(np.isfinite(ub))[0]
    if up_b.size:
        blocks.append(eye[up_b])
        rhs.append(ub[up_b])
        fams.append(np.full(up_b.size, _ROW_BND_UP))
        origs.append(up_b)
    lo_b = np.where(np.isfinite(lb))[0]
    if lo_b.size:
        blocks.append(-eye[lo_b])
        rhs.append(-lb[lo_b])
        fams.append(np.full(lo_b.size, _ROW_BND_LO))
        origs.append(lo_b)
    if blocks:
        G = sp.vstack(blocks, format="csr")
        g = np.concatenate(rhs)
        fam = np.concatenate(fams)
        orig = np.concatenate(origs)
    else:
        G = sp.csr_matrix((0, n))
        g = np.zeros(0)
        fam = np.zeros(0, dtype=int)
        orig = np.zeros(0, dtype=int)
    return G, g, fam, orig


# ---------------------------------------------------------------------------
# interior point core on  min 0.5 x'Px + q'x  s.t.  Ax = b, Gx <= g
# ---------------------------------------------------------------------------


def _solve_kkt(H, A, rhs1, rhs2, reg):
    n, me = H.shape[0], A.shape[0]
    K = sp.bmat(
        [[H + reg * sp.eye(n), A.T if me else None], [A if me else None, -reg * sp.eye(me) if me else None]],
        format="csc",
    ) if me else sp.csc_matrix(H + reg * sp.eye(n))
    lu = splu(K)

    def apply(r1, r2):
        full = np.concatenate([r1, r2]) if me else r1
        sol = lu.solve(full)
        return (sol[:n], sol[n:]) if me else (sol, np.zeros(0))

    return apply


def _ipm_core(P, q, A, b, G, g, tol, max_iter):
    """Returns (status, x, y, z, s, iters). Status optimal or max_iter."""
    n = q.size
    me, mi = A.shape[0], G.shape[0]

    # scale rows to unit inf-norm and the objective to unit magnitude
    def row_scales(M):
        if M.shape[0] == 0:
            return np.ones(0)
        absmax = np.abs(M).max(axis=1).toarray().ravel()
        return np.maximum(absmax, 1e-12)

    ra = row_scales(A)
    rg = row_scales(G)
    As = sp.diags(1.0 / ra) @ A if me else A
    Gs = sp.diags(1.0 / rg) @ G if mi else G
    bs = b / ra if me else b
    gs = g / rg if mi else g
    omega = max(1.0, float(np.abs(q).max()) if n else 1.0, float(np.abs(P).max()) if P.nnz else 0.0)
    Ps = P / omega
    qs = q / omega

    if mi == 0:
        # pure equality problem: one regularized KKT solve
        apply = _solve_kkt(Ps, As, None, None, 1e-10)
        x, y = apply(-qs, bs.copy())
        r_d = Ps @ x + qs + (As.T @ y if me else 0.0)
        r_p = (As @ x - bs) if me else np.zeros(0)
        ok = (np.abs(r_d).max() if n else 0.0) <= max(tol, 1e-9) * (1 + np.abs(qs).max() if n else 1) and (
            np.abs(r_p).max() if me else 0.0
        ) <= max(tol, 1e-9) * (1 + (np.abs(bs).max() if me else 0))
        status = OPTIMAL if ok else MAX_ITER
        return status, x, omega * (y / ra if me else y), np.zeros(0), np.zeros(0), 1

    # starting point
    apply = _solve_kkt(Ps, As, None, None, 1e-8)
    x, y = apply(-qs, bs.copy() if me else np.zeros(0))
    s_raw = gs - Gs @ x
    s_hat = s_raw + max(0.0, -1.5 * float(s_raw.min()))
    z_hat = np.ones(mi)
    dot = float(s_hat @ z_hat)
    s = s_hat + 0.5 * dot / max(z_hat.sum(), 1e-12)
    z = z_hat + 0.5 * dot / max(s_hat.sum(), 1e-12)
    s = np.maximum(s, 1e-4)
    z = np.maximum(z, 1e-4)
    if me == 0:
        y = np.zeros(0)

    status = MAX_ITER
    it = 0
    for it in range(1, max_iter + 1):
        r_d = Ps @ x + qs + (As.T @ y if me else 0.0) + Gs.T @ z
        r_p = (As @ x - bs) if me else np.zeros(0)
        r_s = Gs @ x + s - gs
        mu = float(s @ z) / mi
        obj = 0.5 * float(x @ (Ps @ x)) + float(qs @ x)

        rel_d = np.abs(r_d).max() / (1.0 + np.abs(qs).max() + np.abs(Ps @ x).max()) if n else 0.0
        rel_p = (np.abs(r_p).max() / (1.0 + (np.abs(bs).max() if me else 0.0))) if me else 0.0
        rel_s = np.abs(r_s).max() / (1.0 + np.abs(gs).max()) if mi else 0.0
        rel_mu = mu / (1.0 + abs(obj))
        if max(rel_d, rel_p, rel_s, rel_mu) <= tol:
            status = OPTIMAL
            break
        if not np.isfinite([rel_d, rel_p, rel_s, mu]).all() or np.abs(x).max() > 1e16:
            break

        W = z / s
        H = Ps + (Gs.T @ sp.diags(W) @ Gs)
        try:
            apply = _solve_kkt(H, As, None, None, 1e-10)
        except RuntimeError:
            break

        def direction(r4):
            rhs1 = -r_d - Gs.T @ ((r4 + z * r_s) / s)
            dx, dy = apply(rhs1, -r_p if me else np.zeros(0))
            ds = -r_s - Gs @ dx
            dz = (r4 - z * ds) / s
            return dx, dy, ds, dz

        # predictor
        dx_a, dy_a, ds_a, dz_a = direction(-s * z)

        def max_step(v, dv):
            neg = dv < 0
            if not neg.any():
                return 1.0
            return min(1.0, float((-v[neg] / dv[neg]).min()))

        alpha_a = min(max_step(s, ds_a), max_step(z, dz_a))
        mu_aff = float((s + alpha_a * ds_a) @ (z + alpha_a * dz_a)) / mi
        sigma = min(max((mu_aff / mu) ** 3, 1e-8), 1.0 - 1e-8)

        # corrector
        dx, dy, ds, dz = direction(sigma * mu - s * z - ds_a * dz_a)
        frac = 0.995 if mu > 1e-8 else 0.9995
        alpha = frac * min(max_step(s, ds), max_step(z, dz))
        alpha = min(alpha, 1.0)
        x = x + alpha * dx
        if me:
            y = y + alpha * dy
        s = s + alpha * ds
        z = z + alpha * dz

    y_out = omega * (y / ra) if me else np.zeros(0)
    z_out = omega * (z / rg)
    s_out = s * rg
    return status, x, y_out, z_out, s_out, it


def _phase1(A, b, G, g, tol):
    """Elastic feasibility LP. Returns (feasible, x, farkas_y, farkas_z)."""
    n = A.shape[1]
    me, mi = A.shape[0], G.shape[0]
    # variables [x, p, m, r]: A x + p - m = b;  G x - r <= g;  p, m, r >= 0
    eye_e = sp.eye(me, format="csr")
    A1 = sp.hstack([A, eye_e, -eye_e, sp.csr_matrix((me, mi))], format="csr") if me else sp.csr_matrix((0, n + 2 * me + mi))
    G_top = sp.hstack([G, sp.csr_matrix((mi, 2 * me)), -sp.eye(mi, format="csr")], format="csr")
    G_bnd = sp.hstack(
        [sp.csr_matrix((2 * me + mi, n)), -sp.eye(2 * me + mi, format="csr")], format="csr"
    )
    G1 = sp.vstack([G_top, G_bnd], format="csr")
    g1 = np.concatenate([g, np.zeros(2 * me + mi)])
    q1 = np.concatenate([np.zeros(n), np.ones(2 * me + mi)])
    P1 = sp.csr_matrix((q1.size, q1.size))
    status, xall, y1, z1, _, _ = _ipm_core(P1, q1, A1, b, G1, g1, max(tol, 1e-9), 200)
    gap = float(q1 @ xall)
    scale = 1.0 + max(float(np.abs(b).max()) if me else 0.0, float(np.abs(g).max()) if mi else 0.0)
    feasible = status == OPTIMAL and gap <= 1e-7 * scale
    return feasible, xall[:n], y1, z1[:mi]


# ---------------------------------------------------------------------------
# presolve: eliminate variables fixed by equal bounds
# ---------------------------------------------------------------------------


@dataclass
class _Reduced:
    free: np.ndarray
    fixed: np.ndarray
    x_fixed: np.ndarray
    q: np.ndarray
    P: sp.csr_matrix
    const: float
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    keep_eq: np.ndarray
    A_in: sp.csr_matrix
    lower: np.ndarray
    upper: np.ndarray
    keep_in: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    trivially_infeasible: str | None = None


def _presolve(qp: QuadraticProgram) -> _Reduced:
    n = qp.n
    fixed_mask = (qp.ub - qp.lb) <= _FIX_TOL * np.maximum(1.0, np.abs(qp.lb))
    fixed = np.where(fixed_mask)[0]
    free = np.where(~fixed_mask)[0]
    x_fixed = qp.lb[fixed]
    P = qp.P if qp.P is not None else sp.csr_matrix((n, n))

    const = float(qp.q[fixed] @ x_fixed)
    if fixed.size:
        Pff = P[np.ix_(fixed, fixed)]
        const += 0.5 * float(x_fixed @ (Pff @ x_fixed))
        q_red = qp.q[free] + np.asarray(P[np.ix_(free, fixed)] @ x_fixed).ravel()
    else:
        q_red = qp.q[free]
    P_red = P[np.ix_(free, free)].tocsr()

    A_eq = qp.A_eq[:, free].tocsr() if qp.A_eq.shape[0] else qp.A_eq[:, free]
    b_eq = qp.b_eq - (qp.A_eq[:, fixed] @ x_fixed if fixed.size and qp.A_eq.shape[0] else 0.0)
    A_in = qp.A_in[:, free].tocsr() if qp.A_in.shape[0] else qp.A_in[:, free]
    shift = qp.A_in[:, fixed] @ x_fixed if fixed.size and qp.A_in.shape[0] else 0.0
    lower = qp.lower - shift
    upper = qp.upper - shift

    red = _Reduced(
        free=free, fixed=fixed, x_fixed=x_fixed, q=q_red, P=P_red, const=const,
        A_eq=A_eq, b_eq=np.asarray(b_eq, dtype=float).ravel() if qp.A_eq.shape[0] else qp.b_eq,
        keep_eq=np.arange(qp.A_eq.shape[0]),
        A_in=A_in, lower=np.asarray(lower, dtype=float).ravel() if qp.A_in.shape[0] else qp.lower,
        upper=np.asarray(upper, dtype=float).ravel() if qp.A_in.shape[0] else qp.upper,
        keep_in=np.arange(qp.A_in.shape[0]),
        lb=qp.lb[free], ub=qp.ub[free],
    )

    # rows whose every variable got fixed reduce to constants
    if red.A_eq.shape[0]:
        support = np.diff(red.A_eq.indptr) > 0
        dead = ~support
        if dead.any():
            viol = np.abs(red.b_eq[dead]) > 1e-8 * np.maximum(1.0, np.abs(qp.b_eq[dead]))
            if viol.any():
                red.trivially_infeasible = "equality"
            red.keep_eq = np.where(support)[0]
            red.A_eq = red.A_eq[red.keep_eq]
            red.b_eq = red.b_eq[red.keep_eq]
    if red.A_in.shape[0]:
        support = np.diff(red.A_in.indptr) > 0
        dead = ~support
        if dead.any():
            bad = (red.lower[dead] > 1e-8) | (red.upper[dead] < -1e-8)
            if bad.any():
                red.trivially_infeasible = red.trivially_infeasible or "inequality"
            red.keep_in = np.where(support)[0]
            red.A_in = red.A_in[red.keep_in]
            red.lower = red.lower[red.keep_in]
            red.upper = red.upper[red.keep_in]
    return red


# ---------------------------------------------------------------------------
# polish: re-solve the active-set KKT system exactly on small problems
# ---------------------------------------------------------------------------


def _polish(P, q, A, b, G, g, x, y, z, s):
    n, me, mi = q.size, A.shape[0], G.shape[0]
    act = z > s
    na = int(act.sum())
    if n + me + na > 600:
        return None
    Ga = G[act].toarray() if na else np.zeros((0, n))
    top = np.hstack([P.toarray(), A.toarray().T if me else np.zeros((n, 0)), Ga.T])
    mid = np.hstack([A.toarray() if me else np.zeros((0, n)), np.zeros((me, me + na))])
    bot = np.hstack([Ga, np.zeros((na, me + na))])
    K = np.vstack([top, mid, bot])
    rhs = np.concatenate([-q, b, g[act]])
    sol, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    xp, yp, zp_act = sol[:n], sol[n : n + me], sol[n + me :]
    if na and zp_act.min() < -1e-7 * (1.0 + np.abs(zp_act).max()):
        return None
    zp = np.zeros(mi)
    zp[act] = np.maximum(zp_act, 0.0)
    # verify the polished point really is a better KKT point
    r_d = P @ xp + q + (A.T @ yp if me else 0.0) + (G.T @ zp if mi else 0.0)
    r_p = (A @ xp - b) if me else np.zeros(0)
    sp_slack = g - G @ xp if mi else np.zeros(0)
    comp = np.abs(zp * sp_slack).max() if mi else 0.0
    old_rd = P @ x + q + (A.T @ y if me else 0.0) + (G.T @ z if mi else 0.0)
    old_comp = np.abs(z * (g - G @ x)).max() if mi else 0.0
    ok = (
        (np.abs(r_d).max() if n else 0.0) <= max(1e-10, np.abs(old_rd).max())
        and (sp_slack.min() if mi else 0.0) >= -1e-9 * (1.0 + np.abs(g).max() if mi else 1.0)
        and (np.abs(r_p).max() if me else 0.0) <= 1e-8 * (1.0 + (np.abs(b).max() if me else 0.0))
        and comp <= max(1e-12, old_comp)
    )
    if not ok:
        return None
    return xp, yp, zp, np.maximum(sp_slack, 0.0)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------


def solve(qp: QuadraticProgram, tol: float = 1e-8, max_iter: int = 100, polish: bool = True) -> QPSolution:
    """Solve the program; duals follow the module-level conventions."""
    n = qp.n
    if qp.P is not None:
        _check_psd(qp.P, n)
    red = _presolve(qp)
    m_in = qp.A_in.shape[0]
    m_eq = qp.A_eq.shape[0]

    def empty_sol(status, x_full, cert=None):
        return QPSolution(
            status=status, x=x_full, objective=qp.objective_value(x_full) if status == OPTIMAL else float("nan"),
            duals_eq=np.zeros(m_eq), duals_in=np.zeros(m_in),
            ineq_dual_lower=np.zeros(m_in), ineq_dual_upper=np.zeros(m_in),
            bound_dual_lower=np.zeros(n), bound_dual_upper=np.zeros(n),
            certificate=cert,
        )

    x_full = np.zeros(n)
    x_full[red.fixed] = red.x_fixed

    if red.trivially_infeasible:
        return empty_sol(INFEASIBLE, x_full, cert={"reason": f"inconsistent fixed {red.trivially_infeasible} row"})

    nf = red.free.size
    if nf == 0:
        sol = empty_sol(OPTIMAL, x_full)
        sol.objective = qp.objective_value(x_full)
        _assign_fixed_bound_duals(qp, sol)
        return sol

    G, g, fam, orig = _canonicalize(red.A_in, red.lower, red.upper, red.lb, red.ub, nf)
    status, xf, y, z, s, iters = _ipm_core(red.P, red.q, red.A_eq, red.b_eq, G, g, tol, max_iter)

    if status != OPTIMAL and G.shape[0]:
        feasible, x_feas, fy, fz = _phase1(red.A_eq, red.b_eq, G, g, tol)
        if not feasible:
            cert = _fold_certificate(qp, red, fam, orig, fy, fz)
            sol = empty_sol(INFEASIBLE, x_full, cert=cert)
            sol.iterations = iters
            return sol

    if status == OPTIMAL and polish and G.shape[0]:
        polished = _polish(red.P, red.q, red.A_eq, red.b_eq, G, g, xf, y, z, s)
        if polished is not None:
            xf, y, z, s = polished

    x_full[red.free] = xf
    sol = QPSolution(
        status=status, x=x_full, objective=qp.objective_value(x_full),
        duals_eq=np.zeros(m_eq), duals_in=np.zeros(m_in),
        ineq_dual_lower=np.zeros(m_in), ineq_dual_upper=np.zeros(m_in),
        bound_dual_lower=np.zeros(n), bound_dual_upper=np.zeros(n),
        iterations=iters,
    )
    if m_eq:
        sol.duals_eq[red.keep_eq] = y
    _fold_ineq_duals(sol, red, fam, orig, z)
    _assign_fixed_bound_duals(qp, sol)
    sol.duals_in = sol.ineq_dual_lower + sol.ineq_dual_upper
    return sol


def _fold_ineq_duals(sol, red, fam, orig, z):
    for code, target, index_map in (
        (_ROW_INEQ_UP, sol.ineq_dual_upper, red.keep_in),
        (_ROW_INEQ_LO, sol.ineq_dual_lower, red.keep_in),
        (_ROW_BND_UP, sol.bound_dual_upper, red.free),
        (_ROW_BND_LO, sol.bound_dual_lower, red.free),
    ):
        rows = fam == code
        if rows.any():
            target[index_map[orig[rows]]] = z[rows]


def _assign_fixed_bound_duals(qp, sol):
    """Reduced costs of presolve-fixed variables land on their active bound."""
    fixed = np.where((qp.ub - qp.lb) <= _FIX_TOL * np.maximum(1.0, np.abs(qp.lb)))[0]
    if fixed.size == 0:
        return
    resid = qp.q.copy()
    if qp.P is not None:
        resid += qp.P @ sol.x
    if qp.A_eq.shape[0]:
        resid += qp.A_eq.T @ sol.duals_eq
    if qp.A_in.shape[0]:
        resid += qp.A_in.T @ (sol.ineq_dual_upper - sol.ineq_dual_lower)
    r = resid[fixed]
    sol.bound_dual_lower[fixed] = np.maximum(r, 0.0)
    sol.bound_dual_upper[fixed] = np.maximum(-r, 0.0)


def _fold_certificate(qp, red, fam, orig, fy, fz):
    """Map phase-1 duals back to original rows as a Farkas ray."""
    m_eq, m_in, n = qp.A_eq.shape[0], qp.A_in.shape[0], qp.n
    y = np.zeros(m_eq)
    if red.A_eq.shape[0]:
        y[red.keep_eq] = fy
    zU, zL = np.zeros(m_in), np.zeros(m_in)
    zbU, zbL = np.zeros(n), np.zeros(n)
    for code, target, index_map in (
        (_ROW_INEQ_UP, zU, red.keep_in),
        (_ROW_INEQ_LO, zL, red.keep_in),
        (_ROW_BND_UP, zbU, red.free),
        (_ROW_BND_LO, zbL, red.free),
    ):
        rows = fam == code
        if rows.any():
            target[index_map[orig[rows]]] = fz[rows]
    value = float(
        (qp.b_eq @ y if m_eq else 0.0)
        + (np.where(np.isfinite(qp.upper), qp.upper, 0.0) @ zU if m_in else 0.0)
        - (np.where(np.isfinite(qp.lower), qp.lower, 0.0) @ zL if m_in else 0.0)
        + np.where(np.isfinite(qp.ub), qp.ub, 0.0) @ zbU
        - np.where(np.isfinite(qp.lb), qp.lb, 0.0) @ zbL
    )
    return {
        "y_eq": y, "z_in_upper": zU, "z_in_lower": zL,
        "z_bound_upper": zbU, "z_bound_lower": zbL, "value": value,
    }


def kkt_residuals(qp: QuadraticProgram, sol: QPSolution) -> dict:
    """Norms of the four KKT residual families at a solution."""
    x = sol.x
    stat = qp.q.copy()
    if qp.P is not None:
        stat += qp.P @ x
    if qp.A_eq.shape[0]:
        stat += qp.A_eq.T @ sol.duals_eq
    if qp.A_in.shape[0]:
        stat += qp.A_in.T @ (sol.ineq_dual_upper - sol.ineq_dual_lower)
    stat += sol.bound_dual_upper - sol.bound_dual_lower
    stationarity = float(np.abs(stat).max()) if qp.n else 0.0

    primal = 0.0
    if qp.A_eq.shape[0]:
        primal = max(primal, float(np.abs(qp.A_eq @ x - qp.b_eq).max()))
    comp_terms = [0.0]
    if qp.A_in.shape[0]:
        ax = qp.A_in @ x
        primal = max(primal, float(np.maximum(ax - qp.upper, 0.0).max(initial=0.0)))
        primal = max(primal, float(np.maximum(qp.lower - ax, 0.0).max(initial=0.0)))
        fin_u = np.isfinite(qp.upper)
        fin_l = np.isfinite(qp.lower)
        comp_terms.append(float(np.abs(sol.ineq_dual_upper[fin_u] * (qp.upper[fin_u] - ax[fin_u])).max(initial=0.0)))
        comp_terms.append(float(np.abs(sol.ineq_dual_lower[fin_l] * (ax[fin_l] - qp.lower[fin_l])).max(initial=0.0)))
    primal = max(primal, float(np.maximum(x - qp.ub, 0.0).max(initial=0.0)))
    primal = max(primal, float(np.maximum(qp.lb - x, 0.0).max(initial=0.0)))
    fin_u = np.isfinite(qp.ub)
    fin_l = np.isfinite(qp.lb)
    comp_terms.append(float(np.abs(sol.bound_dual_upper[fin_u] * (qp.ub[fin_u] - x[fin_u])).max(initial=0.0)))
    comp_terms.append(float(np.abs(sol.bound_dual_lower[fin_l] * (x[fin_l] - qp.lb[fin_l])).max(initial=0.0)))

    dual = 0.0
    for zarr in (sol.ineq_dual_upper, sol.ineq_dual_lower, sol.bound_dual_upper, sol.bound_dual_lower):
        if zarr.size:
            dual = max(dual, float(np.maximum(-zarr, 0.0).max()))
    return {
        "stationarity": stationarity,
        "primal": primal,
        "dual": dual,
        "complementarity": max(comp_terms),
    }


def duality_gap(qp: QuadraticProgram, sol: QPSolution) -> float:
    """|primal - dual| objective gap; the dual value is evaluated exactly."""
    n = qp.n
    r = qp.q.copy()
    if qp.A_eq.shape[0]:
        r += qp.A_eq.T @ sol.duals_eq
    if qp.A_in.shape[0]:
        r += qp.A_in.T @ (sol.ineq_dual_upper - sol.ineq_dual_lower)
    r += sol.bound_dual_upper - sol.bound_dual_lower
    if qp.P is not None and qp.P.nnz:
        xh, *_ = np.linalg.lstsq(qp.P.toarray(), -r, rcond=None)
        quad = -0.5 * float(xh @ (qp.P @ xh))
    else:
        quad = 0.0  # for LPs the stationarity residual is already in `r`
    dual_val = quad
    if qp.A_eq.shape[0]:
        dual_val -= float(qp.b_eq @ sol.duals_eq)
    if qp.A_in.shape[0]:
        fin_u = np.isfinite(qp.upper)
        fin_l = np.isfinite(qp.lower)
        dual_val -= float(qp.upper[fin_u] @ sol.ineq_dual_upper[fin_u])
        dual_val += float(qp.lower[fin_l] @ sol.ineq_dual_lower[fin_l])
    fin_u = np.isfinite(qp.ub)
    fin_l = np.isfinite(qp.lb)
    dual_val -= float(qp.ub[fin_u] @ sol.bound_dual_upper[fin_u])
    dual_val += float(qp.lb[fin_l] @ sol.bound_dual_lower[fin_l])
    return abs(qp.objective_value(sol.x) - dual_val)


def dump_program(qp: QuadraticProgram, path) -> None:
    """Write a dense row-major text dump for debugging."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# plantsched QP dump v1\n")
        fh.write(f"# n={qp.n} m_eq={qp.A_eq.shape[0]} m_in={qp.A_in.shape[0]}\n")
        fh.write("# sections: P (dense), q, A_eq, b_eq, A_in, lower, upper, lb, ub\n")

        def block(name, arr):
            arr = np.atleast_2d(arr)
            fh.write(f"{name} {arr.shape[0]} {arr.shape[1]}\n")
            for row in arr:
                fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")

        block("P", qp.P.toarray() if qp.P is not None else np.zeros((qp.n, qp.n)))
        block("q", qp.q)
        block("A_eq", qp.A_eq.toarray() if qp.A_eq.shape[0] else np.zeros((0, qp.n)))
        block("b_eq", qp.b_eq)
        block("A_in", qp.A_in.toarray() if qp.A_in.shape[0] else np.zeros((0, qp.n)))
        block("lower", qp.lower)
        block("upper", qp.upper)
        block("lb", qp.lb)
        block("ub", qp.ub)

"""Dense interior-point solver for small second-order cone programs.

Solves

    minimize    c @ z
    subject to  ||A_i @ z + b_i|| <= d_i @ z + e_i,    i = 1, ..., K,

by primal-dual path following.  Each constraint contributes a slack
s_i = (d_i @ z + e_i, A_i @ z + b_i) kept in the second-order cone; the
perturbed complementarity s_i o y_i = mu * e_i is linearized in
Nesterov-Todd scaled variables and solved predictor-corrector style: an
affine probe sets the centering weight (sigma = ratio of the probed to
the current gap, cubed) and contributes its second-order term to the
corrector right-hand side.  The condensed Newton system is factored by
a dense LDL^T with diagonal regularization on breakdown, and steps obey
a 0.99 fraction-to-boundary rule.

When the caller supplies no strictly interior point, phase 1 minimizes a
shared constraint slack tau until the iterate clears every cone; the
problem is declared infeasible when that merit value stalls for 10
consecutive iterations while the violation stays above tol.

Target problems have at most ~10 variables, so everything is dense, and
identical inputs produce identical iterates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "SocBlock",
    "ConeProgram",
    "SocpResult",
    "solve_socp",
    "residuals",
    "dump_program",
]

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_MAX_ITERATIONS = "max_iterations"
STATUS_NUMERICAL_FAILURE = "numerical_failure"

_MU_MIN = 1e-12
_BOUNDARY_FRACTION = 0.99
_SIGMA_MIN = 1e-9
_SIGMA_MAX = 0.99
_STALL_LIMIT = 10


@dataclass(frozen=True)
class SocBlock:
    """One cone constraint ||A @ z + b|| <= d @ z + e.

    A pure linear inequality d @ z + e >= 0 is a block whose A has zero
    rows (shape (0, n)).
    """

    A: np.ndarray
    b: np.ndarray
    d: np.ndarray
    e: float

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 2:
            raise ValueError(f"A must be a matrix, got ndim {A.ndim}")
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        d = np.atleast_1d(np.asarray(self.d, dtype=float))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "e", float(self.e))
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"row mismatch: A has {A.shape[0]}, b has {b.shape[0]}")
        if A.shape[1] != d.shape[0]:
            raise ValueError(f"column mismatch: A has {A.shape[1]}, d has {d.shape[0]}")


@dataclass(frozen=True)
class ConeProgram:
    """minimize c @ z over the intersection of SocBlock constraints."""

    c: np.ndarray
    blocks: tuple
    n_vars: int

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if c.shape[0] != self.n_vars:
            raise ValueError(f"cost has {c.shape[0]} entries for {self.n_vars} variables")
        if not self.blocks:
            raise ValueError("need at least one cone block")
        for i, blk in enumerate(self.blocks):
            if blk.A.shape[1] != self.n_vars:
                raise ValueError(
                    f"block {i} is dimensioned for {blk.A.shape[1]} variables, "
                    f"expected {self.n_vars}")


@dataclass(frozen=True)
class SocpResult:
    """Solver outcome; z/objective are meaningful only when status is optimal."""

    z: np.ndarray
    objective: float
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float = math.nan
    gap: float = math.nan


def residuals(prog: ConeProgram, z) -> tuple[float, float]:
    """(max constraint violation)_+ and objective value at z."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    worst = 0.0
    for blk in prog.blocks:
        gap = float(np.linalg.norm(blk.A @ z + blk.b)) - (float(blk.d @ z) + blk.e)
        worst = max(worst, gap)
    return worst, float(prog.c @ z)


def _fmt_vec(v: np.ndarray) -> str:
    return "[" + ",".join(repr(float(x)) for x in v) + "]"


def _fmt_mat(A: np.ndarray) -> str:
    return "[" + ";".join(_fmt_vec(row) for row in A) + "]"


def dump_program(prog: ConeProgram) -> str:
    """Plain-text listing, one cone block per line; floats round-trip via repr."""
    lines = [f"socp n_vars={prog.n_vars} c={_fmt_vec(prog.c)}"]
    for i, blk in enumerate(prog.blocks):
        lines.append(
            f"block {i}: A={_fmt_mat(blk.A)} b={_fmt_vec(blk.b)} "
            f"d={_fmt_vec(blk.d)} e={blk.e!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Jordan-algebra helpers for the second-order cone, head component first.

def _jquad(x: np.ndarray) -> float:
    # x' J x with J = diag(1, -I)
    return float(x[0] * x[0] - x[1:] @ x[1:])


def _jflip(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    out[1:] = -out[1:]
    return out


def _arrow_solve(x: np.ndarray, r: np.ndarray) -> np.ndarray:
    # solve [[x0, xbar'], [xbar, x0 I]] y = r; nonsingular for interior x
    det = _jquad(x)
    y0 = (x[0] * r[0] - float(x[1:] @ r[1:])) / det
    out = np.empty_like(r)
    out[0] = y0
    out[1:] = (r[1:] - y0 * x[1:]) / x[0]
    return out


def _step_to_boundary(x: np.ndarray, dx: np.ndarray) -> float:
    """sup of steps t with x + t*dx still interior to the cone."""
    best = math.inf
    if dx[0] < 0.0:
        best = -x[0] / dx[0]
    q0 = _jquad(x)
    q1 = float(x[0] * dx[0] - x[1:] @ dx[1:])
    q2 = _jquad(dx)
    # smallest positive root of q2 t^2 + 2 q1 t + q0, which is positive at 0
    if q2 == 0.0:
        if q1 < 0.0:
            best = min(best, -q0 / (2.0 * q1))
        return best
    disc = q1 * q1 - q2 * q0
    if disc < 0.0:
        return best
    sq = math.sqrt(disc)
    qq = -(q1 + math.copysign(sq, q1)) if q1 != 0.0 else -sq
    for root in (qq / q2, q0 / qq if qq != 0.0 else -1.0):
        if root > 0.0:
            best = min(best, root)
    return best


def _nt_scaling(s: np.ndarray, y: np.ndarray):
    """Scaling W with W @ y = W^-1 @ s; returns (eta, jw, w2inv, lam)."""
    rs = _jquad(s)
    ry = _jquad(y)
    if not (rs > 0.0 and ry > 0.0 and s[0] > 0.0 and y[0] > 0.0):
        return None
    rs = math.sqrt(rs)
    ry = math.sqrt(ry)
    sb = s / rs
    yb = y / ry
    # plain inner product; positive for interior points, but roundoff near
    # the boundary can push it past -1 once the normalizers are tiny
    gsq = (1.0 + float(sb @ yb)) / 2.0
    if not (gsq > 0.0 and math.isfinite(gsq)):
        return None
    gamma = math.sqrt(gsq)
    v = (sb + _jflip(yb)) / (2.0 * gamma)  # v' J v = 1
    eta = math.sqrt(rs / ry)
    w = np.empty_like(v)  # Jordan square root of v
    w[0] = math.sqrt((v[0] + 1.0) / 2.0)
    w[1:] = v[1:] / (2.0 * w[0])
    jv = _jflip(v)
    dim = v.size
    J = -np.eye(dim)
    J[0, 0] = 1.0
    w2inv = (2.0 * np.outer(jv, jv) - J) / (eta * eta)
    lam = eta * (2.0 * float(w @ y) * w - _jflip(y))
    return eta, _jflip(w), w2inv, lam


def _ldl_solve(M: np.ndarray, rhs: np.ndarray) -> Optional[np.ndarray]:
    """Solve M x = rhs via LDL^T; adds diagonal regularization on breakdown.

    Two rounds of iterative refinement clean up the solution: near the cone
    boundary the scaled Newton matrix gets ill-conditioned enough that the
    raw triangular solves lose most of their digits.
    """
    n = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(M)))))
    reg = 0.0
    for _ in range(6):
        A = M if reg == 0.0 else M + reg * np.eye(n)
        L = np.eye(n)
        D = np.zeros(n)
        ok = True
        for j in range(n):
            dj = A[j, j] - float((L[j, :j] ** 2) @ D[:j])
            if not math.isfinite(dj) or dj <= 1e-14 * scale:
                ok = False
                break
            D[j] = dj
            if j + 1 < n:
                L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ (D[:j] * L[j, :j])) / dj
        if ok:
            def sub(b):
                t = b.astype(float).copy()
                for j in range(n):
                    t[j] -= float(L[j, :j] @ t[:j])
                t /= D
                for j in reversed(range(n)):
                    t[j] -= float(L[j + 1:, j] @ t[j + 1:])
                return t
            t = sub(rhs)
            for _ in range(2):
                t += sub(rhs - A @ t)
            return t
        reg = 1e-12 * scale if reg == 0.0 else reg * 100.0
    return None


def _active_polish(prog: ConeProgram, z: np.ndarray, tol: float, nu0):
    """Newton polish of z on the active constraints taken as equalities.

    A path-following iterate can park O(sqrt(mu)) from the optimum in
    tangential modes of active cone boundaries, which none of the residuals
    see. With the active set read off the iterate, Newton on the KKT system
    of  min c'z  s.t.  d_j'z + e_j = ||A_j z + b_j||  (j active)  lands at
    machine precision in two or three steps. The polished point is kept only
    when it passes feasibility, multiplier-sign, stationarity, and objective
    checks, so a wrong active-set guess falls back to the iterate unchanged.
    """
    n = prog.n_vars
    zn = float(np.linalg.norm(z))
    tiny = 1e-14 * (1.0 + zn)
    active = []
    for j, blk in enumerate(prog.blocks):
        margin = (float(blk.d @ z) + blk.e
                  - float(np.linalg.norm(blk.A @ z + blk.b)))
        scale = 1.0 + abs(blk.e) + float(np.linalg.norm(blk.b)) + zn
        if margin <= math.sqrt(tol) * scale:
            active.append(j)
    k = len(active)
    if k == 0 or k > n:
        return None
    zc = z.copy()
    nu = np.array([max(0.0, nu0[j]) for j in active])
    for _ in range(3):
        grads = np.zeros((n, k))
        curv = np.zeros((n, n))
        phi = np.zeros(k)
        for i, j in enumerate(active):
            blk = prog.blocks[j]
            v = blk.A @ zc + blk.b
            nv = float(np.linalg.norm(v))
            if nv <= tiny:
                grads[:, i] = blk.d
            else:
                av = blk.A.T @ (v / nv)
                grads[:, i] = blk.d - av
                curv += nu[i] * (blk.A.T @ blk.A - np.outer(av, av)) / nv
            phi[i] = float(blk.d @ zc) + blk.e - nv
        kkt = np.zeros((n + k, n + k))
        kkt[:n, :n] = curv
        kkt[:n, n:] = -grads
        kkt[n:, :n] = grads.T
        rhs = np.concatenate([grads @ nu - prog.c, -phi])
        try:
            step = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(step)):
            return None
        zc = zc + step[:n]
        nu = nu + step[n:]
    if nu.size and float(np.min(nu)) < -1e-9 * (1.0 + float(np.max(np.abs(nu)))):
        return None
    viol, obj = residuals(prog, zc)
    if viol > tol * (1.0 + zn):
        return None
    obj_old = float(prog.c @ z)
    if obj > obj_old + 1e-9 * (1.0 + abs(obj_old)):
        return None
    stat = prog.c.copy()
    duals = [np.zeros(blk.A.shape[0] + 1) for blk in prog.blocks]
    for i, j in enumerate(active):
        blk = prog.blocks[j]
        v = blk.A @ zc + blk.b
        nv = float(np.linalg.norm(v))
        duals[j][0] = nu[i]
        if nv <= tiny:
            stat -= nu[i] * blk.d
        else:
            stat -= nu[i] * (blk.d - blk.A.T @ (v / nv))
            duals[j][1:] = -nu[i] * v / nv
    if float(np.max(np.abs(stat))) > 1e-10 * max(1.0, float(np.max(np.abs(prog.c)))):
        return None
    return zc, duals


def _margins(Hs, ks, x) -> float:
    """Smallest cone margin s0 - ||sbar|| over all blocks at x."""
    worst = math.inf
    for H, k in zip(Hs, ks):
        s = H @ x + k
        worst = min(worst, float(s[0] - np.linalg.norm(s[1:])))
    return worst


def _interior(Hs, ks, x) -> bool:
    """Strict interiority of every slack in the numerically usable sense."""
    for H, k in zip(Hs, ks):
        s = H @ x + k
        if not (s[0] > 0.0 and _jquad(s) > 0.0):
            return False
    return True


def _path_follow(Hs, ks, c, x, tol, max_iter, monitor=None):
    """Feasible-start path following; x must give strictly interior slacks.

    Returns (outcome, x, y, iterations) with outcome one of converged /
    max_iterations / stalled / numerical_failure, or a verdict string the
    monitor callback produced.
    """
    nblocks = len(Hs)
    y = [np.zeros(H.shape[0]) for H in Hs]
    for yi in y:
        yi[0] = 1.0
    # double precision bottoms out before mu reaches _MU_MIN on badly
    # conditioned instances; keep the best iterate by mu + dual residual
    # and hand it back on any abnormal exit so the caller can certify it
    best_phi = math.inf
    best_xy = (x, y)
    no_improve = 0
    it = 0
    for it in range(1, max_iter + 1):
        svals = [H @ x + k for H, k in zip(Hs, ks)]
        gap = sum(float(s @ yi) for s, yi in zip(svals, y))
        mu = gap / nblocks
        rd = c - sum(H.T @ yi for H, yi in zip(Hs, y))
        rd_norm = float(np.max(np.abs(rd)))
        if monitor is not None:
            verdict = monitor(x)
            if verdict is not None:
                return verdict, x, y, it
        if mu <= _MU_MIN and rd_norm <= tol:
            return "converged", x, y, it
        # rank iterates by mu once the dual residual is inside the
        # certification allowance; excess dual residual counts linearly so
        # corrupted endgame steps never displace a clean one
        phi = max(mu, 0.0) + max(0.0, rd_norm - 10.0 * tol)
        if phi < 0.9 * best_phi:
            best_phi = phi
            best_xy = (x, y)
            no_improve = 0
        else:
            no_improve += 1
            if no_improve >= _STALL_LIMIT:
                x, y = best_xy
                return "stalled", x, y, it
        n = x.size
        M = np.zeros((n, n))
        cache = []
        broke = False
        for H, s, yi in zip(Hs, svals, y):
            scal = _nt_scaling(s, yi)
            if scal is None:
                broke = True
                break
            M += H.T @ scal[2] @ H
            cache.append(scal)
        if broke:
            x, y = best_xy
            return "numerical_failure", x, y, it

        def newton(dvecs):
            # direction for per-block scaled complementarity targets dvecs
            rhs = -rd.copy()
            for H, (eta, jw, w2inv, lam), dvec in zip(Hs, cache, dvecs):
                winv_d = (2.0 * float(jw @ dvec) * jw - _jflip(dvec)) / eta
                rhs += H.T @ winv_d
            dx = _ldl_solve(M, rhs)
            if dx is None:
                return None
            dss, dys = [], []
            for H, (eta, jw, w2inv, lam), dvec in zip(Hs, cache, dvecs):
                ds = H @ dx
                winv_d = (2.0 * float(jw @ dvec) * jw - _jflip(dvec)) / eta
                dss.append(ds)
                dys.append(winv_d - w2inv @ ds)
            return dx, dss, dys

        # affine probe: full Newton step on s o y = 0 sets the centering
        aff = newton([-scal[3] for scal in cache])
        if aff is None:
            x, y = best_xy
            return "numerical_failure", x, y, it
        _, dss_a, dys_a = aff
        alpha_aff = 1.0
        for s, yi, ds, dy in zip(svals, y, dss_a, dys_a):
            alpha_aff = min(alpha_aff,
                            _step_to_boundary(s, ds), _step_to_boundary(yi, dy))
        gap_aff = sum(float((s + alpha_aff * ds) @ (yi + alpha_aff * dy))
                      for s, yi, ds, dy in zip(svals, y, dss_a, dys_a))
        sigma = min(_SIGMA_MAX, max(_SIGMA_MIN, (max(gap_aff, 0.0) / gap) ** 3))

        # corrector: recenters to sigma*mu and absorbs the probe's
        # second-order term dstilde o dytilde
        dvecs = []
        for (eta, jw, w2inv, lam), ds, dy in zip(cache, dss_a, dys_a):
            dst = (2.0 * float(jw @ ds) * jw - _jflip(ds)) / eta
            dyt = -lam - dst
            resid = np.empty_like(lam)
            resid[0] = sigma * mu - float(lam @ lam) - float(dst @ dyt)
            resid[1:] = (-2.0 * lam[0] * lam[1:]
                         - dst[0] * dyt[1:] - dyt[0] * dst[1:])
            dvecs.append(_arrow_solve(lam, resid))
        step = newton(dvecs)
        if step is None:
            x, y = best_xy
            return "numerical_failure", x, y, it
        dx, dss, dys = step
        alpha_max = math.inf
        for s, yi, ds, dy in zip(svals, y, dss, dys):
            alpha_max = min(alpha_max,
                            _step_to_boundary(s, ds), _step_to_boundary(yi, dy))
        alpha = min(1.0, _BOUNDARY_FRACTION * alpha_max)
        # the boundary step comes from a cancellation-prone quadratic, so
        # near the boundary it can overshoot; backtrack until the candidate
        # is strictly interior on both sides and the gap does not explode
        # (a corrupted direction can pass the interiority test while
        # multiplying the gap a thousandfold)
        while alpha > 1e-13:
            x_new = x + alpha * dx
            y_new = [yi + alpha * dy for yi, dy in zip(y, dys)]
            if (_interior(Hs, ks, x_new)
                    and all(_jquad(yn) > 0.0 and yn[0] > 0.0 for yn in y_new)):
                gap_new = sum(float((H @ x_new + k) @ yn)
                              for H, k, yn in zip(Hs, ks, y_new))
                if gap_new <= 2.0 * gap + nblocks * _MU_MIN:
                    break
            alpha *= 0.5
        if alpha <= 1e-13:
            x, y = best_xy
            return "stalled", x, y, it
        x = x_new
        y = y_new
    x, y = best_xy
    return "max_iterations", x, y, max_iter


def _phase1(Hs, ks, x_init, tol, max_iter):
    """Find a strictly interior point by driving a shared slack tau down.

    Returns (point or None, iterations, failure status or None).
    """
    n = x_init.size
    aug = []
    for H in Hs:
        col = np.zeros((H.shape[0], 1))
        col[0, 0] = 1.0  # tau widens every head component
        aug.append(np.hstack([H, col]))
    # cap tau below so the phase-1 objective is bounded
    aug.append(np.array([[0.0] * n + [1.0]]))
    ks_aug = list(ks) + [np.array([1.0])]
    c_aug = np.zeros(n + 1)
    c_aug[-1] = 1.0
    viol0 = -_margins(Hs, ks, x_init)
    x0 = np.concatenate([x_init, [viol0 + 1.0 + 0.1 * abs(viol0)]])

    state = {"best": math.inf, "count": 0}

    def monitor(x):
        margin = _margins(Hs, ks, x[:-1])
        if margin > 0.0:
            return "interior"
        viol = -margin
        if viol < state["best"] - 1e-12:
            state["best"] = viol
            state["count"] = 0
        else:
            state["count"] += 1
            if state["count"] >= _STALL_LIMIT and state["best"] > tol:
                return "infeasible"
        return None

    outcome, x, _, it = _path_follow(aug, ks_aug, c_aug, x0, tol, max_iter, monitor)
    if outcome == "interior":
        return x[:-1], it, None
    if outcome == "infeasible" or outcome == "converged":
        # tau was optimized without ever clearing the cones
        return None, it, STATUS_INFEASIBLE
    if outcome == "max_iterations":
        return None, it, STATUS_MAX_ITERATIONS
    return None, it, STATUS_NUMERICAL_FAILURE


def solve_socp(prog: ConeProgram, tol: float = 1e-8, max_iter: int = 100,
               z0=None) -> SocpResult:
    """Solve a ConeProgram; z0 optionally hints a strictly interior start.

    The optimum is polished well past tol when the path permits (mu is
    driven to 1e-12), so downstream consumers can compare optimizers at
    tolerances tighter than tol.
    """
    if tol <= 0.0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    n = prog.n_vars
    hint = None
    if z0 is not None:
        z0 = np.atleast_1d(np.asarray(z0, dtype=float))
        if z0.shape == (n,) and np.all(np.isfinite(z0)):
            hint = z0
    # equilibrate variables by the hint so coordinates of very different
    # magnitude (an epigraph value next to O(1) inputs) do not wreck the
    # Newton system's conditioning; solved in x = units * xt coordinates
    units = np.ones(n)
    if hint is not None:
        units = np.maximum(1.0, np.abs(hint))
    c_units = prog.c * units
    cscale = float(np.max(np.abs(c_units))) if np.any(c_units) else 1.0
    c = c_units / cscale  # optimizer is invariant to positive cost scaling
    Hs = [np.vstack([blk.d[None, :], blk.A]) * units[None, :]
          for blk in prog.blocks]
    ks = [np.concatenate([[blk.e], blk.b]) for blk in prog.blocks]
    total_it = 0

    start = np.zeros(n)
    if hint is not None:
        start = hint / units
    x0 = start
    if _margins(Hs, ks, x0) <= 0.0:
        x0, it1, failure = _phase1(Hs, ks, start, tol, max_iter)
        total_it += it1
        if failure is not None:
            bad = np.full(n, math.nan)
            return SocpResult(z=bad, objective=math.nan, status=failure,
                              iterations=total_it, primal_residual=math.inf)

    outcome, x, y, it2 = _path_follow(Hs, ks, c, x0, tol, max_iter)
    total_it += it2
    z = units * x
    polished = _active_polish(prog, z, tol, [float(yi[0]) * cscale for yi in y])
    if polished is not None:
        z, duals = polished
        x = z / units
        y = [d / cscale for d in duals]
    viol, obj = residuals(prog, z)
    svals = [H @ x + k for H, k in zip(Hs, ks)]
    gap = sum(float(s @ yi) for s, yi in zip(svals, y)) * cscale
    rd_norm = float(np.max(np.abs(c - sum(H.T @ yi for H, yi in zip(Hs, y))))) * cscale
    if outcome == "converged":
        status = STATUS_OPTIMAL
    elif (viol <= tol and rd_norm <= 10.0 * tol * cscale
          and gap <= 10.0 * tol * cscale * len(Hs)):
        # stalled short of the interior-point targets but already certifiably
        # accurate: duality gap and stationarity within an order of tol
        status = STATUS_OPTIMAL
    elif outcome == "max_iterations":
        status = STATUS_MAX_ITERATIONS
    else:
        status = STATUS_NUMERICAL_FAILURE
    return SocpResult(z=z, objective=obj, status=status, iterations=total_it,
                      primal_residual=viol, dual_residual=rd_norm, gap=gap)

"""Safety filters: minimally alter a baseline input subject to a robust
barrier constraint.

Given constraint data (p, a), a baseline u0 and an uncertainty level
theta, each filter returns the u closest to u0 (Euclidean norm) with

    p + a @ (u + w) >= 0   for every ||w|| <= theta * ||u||,

which after minimizing over w is the second-order cone condition

    p + a @ u - theta * ||u|| * ||a|| >= 0.

Three interchangeable routes are provided: a cone program over (u, q)
with the rotated-cone epigraph 2q >= ||u||^2 (any input dimension), an
exact interval projection for one input channel, and a positive/negative
split u = u_p - u_n for per-channel uncertainty levels, which turns the
absolute values |u_i| into the linear terms u_pi + u_ni.  All routes
first try the baseline: when u0 already satisfies the robust constraint
it is returned unaltered without touching a solver.

Optionally a symmetric box |u_i| <= u_max_i restricts the input set;
infeasibility against the box is raised as an error, never relaxed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .sectors import per_channel_worst_case, worst_case_input
from .socp import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    ConeProgram,
    SocBlock,
    solve_socp,
)

__all__ = [
    "FilterError",
    "InfeasibleError",
    "FilterResult",
    "robust_margin",
    "channel_margin",
    "filter_scalar",
    "filter_socp",
    "filter_qp_channels",
    "filter_auto",
]

#: Feasibility tolerance shared with the cone solver; also the threshold on
#: ||u - u0|| below which the result counts as unaltered.
TOL_FEAS = 1e-8

FILTER_MODES = ("auto", "scalar", "socp", "qp")


class FilterError(RuntimeError):
    """The filter could not produce a certified safe input."""


class InfeasibleError(FilterError):
    """No input satisfies the robust constraint (within bounds, if given)."""

    def __init__(self, message: str, degenerate: bool = False):
        super().__init__(message)
        self.degenerate = degenerate


@dataclass(frozen=True)
class FilterResult:
    """Filtered input with its certificate data.

    Attributes:
        u: Safe input, always 1-D.
        w_star: Worst admissible uncertainty at u (zero vector when theta=0).
        margin: Robust constraint value at u; >= -1e-8 on success.
        altered: Whether u differs from the baseline beyond tolerance.
        status: Solver status ("optimal" on every non-raising path).
        iterations: Interior-point iterations spent (0 for closed forms).
        q_star: Epigraph variable of the cone routes, 2*q_star == ||u||^2
            at the optimum; None for the interval route.
        u_pos, u_neg: Split variables of the per-channel route, else None.
    """

    u: np.ndarray
    w_star: np.ndarray
    margin: float
    altered: bool
    status: str
    iterations: int
    q_star: Optional[float] = None
    u_pos: Optional[np.ndarray] = None
    u_neg: Optional[np.ndarray] = None


def robust_margin(p: float, a, u, theta: float) -> float:
    """Worst-case constraint value p + a @ u - theta * ||u|| * ||a||."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return float(p + a @ u - theta * np.linalg.norm(u) * np.linalg.norm(a))


def channel_margin(p: float, a, u, theta_vec) -> float:
    """Per-channel worst case p + a @ u - sum_i theta_i |a_i| |u_i|."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    u = np.atleast_1d(np.asarray(u, dtype=float))
    theta_vec = np.atleast_1d(np.asarray(theta_vec, dtype=float))
    return float(p + a @ u - (theta_vec * np.abs(a)) @ np.abs(u))


def _validate(p, a, u0) -> tuple[float, np.ndarray, np.ndarray]:
    p = float(p)
    a = np.atleast_1d(np.asarray(a, dtype=float))
    u0 = np.atleast_1d(np.asarray(u0, dtype=float))
    if a.ndim != 1 or u0.shape != a.shape:
        raise ValueError(f"shape mismatch: a {a.shape}, u0 {u0.shape}")
    if not (math.isfinite(p) and np.all(np.isfinite(a)) and np.all(np.isfinite(u0))):
        raise ValueError("constraint data must be finite")
    return p, a, u0


def _scalar_theta(theta) -> float:
    theta = float(theta)
    if not (0.0 <= theta < 1.0):
        raise ValueError(f"uncertainty level must satisfy 0 <= theta < 1, got {theta}")
    return theta


def _box(u_max, m: int) -> Optional[np.ndarray]:
    if u_max is None:
        return None
    ub = np.broadcast_to(np.asarray(u_max, dtype=float), (m,)).astype(float)
    if not np.all(np.isfinite(ub)) or np.any(ub <= 0.0):
        raise ValueError("box bounds must be positive and finite")
    return ub


def _in_box(u: np.ndarray, ub: Optional[np.ndarray]) -> bool:
    return ub is None or bool(np.all(np.abs(u) <= ub))


def _degenerate(p: float, u0: np.ndarray, ub: Optional[np.ndarray],
                with_q: bool) -> FilterResult:
    # a == 0: no input moves the constraint, so it either already holds or
    # cannot be met at all
    if p < 0.0:
        raise InfeasibleError(
            f"input direction vanished (a = 0) with negative drift term p = {p}",
            degenerate=True)
    u = u0 if ub is None else np.clip(u0, -ub, ub)
    return FilterResult(
        u=u.copy(), w_star=np.zeros(u.size), margin=p,
        altered=bool(np.linalg.norm(u - u0) > TOL_FEAS), status=STATUS_OPTIMAL,
        iterations=0, q_star=0.5 * float(u @ u) if with_q else None)


def filter_scalar(p, a, u0, theta, u_max=None, tol: float = TOL_FEAS) -> FilterResult:
    """Exact single-channel filter via the feasible interval.

    For a > 0 the robust constraint is u >= u_l with
    u_l = max(-p/((1-theta)a), -p/((1+theta)a)) (the two slopes of the
    piecewise-linear constraint on either side of u = 0), so the closest
    feasible point is max(u_l, u0); a < 0 mirrors to an upper endpoint.
    """
    p, a, u0 = _validate(p, a, u0)
    theta = _scalar_theta(theta)
    if a.size != 1:
        raise ValueError(f"interval route needs one channel, got {a.size}")
    ub = _box(u_max, 1)
    if a[0] == 0.0:
        return _degenerate(p, u0, ub, with_q=False)
    if robust_margin(p, a, u0, theta) >= 0.0 and _in_box(u0, ub):
        return FilterResult(u=u0.copy(), w_star=worst_case_input(u0, a, theta),
                            margin=robust_margin(p, a, u0, theta), altered=False,
                            status=STATUS_OPTIMAL, iterations=0)
    av, uv = float(a[0]), float(u0[0])
    lo_slope = -p / ((1.0 - theta) * av)  # binds where sign(u) == sign(a)
    hi_slope = -p / ((1.0 + theta) * av)
    if av > 0.0:
        u_l = max(lo_slope, hi_slope)
        hi = math.inf if ub is None else float(ub[0])
        if u_l > hi:
            raise InfeasibleError(
                f"feasible interval [{u_l}, inf) lies outside the bound {hi}")
        lo = u_l if ub is None else max(u_l, -float(ub[0]))
        u_new = min(max(uv, lo), hi)
    else:
        u_h = min(lo_slope, hi_slope)
        lo = -math.inf if ub is None else -float(ub[0])
        if u_h < lo:
            raise InfeasibleError(
                f"feasible interval (-inf, {u_h}] lies outside the bound {lo}")
        hi = u_h if ub is None else min(u_h, float(ub[0]))
        u_new = max(min(uv, hi), lo)
    u = np.array([u_new])
    return FilterResult(u=u, w_star=worst_case_input(u, a, theta),
                        margin=robust_margin(p, a, u, theta),
                        altered=bool(abs(u_new - uv) > tol),
                        status=STATUS_OPTIMAL, iterations=0)


def _epigraph_rows(m: int, n: int) -> SocBlock:
    # ||(sqrt(2) u, q - 1)|| <= q + 1  <=>  2 q >= ||u||^2, q >= 0
    A = np.zeros((m + 1, n))
    A[:m, :m] = math.sqrt(2.0) * np.eye(m)
    A[m, n - 1] = 1.0
    b = np.zeros(m + 1)
    b[m] = -1.0
    d = np.zeros(n)
    d[n - 1] = 1.0
    return SocBlock(A, b, d, 1.0)


def _box_blocks(ub: np.ndarray, span: np.ndarray, n: int) -> list:
    # span maps decision variables to u; emit +-u_i <= ub_i
    out = []
    empty = np.zeros((0, n))
    none = np.zeros(0)
    for i in range(ub.size):
        out.append(SocBlock(empty, none, -span[i], float(ub[i])))
        out.append(SocBlock(empty, none, span[i], float(ub[i])))
    return out


def filter_socp(p, a, u0, theta, u_max=None, tol: float = TOL_FEAS,
                max_iter: int = 100) -> FilterResult:
    """Cone-program filter over (u, q): minimize q - u0 @ u subject to
    theta*||a||*||u|| <= p + a @ u and the epigraph 2q >= ||u||^2."""
    p, a, u0 = _validate(p, a, u0)
    theta = _scalar_theta(theta)
    m = a.size
    ub = _box(u_max, m)
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        return _degenerate(p, u0, ub, with_q=True)
    if robust_margin(p, a, u0, theta) >= 0.0 and _in_box(u0, ub):
        return FilterResult(u=u0.copy(), w_star=worst_case_input(u0, a, theta),
                            margin=robust_margin(p, a, u0, theta), altered=False,
                            status=STATUS_OPTIMAL, iterations=0,
                            q_star=0.5 * float(u0 @ u0))
    n = m + 1
    c = np.concatenate([-u0, [1.0]])
    robust = SocBlock(
        np.hstack([theta * norm_a * np.eye(m), np.zeros((m, 1))]),
        np.zeros(m), np.concatenate([a, [0.0]]), p)
    blocks = [robust, _epigraph_rows(m, n)]
    if ub is not None:
        span = np.hstack([np.eye(m), np.zeros((m, 1))])
        blocks += _box_blocks(ub, span, n)
    prog = ConeProgram(c=c, blocks=tuple(blocks), n_vars=n)
    # hint: along a the robust margin grows at rate (1-theta)*||a|| > 0
    reach = (1.0 + max(0.0, -p)) / ((1.0 - theta) * norm_a)
    u_hint = reach * a / norm_a
    z0 = np.concatenate([u_hint, [0.5 * float(u_hint @ u_hint) + 1.0]])
    res = solve_socp(prog, tol=tol, max_iter=max_iter, z0=z0)
    if res.status == STATUS_INFEASIBLE:
        raise InfeasibleError(
            f"no input satisfies the robust constraint (p={p}, theta={theta}"
            + ("" if ub is None else ", bounded inputs") + ")")
    if res.status != STATUS_OPTIMAL:
        raise FilterError(f"cone solver stopped with status {res.status}")
    u = res.z[:m]
    return FilterResult(u=u, w_star=worst_case_input(u, a, theta),
                        margin=robust_margin(p, a, u, theta),
                        altered=bool(np.linalg.norm(u - u0) > tol),
                        status=res.status, iterations=res.iterations,
                        q_star=float(res.z[m]))


def filter_qp_channels(p, a, u0, theta, u_max=None, tol: float = TOL_FEAS,
                       max_iter: int = 100) -> FilterResult:
    """Per-channel filter via the split u = u_p - u_n, |u| = u_p + u_n.

    The uncertainty level may differ per channel; the worst case then
    decouples and the robust constraint becomes linear in (u_p, u_n):
    p + sum_i a_i (u_pi - u_ni) - sum_i theta_i |a_i| (u_pi + u_ni) >= 0.
    At any optimum one of u_pi, u_ni is zero, so u_pi + u_ni = |u_i|.
    Channels with zero loading keep a plain free variable.
    """
    p, a, u0 = _validate(p, a, u0)
    m = a.size
    theta_vec = np.broadcast_to(np.asarray(theta, dtype=float), (m,)).astype(float)
    if np.any(theta_vec < 0.0) or np.any(theta_vec >= 1.0):
        raise ValueError("per-channel levels must lie in [0, 1)")
    ub = _box(u_max, m)
    norm_a = float(np.linalg.norm(a))
    if norm_a == 0.0:
        return _degenerate(p, u0, ub, with_q=True)
    margin0 = channel_margin(p, a, u0, theta_vec)
    if margin0 >= 0.0 and _in_box(u0, ub):
        return FilterResult(u=u0.copy(),
                            w_star=per_channel_worst_case(u0, a, theta_vec),
                            margin=margin0, altered=False, status=STATUS_OPTIMAL,
                            iterations=0, q_star=0.5 * float(u0 @ u0),
                            u_pos=np.clip(u0, 0.0, None),
                            u_neg=np.clip(-u0, 0.0, None))
    load = theta_vec * np.abs(a)
    # only channels with actual loading get split; a channel with
    # theta_i = 0 or a_i = 0 would make (u_p + t, u_n + t) a cost-free ray
    split = np.flatnonzero(load > 0.0)
    free = np.flatnonzero(load == 0.0)
    ns = split.size
    n = 2 * ns + free.size + 1
    U = np.zeros((m, n))
    U[split, np.arange(ns)] = 1.0
    U[split, ns + np.arange(ns)] = -1.0
    U[free, 2 * ns + np.arange(free.size)] = 1.0
    e_q = np.zeros(n)
    e_q[-1] = 1.0
    c = -U.T @ u0 + e_q
    spread = np.zeros(n)
    spread[:ns] = load[split]
    spread[ns:2 * ns] = load[split]
    safety = SocBlock(np.zeros((0, n)), np.zeros(0), U.T @ a - spread, p)
    epi = SocBlock(np.vstack([math.sqrt(2.0) * U, e_q[None, :]]),
                   np.concatenate([np.zeros(m), [-1.0]]), e_q, 1.0)
    blocks = [safety, epi]
    empty = np.zeros((0, n))
    none = np.zeros(0)
    for i in range(2 * ns):
        sign_row = np.zeros(n)
        sign_row[i] = 1.0
        blocks.append(SocBlock(empty, none, sign_row, 0.0))
    if ub is not None:
        blocks += _box_blocks(ub, U, n)
    prog = ConeProgram(c=c, blocks=tuple(blocks), n_vars=n)
    theta_max = float(np.max(theta_vec))
    reach = (1.0 + max(0.0, -p)) / ((1.0 - theta_max) * norm_a)
    u_hint = reach * a / norm_a
    pad = min(1.0, 1.0 / (4.0 * float(np.sum(load)) + 1.0))
    z0 = np.concatenate([np.clip(u_hint[split], 0.0, None) + pad,
                         np.clip(-u_hint[split], 0.0, None) + pad,
                         u_hint[free],
                         [0.5 * float(u_hint @ u_hint) + 1.0]])
    res = solve_socp(prog, tol=tol, max_iter=max_iter, z0=z0)
    if res.status == STATUS_INFEASIBLE:
        raise InfeasibleError(
            f"no input satisfies the per-channel robust constraint (p={p})")
    if res.status != STATUS_OPTIMAL:
        raise FilterError(f"cone solver stopped with status {res.status}")
    u = U @ res.z
    u_pos = np.clip(u, 0.0, None)
    u_neg = np.clip(-u, 0.0, None)
    u_pos[split] = res.z[:ns]
    u_neg[split] = res.z[ns:2 * ns]
    return FilterResult(u=u, w_star=per_channel_worst_case(u, a, theta_vec),
                        margin=channel_margin(p, a, u, theta_vec),
                        altered=bool(np.linalg.norm(u - u0) > tol),
                        status=res.status, iterations=res.iterations,
                        q_star=float(res.z[-1]), u_pos=u_pos, u_neg=u_neg)


def filter_auto(p, a, u0, theta, u_max=None, tol: float = TOL_FEAS,
                max_iter: int = 100, mode: str = "auto") -> FilterResult:
    """Dispatch to the fitting route.

    Per-channel theta (any array) goes to the split route; otherwise one
    channel uses the exact interval and several use the cone program.
    """
    if mode not in FILTER_MODES:
        raise ValueError(f"unknown filter mode {mode!r}")
    if mode == "auto":
        if np.ndim(theta) > 0:
            mode = "qp"
        else:
            mode = "scalar" if np.atleast_1d(np.asarray(a)).size == 1 else "socp"
    if mode == "scalar":
        return filter_scalar(p, a, u0, theta, u_max=u_max, tol=tol)
    if mode == "socp":
        return filter_socp(p, a, u0, theta, u_max=u_max, tol=tol, max_iter=max_iter)
    return filter_qp_channels(p, a, u0, theta, u_max=u_max, tol=tol,
                              max_iter=max_iter)

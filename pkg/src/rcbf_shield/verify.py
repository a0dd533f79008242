"""Numerical self-checks runnable from the command line.

Each check draws deterministic random instances, compares an
implementation against an independent oracle or a cross-route
counterpart, and reports the worst deviation next to its tolerance.
The quick suite trims instance counts to stay under ten seconds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List

import numpy as np

from .filters import filter_auto, filter_qp_channels, filter_scalar, filter_socp
from .sectors import (
    NormalizedUncertainty,
    optimal_multiplier,
    worst_case_input,
    worst_case_oracle,
)
from .sim import simulate, step_rk4
from .vehicle import X0, lateral_dynamics

__all__ = [
    "CheckResult",
    "check_worst_case_oracle",
    "check_multiplier_identity",
    "check_route_agreement",
    "check_split_uniqueness",
    "check_margin_soundness",
    "check_theta_zero_reduction",
    "check_rk4_order",
    "check_determinism",
    "run_checks",
    "format_report",
]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _result(name: str, measured: float, bound: float, extra: str = "") -> CheckResult:
    note = f"worst {measured:.3g} vs bound {bound:.3g}"
    if extra:
        note += f"; {extra}"
    return CheckResult(name, bool(measured <= bound), note)


def _random_direction(rng: np.random.Generator, m: int) -> np.ndarray:
    v = rng.normal(size=m)
    n = np.linalg.norm(v)
    while n < 1e-12:
        v = rng.normal(size=m)
        n = np.linalg.norm(v)
    return v / n


def check_worst_case_oracle(n_instances: int = 100, samples: int = 10_000) -> CheckResult:
    """Closed-form ball minimizer vs dense sampling of admissible w."""
    rng = np.random.default_rng(11)
    worst_beaten = 0.0
    worst_gap_rel = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(1, 4))
        u = _random_direction(rng, m) * rng.uniform(0.5, 5.0)
        a = _random_direction(rng, m) * rng.uniform(0.5, 5.0)
        theta = rng.uniform(0.05, 0.9)
        w_star = worst_case_input(u, a, theta)
        exact = float(a @ (u + w_star))
        w_best = worst_case_oracle(u, a, theta, samples=samples)
        sampled = float(a @ (u + w_best))
        budget = theta * np.linalg.norm(u) * np.linalg.norm(a)
        worst_beaten = max(worst_beaten, exact - sampled)
        worst_gap_rel = max(worst_gap_rel, (sampled - exact) / budget)
    beaten_ok = worst_beaten <= 1e-9
    gap_ok = worst_gap_rel <= 1e-2
    detail = (f"sampling above closed form by at most {worst_gap_rel:.3g} of the "
              f"ball budget (bound 0.01); closed form beaten by {worst_beaten:.3g}")
    return CheckResult("worst_case_oracle", beaten_ok and gap_ok, detail)


def check_multiplier_identity(n_instances: int = 1000) -> CheckResult:
    """Stationarity a + 2*lambda*w* = 0 of the inner ball problem."""
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(1, 4))
        u = _random_direction(rng, m) * rng.uniform(0.1, 10.0)
        a = _random_direction(rng, m) * rng.uniform(0.1, 10.0)
        theta = rng.uniform(0.01, 0.99)
        w_star = worst_case_input(u, a, theta)
        lam = optimal_multiplier(u, a, theta)
        resid = np.linalg.norm(a + 2.0 * lam * w_star) / np.linalg.norm(a)
        worst = max(worst, resid)
    return _result("multiplier_identity", worst, 1e-10)


def _scalar_instances(rng: np.random.Generator, n: int):
    for _ in range(n):
        p = rng.uniform(-5.0, 5.0)
        a = np.array([rng.uniform(0.1, 10.0) * rng.choice([-1.0, 1.0])])
        theta = rng.uniform(0.0, 0.9)
        u0 = np.array([rng.uniform(-10.0, 10.0)])
        yield p, a, theta, u0


def check_route_agreement(n_instances: int = 1000) -> CheckResult:
    """Closed form, cone program, and channel split must agree on m=1."""
    rng = np.random.default_rng(13)
    worst_u = 0.0
    worst_epi = 0.0
    for p, a, theta, u0 in _scalar_instances(rng, n_instances):
        r_scalar = filter_scalar(p, a, u0, theta)
        r_socp = filter_socp(p, a, u0, theta)
        r_qp = filter_qp_channels(p, a, u0, np.array([theta]))
        worst_u = max(worst_u,
                      float(np.abs(r_scalar.u - r_socp.u).max()),
                      float(np.abs(r_scalar.u - r_qp.u).max()))
        for res in (r_socp, r_qp):
            if res.q_star is not None:
                worst_epi = max(worst_epi,
                                abs(2.0 * res.q_star - float(res.u @ res.u)))
    ok = worst_u <= 1e-6 and worst_epi <= 1e-6
    detail = (f"max route disagreement {worst_u:.3g} (bound 1e-06); "
              f"max |2q - ||u||^2| {worst_epi:.3g} (bound 1e-06)")
    return CheckResult("route_agreement", ok, detail)


def check_split_uniqueness(n_instances: int = 1000) -> CheckResult:
    """Channel split must keep u_pos and u_neg complementary."""
    rng = np.random.default_rng(14)
    worst = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(1, 4))
        p = rng.uniform(-5.0, 5.0)
        a = rng.uniform(0.1, 10.0, size=m) * rng.choice([-1.0, 1.0], size=m)
        theta = rng.uniform(0.0, 0.9, size=m)
        u0 = rng.uniform(-10.0, 10.0, size=m)
        res = filter_qp_channels(p, a, u0, theta)
        worst = max(worst, float(np.minimum(res.u_pos, res.u_neg).max()))
    return _result("split_uniqueness", worst, 1e-8)


def check_margin_soundness(n_instances: int = 1000, w_samples: int = 2000) -> CheckResult:
    """Reported robust margin must lower-bound every admissible realization."""
    rng = np.random.default_rng(15)
    worst_margin = 0.0
    worst_gap = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(1, 4))
        p = rng.uniform(-5.0, 5.0)
        a = _random_direction(rng, m) * rng.uniform(0.1, 10.0)
        theta = rng.uniform(0.0, 0.9)
        u0 = rng.uniform(-10.0, 10.0, size=m)
        res = filter_auto(p, a, u0, theta)
        worst_margin = max(worst_margin, -res.margin)
        radius = theta * np.linalg.norm(res.u)
        dirs = rng.normal(size=(w_samples, m))
        norms = np.maximum(np.linalg.norm(dirs, axis=1), 1e-300)
        radii = radius * rng.uniform(0.0, 1.0, size=w_samples) ** (1.0 / m)
        ws = dirs / norms[:, None] * radii[:, None]
        realized = p + (res.u + ws) @ a
        worst_gap = max(worst_gap, float(res.margin - realized.min()))
    ok = worst_margin <= 1e-6 and worst_gap <= 1e-9
    detail = (f"margin floor {-worst_margin:.3g} (bound -1e-06); margin exceeded a "
              f"realization by {worst_gap:.3g}")
    return CheckResult("margin_soundness", ok, detail)


def check_theta_zero_reduction(n_instances: int = 1000) -> CheckResult:
    """At theta=0 the filter is the halfspace projection of u0."""
    rng = np.random.default_rng(16)
    worst = 0.0
    for _ in range(n_instances):
        m = int(rng.integers(1, 4))
        p = rng.uniform(-5.0, 5.0)
        a = _random_direction(rng, m) * rng.uniform(0.1, 10.0)
        u0 = rng.uniform(-10.0, 10.0, size=m)
        shift = max(0.0, -(p + float(a @ u0))) / float(a @ a)
        u_exact = u0 + shift * a
        res = filter_auto(p, a, u0, 0.0)
        worst = max(worst, float(np.abs(res.u - u_exact).max()))
        res_qp = filter_qp_channels(p, a, u0, np.zeros(m))
        worst = max(worst, float(np.abs(res_qp.u - u_exact).max()))
    return _result("theta_zero_reduction", worst, 1e-8)


def _march(dt: float, horizon: float = 0.5) -> np.ndarray:
    # open loop with the input held fixed: the smooth problem that exposes
    # the integrator's own order (the closed loop replans every step and is
    # limited by the hold, not by the integrator)
    dyn = lateral_dynamics()
    unc = NormalizedUncertainty(theta=0.5, scale=1.0)
    u = np.array([-2.82])
    w = np.array([0.7])
    x = X0.astype(float).copy()
    for _ in range(round(horizon / dt)):
        x = step_rk4(dyn, unc, x, u, w, dt)
    return x


def check_rk4_order() -> CheckResult:
    """Halving dt must cut the endpoint error by at least 8x (expect ~16x)."""
    ref = _march(2.5e-4)
    err_coarse = float(np.abs(_march(4e-3) - ref).max())
    err_fine = float(np.abs(_march(2e-3) - ref).max())
    ratio = err_coarse / err_fine if err_fine > 0 else np.inf
    return CheckResult("rk4_order", ratio >= 8.0,
                       f"error ratio {ratio:.2f} on dt halving (bound 8)")


def check_determinism(horizon: float = 0.5) -> CheckResult:
    """Same scenario twice must give byte-identical csv text."""
    from . import vehicle as _vehicle
    from .output import trajectory_csv_text

    base = _vehicle.scenario_presets()["fig3_recbf"]
    sc = replace(base, horizon=horizon)
    text_a = trajectory_csv_text(simulate(sc))
    text_b = trajectory_csv_text(simulate(sc))
    same = text_a == text_b
    return CheckResult("determinism", same,
                       f"{len(text_a)} csv bytes {'identical' if same else 'differ'} "
                       f"across reruns")


_QUICK: List[Callable[[], CheckResult]] = [
    lambda: check_worst_case_oracle(n_instances=30),
    lambda: check_route_agreement(n_instances=150),
    lambda: check_split_uniqueness(n_instances=150),
    check_rk4_order,
]

_FULL: List[Callable[[], CheckResult]] = [
    check_worst_case_oracle,
    check_multiplier_identity,
    check_route_agreement,
    check_split_uniqueness,
    check_margin_soundness,
    check_theta_zero_reduction,
    check_rk4_order,
    lambda: check_determinism(horizon=2.0),
]


def run_checks(depth: str = "quick") -> List[CheckResult]:
    if depth not in ("quick", "full"):
        raise ValueError(f"depth must be 'quick' or 'full', got {depth!r}")
    suite = _QUICK if depth == "quick" else _FULL
    return [check() for check in suite]


def format_report(results: List[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{r.name:<{width}}  {'pass' if r.passed else 'FAIL'}  {r.detail}"
             for r in results]
    total = sum(r.passed for r in results)
    lines.append(f"{total}/{len(results)} checks passed")
    return "\n".join(lines)

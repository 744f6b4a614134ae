"""Closed-form regret quantities: Bernoulli KL, J_i, the lower-bound coefficient c_mu
and upper-bound evaluations for epsilon_t-greedy-LP, UCB-LP and UCB-N.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp as lpmod
from .env import Environment
from .graph import CLIQUE_CAP, greedy_clique_cover, min_cost_clique_partition


class BoundError(ValueError):
    pass


def bernoulli_kl(theta: float, sigma: float) -> float:
    """D(theta || sigma) for Bernoulli laws, with 0 log 0 = 0."""
    if not 0.0 <= theta <= 1.0 or not 0.0 <= sigma <= 1.0:
        raise BoundError(f"parameters must lie in [0, 1], got ({theta}, {sigma})")
    if theta == sigma:
        return 0.0
    if sigma in (0.0, 1.0):
        raise BoundError(f"D({theta} || {sigma}) is infinite")
    out = 0.0
    if theta > 0:
        out += theta * math.log(theta / sigma)
    if theta < 1:
        out += (1 - theta) * math.log((1 - theta) / (1 - sigma))
    return out


def _require_identity(env: Environment) -> None:
    g = env.graph
    if env.reward.kind != "identity" or any(k != frozenset([j]) for j, k in enumerate(g.reward_sets)) \
            or g.num_actions != g.num_base_arms:
        raise BoundError("J_i is only available in closed form for identity rewards (K_j = {j})")


def j_constant_identity(env: Environment, i: int) -> float:
    """J_i = D(theta_i || mu*) for theta_i < mu*; ``inf`` marks the dropped constraint at theta_i = mu*."""
    _require_identity(env)
    mu_star = float(env.theta.max())
    th = float(env.theta[i])
    if mu_star - th <= 1e-12:
        return math.inf
    return bernoulli_kl(th, mu_star)


def j_constants(env: Environment) -> np.ndarray:
    return np.array([j_constant_identity(env, i) for i in range(env.graph.num_base_arms)])


def lower_bound_c_mu(env: Environment) -> float:
    """Optimum of the lower-bound program (coefficient of log t)."""
    info = env.gap_info
    if not info.suboptimal:
        return 0.0
    prog = lpmod.build_p1(env.graph, info.gaps, j_constants(env), info.suboptimal)
    sol = lpmod.solve_generic(prog)
    if sol.status != lpmod.OPTIMAL:
        raise BoundError(f"lower-bound program {sol.status}")
    return sol.objective


def sandwich_terms(env: Environment, zsum: float) -> tuple[float, float, float]:
    """(lower, sum z*, upper) with lower <= sum z* <= upper expected.

    The J extremes range over base-arms with a finite constant.
    """
    info = env.gap_info
    c_mu = lower_bound_c_mu(env)
    j = j_constants(env)
    fin = j[np.isfinite(j)]
    if not info.suboptimal or fin.size == 0:
        return 0.0, zsum, float(len(info.optimal))
    g = info.gaps[list(info.suboptimal)]
    lower = fin.min() / g.max() * c_mu
    upper = fin.max() / g.min() * c_mu + len(info.optimal)
    return float(lower), zsum, float(upper)


# ------------------------------------------------------------ eps-greedy-LP

def concentration_rate(alpha: float) -> float:
    """r = 3 (alpha - 1)^2 / (8 alpha - 2)."""
    return 3.0 * (alpha - 1.0) ** 2 / (8.0 * alpha - 2.0)


def check_eps_greedy_params(gaps: np.ndarray, c: float, d: float, alpha: float) -> list[str]:
    """Inequalities the epsilon_t-greedy-LP bound needs; returns the failed ones."""
    failed = []
    if not alpha > 1:
        failed.append(f"alpha > 1 (alpha = {alpha})")
        return failed
    r = concentration_rate(alpha)
    if not d > 0:
        failed.append(f"d > 0 (d = {d})")
    if gaps.size and not d < gaps.min():
        failed.append(f"d < min suboptimal gap (d = {d}, min gap = {gaps.min():.6g})")
    need = max(2 * alpha * d * d / r, 4 * alpha)
    if not c > need:
        failed.append(f"c > max(2 alpha d^2 / r, 4 alpha) (c = {c}, bound = {need:.6g})")
    return failed


def _logsumexp(logs: list[float]) -> float:
    if not logs:
        return -math.inf
    top = max(logs)
    return top + math.log(sum(math.exp(v - top) for v in logs))


def eps_greedy_bound(env: Environment, z: np.ndarray, c: float, d: float, horizon: float,
                     alpha: float = 2.0) -> dict:
    """Log-T term and the explicit time-independent term of the epsilon_t-greedy-LP bound.

    The constant is assembled in log space because it grows like (e t')^(c r / alpha d^2);
    ``constant`` is ``inf`` when it exceeds the float range, ``log_constant`` stays finite.
    """
    info = env.gap_info
    z = np.asarray(z, dtype=float)
    sub = list(info.suboptimal)
    gaps = info.gaps[sub]
    failed = check_eps_greedy_params(gaps, c, d, alpha)
    if failed:
        raise BoundError("parameter check failed: " + "; ".join(failed))
    coeff = c / (d * d) * float((gaps * z[sub]).sum())
    stats = env.graph.stats
    lam, delta = stats.lam, stats.delta
    r = concentration_rate(alpha)
    t_prime = c * float(z.sum()) / (d * d)
    base = math.log(math.e * t_prime)
    logs = []
    for g in gaps:
        logs.append(math.log(math.pi ** 2 * lam * c * delta * g / (3 * alpha * d * d)) + c * r / (alpha * d * d) * base)
        logs.append(math.log(2 * math.pi ** 2 / (3 * g)) + c * g * g / (2 * alpha * d * d) * base)
    log_const = _logsumexp(logs)
    const = math.exp(log_const) if log_const < 700 else math.inf
    log_term = coeff * math.log(horizon)
    return {"log_coeff": coeff, "log_term": log_term, "constant": const, "log_constant": log_const,
            "total": log_term + const, "t_prime": t_prime, "r": r, "lambda": lam, "delta": delta}


# ------------------------------------------------------------------ UCB-LP

def elimination_round(gap: float) -> float:
    """m_j = min{m : 2^-m < gap/2}; ``inf`` for optimal actions."""
    if not gap > 0:
        return math.inf
    m = 0
    while not 2.0 ** -m < gap / 2:
        m += 1
    return m


def pivot_round(m_rounds: list[float], zsum: float) -> int:
    """m_bar = min{m : sum z* > sum_{j : m_j > m} 2^(-m+1)}, scanning m upward."""
    m = 0
    while True:
        count = sum(1 for mj in m_rounds if mj > m)
        if zsum > count * 2.0 ** (-m + 1):
            return m
        m += 1


@dataclass
class BoundReport:
    c_mu: float
    eps_greedy_log_coeff: float
    eps_greedy_constant: float
    ucb_lp_bound_at_T: float
    ucb_lp_const_1b: float        # sum_U 64 / Delta_j^2
    ucb_lp_const_2: float         # (sum_U Delta_j) * sum_U 32 / Delta_a^2
    ucb_n_clique_bound_coeff: float
    horizon: float
    m_rounds: list = field(default_factory=list)
    m_bar: int = 0
    pivot_set: tuple = ()
    delta_hat: dict = field(default_factory=dict)
    eps_greedy_error: Optional[str] = None

    def as_rows(self) -> list[tuple[str, str]]:
        fmt = lambda v: "inf" if v == math.inf else f"{v:.10g}"
        rows = [("horizon", fmt(self.horizon)), ("c_mu", fmt(self.c_mu))]
        if self.eps_greedy_error:
            rows.append(("eps_greedy", f"rejected: {self.eps_greedy_error}"))
        else:
            rows += [("eps_greedy_log_coeff", fmt(self.eps_greedy_log_coeff)),
                     ("eps_greedy_constant", fmt(self.eps_greedy_constant))]
        rows += [("ucb_lp_bound_at_T", fmt(self.ucb_lp_bound_at_T)),
                 ("ucb_lp_const_64_over_gap2", fmt(self.ucb_lp_const_1b)),
                 ("ucb_lp_const_32_over_gap2", fmt(self.ucb_lp_const_2)),
                 ("ucb_lp_unreported_constant", "not evaluated"),
                 ("ucb_n_clique_bound_coeff", fmt(self.ucb_n_clique_bound_coeff)),
                 ("m_j", " ".join("inf" if m == math.inf else str(m) for m in self.m_rounds)),
                 ("m_bar", str(self.m_bar)),
                 ("B", " ".join(str(j + 1) for j in self.pivot_set) or "-"),
                 ("delta_hat", " ".join(f"{j + 1}:{v:.6g}" for j, v in sorted(self.delta_hat.items())) or "-")]
        return rows


def ucb_lp_terms(env: Environment, z: np.ndarray) -> dict:
    """m_j, m_bar, B, G_a and Delta_hat_j for the UCB-LP bound."""
    info = env.gap_info
    g = env.graph
    z = np.asarray(z, dtype=float)
    m_rounds = [elimination_round(float(x)) for x in info.gaps]
    m_bar = pivot_round(m_rounds, float(z.sum()))
    sub = list(info.suboptimal)
    pivot = tuple(j for j in sub if m_rounds[j] > m_bar)
    sup = g.supports
    reach = [set().union(*(sup[i] for i in g.reward_sets[a])) for a in range(g.num_actions)]   # G_a
    delta_hat = {}
    for j in sub:
        if j in pivot:
            continue
        near = min(info.gaps[a] for a in range(g.num_actions) if j in reach[a])
        delta_hat[j] = max(2.0 ** (-m_bar + 2), float(near))
    return {"m_rounds": m_rounds, "m_bar": m_bar, "pivot": pivot, "delta_hat": delta_hat, "reach": reach}


def _pos_log(x: float) -> float:
    return max(0.0, math.log(x))


def ucb_lp_bound(env: Environment, z: np.ndarray, horizon: float, terms: Optional[dict] = None) -> float:
    """Horizon-dependent part of the UCB-LP bound (time-independent constants excluded).

    Each log(T Delta^2) factor is floored at 0 so the value stays a valid non-negative bound.
    """
    info = env.gap_info
    z = np.asarray(z, dtype=float)
    terms = terms or ucb_lp_terms(env, z)
    total = 0.0
    for j, dh in terms["delta_hat"].items():
        total += info.gaps[j] * z[j] * 32.0 * _pos_log(horizon * dh * dh) / (dh * dh)
    for j in terms["pivot"]:
        gj = info.gaps[j]
        total += 32.0 * _pos_log(horizon * gj * gj) / gj
    return total


def ucb_lp_constants(env: Environment) -> tuple[float, float]:
    gaps = env.gap_info.gaps[list(env.gap_info.suboptimal)]
    if gaps.size == 0:
        return 0.0, 0.0
    c1b = float((64.0 / gaps ** 2).sum())
    c2 = float(gaps.sum() * (32.0 / gaps ** 2).sum())
    return c1b, c2


# ------------------------------------------------------------------- UCB-N

def clique_cost(gaps: np.ndarray):
    def cost(part):
        g = gaps[part]
        return 8.0 * g.max() / (g.min() ** 2)
    return cost


def ucb_n_clique_bound(env: Environment, exact: Optional[bool] = None) -> dict:
    """Coefficient of log T in the clique-cover bound over suboptimal actions.

    Returns the greedy-cover value and, when at most CLIQUE_CAP suboptimal actions
    exist (or ``exact`` is forced), the exact minimum over clique partitions.
    """
    info = env.gap_info
    sub = list(info.suboptimal)
    cost = clique_cost(info.gaps)
    if not sub:
        return {"greedy": 0.0, "exact": 0.0, "value": 0.0, "cover": []}
    cover = greedy_clique_cover(env.graph, sub)
    greedy = sum(cost(c) for c in cover)
    out = {"greedy": greedy, "exact": None, "value": greedy, "cover": cover}
    if exact is None:
        exact = len(sub) <= CLIQUE_CAP
    if exact:
        val, parts = min_cost_clique_partition(env.graph, sub, cost)
        out.update(exact=val, value=min(val, greedy), cover=parts)
    return out


def bound_report(env: Environment, z: np.ndarray, horizon: float, c: float = 5.0, d: float = 0.2,
                 alpha: float = 2.0) -> BoundReport:
    identity = env.reward.kind == "identity" and all(
        k == frozenset([j]) for j, k in enumerate(env.graph.reward_sets))
    c_mu = lower_bound_c_mu(env) if identity else math.nan
    eps_err = None
    try:
        eg = eps_greedy_bound(env, z, c, d, horizon, alpha)
        eg_coeff, eg_const = eg["log_coeff"], eg["constant"]
    except BoundError as exc:
        eps_err = str(exc)
        eg_coeff, eg_const = math.nan, math.nan
    terms = ucb_lp_terms(env, z)
    c1b, c2 = ucb_lp_constants(env)
    clique = ucb_n_clique_bound(env)
    return BoundReport(c_mu=c_mu, eps_greedy_log_coeff=eg_coeff, eps_greedy_constant=eg_const,
                       ucb_lp_bound_at_T=ucb_lp_bound(env, z, horizon, terms), ucb_lp_const_1b=c1b,
                       ucb_lp_const_2=c2, ucb_n_clique_bound_coeff=clique["value"], horizon=horizon,
                       m_rounds=terms["m_rounds"], m_bar=terms["m_bar"], pivot_set=terms["pivot"],
                       delta_hat=terms["delta_hat"], eps_greedy_error=eps_err)

"""Independent checks on a solved policy.

``simulate_payoff`` runs the controlled regime-switching diffusion forward
under the extracted policy; ``oracle_barrier_value`` and
``oracle_optimal_barrier`` give the classical closed form for one regime with
constant drift and volatility.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .chain import Grid, KernelTable
from .errors import MissingPolicy, OracleUndefined
from .model import ModelSpec
from .solver import Solution, extract_barrier


@dataclass(frozen=True)
class SimConfig:
    dt_sim: float = 1e-3
    t_max: float = 400.0
    n_paths: int = 100_000
    seed: int = 20240601
    x0: float = 30.0
    regime0: int = 0

    def violations(self, grid: Grid, r: float) -> list[str]:
        out = []
        if not self.dt_sim > 0:
            out.append("dt_sim must be > 0")
        elif self.dt_sim > grid.h**2 * (1 + 1e-12):
            out.append(f"dt_sim={self.dt_sim:g} exceeds h^2={grid.h**2:g}")
        if not self.t_max * r >= 20 * (1 - 1e-12):
            out.append(f"t_max * r = {self.t_max * r:g} < 20; discounted tail not negligible")
        if self.n_paths < 1:
            out.append("n_paths must be >= 1")
        if self.x0 < 0:
            out.append("x0 must be >= 0")
        return out


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_paths: int
    ruin_fraction: float
    seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def simulate_payoff(model: ModelSpec, grid: Grid, solution: Solution, cfg: SimConfig) -> McEstimate:
    """Monte Carlo estimate of the discounted dividend payoff of ``solution``'s policy.

    Each path draws from its own SFC64 stream seeded by ``(seed, path index)``,
    so results do not depend on scheduling.  Regime switches use exact
    exponential clocks, with the Euler step split at the switch time.  Between
    switches the surplus follows Euler steps with the retention of the nearest
    grid state.

    Dividends reflect the surplus at the top of the regime's continuation
    region, ``L = barrier - h``: that is where the chain's singular steps
    starting from the paying region come to rest (``L = B`` for a regime that
    never pays before the cap).  Whenever ``X > L`` the excess is paid at once
    and the discounted weight ``int_L^X c`` is collected.  A path ends at
    ruin (``X <= 0``) or at ``t_max``.
    """
    if solution is None or getattr(solution, "action", None) is None:
        raise MissingPolicy("simulate_payoff needs a solved policy")
    if solution.action.shape != (model.m, grid.n_states):
        raise MissingPolicy("solution does not match the model/grid")
    bad = cfg.violations(grid, model.r)
    if bad:
        raise ValueError("; ".join(bad))
    if not 0 <= cfg.regime0 < model.m:
        raise ValueError(f"regime0 {cfg.regime0} outside 0..{model.m - 1}")

    table = KernelTable(model, grid)
    barrier = extract_barrier(solution, grid).barrier
    level = np.array([grid.B if b is None else (grid.index(b) - 1) * grid.h for b in barrier], dtype=float)
    n_steps = int(round(cfg.t_max / cfg.dt_sim))
    pay = model.payoff
    c_kind = 0 if pay.c_kind == "constant" else 1
    f_tab = None
    if pay.f is not None:
        f_tab = np.ascontiguousarray(table.fdt / table.dt[:, :, None])

    payoff, ruined = kernels.simulate_paths(
        int(cfg.seed),
        int(cfg.n_paths),
        float(cfg.x0),
        int(cfg.regime0),
        float(cfg.dt_sim),
        n_steps,
        float(model.r),
        float(grid.h),
        np.ascontiguousarray(model.regimes.q),
        np.ascontiguousarray(table.b),
        np.ascontiguousarray(table.sigma),
        np.ascontiguousarray(solution.u_index, dtype=np.int32),
        level,
        c_kind,
        float(pay.c_value),
        float(pay.lam),
        f_tab,
    )
    n = len(payoff)
    se = float(np.std(payoff, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McEstimate(
        mean=float(np.mean(payoff)),
        stderr=se,
        n_paths=n,
        ruin_fraction=float(np.mean(ruined)),
        seed=int(cfg.seed),
    )


def _roots(mu, sigma, r):
    if not sigma > 0:
        raise OracleUndefined("closed form needs sigma > 0")
    if not r > 0:
        raise OracleUndefined("closed form needs r > 0")
    s2 = sigma * sigma
    disc = math.sqrt(mu * mu + 2.0 * s2 * r)
    return (-mu + disc) / s2, (-mu - disc) / s2


def oracle_optimal_barrier(mu: float, sigma: float, r: float) -> float:
    """Barrier maximising the value of Brownian motion with drift ``mu`` reflected downward."""
    tp, tm = _roots(mu, sigma, r)
    return math.log(tm * tm / (tp * tp)) / (tp - tm)


def oracle_barrier_value(mu: float, sigma: float, r: float, x: float, b: float) -> float:
    """Discounted dividends of the barrier-``b`` strategy started at ``x``.

    ``g(x) / g'(b)`` below the barrier, ``g(b) / g'(b) + (x - b)`` above, with
    ``g(x) = exp(t+ x) - exp(t- x)`` and ``t+-`` the roots of
    ``sigma^2/2 t^2 + mu t - r = 0``.
    """
    if x < 0:
        raise ValueError("x must be >= 0")
    tp, tm = _roots(mu, sigma, r)
    gp = tp * math.exp(tp * b) - tm * math.exp(tm * b)
    if x <= b:
        return (math.exp(tp * x) - math.exp(tm * x)) / gp
    return (math.exp(tp * b) - math.exp(tm * b)) / gp + (x - b)

"""Locally consistent Markov chain on the surplus lattice.

States are ``x_k = k h`` for ``k = 0 .. N + 1`` with ``N h = B``: ``k = 0`` is
ruin (absorbing), ``1 .. N`` are interior, and ``N + 1`` is the reflecting cap
from which a forced dividend of ``h`` brings the chain back to ``B``.

A regular step in regime ``l`` under retention ``u`` moves up, down or switches
regime with probabilities built from the upwind finite-difference scheme::

    D      = sigma^2 + h|b| + h^2 (r - q_ll)
    p_up   = (sigma^2/2 + h b+) / (D - r h^2)
    p_down = (sigma^2/2 + h b-) / (D - r h^2)
    p_i    = h^2 q_li / (D - r h^2)          (i != l)
    dt     = h^2 / D

Singular and reflection steps move down by ``h`` with probability one and take
no time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadRegime,
    BadState,
    CannotPayAtRuin,
    DegenerateKernel,
    NotAtReflectingBoundary,
)
from .model import ModelSpec, dividend_weight

DISCOUNT_MODES = ("implicit", "exponential")


@dataclass(frozen=True)
class Grid:
    h: float
    B: float

    def __post_init__(self):
        if not (self.h > 0 and self.B > 0):
            raise BadState(f"grid needs h > 0 and B > 0, got h={self.h!r}, B={self.B!r}")
        n = round(self.B / self.h)
        if n < 1 or abs(n * self.h - self.B) > 1e-9 * max(self.B, 1.0):
            raise BadState(f"B={self.B!r} is not an integer multiple of h={self.h!r}")

    @property
    def N(self) -> int:
        """Index of the cap ``B``; the reflecting state is ``N + 1``."""
        return round(self.B / self.h)

    @property
    def n_states(self) -> int:
        return self.N + 2

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_states) * self.h

    def index(self, x: float, snap: bool = False) -> int:
        k = round(x / self.h)
        if not snap and abs(k * self.h - x) > 1e-9 * max(self.h, abs(x)):
            raise BadState(f"{x!r} is not a grid point (h={self.h!r})")
        if not 0 <= k <= self.N + 1:
            raise BadState(f"{x!r} is outside the grid [0, {self.B + self.h!r}]")
        return k


@dataclass(frozen=True)
class TransitionKernel:
    p_up: float
    p_down: float
    p_switch: tuple
    dt: float
    D: float

    @property
    def total(self) -> float:
        return self.p_up + self.p_down + math.fsum(self.p_switch)


def kernel_from_coefficients(b, sigma2, h, r, q_row, regime) -> TransitionKernel:
    """Regular-step kernel for explicit drift ``b`` and variance ``sigma2``."""
    q_ll = q_row[regime]
    D = sigma2 + h * abs(b) + h * h * (r - q_ll)
    denom = D - r * h * h
    if not denom > 0:
        raise DegenerateKernel(
            f"no motion and no switching (sigma^2={sigma2!r}, b={b!r}, q_ll={q_ll!r})"
        )
    p_up = (0.5 * sigma2 + h * max(b, 0.0)) / denom
    p_down = (0.5 * sigma2 + h * max(-b, 0.0)) / denom
    p_sw = tuple(0.0 if i == regime else h * h * q / denom for i, q in enumerate(q_row))
    return TransitionKernel(p_up, p_down, p_sw, h * h / D, D)


def _check_interior(grid: Grid, x: float) -> int:
    k = grid.index(x)
    if not 1 <= k <= grid.N:
        raise BadState(f"{x!r} is not an interior state (h..B)")
    return k


def _check_regime(model: ModelSpec, regime: int):
    if not 0 <= regime < model.m:
        raise BadRegime(f"regime {regime!r} outside 0..{model.m - 1}")


def regular_kernel(model: ModelSpec, grid: Grid, x: float, regime: int, u: float) -> TransitionKernel:
    _check_interior(grid, x)
    _check_regime(model, regime)
    b, s = model.drift_vol(regime, u)
    return kernel_from_coefficients(b, s * s, grid.h, model.r, model.regimes.Q[regime], regime)


def singular_step(grid: Grid, x: float, regime: int = 0) -> tuple[float, float]:
    """Pay one lattice unit of dividend: ``x -> x - h``.  Returns ``(next_x, dividend)``."""
    k = grid.index(x)
    if k == 0:
        raise CannotPayAtRuin("no dividend can be paid from the ruin state")
    if k == grid.N + 1:
        return reflect(grid, x, regime)
    return (k - 1) * grid.h, grid.h


def reflect(grid: Grid, x: float, regime: int = 0) -> tuple[float, float]:
    """Forced payout at the cap: ``B + h -> B``.  Returns ``(B, h)``."""
    top = (grid.N + 1) * grid.h
    if abs(x - top) > 1e-9 * top:
        raise NotAtReflectingBoundary(f"reflection only happens at B+h={top!r}, not {x!r}")
    return grid.N * grid.h, grid.h


def step_moments(kernel: TransitionKernel, h: float) -> tuple[float, float]:
    """Conditional mean and variance of the surplus increment of one regular step."""
    mean = h * (kernel.p_up - kernel.p_down)
    second = h * h * (kernel.p_up + kernel.p_down)
    return mean, second - mean * mean


def check_local_consistency(model: ModelSpec, grid: Grid, x: float, regime: int, u: float):
    """Absolute errors ``(|E dxi - b dt|, |Var dxi - sigma^2 dt|)`` of one regular step."""
    kern = regular_kernel(model, grid, x, regime, u)
    b, s = model.drift_vol(regime, u)
    mean, var = step_moments(kern, grid.h)
    return abs(mean - b * kern.dt), abs(var - s * s * kern.dt)


def consistency_bound(b: float, sigma2: float, h: float, dt: float) -> float:
    return (b * b + sigma2 + 1.0) * h * dt


class KernelTable:
    """Every regular-step kernel of a model on a grid, as arrays indexed ``[regime, u]``.

    Coefficients do not depend on the surplus level, so one table serves all
    interior states.  Also tabulates ``c(x_k, l) h`` (``c_h``, shape
    ``(m, n_states)``) and ``f(x_k, l, u) dt`` (``fdt``, shape
    ``(m, n_u, n_states)``).

    ``discount="implicit"`` uses the one-step factor ``1 - r dt`` which makes
    the fixed point satisfy the finite-difference QVI exactly;
    ``"exponential"`` uses ``exp(-r dt)``.  The two differ by ``O(dt^2)``.
    """

    def __init__(self, model: ModelSpec, grid: Grid, discount: str = "implicit"):
        if discount not in DISCOUNT_MODES:
            raise ValueError(f"discount must be one of {DISCOUNT_MODES}")
        self.model, self.grid, self.discount = model, grid, discount
        m, h, r = model.m, grid.h, model.r
        self.u = model.control.mesh()
        n_u = len(self.u)
        q = model.regimes.q

        self.b = np.empty((m, n_u))
        self.sigma = np.empty((m, n_u))
        for ell in range(m):
            for j, u in enumerate(self.u):
                self.b[ell, j], self.sigma[ell, j] = model.drift_vol(ell, float(u))

        s2 = self.sigma**2
        D = s2 + h * np.abs(self.b) + h * h * (r - np.diag(q))[:, None]
        denom = D - r * h * h
        if np.any(denom <= 0):
            ell, j = np.argwhere(denom <= 0)[0]
            raise DegenerateKernel(
                f"no motion and no switching in regime {ell} at u={self.u[j]:g}"
            )
        self.D = D
        self.p_up = (0.5 * s2 + h * np.maximum(self.b, 0.0)) / denom
        self.p_down = (0.5 * s2 + h * np.maximum(-self.b, 0.0)) / denom
        off = q * (1.0 - np.eye(m))
        self.p_sw = np.ascontiguousarray(h * h * off[:, None, :] / denom[:, :, None])
        self.dt = h * h / D
        if discount == "implicit":
            self.disc = denom / D
        else:
            self.disc = np.exp(-r * self.dt)

        xs = grid.x
        self.c_h = np.empty((m, grid.n_states))
        for ell in range(m):
            self.c_h[ell] = np.asarray(dividend_weight(model.payoff, xs, ell)) * h
        self.fdt = np.zeros((m, n_u, grid.n_states))
        f = model.payoff.f
        if f is not None:
            for ell in range(m):
                for j, u in enumerate(self.u):
                    self.fdt[ell, j] = np.asarray(f(xs, ell, float(u)), dtype=float) * self.dt[ell, j]
        self.f_is_zero = f is None

    @property
    def arrays(self):
        """Positional arguments shared by the compiled kernels."""
        return (self.p_up, self.p_down, self.p_sw, self.disc, self.fdt, self.c_h)

    def kernel(self, regime: int, j: int) -> TransitionKernel:
        return TransitionKernel(
            float(self.p_up[regime, j]),
            float(self.p_down[regime, j]),
            tuple(float(v) for v in self.p_sw[regime, j]),
            float(self.dt[regime, j]),
            float(self.D[regime, j]),
        )

"""Dynamic programming for the approximating chain.

At every interior state the value is the larger of

* the regular branch: best retention ``u`` on the control mesh of the
  discounted expectation ``disc(u) * E[V(next)] + f dt``, and
* the singular branch: ``V(x - h) + c(x) h`` (pay one lattice unit now).

``V(0) = 0`` is pinned and the cap state pays out by reflection,
``V(B + h) = V(B) + c(B + h) h``.  Exact ties go to the singular branch and,
within the regular branch, to the smallest retention.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .chain import Grid, KernelTable
from .model import ModelSpec

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 200_000
RATIO_WINDOW = 10

ACTION_NAMES = {kernels.SINGULAR: "singular", kernels.REGULAR: "regular", kernels.REFLECT: "reflect"}


@dataclass
class Solution:
    """Converged (or best available) value function and policy.

    Arrays are indexed ``[regime, k]`` with ``x_k = k h``.  ``u_index`` is
    the best regular control at every interior state (also where the
    singular branch wins, which the simulator needs at the barrier);
    ``u_star`` is that retention where the regular branch is chosen and NaN
    elsewhere.
    """

    V: np.ndarray
    action: np.ndarray
    u_index: np.ndarray
    u_mesh: np.ndarray
    grid: Grid
    method: str
    iterations: int
    final_delta: float
    converged: bool
    residual: float = math.nan
    delta_history: list = field(default_factory=list, repr=False)
    min_increment: float = math.nan

    @property
    def u_star(self) -> np.ndarray:
        u = self.u_mesh[np.clip(self.u_index, 0, None)]
        return np.where(self.action == kernels.REGULAR, u, np.nan)

    @property
    def barrier(self) -> list:
        return extract_barrier(self, self.grid).barrier

    def value_at(self, x: float, regime: int) -> float:
        return float(self.V[regime, self.grid.index(x, snap=True)])


@dataclass
class BarrierReport:
    barrier: list
    upper_interval: list


def bellman_value(model: ModelSpec, grid: Grid, V, x: float, regime: int, table: Optional[KernelTable] = None):
    """Dynamic programming update at one interior state.

    Returns ``(value, action, u_star)`` with ``action`` in
    ``{"regular", "singular"}`` and ``u_star`` the maximising retention (None
    when the singular branch wins).
    """
    table = table or KernelTable(model, grid)
    V = np.asarray(V, dtype=float)
    k = grid.index(x)
    if not 1 <= k <= grid.N:
        raise ValueError(f"{x!r} is not an interior state")
    m = model.m
    best, arg = -math.inf, -1
    for j in range(len(table.u)):
        s = table.p_up[regime, j] * V[regime, k + 1] + table.p_down[regime, j] * V[regime, k - 1]
        for i in range(m):
            if i != regime:
                s += table.p_sw[regime, j, i] * V[i, k]
        v = table.disc[regime, j] * s + table.fdt[regime, j, k]
        if v > best:
            best, arg = v, j
    sing = V[regime, k - 1] + table.c_h[regime, k]
    if sing >= best:
        return float(sing), "singular", None
    return float(best), "regular", float(table.u[arg])


def _finish(model, grid, table, V, method, iterations, converged, history, min_inc):
    val, act, uidx = kernels.bellman_all(V, *table.arrays)
    sol = Solution(
        V=V,
        action=act,
        u_index=uidx,
        u_mesh=table.u,
        grid=grid,
        method=method,
        iterations=iterations,
        final_delta=float(np.max(np.abs(val[:, 1:] - V[:, 1:]))),
        converged=converged,
        delta_history=history,
        min_increment=min_inc,
    )
    sol.residual = qvi_residual(model, grid, sol, table=table)
    return sol


def solve_value_iteration(
    model: ModelSpec,
    grid: Grid,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    discount: str = "implicit",
    table: Optional[KernelTable] = None,
) -> Solution:
    """Gauss-Seidel value iteration from ``V = 0``.

    Stops once the sweep change is at most ``tol`` *and* the geometric
    error bound ``delta * rho / (1 - rho)`` is at most ``tol``, where ``rho``
    is the largest ratio of successive sweep changes over the last
    ``RATIO_WINDOW`` sweeps.  A zero change stops immediately.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    table = table or KernelTable(model, grid, discount)
    V = np.zeros((model.m, grid.n_states))
    arrays = table.arrays
    history = []
    min_inc = math.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        delta, inc = kernels.gs_sweep(V, *arrays)
        history.append(delta)
        min_inc = min(min_inc, inc)
        if delta == 0.0:
            converged = True
            break
        if delta <= tol and len(history) >= 2:
            recent = history[-(RATIO_WINDOW + 1):]
            rho = max(b / a if a > 0 else 0.0 for a, b in zip(recent, recent[1:]))
            if rho < 1.0 and delta * rho / (1.0 - rho) <= tol:
                converged = True
                break
    if not converged:
        log.warning("value iteration stopped after %d sweeps, delta=%.3g", it, history[-1])
    return _finish(model, grid, table, V, "value", it, converged, history, min_inc)


def _policy_matrix(table: KernelTable, act, uidx):
    """Linear system ``A V = rhs`` whose solution is the value of a fixed policy.

    Unknowns are ordered ``k * m + regime``.
    """
    m, n = act.shape
    N = n - 2
    idx = np.arange(m * n).reshape(n, m).T  # idx[regime, k]
    rows, cols, data = [], [], []
    rhs = np.zeros(m * n)

    def add(r, c, d):
        rows.append(np.ravel(r))
        cols.append(np.ravel(c))
        data.append(np.broadcast_to(d, np.shape(r)).ravel())

    add(idx[:, 0], idx[:, 0], 1.0)
    add(idx[:, N + 1], idx[:, N + 1], 1.0)
    add(idx[:, N + 1], idx[:, N], -1.0)
    rhs[idx[:, N + 1]] = table.c_h[:, N + 1]

    ell, k = np.nonzero(act[:, 1 : N + 1] == kernels.SINGULAR)
    k = k + 1
    add(idx[ell, k], idx[ell, k], 1.0)
    add(idx[ell, k], idx[ell, k - 1], -1.0)
    rhs[idx[ell, k]] = table.c_h[ell, k]

    ell, k = np.nonzero(act[:, 1 : N + 1] == kernels.REGULAR)
    k = k + 1
    j = uidx[ell, k]
    d = table.disc[ell, j]
    row = idx[ell, k]
    add(row, row, 1.0)
    add(row, idx[ell, k + 1], -d * table.p_up[ell, j])
    add(row, idx[ell, k - 1], -d * table.p_down[ell, j])
    for i in range(m):
        sel = ell != i
        add(row[sel], idx[i, k[sel]], -d[sel] * table.p_sw[ell[sel], j[sel], i])
    rhs[row] = table.fdt[ell, j, k]

    A = sp.csc_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(m * n, m * n)
    )
    return A, rhs, idx


def evaluate_policy(table: KernelTable, act, uidx) -> np.ndarray:
    """Value of following ``(act, uidx)`` forever, by sparse LU."""
    A, rhs, idx = _policy_matrix(table, act, uidx)
    sol = spla.spsolve(A, rhs)
    return np.ascontiguousarray(sol[idx])


def solve_policy_iteration(
    model: ModelSpec,
    grid: Grid,
    tol: float = DEFAULT_TOL,
    max_iter: int = 10_000,
    discount: str = "implicit",
    table: Optional[KernelTable] = None,
) -> Solution:
    """Howard policy iteration with exact (sparse direct) policy evaluation.

    The starting policy is the greedy one for ``V = 0``.  A state switches
    its decision only when the new choice beats the current one by more than
    the rounding noise of the evaluation, ``64 eps (1 + max|V|)``; iteration
    ends when no state switches.  Evaluation is exact, so ``tol`` only bounds
    the reported Bellman residual check.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    table = table or KernelTable(model, grid, discount)
    V = np.zeros((model.m, grid.n_states))
    _, act, uidx = kernels.bellman_all(V, *table.arrays)
    history = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        V = evaluate_policy(table, act, uidx)
        val, new_act, new_uidx = kernels.bellman_all(V, *table.arrays)
        gain = val - V
        history.append(float(np.max(np.abs(gain[:, 1:]))))
        noise = 64.0 * np.finfo(float).eps * (1.0 + float(np.max(np.abs(V))))
        better = gain > noise
        better[:, 0] = False
        if not better.any():
            converged = True
            break
        act = np.where(better, new_act, act)
        uidx = np.where(better, new_uidx, uidx).astype(np.int32)
    if converged and history[-1] > tol:
        converged = False
    if not converged:
        log.warning("policy iteration stopped after %d improvements", it)
    return _finish(model, grid, table, V, "policy", it, converged, history, math.nan)


def solve(model: ModelSpec, grid: Grid, method: str = "policy", **kw) -> Solution:
    if method == "policy":
        return solve_policy_iteration(model, grid, **kw)
    if method == "value":
        return solve_value_iteration(model, grid, **kw)
    raise ValueError(f"unknown solver method {method!r}")


def extract_barrier(solution: Solution, grid: Grid) -> BarrierReport:
    """Per-regime dividend barrier: the lowest interior state where paying wins."""
    N = grid.N
    barrier, upper = [], []
    for ell in range(solution.action.shape[0]):
        sing = solution.action[ell, 1 : N + 1] == kernels.SINGULAR
        hits = np.flatnonzero(sing)
        if len(hits) == 0:
            barrier.append(None)
            upper.append(False)
        else:
            k0 = hits[0]
            barrier.append(float((k0 + 1) * grid.h))
            upper.append(bool(np.all(sing[k0:])))
    return BarrierReport(barrier, upper)


def qvi_residual(model: ModelSpec, grid: Grid, solution, table: Optional[KernelTable] = None) -> float:
    """Largest violation of the discrete QVI at interior states.

    At each state both the generator term (maximised over the control mesh)
    and the gradient constraint ``c - (V(x) - V(x-h)) / h`` must be <= 0 with
    at least one equal to 0; the pointwise violation is ``|max(first, second)|``.
    """
    table = table or KernelTable(model, grid)
    V = solution.V if isinstance(solution, Solution) else np.asarray(solution, dtype=float)
    h, r, N, m = grid.h, model.r, grid.N, model.m
    q = model.regimes.q
    Vc = V[:, 1 : N + 1]
    fwd = (V[:, 2 : N + 2] - Vc) / h
    bwd = (Vc - V[:, 0:N]) / h
    d2 = (V[:, 2 : N + 2] - 2.0 * Vc + V[:, 0:N]) / (h * h)
    switch = np.zeros_like(Vc)
    for ell in range(m):
        for i in range(m):
            if i != ell:
                switch[ell] += q[ell, i] * (Vc[i] - Vc[ell])
    first = np.full_like(Vc, -np.inf)
    for j in range(len(table.u)):
        b = table.b[:, j : j + 1]
        s2 = table.sigma[:, j : j + 1] ** 2
        f = table.fdt[:, j, 1 : N + 1] / table.dt[:, j : j + 1]
        gen = fwd * np.maximum(b, 0) - bwd * np.maximum(-b, 0) + 0.5 * s2 * d2 + switch - r * Vc + f
        first = np.maximum(first, gen)
    second = table.c_h[:, 1 : N + 1] / h - bwd
    return float(np.max(np.abs(np.maximum(first, second))))

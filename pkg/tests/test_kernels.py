"""Compiled and pure-Python backends must agree bit for bit."""

from dataclasses import replace

import numpy as np
import pytest

from divmca import _fallback
from divmca.chain import Grid, KernelTable
from divmca.model import example_model, tabulated_reward
from divmca.solver import solve

_kernels = pytest.importorskip("divmca._kernels")


def _cases():
    f = tabulated_reward([0.0, 1.0], [[0.0, 0.3], [0.1, 0.2]])
    yield example_model("prop-exp", n_u=11)
    yield example_model("xol-exp", "marginal", n_u=11)
    m = example_model("prop-unif", n_u=11)
    yield replace(m, payoff=replace(m.payoff, f=f))


@pytest.mark.parametrize("model", list(_cases()))
def test_sweep_and_bellman_identical(model):
    g = Grid(0.25, 20.0)
    t = KernelTable(model, g)
    V1 = np.zeros((2, g.n_states))
    V2 = V1.copy()
    for _ in range(30):
        assert _kernels.gs_sweep(V1, *t.arrays) == _fallback.gs_sweep(V2, *t.arrays)
    assert np.array_equal(V1, V2)
    for a, b in zip(_kernels.bellman_all(V1, *t.arrays), _fallback.bellman_all(V1, *t.arrays)):
        assert np.array_equal(a, b)


@pytest.mark.parametrize("model", list(_cases()))
def test_paths_identical(model):
    g = Grid(0.25, 20.0)
    t = KernelTable(model, g)
    s = solve(model, g)
    lev = np.array([g.B if b is None else b - g.h for b in s.barrier])
    f_tab = None if model.payoff.f is None else np.ascontiguousarray(t.fdt / t.dt[:, :, None])
    args = (5, 16, 1.0, 1, 1e-3, 3000, 0.05, g.h, model.regimes.q, t.b, t.sigma, s.u_index, lev,
            0 if model.payoff.c_kind == "constant" else 1, model.payoff.c_value, model.payoff.lam, f_tab)
    p1, r1 = _kernels.simulate_paths(*args)
    p2, r2 = _fallback.simulate_paths(*args)
    assert np.array_equal(p1, p2)
    assert np.array_equal(r1, r2)

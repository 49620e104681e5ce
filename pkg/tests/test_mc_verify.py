import math
from dataclasses import replace

import numpy as np
import pytest

from divmca.chain import Grid
from divmca.errors import MissingPolicy, OracleUndefined
from divmca.mc_verify import (
    SimConfig,
    _roots,
    oracle_barrier_value,
    oracle_optimal_barrier,
    simulate_payoff,
)
from divmca.model import example_model, pure_singular_model, single_regime_model
from divmca.solver import solve

S2 = math.sqrt(2.0)


def test_oracle_roots_and_barrier():
    tp, tm = _roots(1.0, S2, 0.05)
    assert tp == pytest.approx(0.0477226, abs=1e-7)
    assert tm == pytest.approx(-1.0477226, abs=1e-7)
    b = oracle_optimal_barrier(1.0, S2, 0.05)
    assert b == pytest.approx(5.6399, abs=5e-4)
    assert b == pytest.approx(5.639661654, abs=1e-9)


def test_oracle_value_shape():
    b = oracle_optimal_barrier(1.0, S2, 0.05)
    assert oracle_barrier_value(1.0, S2, 0.05, 0.0, b) == 0.0
    v1 = oracle_barrier_value(1.0, S2, 0.05, b + 1.0, b)
    v2 = oracle_barrier_value(1.0, S2, 0.05, b + 3.5, b)
    assert v2 - v1 == pytest.approx(2.5, rel=1e-12)
    # smooth fit: slope 1 at the optimal barrier from below
    eps = 1e-6
    slope = (oracle_barrier_value(1.0, S2, 0.05, b, b) - oracle_barrier_value(1.0, S2, 0.05, b - eps, b)) / eps
    assert slope == pytest.approx(1.0, abs=1e-5)
    # any other barrier does worse
    for other in (b - 1.0, b + 1.0):
        assert oracle_barrier_value(1.0, S2, 0.05, 3.0, other) < oracle_barrier_value(1.0, S2, 0.05, 3.0, b)


def test_oracle_barrier_limits():
    bs = [oracle_optimal_barrier(1.0, S2, r) for r in (0.05, 0.5, 5.0)]
    assert bs[0] > bs[1] > bs[2] > 0
    for kappa in (0.5, 3.0):
        scaled = oracle_optimal_barrier(kappa, math.sqrt(2.0 * kappa), 0.05 * kappa)
        assert scaled == pytest.approx(bs[0], rel=1e-12)


def test_oracle_errors():
    with pytest.raises(OracleUndefined):
        oracle_optimal_barrier(1.0, 0.0, 0.05)
    with pytest.raises(OracleUndefined):
        oracle_barrier_value(1.0, 1.0, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        oracle_barrier_value(1.0, 1.0, 0.05, -1.0, 1.0)


def test_pure_singular_pays_everything_at_once():
    m = pure_singular_model()
    g = Grid(0.1, 20.0)
    est = simulate_payoff(m, g, solve(m, g), SimConfig(n_paths=50, x0=10.0))
    assert est.mean == 10.0 and est.stderr == 0.0
    assert est.ruin_fraction == 1.0


def test_zero_weight_pays_nothing():
    m = example_model("prop-exp", n_u=11)
    m = replace(m, payoff=replace(m.payoff, c_value=0.0))
    g = Grid(0.25, 20.0)
    est = simulate_payoff(m, g, solve(m, g), SimConfig(n_paths=50, x0=3.0))
    assert est.mean == 0.0 and est.stderr == 0.0


def test_single_regime_matches_oracle():
    m = single_regime_model()
    g = Grid(0.05, 30.0)
    sol = solve(m, g)
    est = simulate_payoff(m, g, sol, SimConfig(n_paths=4000, x0=3.0, seed=11))
    b = oracle_optimal_barrier(1.0, S2, 0.05)
    want = oracle_barrier_value(1.0, S2, 0.05, 3.0, b)
    assert abs(est.mean - want) <= 3 * est.stderr + 5 * g.h
    assert abs(sol.value_at(3.0, 0) - want) <= 5 * g.h
    assert 0 < est.ruin_fraction < 1


def test_reproducible_and_seed_dependent(prop_exp_solution, prop_exp):
    g, sol = prop_exp_solution
    cfg = SimConfig(n_paths=40, x0=5.0, regime0=1, seed=3)
    a = simulate_payoff(prop_exp, g, sol, cfg)
    b = simulate_payoff(prop_exp, g, sol, cfg)
    assert a == b
    c = simulate_payoff(prop_exp, g, sol, replace(cfg, seed=4))
    assert c.mean != a.mean
    assert a.n_paths == 40 and a.stderr > 0


def test_sim_config_checks(prop_exp_solution, prop_exp):
    g, sol = prop_exp_solution
    with pytest.raises(ValueError, match="exceeds h"):
        simulate_payoff(prop_exp, g, sol, SimConfig(dt_sim=0.02))
    with pytest.raises(ValueError, match="t_max"):
        simulate_payoff(prop_exp, g, sol, SimConfig(t_max=100.0))
    with pytest.raises(ValueError, match="regime0"):
        simulate_payoff(prop_exp, g, sol, SimConfig(n_paths=2, regime0=2))
    with pytest.raises(MissingPolicy):
        simulate_payoff(prop_exp, g, None, SimConfig(n_paths=2))
    with pytest.raises(MissingPolicy):
        simulate_payoff(prop_exp, Grid(0.2, 100.0), sol, SimConfig(n_paths=2))


def test_marginal_weight_integrates_over_lump():
    # pure-singular with exp(-x) weight: paying x0 in one lump yields 1 - exp(-x0)
    m = pure_singular_model()
    m = replace(m, payoff=replace(m.payoff, c_kind="exp_marginal", lam=1.0))
    g = Grid(0.1, 20.0)
    est = simulate_payoff(m, g, solve(m, g), SimConfig(n_paths=5, x0=4.0))
    assert est.mean == pytest.approx(1.0 - math.exp(-4.0), rel=1e-15)
    assert np.isfinite(est.stderr)

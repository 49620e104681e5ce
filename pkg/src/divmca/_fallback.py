"""Pure-Python kernels, used when the compiled extension is unavailable.

Arithmetic is performed in exactly the same order as in ``_kernels.pyx`` so
both backends produce bit-identical results.
"""

import math

import numpy as np

SINGULAR = 0
REGULAR = 1
REFLECT = 2


def gs_sweep(V, p_up, p_down, p_sw, disc, fdt, c_h):
    """One in-place Gauss-Seidel sweep of the dynamic programming operator.

    States are visited in ascending surplus, regimes innermost.  Returns the
    sup-norm change and the smallest per-state increment of the sweep.
    """
    m, n = V.shape
    n_u = p_up.shape[1]
    N = n - 2
    pu, pd, ps = p_up.tolist(), p_down.tolist(), p_sw.tolist()
    dc, fd, ch = disc.tolist(), fdt.tolist(), c_h.tolist()
    W = V.tolist()
    delta = 0.0
    min_inc = math.inf
    for k in range(1, N + 1):
        for ell in range(m):
            Wl = W[ell]
            up, down = Wl[k + 1], Wl[k - 1]
            best = -math.inf
            for j in range(n_u):
                s = pu[ell][j] * up + pd[ell][j] * down
                psj = ps[ell][j]
                for i in range(m):
                    if i != ell:
                        s += psj[i] * W[i][k]
                val = dc[ell][j] * s + fd[ell][j][k]
                if val > best:
                    best = val
            sing = down + ch[ell][k]
            new = sing if sing >= best else best
            inc = new - Wl[k]
            if inc < min_inc:
                min_inc = inc
            if abs(inc) > delta:
                delta = abs(inc)
            Wl[k] = new
    for ell in range(m):
        new = W[ell][N] + ch[ell][N + 1]
        inc = new - W[ell][N + 1]
        if inc < min_inc:
            min_inc = inc
        if abs(inc) > delta:
            delta = abs(inc)
        W[ell][N + 1] = new
    V[:, :] = W
    return delta, min_inc


def bellman_all(V, p_up, p_down, p_sw, disc, fdt, c_h):
    """Apply the dynamic programming operator at every state without updating ``V``.

    Returns ``(value, action, u_index)``.  ``u_index`` is the best regular
    control even where the singular branch wins.
    """
    m, n = V.shape
    n_u = p_up.shape[1]
    N = n - 2
    val = np.zeros((m, n))
    act = np.full((m, n), -1, dtype=np.int8)
    uidx = np.full((m, n), -1, dtype=np.int32)
    for k in range(1, N + 1):
        for ell in range(m):
            up, down = V[ell, k + 1], V[ell, k - 1]
            best, arg = -math.inf, -1
            for j in range(n_u):
                s = p_up[ell, j] * up + p_down[ell, j] * down
                for i in range(m):
                    if i != ell:
                        s += p_sw[ell, j, i] * V[i, k]
                v = disc[ell, j] * s + fdt[ell, j, k]
                if v > best:
                    best, arg = v, j
            sing = down + c_h[ell, k]
            uidx[ell, k] = arg
            if sing >= best:
                val[ell, k], act[ell, k] = sing, SINGULAR
            else:
                val[ell, k], act[ell, k] = best, REGULAR
    for ell in range(m):
        val[ell, N + 1] = V[ell, N] + c_h[ell, N + 1]
        act[ell, N + 1] = REFLECT
        uidx[ell, N + 1] = uidx[ell, N]
    return val, act, uidx


def _nearest(x, inv_h, top):
    if x * inv_h >= top:
        return top
    return int(x * inv_h + 0.5)


def _weight(x, lev, c_kind, c_value, lam):
    if c_kind == 0:
        return c_value * (x - lev)
    return math.exp(-lam * lev) - math.exp(-lam * x)


def simulate_paths(seed, n_paths, x0, l0, dt, n_steps, r, h, q, b_tab, sig_tab,
                   uidx, level, c_kind, c_value, lam, f_tab):
    """Simulate ``n_paths`` controlled surplus paths; see ``mc_verify.simulate_payoff``.

    Returns per-path discounted payoffs and ruin flags.
    """
    m, n = uidx.shape
    N = n - 2
    inv_h = 1.0 / h
    sqrt_dt = math.sqrt(dt)
    disc_tab = [math.exp(-r * (i * dt)) for i in range(n_steps + 1)]
    step_b, step_s = _policy_steps(b_tab, sig_tab, uidx, dt, sqrt_dt)
    step_b, step_s = step_b.tolist(), step_s.tolist()
    q = q.tolist()
    b_tab, sig_tab = b_tab.tolist(), sig_tab.tolist()
    uidx, level = uidx.tolist(), level.tolist()
    f_tab = None if f_tab is None else f_tab.tolist()
    payoff = np.zeros(n_paths)
    ruined = np.zeros(n_paths, dtype=bool)

    def pay(x, ell, disc, total):
        lev = level[ell]
        if x > lev:
            total += disc * _weight(x, lev, c_kind, c_value, lam)
            x = lev
        return x, total

    def interior(x):
        k = _nearest(x, inv_h, N + 1)
        return 1 if k < 1 else (N if k > N else k)

    for p in range(n_paths):
        gen = np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(p,))))
        x, ell, total = x0, l0, 0.0
        x, total = pay(x, ell, 1.0, total)
        rate = -q[ell][ell]
        t_sw = gen.standard_exponential() / rate if rate > 0 else math.inf
        dead = False
        k = interior(x)
        for step in range(n_steps):
            t_end = (step + 1) * dt
            if not t_sw < t_end:
                if f_tab is not None:
                    total += disc_tab[step] * f_tab[ell][uidx[ell][k]][k] * dt
                z = gen.standard_normal()
                x = x + step_b[ell][k] + step_s[ell][k] * z
                if x <= 0.0:
                    dead = True
                    break
                lev = level[ell]
                if x > lev:
                    total += disc_tab[step + 1] * _weight(x, lev, c_kind, c_value, lam)
                    x = lev
                kn = _nearest(x, inv_h, N + 1)
                k = 1 if kn < 1 else (N if kn > N else kn)
                continue
            tc = step * dt
            while True:
                switching = t_sw < t_end
                t_next = t_sw if switching else t_end
                tau = t_next - tc
                k = interior(x)
                j = uidx[ell][k]
                if f_tab is not None:
                    total += math.exp(-r * tc) * f_tab[ell][j][k] * tau
                z = gen.standard_normal()
                x = x + b_tab[ell][j] * tau + sig_tab[ell][j] * math.sqrt(tau) * z
                tc = t_next
                if x <= 0.0:
                    dead = True
                    break
                disc = math.exp(-r * tc)
                x, total = pay(x, ell, disc, total)
                if not switching:
                    break
                uu = gen.random()
                acc = 0.0
                new = -1
                for i in range(m):
                    if i != ell:
                        new = i
                        acc += q[ell][i] / rate
                        if uu < acc:
                            break
                ell = new
                x, total = pay(x, ell, disc, total)
                rate = -q[ell][ell]
                t_sw = tc + gen.standard_exponential() / rate if rate > 0 else math.inf
            if dead:
                break
            k = interior(x)
        payoff[p] = total
        ruined[p] = dead
    return payoff, ruined


def _policy_steps(b_tab, sig_tab, uidx, dt, sqrt_dt):
    """Per-state Euler increments ``b dt`` and ``sigma sqrt(dt)`` under the policy."""
    ell = np.arange(uidx.shape[0])[:, None]
    j = np.clip(uidx, 0, None)
    return (
        np.ascontiguousarray(b_tab[ell, j] * dt),
        np.ascontiguousarray(sig_tab[ell, j] * sqrt_dt),
    )

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Gauss-Seidel sweep, Bellman evaluation, path simulation.

Mirrors ``_fallback.py`` operation for operation.
"""

import math

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp, sqrt, INFINITY, fabs
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport random_standard_normal, random_standard_exponential

from ._fallback import _policy_steps

cnp.import_array()

cdef enum:
    SINGULAR = 0
    REGULAR = 1
    REFLECT = 2


def gs_sweep(double[:, ::1] V, const double[:, ::1] p_up, const double[:, ::1] p_down,
             const double[:, :, ::1] p_sw, const double[:, ::1] disc,
             const double[:, :, ::1] fdt, const double[:, ::1] c_h):
    cdef Py_ssize_t m = V.shape[0], n = V.shape[1], n_u = p_up.shape[1]
    cdef Py_ssize_t N = n - 2, k, ell, j, i
    cdef double delta = 0.0, min_inc = INFINITY
    cdef double up, down, best, s, val, sing, new, inc
    with nogil:
        for k in range(1, N + 1):
            for ell in range(m):
                up = V[ell, k + 1]
                down = V[ell, k - 1]
                best = -INFINITY
                for j in range(n_u):
                    s = p_up[ell, j] * up + p_down[ell, j] * down
                    for i in range(m):
                        if i != ell:
                            s = s + p_sw[ell, j, i] * V[i, k]
                    val = disc[ell, j] * s + fdt[ell, j, k]
                    if val > best:
                        best = val
                sing = down + c_h[ell, k]
                new = sing if sing >= best else best
                inc = new - V[ell, k]
                if inc < min_inc:
                    min_inc = inc
                if fabs(inc) > delta:
                    delta = fabs(inc)
                V[ell, k] = new
        for ell in range(m):
            new = V[ell, N] + c_h[ell, N + 1]
            inc = new - V[ell, N + 1]
            if inc < min_inc:
                min_inc = inc
            if fabs(inc) > delta:
                delta = fabs(inc)
            V[ell, N + 1] = new
    return delta, min_inc


def bellman_all(const double[:, ::1] V, const double[:, ::1] p_up, const double[:, ::1] p_down,
                const double[:, :, ::1] p_sw, const double[:, ::1] disc,
                const double[:, :, ::1] fdt, const double[:, ::1] c_h):
    cdef Py_ssize_t m = V.shape[0], n = V.shape[1], n_u = p_up.shape[1]
    cdef Py_ssize_t N = n - 2, k, ell, j, i, arg
    val_a = np.zeros((m, n))
    act_a = np.full((m, n), -1, dtype=np.int8)
    uidx_a = np.full((m, n), -1, dtype=np.int32)
    cdef double[:, ::1] val = val_a
    cdef signed char[:, ::1] act = act_a
    cdef int[:, ::1] uidx = uidx_a
    cdef double up, down, best, s, v, sing
    with nogil:
        for k in range(1, N + 1):
            for ell in range(m):
                up = V[ell, k + 1]
                down = V[ell, k - 1]
                best = -INFINITY
                arg = -1
                for j in range(n_u):
                    s = p_up[ell, j] * up + p_down[ell, j] * down
                    for i in range(m):
                        if i != ell:
                            s = s + p_sw[ell, j, i] * V[i, k]
                    v = disc[ell, j] * s + fdt[ell, j, k]
                    if v > best:
                        best = v
                        arg = j
                sing = down + c_h[ell, k]
                uidx[ell, k] = <int>arg
                if sing >= best:
                    val[ell, k] = sing
                    act[ell, k] = SINGULAR
                else:
                    val[ell, k] = best
                    act[ell, k] = REGULAR
        for ell in range(m):
            val[ell, N + 1] = V[ell, N] + c_h[ell, N + 1]
            act[ell, N + 1] = REFLECT
            uidx[ell, N + 1] = uidx[ell, N]
    return val_a, act_a, uidx_a


cdef struct PathSpec:
    Py_ssize_t m
    Py_ssize_t N
    Py_ssize_t n
    Py_ssize_t n_u
    double inv_h
    double dt
    long n_steps
    double r
    int c_kind
    double c_value
    double lam
    bint has_f
    const double *q
    const double *b_tab
    const double *sig_tab
    const int *uidx
    const double *level
    const double *f_tab
    const double *disc_tab
    const double *step_b
    const double *step_s


cdef inline Py_ssize_t _nearest(double x, double inv_h, Py_ssize_t top) noexcept nogil:
    if x * inv_h >= <double>top:
        return top
    return <Py_ssize_t>(x * inv_h + 0.5)


cdef inline Py_ssize_t _interior(double x, const PathSpec *ps) noexcept nogil:
    cdef Py_ssize_t k = _nearest(x, ps.inv_h, ps.N + 1)
    if k < 1:
        return 1
    if k > ps.N:
        return ps.N
    return k


cdef inline double _pay(double *x, Py_ssize_t ell, double disc, const PathSpec *ps) noexcept nogil:
    cdef double lev = ps.level[ell], w
    if x[0] > lev:
        if ps.c_kind == 0:
            w = ps.c_value * (x[0] - lev)
        else:
            w = exp(-ps.lam * lev) - exp(-ps.lam * x[0])
        x[0] = lev
        return disc * w
    return 0.0


cdef double _run_path(bitgen_t *rng, double x0, Py_ssize_t l0, const PathSpec *ps,
                      bint *dead) noexcept nogil:
    cdef double x = x0, total = 0.0, rate, t_sw, tc, t_end, t_next, tau, z, uu, acc, disc, lev
    cdef Py_ssize_t ell = l0, k, kn, j, i, new, m = ps.m, n = ps.n, n_u = ps.n_u
    cdef Py_ssize_t top = ps.N + 1
    cdef long step
    cdef bint switching
    dead[0] = False
    total += _pay(&x, ell, 1.0, ps)
    k = _interior(x, ps)
    rate = -ps.q[ell * m + ell]
    t_sw = random_standard_exponential(rng) / rate if rate > 0 else INFINITY
    for step in range(ps.n_steps):
        t_end = (step + 1) * ps.dt
        if not t_sw < t_end:
            if ps.has_f:
                j = ps.uidx[ell * n + k]
                total += ps.disc_tab[step] * ps.f_tab[(ell * n_u + j) * n + k] * ps.dt
            z = random_standard_normal(rng)
            x = x + ps.step_b[ell * n + k] + ps.step_s[ell * n + k] * z
            if x <= 0.0:
                dead[0] = True
                break
            lev = ps.level[ell]
            if x > lev:
                if ps.c_kind == 0:
                    total += ps.disc_tab[step + 1] * (ps.c_value * (x - lev))
                else:
                    total += ps.disc_tab[step + 1] * (exp(-ps.lam * lev) - exp(-ps.lam * x))
                x = lev
            kn = _nearest(x, ps.inv_h, top)
            k = 1 if kn < 1 else (ps.N if kn > ps.N else kn)
            continue
        tc = step * ps.dt
        while True:
            switching = t_sw < t_end
            t_next = t_sw if switching else t_end
            tau = t_next - tc
            k = _interior(x, ps)
            j = ps.uidx[ell * n + k]
            if ps.has_f:
                total += exp(-ps.r * tc) * ps.f_tab[(ell * n_u + j) * n + k] * tau
            z = random_standard_normal(rng)
            x = x + ps.b_tab[ell * n_u + j] * tau + ps.sig_tab[ell * n_u + j] * sqrt(tau) * z
            tc = t_next
            if x <= 0.0:
                dead[0] = True
                break
            disc = exp(-ps.r * tc)
            total += _pay(&x, ell, disc, ps)
            if not switching:
                break
            uu = rng.next_double(rng.state)
            acc = 0.0
            new = -1
            for i in range(m):
                if i != ell:
                    new = i
                    acc += ps.q[ell * m + i] / rate
                    if uu < acc:
                        break
            ell = new
            total += _pay(&x, ell, disc, ps)
            rate = -ps.q[ell * m + ell]
            t_sw = tc + random_standard_exponential(rng) / rate if rate > 0 else INFINITY
        if dead[0]:
            break
        k = _interior(x, ps)
    return total


def simulate_paths(seed, Py_ssize_t n_paths, double x0, Py_ssize_t l0, double dt, long n_steps,
                   double r, double h, q, b_tab, sig_tab, uidx, level, int c_kind,
                   double c_value, double lam, f_tab):
    sb, ss = _policy_steps(b_tab, sig_tab, uidx, dt, math.sqrt(dt))
    disc = np.array([math.exp(-r * (i * dt)) for i in range(n_steps + 1)])
    if f_tab is None:
        f_arr = np.zeros((1, 1, 1))
    else:
        f_arr = np.ascontiguousarray(f_tab, dtype=np.float64)
    cdef const double[:, ::1] q_v = np.ascontiguousarray(q, dtype=np.float64)
    cdef const double[:, ::1] b_v = np.ascontiguousarray(b_tab, dtype=np.float64)
    cdef const double[:, ::1] s_v = np.ascontiguousarray(sig_tab, dtype=np.float64)
    cdef const int[:, ::1] u_v = np.ascontiguousarray(uidx, dtype=np.int32)
    cdef const double[::1] l_v = np.ascontiguousarray(level, dtype=np.float64)
    cdef const double[:, :, ::1] f_v = f_arr
    cdef const double[::1] d_v = disc
    cdef const double[:, ::1] sb_v = sb
    cdef const double[:, ::1] ss_v = ss

    cdef PathSpec ps
    ps.m = u_v.shape[0]
    ps.n = u_v.shape[1]
    ps.N = ps.n - 2
    ps.n_u = b_v.shape[1]
    ps.inv_h = 1.0 / h
    ps.dt = dt
    ps.n_steps = n_steps
    ps.r = r
    ps.c_kind = c_kind
    ps.c_value = c_value
    ps.lam = lam
    ps.has_f = f_tab is not None
    ps.q = &q_v[0, 0]
    ps.b_tab = &b_v[0, 0]
    ps.sig_tab = &s_v[0, 0]
    ps.uidx = &u_v[0, 0]
    ps.level = &l_v[0]
    ps.f_tab = &f_v[0, 0, 0]
    ps.disc_tab = &d_v[0]
    ps.step_b = &sb_v[0, 0]
    ps.step_s = &ss_v[0, 0]

    payoff_a = np.zeros(n_paths)
    ruined_a = np.zeros(n_paths, dtype=np.uint8)
    cdef double[::1] payoff = payoff_a
    cdef unsigned char[::1] ruined = ruined_a
    cdef bitgen_t *rng
    cdef bint dead
    cdef Py_ssize_t p
    for p in range(n_paths):
        bit_gen = np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(p,)))
        rng = <bitgen_t *> PyCapsule_GetPointer(bit_gen.capsule, "BitGenerator")
        with nogil:
            payoff[p] = _run_path(rng, x0, l0, &ps, &dead)
        ruined[p] = dead
    return payoff_a, ruined_a.astype(bool)

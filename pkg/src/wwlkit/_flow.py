"""Numba kernels for the optimal-transport solvers.

The exact solver works on the integer-scaled transportation problem: with
L = n * n', every left node supplies n' units and every right node demands
n units, so all flows stay integral and dividing by L recovers the uniform
marginals exactly. Successive shortest paths with Johnson potentials keep
reduced costs nonnegative; each augmentation moves an integer amount, so
the solver terminates without simplex-style degeneracy handling. A final
cycle-cancelling pass turns ties into a basic solution (support is a
spanning forest, at most n + n' - 1 positive cells).
"""

import numpy as np
from numba import njit

INFEASIBLE = -1
SUPPORT_NOT_BASIC = -2


@njit(cache=True, nogil=True)
def solve_uniform_transport(cost):
    """Min-cost flow for uniform marginals; returns (flow, status).

    flow[i, j] is integral with row sums n' and column sums n; status 0 on
    success. Optimal for the LP min <P, cost> over the transport polytope
    after dividing by n * n'.
    """
    n, m = cost.shape
    n_nodes = n + m  # left block 0..n-1, right block n..n+m-1
    supply = np.full(n, m, dtype=np.int64)
    demand = np.full(m, n, dtype=np.int64)
    flow = np.zeros((n, m), dtype=np.int64)
    pi = np.zeros(n_nodes, dtype=np.float64)
    dist = np.empty(n_nodes, dtype=np.float64)
    done = np.empty(n_nodes, dtype=np.bool_)
    parent = np.empty(n_nodes, dtype=np.int64)
    remaining = n * m

    while remaining > 0:
        for v in range(n_nodes):
            dist[v] = np.inf
            done[v] = False
            parent[v] = -1
        for i in range(n):
            if supply[i] > 0:
                dist[i] = 0.0
        target = -1
        target_dist = np.inf
        while True:
            best = -1
            best_dist = np.inf
            for v in range(n_nodes):
                if not done[v] and dist[v] < best_dist:
                    best_dist = dist[v]
                    best = v
            if best < 0:
                break
            done[best] = True
            if best >= n and demand[best - n] > 0:
                target = best
                target_dist = best_dist
                break
            if best < n:
                i = best
                for j in range(m):
                    w = cost[i, j] + pi[i] - pi[n + j]
                    if w < 0.0:
                        w = 0.0
                    nd = best_dist + w
                    if nd < dist[n + j]:
                        dist[n + j] = nd
                        parent[n + j] = i
            else:
                j = best - n
                for i in range(n):
                    if flow[i, j] > 0:
                        w = pi[n + j] - pi[i] - cost[i, j]
                        if w < 0.0:
                            w = 0.0
                        nd = best_dist + w
                        if nd < dist[i]:
                            dist[i] = nd
                            parent[i] = n + j
        if target < 0:
            return flow, INFEASIBLE
        for v in range(n_nodes):
            if dist[v] < target_dist:
                pi[v] += dist[v]
            else:
                pi[v] += target_dist

        theta = demand[target - n]
        v = target
        while parent[v] >= 0:
            u = parent[v]
            if v < n:  # backward arc, will reduce flow[v, u - n]
                if flow[v, u - n] < theta:
                    theta = flow[v, u - n]
            v = u
        if supply[v] < theta:
            theta = supply[v]
        v = target
        while parent[v] >= 0:
            u = parent[v]
            if v >= n:
                flow[u, v - n] += theta
            else:
                flow[v, u - n] -= theta
            v = u
        supply[v] -= theta
        demand[target - n] -= theta
        remaining -= theta
    return flow, 0


@njit(cache=True, nogil=True)
def northwest_corner(n, m):
    """Basic feasible flow for the integer-scaled uniform marginals."""
    flow = np.zeros((n, m), dtype=np.int64)
    supply = np.full(n, m, dtype=np.int64)
    demand = np.full(m, n, dtype=np.int64)
    i = 0
    j = 0
    while i < n and j < m:
        q = min(supply[i], demand[j])
        flow[i, j] = q
        supply[i] -= q
        demand[j] -= q
        if supply[i] == 0 and i < n - 1:
            i += 1
        elif demand[j] == 0:
            j += 1
        else:
            i += 1
    return flow


@njit(cache=True, nogil=True)
def cancel_support_cycles(flow):
    """Push flow around support cycles until the support is a forest.

    At optimality every support arc has zero reduced cost, so cancelling a
    cycle keeps the objective; it only removes ties, leaving a basic
    solution with at most n + m - 1 positive cells.
    """
    n, m = flow.shape
    n_nodes = n + m
    max_edges = n * m
    head = np.empty(2 * max_edges, dtype=np.int64)
    nxt = np.empty(2 * max_edges, dtype=np.int64)
    first = np.empty(n_nodes, dtype=np.int64)
    parent = np.empty(n_nodes, dtype=np.int64)
    pointer = np.empty(n_nodes, dtype=np.int64)
    stack = np.empty(n_nodes, dtype=np.int64)
    on_path = np.empty(n_nodes, dtype=np.bool_)
    cycle = np.empty(n_nodes + 1, dtype=np.int64)

    while True:
        for v in range(n_nodes):
            first[v] = -1
        e = 0
        for i in range(n):
            for j in range(m):
                if flow[i, j] > 0:
                    head[e] = n + j
                    nxt[e] = first[i]
                    first[i] = e
                    e += 1
                    head[e] = i
                    nxt[e] = first[n + j]
                    first[n + j] = e
                    e += 1
        found = False
        cyc_len = 0
        for v in range(n_nodes):
            parent[v] = -2  # unvisited
            on_path[v] = False
        for root in range(n_nodes):
            if found or parent[root] != -2:
                continue
            parent[root] = -1
            pointer[root] = first[root]
            top = 0
            stack[top] = root
            on_path[root] = True
            while top >= 0 and not found:
                v = stack[top]
                e_ptr = pointer[v]
                if e_ptr < 0:
                    on_path[v] = False
                    top -= 1
                    continue
                pointer[v] = nxt[e_ptr]
                u = head[e_ptr]
                if u == parent[v]:
                    continue
                if parent[u] == -2:
                    parent[u] = v
                    pointer[u] = first[u]
                    top += 1
                    stack[top] = u
                    on_path[u] = True
                elif on_path[u]:
                    # cycle u -> ... -> v -> u
                    cyc_len = 0
                    w = v
                    while w != u:
                        cycle[cyc_len] = w
                        cyc_len += 1
                        w = parent[w]
                    cycle[cyc_len] = u
                    cyc_len += 1
                    found = True
        if not found:
            return flow
        # alternate signs around the cycle; cells are (left, right) pairs
        min_even = np.int64(2 ** 62)
        min_odd = np.int64(2 ** 62)
        for k in range(cyc_len):
            a = cycle[k]
            b = cycle[(k + 1) % cyc_len]
            if a < n:
                f = flow[a, b - n]
            else:
                f = flow[b, a - n]
            if k % 2 == 0:
                if f < min_even:
                    min_even = f
            else:
                if f < min_odd:
                    min_odd = f
        if min_even <= min_odd:
            reduce_parity = 0
            theta = min_even
        else:
            reduce_parity = 1
            theta = min_odd
        for k in range(cyc_len):
            a = cycle[k]
            b = cycle[(k + 1) % cyc_len]
            if a < n:
                i, j = a, b - n
            else:
                i, j = b, a - n
            if k % 2 == reduce_parity:
                flow[i, j] -= theta
            else:
                flow[i, j] += theta


@njit(cache=True, nogil=True)
def count_positive(flow):
    n, m = flow.shape
    c = 0
    for i in range(n):
        for j in range(m):
            if flow[i, j] > 0:
                c += 1
    return c


@njit(cache=True, nogil=True)
def _logsumexp_rows(f, g, m_over_gamma, gamma, out):
    """out[i] = logsumexp_j((g[j] - M[i, j]) / gamma), M passed as M/gamma."""
    n = m_over_gamma.shape[0]
    m = m_over_gamma.shape[1]
    for i in range(n):
        hi = -np.inf
        for j in range(m):
            t = g[j] / gamma - m_over_gamma[i, j]
            if t > hi:
                hi = t
        if hi == -np.inf:
            out[i] = -np.inf
            continue
        s = 0.0
        for j in range(m):
            s += np.exp(g[j] / gamma - m_over_gamma[i, j] - hi)
        out[i] = hi + np.log(s)


@njit(cache=True, nogil=True)
def _logsumexp_cols(f, g, m_over_gamma, gamma, out):
    """out[j] = logsumexp_i((f[i] - M[i, j]) / gamma)."""
    n = m_over_gamma.shape[0]
    m = m_over_gamma.shape[1]
    for j in range(m):
        hi = -np.inf
        for i in range(n):
            t = f[i] / gamma - m_over_gamma[i, j]
            if t > hi:
                hi = t
        if hi == -np.inf:
            out[j] = -np.inf
            continue
        s = 0.0
        for i in range(n):
            s += np.exp(f[i] / gamma - m_over_gamma[i, j] - hi)
        out[j] = hi + np.log(s)


@njit(cache=True, nogil=True)
def sinkhorn_log_domain(M, gamma, tol, max_iter, f, g):
    """Fully stabilized Sinkhorn on potentials; returns (iterations, err)."""
    n, m = M.shape
    log_a = np.log(1.0 / n)
    log_b = np.log(1.0 / m)
    m_over_gamma = M / gamma
    t_rows = np.empty(n, dtype=np.float64)
    s_cols = np.empty(m, dtype=np.float64)
    it = 0
    err = np.inf
    _logsumexp_rows(f, g, m_over_gamma, gamma, t_rows)
    while it < max_iter:
        it += 1
        for i in range(n):
            f[i] = gamma * (log_a - t_rows[i])
        _logsumexp_cols(f, g, m_over_gamma, gamma, s_cols)
        for j in range(m):
            g[j] = gamma * (log_b - s_cols[j])
        _logsumexp_rows(f, g, m_over_gamma, gamma, t_rows)
        err = 0.0
        a = 1.0 / n
        for i in range(n):
            row_sum = np.exp(f[i] / gamma + t_rows[i])
            d = abs(row_sum - a)
            if d > err:
                err = d
        if err <= tol:
            break
    return it, err


@njit(cache=True, nogil=True)
def sinkhorn_scaling(M, gamma, tol, max_iter, absorb_threshold):
    """Alternating marginal scaling on exp(-M/gamma) with absorption.

    Returns (plan, iterations, err, used_log_domain). Scaling factors above
    absorb_threshold are absorbed into the potentials; if the kernel still
    underflows (a full zero row/column in K @ v), the remaining iterations
    run fully in the log domain.
    """
    n, m = M.shape
    a = 1.0 / n
    b = 1.0 / m
    f = np.zeros(n, dtype=np.float64)
    g = np.zeros(m, dtype=np.float64)
    u = np.ones(n, dtype=np.float64)
    v = np.ones(m, dtype=np.float64)
    K = np.empty((n, m), dtype=np.float64)
    Kv = np.empty(n, dtype=np.float64)
    KTu = np.empty(m, dtype=np.float64)
    used_log = False

    for i in range(n):
        for j in range(m):
            K[i, j] = np.exp((f[i] + g[j] - M[i, j]) / gamma)
    for i in range(n):
        s = 0.0
        for j in range(m):
            s += K[i, j] * v[j]
        Kv[i] = s

    it = 0
    err = np.inf
    while it < max_iter:
        underflow = False
        for i in range(n):
            if Kv[i] <= 0.0:
                underflow = True
                break
        if not underflow:
            it += 1
            for i in range(n):
                u[i] = a / Kv[i]
            for j in range(m):
                s = 0.0
                for i in range(n):
                    s += K[i, j] * u[i]
                KTu[j] = s
            col_underflow = False
            for j in range(m):
                if KTu[j] <= 0.0:
                    col_underflow = True
                    break
            if col_underflow:
                underflow = True
                it -= 1
            else:
                for j in range(m):
                    v[j] = b / KTu[j]
                for i in range(n):
                    s = 0.0
                    for j in range(m):
                        s += K[i, j] * v[j]
                    Kv[i] = s
                err = 0.0
                for i in range(n):
                    d = abs(u[i] * Kv[i] - a)
                    if d > err:
                        err = d
                if err <= tol:
                    break
                big = 0.0
                for i in range(n):
                    if abs(u[i]) > big:
                        big = abs(u[i])
                for j in range(m):
                    if abs(v[j]) > big:
                        big = abs(v[j])
                if big > absorb_threshold:
                    for i in range(n):
                        f[i] += gamma * np.log(u[i])
                        u[i] = 1.0
                    for j in range(m):
                        g[j] += gamma * np.log(v[j])
                        v[j] = 1.0
                    for i in range(n):
                        for j in range(m):
                            K[i, j] = np.exp((f[i] + g[j] - M[i, j]) / gamma)
                    for i in range(n):
                        s = 0.0
                        for j in range(m):
                            s += K[i, j] * v[j]
                        Kv[i] = s
                continue
        # absorb whatever is finite, then hand off to the log-domain loop
        for i in range(n):
            if u[i] > 0.0 and np.isfinite(u[i]):
                f[i] += gamma * np.log(u[i])
            u[i] = 1.0
        for j in range(m):
            if v[j] > 0.0 and np.isfinite(v[j]):
                g[j] += gamma * np.log(v[j])
            v[j] = 1.0
        used_log = True
        it_log, err = sinkhorn_log_domain(M, gamma, tol, max_iter - it, f, g)
        it += it_log
        break

    plan = np.empty((n, m), dtype=np.float64)
    for i in range(n):
        for j in range(m):
            val = (f[i] + g[j] - M[i, j]) / gamma
            if not used_log:
                plan[i, j] = u[i] * K[i, j] * v[j]
            else:
                plan[i, j] = np.exp(val)
    if not used_log:
        # fold the scaling factors so the invariant P = exp((f+g-M)/gamma) holds
        for i in range(n):
            if u[i] > 0.0:
                f[i] += gamma * np.log(u[i])
        for j in range(m):
            if v[j] > 0.0:
                g[j] += gamma * np.log(v[j])
    return plan, it, err, used_log

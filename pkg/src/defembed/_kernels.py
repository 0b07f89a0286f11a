"""Compiled inner loops for bulk enumeration (the brute-force oracles).

These duplicate the existence questions answered by the pure-Python solvers
in solvers.py, without certificates; the two are cross-checked in the test
suite. Kernels release the GIL so oracle scans can be chunked over threads.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def ham_cycle_exists(adj, n):
    """Subset DP over paths anchored at vertex 0; adj is an int64 bitset row array."""
    if n < 3:
        return False
    size = 1 << n
    full = size - 1
    reach = np.zeros(size, np.int64)
    reach[1] = 1
    for mask in range(1, size, 2):
        r = reach[mask]
        if r == 0:
            continue
        for v in range(n):
            if (r >> v) & 1:
                cand = adj[v] & ~mask
                while cand:
                    ub = cand & (-cand)
                    cand ^= ub
                    reach[mask | ub] |= ub
    return (reach[full] & adj[0]) != 0


@njit(cache=True, nogil=True)
def k3_factor_exists(adj, n):
    """Subset DP: can the whole vertex set be partitioned into triangles."""
    if n % 3 != 0:
        return False
    if n == 0:
        return True
    size = 1 << n
    full = size - 1
    dp = np.zeros(size, np.uint8)
    dp[0] = 1
    for mask in range(size):
        if dp[mask] == 0:
            continue
        if mask == full:
            return True
        v = 0
        while (mask >> v) & 1:
            v += 1
        rest = adj[v] & ~mask & ~((1 << (v + 1)) - 1)
        m1 = rest
        while m1:
            ub = m1 & (-m1)
            m1 ^= ub
            u = 0
            tb = ub
            while tb > 1:
                tb >>= 1
                u += 1
            m2 = rest & adj[u] & ~((1 << (u + 1)) - 1)
            while m2:
                wb = m2 & (-m2)
                m2 ^= wb
                dp[mask | (1 << v) | ub | wb] = 1
    return dp[full] == 1


def joined_adjacency(masks, n, t):
    """int64 adjacency rows of the join of an n-vertex mask list with K_t."""
    big = n + t
    full = (1 << big) - 1
    hi = ((1 << t) - 1) << n
    out = np.empty(big, np.int64)
    for v in range(n):
        out[v] = masks[v] | hi
    for v in range(n, big):
        out[v] = full & ~(1 << v)
    return out


def warm_up():
    """Trigger JIT compilation outside timed sections."""
    a = joined_adjacency([0, 0, 0], 3, 2)
    ham_cycle_exists(a, 5)
    k3_factor_exists(a, 5)

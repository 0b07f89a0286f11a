"""Exact decision procedures with certificates, plus sufficient-condition
fast paths and the constructive covering procedures used by the embedding
pipelines.

Every solver is exact: a negative answer means the search space was
exhausted. Running out of the time budget raises ResourceError and is never
reported as infeasible. Asymptotic thresholds drive only the greedy phases;
correctness always rests on the exact fallback.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import comb

from .errors import InfeasibleError, InputError, ResourceError
from .graphs import Decomposition, Factor, Graph, HamCycle, MultipartiteGraph, PathCover

DEFAULT_TIME_BUDGET = 120.0

# Subset-DP solvers allocate 2^n tables; beyond this they refuse instead of
# thrashing. Growth path: raise the cap and stream the tables, the bitset
# adjacency itself has no width limit.
MAX_SUBSET_DP = 20


class _Budget:
    __slots__ = ("deadline", "counter")

    def __init__(self, seconds=None):
        if seconds is None:
            seconds = DEFAULT_TIME_BUDGET
        self.deadline = time.monotonic() + seconds
        self.counter = 0

    def tick(self):
        self.counter += 1
        if (self.counter & 1023) == 0 and time.monotonic() > self.deadline:
            raise ResourceError("solver time budget exceeded")


def _bits(mask):
    while mask:
        b = mask & -mask
        mask ^= b
        yield b.bit_length() - 1


# --------------------------------------------------------------------------
# Hamiltonicity


def is_hamiltonian(g: Graph, time_budget=None):
    """Exact Hamiltonian cycle search; returns a HamCycle certificate or None."""
    n = g.n
    if n < 3:
        return None
    if n > MAX_SUBSET_DP:
        raise ResourceError(f"{n} vertices exceeds the subset-DP cap {MAX_SUBSET_DP}")
    masks = g.adjacency_masks()
    budget = _Budget(time_budget)
    size = 1 << n
    full = size - 1
    # reach[mask] = endpoints of paths that start at 0 and visit exactly mask
    reach = [0] * size
    reach[1] = 1
    for mask in range(1, size, 2):
        r = reach[mask]
        if not r:
            continue
        budget.tick()
        while r:
            vb = r & -r
            r ^= vb
            v = vb.bit_length() - 1
            cand = masks[v] & ~mask
            while cand:
                ub = cand & -cand
                cand ^= ub
                reach[mask | ub] |= ub
    closing = reach[full] & masks[0]
    if not closing:
        return None
    # walk back from the lowest valid endpoint
    cur = (closing & -closing).bit_length() - 1
    mask = full
    seq = [cur]
    while mask != 1:
        mask ^= 1 << cur
        prev = reach[mask] & masks[cur]
        cur = (prev & -prev).bit_length() - 1
        seq.append(cur)
    seq.reverse()
    return HamCycle(tuple(seq))


def chvatal_sufficient(g: Graph) -> bool:
    """Degree-sequence sufficient condition for Hamiltonicity (never necessary)."""
    n = g.n
    if n < 3:
        raise InputError("condition is defined for at least 3 vertices")
    d = sorted(g.degree(v) for v in range(n))
    for i in range(1, (n - 1) // 2 + 1):
        if not (d[i - 1] > i or d[n - i - 1] >= n - i):
            return False
    return True


# --------------------------------------------------------------------------
# Clique factors


def hs_condition(g: Graph, k: int) -> bool:
    """Minimum-degree guarantee for a K_k-factor: delta >= (n/k)(k-1)."""
    if k < 2:
        raise InputError("clique size must be at least 2")
    if g.n % k:
        raise InputError(f"{g.n} not divisible by {k}")
    if g.n == 0:
        return True
    delta = min(g.degree(v) for v in range(g.n))
    return delta >= (g.n // k) * (k - 1)


def fischer_condition(mg: MultipartiteGraph, k: int) -> bool:
    """Partite-degree guarantee for a K_k-factor of a balanced k-partite graph."""
    if mg.num_parts != k:
        raise InputError(f"expected {k} parts, got {mg.num_parts}")
    sizes = {len(p) for p in mg.parts}
    if len(sizes) > 1:
        raise InputError("parts must have equal size")
    npart = sizes.pop() if sizes else 0
    if npart == 0:
        return True
    part_masks = [sum(1 << v for v in p) for p in mg.parts]
    g = mg.graph
    for i, p in enumerate(mg.parts):
        for v in p:
            for j in range(k):
                if j == i:
                    continue
                cnt = (g.adj(v) & part_masks[j]).bit_count()
                if cnt * (2 * k - 2) < (2 * k - 3) * npart:
                    return False
    return True


def _clique_search(masks, common, need, bits, last, budget, accept):
    """Ascending enumeration of `need`-vertex extensions of the clique `bits`
    inside `common`, calling accept(full_bits) for each."""

    def ext(bits, last, common, left):
        if left == 0:
            return accept(bits)
        m = common & ~((1 << (last + 1)) - 1)
        while m:
            wb = m & -m
            m ^= wb
            w = wb.bit_length() - 1
            budget.tick()
            if ext(bits | wb, w, common & masks[w], left - 1):
                return True
        return False

    return ext(bits, last, common, need)


def find_kk_factor(g: Graph, k: int, time_budget=None):
    """Exact K_k-factor; returns a Factor certificate or None.

    Consults the minimum-degree fast path first, but always produces an
    explicit certificate by search.
    """
    if k < 2:
        raise InputError("clique size must be at least 2")
    n = g.n
    if n == 0:
        return Factor(k, ())
    if n % k:
        return None
    if n > MAX_SUBSET_DP:
        raise ResourceError(f"{n} vertices exceeds the subset-DP cap {MAX_SUBSET_DP}")
    guaranteed = hs_condition(g, k)
    masks = g.adjacency_masks()
    budget = _Budget(time_budget)
    failed = set()
    chosen = []

    def rec(mask):
        if mask == 0:
            return True
        if mask in failed:
            return False
        budget.tick()
        vb = mask & -mask
        v = vb.bit_length() - 1

        def accept(bits):
            chosen.append(bits)
            if rec(mask ^ bits):
                return True
            chosen.pop()
            return False

        if _clique_search(masks, masks[v] & mask, k - 1, 1 << v, v, budget, accept):
            return True
        failed.add(mask)
        return False

    if not rec((1 << n) - 1):
        if guaranteed:
            raise RuntimeError("degree condition held but exhaustive search found no factor")
        return None
    cliques = [tuple(_bits(b)) for b in chosen]
    return Factor(k, tuple(sorted(cliques)))


# --------------------------------------------------------------------------
# Clique decompositions


def find_kk_decomposition(g: Graph, k: int, time_budget=None):
    """Exact partition of E(g) into K_k's; Decomposition certificate or None.

    Branches on the uncovered edge with the fewest completing cliques (ties
    to the lexicographically first edge), pruning with the divisibility
    tests (k-1 | every remaining degree, C(k,2) | remaining edge count).
    """
    if k < 3:
        raise InputError("clique size must be at least 3")
    n = g.n
    adj = list(g.adjacency_masks())
    deg = [m.bit_count() for m in adj]
    if (sum(deg) // 2) % comb(k, 2):
        return None
    if any(d % (k - 1) for d in deg):
        return None
    budget = _Budget(time_budget)
    out = []

    def pick_edge():
        best = None
        best_c = None
        for u in range(n):
            m = adj[u] >> (u + 1)
            while m:
                vb = m & -m
                m ^= vb
                v = (u + 1) + vb.bit_length() - 1
                c = (adj[u] & adj[v]).bit_count()
                if best_c is None or c < best_c:
                    best_c = c
                    best = (u, v)
                    if c == 0:
                        return best
        return best

    def place(cl, on):
        for a in range(k):
            x = cl[a]
            for b in range(a + 1, k):
                y = cl[b]
                if on:
                    adj[x] |= 1 << y
                    adj[y] |= 1 << x
                    deg[x] += 1
                    deg[y] += 1
                else:
                    adj[x] &= ~(1 << y)
                    adj[y] &= ~(1 << x)
                    deg[x] -= 1
                    deg[y] -= 1

    def rec():
        budget.tick()
        edge = pick_edge()
        if edge is None:
            return True
        u, v = edge

        def accept(bits):
            cl = (u,) + tuple(_bits(bits ^ (1 << u)))
            place(cl, False)
            if all(deg[x] % (k - 1) == 0 for x in cl):
                out.append(cl)
                if rec():
                    return True
                out.pop()
            place(cl, True)
            return False

        if k == 3:
            m = adj[u] & adj[v]
            while m:
                wb = m & -m
                m ^= wb
                budget.tick()
                if accept((1 << u) | (1 << v) | wb):
                    return True
            return False
        return _clique_search(adj, adj[u] & adj[v], k - 2,
                              (1 << u) | (1 << v), -1, budget, accept)

    if not rec():
        return None
    return Decomposition(k, tuple(sorted(tuple(sorted(c)) for c in out)))


# --------------------------------------------------------------------------
# Path covers


def path_cover_number(g: Graph, time_budget=None):
    """Minimum number of vertex-disjoint paths covering V(g), with certificate."""
    n = g.n
    if n == 0:
        return 0, PathCover(())
    if n > MAX_SUBSET_DP:
        raise ResourceError(f"{n} vertices exceeds the subset-DP cap {MAX_SUBSET_DP}")
    masks = g.adjacency_masks()
    budget = _Budget(time_budget)
    size = 1 << n
    # ends[mask] = possible endpoints of a Hamiltonian path of g[mask]
    ends = [0] * size
    for v in range(n):
        ends[1 << v] = 1 << v
    for mask in range(1, size):
        if mask & (mask - 1) == 0:
            continue
        budget.tick()
        e = 0
        m = mask
        while m:
            vb = m & -m
            m ^= vb
            v = vb.bit_length() - 1
            if ends[mask ^ vb] & masks[v]:
                e |= vb
        ends[mask] = e

    inf = n + 1
    best = [inf] * size
    pick = [0] * size
    best[0] = 0
    for mask in range(1, size):
        budget.tick()
        low = mask & -mask
        sub = mask
        while sub:
            if (sub & low) and ends[sub]:
                c = best[mask ^ sub] + 1
                if c < best[mask]:
                    best[mask] = c
                    pick[mask] = sub
            sub = (sub - 1) & mask

    def ham_path_of(sub):
        e = ends[sub] & -ends[sub]
        cur = e.bit_length() - 1
        seq = [cur]
        rem = sub ^ (1 << cur)
        while rem:
            prev = ends[rem] & masks[cur]
            cur = (prev & -prev).bit_length() - 1
            seq.append(cur)
            rem ^= 1 << cur
        seq.reverse()
        return tuple(seq)

    paths = []
    mask = size - 1
    while mask:
        sub = pick[mask]
        paths.append(ham_path_of(sub))
        mask ^= sub
    paths.sort()
    return best[size - 1], PathCover(tuple(paths))


# --------------------------------------------------------------------------
# Removed-edge bookkeeping


@dataclass(frozen=True)
class RemovedEdgeSet:
    """A set of deleted host edges with per-vertex removal counts."""

    pairs: tuple

    def __post_init__(self):
        norm = []
        seen = set()
        for u, v in self.pairs:
            if u == v:
                raise InputError(f"removed pair ({u}, {v}) is a loop")
            if u < 0 or v < 0:
                raise InputError(f"removed pair ({u}, {v}) has a negative label")
            p = (u, v) if u < v else (v, u)
            if p in seen:
                raise InputError(f"removed pair {p} listed twice")
            seen.add(p)
            norm.append(p)
        object.__setattr__(self, "pairs", tuple(sorted(norm)))

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def count(self, v: int) -> int:
        return sum(1 for p in self.pairs if v in p)

    def counts(self, n: int):
        out = [0] * n
        for u, v in self.pairs:
            out[u] += 1
            out[v] += 1
        return out

    def restricted_to(self, vertices) -> "RemovedEdgeSet":
        vs = set(vertices)
        return RemovedEdgeSet(tuple(p for p in self.pairs if p[0] in vs and p[1] in vs))


# --------------------------------------------------------------------------
# Near factors under edge removal


@dataclass(frozen=True)
class NearFactorCover:
    """Vertex-disjoint k-cliques covering all of S and all but a few of T."""

    k: int
    cliques: tuple
    uncovered: tuple
    bad_vertices: tuple

    def __post_init__(self):
        object.__setattr__(self, "cliques", tuple(tuple(sorted(c)) for c in self.cliques))
        object.__setattr__(self, "uncovered", tuple(sorted(self.uncovered)))
        object.__setattr__(self, "bad_vertices", tuple(sorted(self.bad_vertices)))


def _exact_cover_with_skips(masks, n, cover_mask, skippable_mask, k, skips, budget):
    """Disjoint k-cliques covering cover_mask except <= skips skippable vertices.

    Returns a list of clique bitmasks or None after exhausting the space.
    """
    failed = set()
    chosen = []

    def rec(mask, left):
        if mask == 0:
            return True
        key = (mask, left)
        if key in failed:
            return False
        budget.tick()
        vb = mask & -mask
        v = vb.bit_length() - 1

        def accept(bits):
            chosen.append(bits)
            if rec(mask ^ bits, left):
                return True
            chosen.pop()
            return False

        if _clique_search(masks, masks[v] & mask, k - 1, 1 << v, v, budget, accept):
            return True
        if left > 0 and (skippable_mask >> v) & 1:
            if rec(mask ^ vb, left - 1):
                return True
        failed.add(key)
        return False

    if not rec(cover_mask, skips):
        return None
    return list(chosen)


def near_factor_cover(g: Graph, s_set, t_set, k: int, removed: RemovedEdgeSet,
                      r_hint=None, time_budget=None) -> NearFactorCover:
    """Cover all of s_set and all but at most k-1 of t_set by disjoint K_k's
    of g minus removed.

    Vertices of s_set hit by many removed edges are matched first to greedy
    (k-1)-cliques inside t_set; the remainder goes through the exact factor
    search. The greedy thresholds are heuristic; infeasibility is only
    reported when the exact fallback exhausts the instance.
    """
    if k < 2:
        raise InputError("clique size must be at least 2")
    s_list = sorted(s_set)
    t_list = sorted(t_set)
    s_mask = sum(1 << v for v in s_list)
    t_mask = sum(1 << v for v in t_list)
    if s_mask & t_mask or (s_mask | t_mask) != (1 << g.n) - 1:
        raise InputError("s_set and t_set must partition the vertex set")
    for u, v in removed:
        if not ((s_mask >> u) & 1 and (s_mask >> v) & 1):
            raise InputError(f"removed pair ({u}, {v}) leaves s_set")
    if g.n > MAX_SUBSET_DP:
        raise ResourceError(f"{g.n} vertices exceeds the subset-DP cap {MAX_SUBSET_DP}")

    budget = _Budget(time_budget)
    work = g.with_edges_removed(removed)
    masks = work.adjacency_masks()
    leftover = g.n % k

    r_val = r_hint
    if r_val is None:
        r_val = max(1, -(-len(removed) // (k * k)))
    counts = removed.counts(g.n)
    # "incident to at least 2k*sqrt(r)": compare squares, no rounding needed
    bad = [v for v in s_list if counts[v] * counts[v] >= 4 * k * k * r_val]

    cliques = []
    used = 0
    greedy_ok = True
    for b in bad:
        members = [b]
        bits = 1 << b
        common = masks[b] & t_mask & ~used
        while len(members) < k and common:
            wb = common & -common
            w = wb.bit_length() - 1
            members.append(w)
            bits |= wb
            common &= masks[w]
        if len(members) < k:
            greedy_ok = False
            break
        cliques.append(tuple(members))
        used |= bits

    if greedy_ok:
        rest = ((1 << g.n) - 1) & ~used
        rest_t = rest & t_mask
        if rest_t.bit_count() < leftover:
            greedy_ok = False
        else:
            drop = 0
            for _ in range(leftover):
                # leave the highest-index t vertices uncovered
                b = 1 << (rest_t.bit_length() - 1)
                drop |= b
                rest_t ^= b
            keep = rest & ~drop
            sub, labels = work.subgraph(list(_bits(keep)))
            factor = find_kk_factor(sub, k, time_budget)
            if factor is None:
                greedy_ok = False
            else:
                for c in factor.cliques:
                    cliques.append(tuple(labels[v] for v in c))
                return NearFactorCover(k, tuple(cliques), tuple(_bits(drop)), tuple(bad))

    # exact fallback over the whole instance
    full = (1 << g.n) - 1
    sol = _exact_cover_with_skips(masks, g.n, full, t_mask, k, leftover, budget)
    if sol is None:
        raise InfeasibleError(
            "no disjoint clique cover leaves at most k-1 of t_set uncovered",
            payload=work,
        )
    cliques = [tuple(_bits(b)) for b in sol]
    covered = 0
    for b in sol:
        covered |= b
    return NearFactorCover(k, tuple(cliques), tuple(_bits(full & ~covered)), tuple(bad))


# --------------------------------------------------------------------------
# Multipartite factors under edge removal


def multipartite_factor(mg: MultipartiteGraph, splits, removed: RemovedEdgeSet,
                        m_hint=None, time_budget=None) -> Factor:
    """K_k-factor of mg minus removed, k = number of parts.

    Vertices with many removed edges are covered first by greedy cliques
    through the T-side of each split; the remainder uses the partite-degree
    fast path when it holds and the exact search either way.
    """
    k = mg.num_parts
    if k < 2:
        raise InputError("need at least 2 parts")
    if len(splits) != k:
        raise InputError("one (S, T) split per part required")
    sizes = {len(p) for p in mg.parts}
    if len(sizes) > 1:
        raise InputError("parts must have equal size")
    s_masks = []
    t_masks = []
    for i, (s_i, t_i) in enumerate(splits):
        sm = sum(1 << v for v in s_i)
        tm = sum(1 << v for v in t_i)
        pm = sum(1 << v for v in mg.parts[i])
        if sm & tm or (sm | tm) != pm:
            raise InputError(f"split {i} does not partition part {i}")
        s_masks.append(sm)
        t_masks.append(tm)
    all_s = sum(s_masks)
    for u, v in removed:
        if not ((all_s >> u) & 1 and (all_s >> v) & 1):
            raise InputError(f"removed pair ({u}, {v}) leaves the S sets")

    n = mg.graph.n
    if n > MAX_SUBSET_DP:
        raise ResourceError(f"{n} vertices exceeds the subset-DP cap {MAX_SUBSET_DP}")
    budget = _Budget(time_budget)
    work = mg.graph.with_edges_removed(removed)
    masks = work.adjacency_masks()
    counts = removed.counts(n)

    if m_hint is not None:
        m_val = m_hint
    else:
        m_val = max(1, max(sum(counts[v] for v in _bits(sm)) for sm in s_masks))
    part_of = {}
    for i, p in enumerate(mg.parts):
        for v in p:
            part_of[v] = i
    # "r_v > sqrt(m)" via squares
    bad = sorted(v for v in range(n) if counts[v] * counts[v] > m_val)

    cliques = []
    used = 0
    greedy_ok = True
    for b in bad:
        if (used >> b) & 1:
            greedy_ok = False
            break
        members = [b]
        bits = 1 << b
        ok = True
        for j in range(k):
            if j == part_of[b]:
                continue
            common = masks[b] & t_masks[j] & ~used & ~bits
            for w in members[1:]:
                common &= masks[w]
            if not common:
                ok = False
                break
            wb = common & -common
            members.append(wb.bit_length() - 1)
            bits |= wb
        if not ok:
            greedy_ok = False
            break
        cliques.append(tuple(sorted(members)))
        used |= bits

    if greedy_ok:
        rest = list(_bits(((1 << n) - 1) & ~used))
        sub, labels = work.subgraph(rest)
        # the residual stays balanced: every greedy clique took one vertex per part
        rest_parts = [[v for v in rest if part_of[v] == i] for i in range(k)]
        if len({len(p) for p in rest_parts}) <= 1:
            factor = find_kk_factor(sub, k, time_budget)
            if factor is not None:
                for c in factor.cliques:
                    cliques.append(tuple(labels[v] for v in c))
                return Factor(k, tuple(cliques))

    factor = find_kk_factor(work, k, time_budget)
    if factor is None:
        raise InfeasibleError("no clique factor after removals", payload=work)
    return factor

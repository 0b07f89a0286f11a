"""End-to-end embedding pipelines: partial designs into complete designs and
partial orthogonal Latin families into complete ones.

Both pipelines follow the same arc: put the partial object inside a slightly
larger host, cover everything incident to the few awkward vertices with
explicit cliques, hand the high-minimum-degree rest to the exact
decomposition solver, and retry at the next feasible order when any phase
proves infeasible. Two modes: minimize-order starts at the input order and
grows one admissible step at a time; paper-constants starts at the
(generous) closed-form order the analysis prescribes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, isqrt

from .designs import (CompleteDesign, PartialDesign, design_admissible, design_to_graph)
from .errors import InfeasibleError, InputError
from .graphs import Decomposition, Graph, MultipartiteGraph, join, verify
from .latin import (CliqueFamily, MolsFamily, decomposition_to_mols, extend_cliques,
                    mols_to_cliques)
from .solvers import (RemovedEdgeSet, find_kk_decomposition, multipartite_factor,
                      near_factor_cover)

MODES = ("minimize-order", "paper-constants")


def _ceil_sqrt(x: int) -> int:
    r = isqrt(x)
    return r if r * r == x else r + 1


@dataclass(frozen=True)
class EmbedOptions:
    mode: str = "minimize-order"
    max_extra: int | None = None
    time_budget: float | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise InputError(f"mode must be one of {MODES}")
        if self.max_extra is not None and self.max_extra < 0:
            raise InputError("max_extra must be nonnegative")


@dataclass(frozen=True)
class AttemptRecord:
    order: int
    t: int
    outcome: str
    detail: str = ""
    bad_vertices: tuple = ()
    cover_cliques: int = 0
    residual_cliques: int = 0


@dataclass(frozen=True)
class EmbedTrace:
    mode: str
    attempts: tuple


@dataclass(frozen=True)
class EmbeddingResult:
    original_order: int
    order: int
    t: int
    completed: object
    certificate: Decomposition
    trace: EmbedTrace

    def summary(self) -> str:
        if isinstance(self.completed, MolsFamily):
            return f"order={self.order} t={self.t} cells={self.completed.union_filled_count}"
        return f"order={self.order} t={self.t} blocks={len(self.completed.blocks)}"


def choose_target_order(n: int, k: int, t_lower: int) -> int:
    """Smallest t >= t_lower making n+t divisibility-admissible for block
    size k; always within k(k-1) of t_lower."""
    if k < 3:
        raise InputError("block size must be at least 3")
    t = max(0, t_lower)
    for _ in range(k * (k - 1) + 1):
        if design_admissible(n + t, k):
            return t
        t += 1
    raise RuntimeError("no admissible order within k(k-1) steps")  # unreachable


# --------------------------------------------------------------------------
# Designs


def _induced_with_addback(masks, verts, addback_pairs):
    """Induced graph on verts from raw bitset rows, with extra edges forced in.

    Returns (graph, labels, mapped_addback).
    """
    old = sorted(verts)
    pos = {o: i for i, o in enumerate(old)}
    sub = [0] * len(old)
    for i, o in enumerate(old):
        m = masks[o]
        while m:
            b = m & -m
            m ^= b
            w = b.bit_length() - 1
            if w in pos:
                sub[i] |= 1 << pos[w]
    mapped = []
    for u, v in addback_pairs:
        iu, iv = pos[u], pos[v]
        sub[iu] |= 1 << iv
        sub[iv] |= 1 << iu
        mapped.append((iu, iv))
    return Graph._from_masks(sub), old, mapped


def _attempt_design(design: PartialDesign, t: int, time_budget):
    n, k, r = design.n, design.k, len(design.blocks)
    base, _ = design_to_graph(design)
    big = join(base, t)
    total = n + t
    work = list(big.adjacency_masks())

    block_pairs = set()
    for b in design.blocks:
        for a in range(k):
            for c in range(a + 1, k):
                block_pairs.add((b[a], b[c]) if b[a] < b[c] else (b[c], b[a]))

    bad = []
    if r > 0:
        cut = n - _ceil_sqrt(k ** 4 * r)  # degree below n - k^2 sqrt(r)
        bad = [v for v in range(n) if base.degree(v) < cut]
        want = _ceil_sqrt(r)
        for v in range(n):
            if len(bad) >= want:
                break
            if v not in bad:
                bad.append(v)
        bad.sort()

    covers = []
    for b in bad:
        nb = work[b]
        verts = []
        m = nb
        while m:
            x = m & -m
            m ^= x
            verts.append(x.bit_length() - 1)
        if len(verts) % (k - 1):
            raise InfeasibleError(
                f"neighborhood of vertex {b} not divisible by {k - 1} at order {total}"
            )
        addback = [(u, v) for (u, v) in block_pairs if u in set(verts) and v in set(verts)]
        sub, labels, mapped = _induced_with_addback(work, verts, addback)
        s_local = [i for i, o in enumerate(labels) if o < n]
        t_local = [i for i, o in enumerate(labels) if o >= n]
        res = near_factor_cover(sub, s_local, t_local, k - 1,
                                RemovedEdgeSet(tuple(mapped)),
                                r_hint=max(r, 1), time_budget=time_budget)
        if res.uncovered:
            raise InfeasibleError(
                f"cover at vertex {b} left {len(res.uncovered)} vertices at order {total}"
            )
        for c in res.cliques:
            full_c = tuple(sorted((b,) + tuple(labels[i] for i in c)))
            covers.append(full_c)
            for a in range(k):
                for d in range(a + 1, k):
                    u, v = full_c[a], full_c[d]
                    work[u] &= ~(1 << v)
                    work[v] &= ~(1 << u)

    residual = Graph._from_masks(work)
    dec = find_kk_decomposition(residual, k, time_budget)
    if dec is None:
        raise InfeasibleError(f"residual graph has no decomposition at order {total}")
    return covers, dec, bad


def embed_design(design: PartialDesign, opts: EmbedOptions | None = None) -> EmbeddingResult:
    """Complete design on n+t points containing the input blocks verbatim."""
    opts = opts or EmbedOptions()
    n, k, r = design.n, design.k, len(design.blocks)
    if opts.mode == "paper-constants":
        t_lower = _ceil_sqrt(36 * k ** 4 * r)  # ceil(6 k^2 sqrt(r))
    else:
        t_lower = 0
    max_extra = opts.max_extra
    if max_extra is None:
        max_extra = max(2 * n + 2, t_lower + k * (k - 1))

    attempts = []
    t = choose_target_order(n, k, t_lower)
    while t <= max_extra:
        try:
            covers, dec, bad = _attempt_design(design, t, opts.time_budget)
        except InfeasibleError as e:
            attempts.append(AttemptRecord(order=n + t, t=t, outcome="infeasible",
                                          detail=str(e)))
            t = choose_target_order(n, k, t + 1)
            continue
        blocks = tuple(design.blocks) + tuple(covers) + dec.cliques
        completed = CompleteDesign(n + t, k, blocks)
        cert = Decomposition(k, completed.blocks)
        ok, why = verify(Graph.complete(n + t), cert)
        if not ok:
            raise RuntimeError(f"internal: assembled decomposition invalid: {why}")
        attempts.append(AttemptRecord(order=n + t, t=t, outcome="success",
                                      bad_vertices=tuple(bad),
                                      cover_cliques=len(covers),
                                      residual_cliques=len(dec.cliques)))
        return EmbeddingResult(n, n + t, t, completed, cert,
                               EmbedTrace(opts.mode, tuple(attempts)))
    raise InfeasibleError(
        f"no embedding with at most {max_extra} added points",
        payload=EmbedTrace(opts.mode, tuple(attempts)),
    )


@dataclass(frozen=True)
class SaturationResult:
    design: PartialDesign
    uncovered_pairs: int
    embedding: EmbeddingResult


def saturate_design(design: PartialDesign, opts: EmbedOptions | None = None) -> SaturationResult:
    """Grow a partial design on its own points by embedding and then dropping
    every block that meets an added point."""
    emb = embed_design(design, opts)
    kept = [b for b in emb.completed.blocks if b[-1] < design.n]
    sat = PartialDesign(design.n, design.k, tuple(kept))
    uncovered = comb(design.n, 2) - len(kept) * comb(design.k, 2)
    return SaturationResult(sat, uncovered, emb)


# --------------------------------------------------------------------------
# Orthogonal Latin families


def _attempt_mols(cliques0: CliqueFamily, k: int, n: int, big_n: int, extension_extra: int,
                  time_budget):
    m = len(cliques0.cliques)
    ext = extend_cliques(cliques0, k, extra=extension_extra)
    host = MultipartiteGraph.complete([big_n] * k)

    def flat(p, i):
        return p * big_n + i

    ext_flat = [tuple(sorted(flat(p, i) for p, i in c)) for c in ext.cliques]
    total = big_n * k
    work = list(host.graph.adjacency_masks())
    clique_pairs = set()
    counts = [0] * total
    for c in ext_flat:
        for v in c:
            counts[v] += 1
        for a in range(k):
            for b in range(a + 1, k):
                u, v = c[a], c[b]
                clique_pairs.add((u, v))
                work[u] &= ~(1 << v)
                work[v] &= ~(1 << u)

    part_of = [v // big_n for v in range(total)]
    # bad: r_v > k sqrt(m); pad so every part carries equally many
    bad_flags = [counts[v] * counts[v] > k * k * m for v in range(total)]
    per_part = [sum(bad_flags[p * big_n:(p + 1) * big_n]) for p in range(k)]
    target = max(per_part) if per_part else 0
    for p in range(k):
        need = target - per_part[p]
        v = p * big_n
        while need > 0 and v < (p + 1) * big_n:
            if not bad_flags[v]:
                bad_flags[v] = True
                need -= 1
            v += 1
    bad = [v for v in range(total) if bad_flags[v]]

    covers = []
    for b in bad:
        nb = work[b]
        verts = []
        m2 = nb
        while m2:
            x = m2 & -m2
            m2 ^= x
            verts.append(x.bit_length() - 1)
        if not verts:
            continue
        addback = [(u, v) for (u, v) in clique_pairs
                   if u in set(verts) and v in set(verts)]
        sub, labels, mapped = _induced_with_addback(work, verts, addback)
        # group the neighborhood by host part; every part except b's shows up
        # with the same count because all missing edges come from k-spanning cliques
        local_parts = {}
        for i, o in enumerate(labels):
            local_parts.setdefault(part_of[o], []).append(i)
        sizes = {len(vs) for vs in local_parts.values()}
        if len(local_parts) != k - 1 or len(sizes) != 1:
            raise InfeasibleError(
                f"neighborhood of vertex {b} is not balanced at order {big_n}"
            )
        in_some_clique = {v for c in ext_flat for v in c}
        for c in covers:
            in_some_clique.update(c)
        splits = []
        parts_sorted = sorted(local_parts)
        for p in parts_sorted:
            vs = local_parts[p]
            s_side = [i for i in vs if labels[i] in in_some_clique]
            t_side = [i for i in vs if labels[i] not in in_some_clique]
            splits.append((s_side, t_side))
        sub_mg = MultipartiteGraph([local_parts[p] for p in parts_sorted], sub)
        factor = multipartite_factor(sub_mg, splits, RemovedEdgeSet(tuple(mapped)),
                                     m_hint=max(m, 1), time_budget=time_budget)
        for c in factor.cliques:
            full_c = tuple(sorted((b,) + tuple(labels[i] for i in c)))
            covers.append(full_c)
            for a in range(k):
                for d in range(a + 1, k):
                    u, v = full_c[a], full_c[d]
                    work[u] &= ~(1 << v)
                    work[v] &= ~(1 << u)

    residual = Graph._from_masks(work)
    dec = find_kk_decomposition(residual, k, time_budget)
    if dec is None:
        raise InfeasibleError(f"residual host has no decomposition at order {big_n}")
    full = Decomposition(k, tuple(ext_flat) + tuple(covers) + dec.cliques)
    ok, why = verify(host.graph, full)
    if not ok:
        raise RuntimeError(f"internal: assembled host decomposition invalid: {why}")
    fam = decomposition_to_mols(full, host)
    return fam, full, bad, len(covers), len(dec.cliques)


def embed_mols(fam: MolsFamily, r: int, opts: EmbedOptions | None = None) -> EmbeddingResult:
    """Pairwise orthogonal complete squares of a common order n+t, the first
    len(fam.squares) of which embed the inputs cell for cell."""
    opts = opts or EmbedOptions()
    if r < 3:
        raise InputError("r must be at least 3")
    if len(fam.squares) > r - 2:
        raise InputError(f"{len(fam.squares)} squares need r >= {len(fam.squares) + 2}")
    n = fam.n
    cliques0 = mols_to_cliques(fam, r)
    m = len(cliques0.cliques)
    k = r

    if opts.mode == "paper-constants":
        e1 = _ceil_sqrt(64 * k * k * m)       # ceil(8k sqrt(m))
        start = n + e1 + _ceil_sqrt(121 * k * k * m)  # + ceil(11k sqrt(m))
    else:
        e1 = None
        start = n
    max_extra = opts.max_extra
    if max_extra is None:
        max_extra = max(2 * n + 2, start - n)

    attempts = []
    big_n = start
    while big_n - n <= max_extra:
        extra = e1 if e1 is not None else big_n - n
        try:
            out, cert, bad, ncov, nres = _attempt_mols(cliques0, k, n, big_n, extra,
                                                       opts.time_budget)
        except InfeasibleError as e:
            attempts.append(AttemptRecord(order=big_n, t=big_n - n,
                                          outcome="infeasible", detail=str(e)))
            big_n += 1
            continue
        for mine, theirs in zip(out.squares, fam.squares):
            if not mine.embeds(theirs):
                raise RuntimeError("internal: output square does not embed its input")
        attempts.append(AttemptRecord(order=big_n, t=big_n - n, outcome="success",
                                      bad_vertices=tuple(bad), cover_cliques=ncov,
                                      residual_cliques=nres))
        return EmbeddingResult(n, big_n, big_n - n, out, cert,
                               EmbedTrace(opts.mode, tuple(attempts)))
    raise InfeasibleError(
        f"no embedding with order at most {n + max_extra}",
        payload=EmbedTrace(opts.mode, tuple(attempts)),
    )

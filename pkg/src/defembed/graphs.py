"""Simple undirected graphs with bitset adjacency, joins, and certificates.

Vertices are dense 0-indexed integers. Graphs are immutable; every
"mutation" builds a derived graph, so values are safe to share between
concurrent solver calls. Adjacency rows are Python ints used as bitsets,
which grow without a fixed word limit; MAX_VERTICES is a sanity cap for
the text formats and generators (the subset-DP solvers enforce their own,
much smaller caps).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations
from math import comb

from .errors import InputError

MAX_VERTICES = 4096


class Graph:
    """Immutable simple graph on vertices 0..n-1."""

    __slots__ = ("n", "_adj")

    def __init__(self, n: int, edges=()):
        if n < 0 or n > MAX_VERTICES:
            raise InputError(f"vertex count {n} outside [0, {MAX_VERTICES}]")
        adj = [0] * n
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise InputError(f"loop at vertex {u}")
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        self.n = n
        self._adj = tuple(adj)

    @classmethod
    def _from_masks(cls, masks) -> "Graph":
        g = object.__new__(cls)
        g.n = len(masks)
        g._adj = tuple(masks)
        return g

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        full = (1 << n) - 1
        return cls._from_masks([full & ~(1 << v) for v in range(n)])

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, [(v, v + 1) for v in range(n - 1)])

    @classmethod
    def cycle(cls, n: int) -> "Graph":
        if n < 3:
            raise InputError("cycle needs at least 3 vertices")
        return cls(n, [(v, (v + 1) % n) for v in range(n)])

    @classmethod
    def star(cls, n: int) -> "Graph":
        """Star with hub 0 and n-1 leaves."""
        return cls(n, [(0, v) for v in range(1, n)])

    # -- queries ---------------------------------------------------------

    def adjacency_masks(self) -> tuple:
        return self._adj

    def adj(self, v: int) -> int:
        return self._adj[v]

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u] >> v & 1)

    def degree(self, v: int) -> int:
        return self._adj[v].bit_count()

    def neighbors(self, v: int):
        m = self._adj[v]
        out = []
        while m:
            b = m & -m
            m ^= b
            out.append(b.bit_length() - 1)
        return out

    @property
    def edge_count(self) -> int:
        return sum(m.bit_count() for m in self._adj) // 2

    def missing_edge_count(self) -> int:
        return comb(self.n, 2) - self.edge_count

    def edges(self):
        out = []
        for u in range(self.n):
            m = self._adj[u] >> (u + 1)
            while m:
                b = m & -m
                m ^= b
                out.append((u, u + 1 + b.bit_length() - 1))
        return out

    # -- derived graphs --------------------------------------------------

    def with_edges_removed(self, pairs) -> "Graph":
        masks = list(self._adj)
        for u, v in pairs:
            masks[u] &= ~(1 << v)
            masks[v] &= ~(1 << u)
        return Graph._from_masks(masks)

    def with_edges_added(self, pairs) -> "Graph":
        masks = list(self._adj)
        for u, v in pairs:
            if u == v:
                raise InputError(f"loop at vertex {u}")
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        return Graph._from_masks(masks)

    def subgraph(self, vertices):
        """Induced subgraph; returns (graph, old_labels) with old_labels[new] = old."""
        old = sorted(vertices)
        pos = {o: i for i, o in enumerate(old)}
        masks = [0] * len(old)
        for i, o in enumerate(old):
            m = self._adj[o]
            while m:
                b = m & -m
                m ^= b
                w = b.bit_length() - 1
                if w in pos:
                    masks[i] |= 1 << pos[w]
        return Graph._from_masks(masks), old

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self._adj == other._adj

    def __hash__(self):
        return hash((self.n, self._adj))

    def __repr__(self):
        return f"Graph(n={self.n}, e={self.edge_count})"


def join(g: Graph, t: int) -> Graph:
    """g with t extra vertices adjacent to everything, appended after g's labels."""
    if t < 0:
        raise InputError("join size must be nonnegative")
    if t == 0:
        return g
    n, big = g.n, g.n + t
    full = (1 << big) - 1
    hi = ((1 << t) - 1) << n
    masks = [g.adj(v) | hi for v in range(n)]
    masks += [full & ~(1 << v) for v in range(n, big)]
    return Graph._from_masks(masks)


def degree_sequence(g: Graph):
    """Vertex degrees in nondecreasing order."""
    return sorted(g.degree(v) for v in range(g.n))


def canonical_edge_mask(g: Graph) -> int:
    """Smallest edge bitmask over all vertex relabelings; equal iff isomorphic.

    Factorial cost, intended for graphs up to ~8 vertices (witness dedup).
    """
    n = g.n
    pairs = list(combinations(range(n), 2))
    index = {p: i for i, p in enumerate(pairs)}
    edges = g.edges()
    best = None
    for perm in permutations(range(n)):
        m = 0
        for u, v in edges:
            a, b = perm[u], perm[v]
            if a > b:
                a, b = b, a
            m |= 1 << index[(a, b)]
        if best is None or m < best:
            best = m
    return best if best is not None else 0


class MultipartiteGraph:
    """A graph together with a partition into independent parts."""

    __slots__ = ("parts", "graph")

    def __init__(self, parts, graph: Graph):
        parts = tuple(tuple(p) for p in parts)
        seen = set()
        for p in parts:
            for v in p:
                if not (0 <= v < graph.n) or v in seen:
                    raise InputError("parts must partition the vertex set")
                seen.add(v)
        if len(seen) != graph.n:
            raise InputError("parts must cover every vertex")
        part_masks = [sum(1 << v for v in p) for p in parts]
        for i, pm in enumerate(part_masks):
            for v in parts[i]:
                if graph.adj(v) & pm:
                    raise InputError(f"part {i} is not independent (vertex {v})")
        self.parts = parts
        self.graph = graph

    @classmethod
    def complete(cls, sizes) -> "MultipartiteGraph":
        parts = []
        start = 0
        for s in sizes:
            parts.append(tuple(range(start, start + s)))
            start += s
        n = start
        masks = [0] * n
        for i, p in enumerate(parts):
            pm = sum(1 << v for v in p)
            other = ((1 << n) - 1) & ~pm
            for v in p:
                masks[v] = other
        return cls(parts, Graph._from_masks(masks))

    @property
    def num_parts(self) -> int:
        return len(self.parts)

    def part_of(self, v: int) -> int:
        for i, p in enumerate(self.parts):
            if v in p:
                return i
        raise InputError(f"vertex {v} not in any part")

    def part_index_map(self):
        """Map vertex -> (part, index within part)."""
        out = {}
        for i, p in enumerate(self.parts):
            for j, v in enumerate(p):
                out[v] = (i, j)
        return out

    def balanced(self) -> bool:
        return len({len(p) for p in self.parts}) <= 1

    def with_edges_removed(self, pairs) -> "MultipartiteGraph":
        return MultipartiteGraph(self.parts, self.graph.with_edges_removed(pairs))

    def __repr__(self):
        return f"MultipartiteGraph(parts={[len(p) for p in self.parts]}, e={self.graph.edge_count})"


# --------------------------------------------------------------------------
# Certificates


def _norm_cliques(cliques):
    return tuple(tuple(sorted(c)) for c in cliques)


@dataclass(frozen=True)
class Decomposition:
    """Edge partition of a host graph into k-cliques."""

    k: int
    cliques: tuple

    def __post_init__(self):
        object.__setattr__(self, "cliques", _norm_cliques(self.cliques))


@dataclass(frozen=True)
class Factor:
    """Spanning collection of vertex-disjoint k-cliques."""

    k: int
    cliques: tuple

    def __post_init__(self):
        object.__setattr__(self, "cliques", _norm_cliques(self.cliques))


@dataclass(frozen=True)
class HamCycle:
    order: tuple

    def __post_init__(self):
        object.__setattr__(self, "order", tuple(self.order))


@dataclass(frozen=True)
class PathCover:
    paths: tuple

    def __post_init__(self):
        object.__setattr__(self, "paths", tuple(tuple(p) for p in self.paths))


def _check_labels(g, labels):
    for v in labels:
        if not (0 <= v < g.n):
            raise InputError(f"certificate label {v} out of range for n={g.n}")


def _check_clique(g, clique, k):
    if len(clique) != k:
        return f"clique {clique} has {len(clique)} vertices, expected {k}"
    if len(set(clique)) != k:
        return f"clique {clique} repeats a vertex"
    for u, v in combinations(clique, 2):
        if not g.has_edge(u, v):
            return f"clique {clique} uses the non-edge ({u}, {v})"
    return None


def verify(g: Graph, cert):
    """Check a certificate against g; returns (ok, first_violation_or_None)."""
    if isinstance(cert, Decomposition):
        seen = set()
        for c in cert.cliques:
            _check_labels(g, c)
            bad = _check_clique(g, c, cert.k)
            if bad:
                return False, bad
            for u, v in combinations(c, 2):
                e = (u, v) if u < v else (v, u)
                if e in seen:
                    return False, f"edge {e} covered twice"
                seen.add(e)
        if len(seen) != g.edge_count:
            return False, f"{len(seen)} edges covered, graph has {g.edge_count}"
        return True, None

    if isinstance(cert, Factor):
        if g.n % cert.k:
            return False, f"{g.n} not divisible by {cert.k}"
        covered = set()
        for c in cert.cliques:
            _check_labels(g, c)
            bad = _check_clique(g, c, cert.k)
            if bad:
                return False, bad
            for v in c:
                if v in covered:
                    return False, f"vertex {v} in two cliques"
                covered.add(v)
        if len(covered) != g.n:
            return False, f"{len(covered)} vertices covered, graph has {g.n}"
        return True, None

    if isinstance(cert, HamCycle):
        seq = cert.order
        _check_labels(g, seq)
        if len(seq) != g.n or len(set(seq)) != g.n:
            return False, "cycle does not visit every vertex exactly once"
        if g.n < 3:
            return False, f"no cycle exists on {g.n} vertices"
        for i, u in enumerate(seq):
            v = seq[(i + 1) % len(seq)]
            if not g.has_edge(u, v):
                return False, f"consecutive pair ({u}, {v}) is not an edge"
        return True, None

    if isinstance(cert, PathCover):
        covered = set()
        for p in cert.paths:
            _check_labels(g, p)
            if not p:
                return False, "empty path"
            for v in p:
                if v in covered:
                    return False, f"vertex {v} on two paths"
                covered.add(v)
            for u, v in zip(p, p[1:]):
                if not g.has_edge(u, v):
                    return False, f"consecutive pair ({u}, {v}) is not an edge"
        if len(covered) != g.n:
            return False, f"{len(covered)} vertices covered, graph has {g.n}"
        return True, None

    raise InputError(f"unknown certificate type {type(cert).__name__}")


# --------------------------------------------------------------------------
# Text format: first line "graph <n>", then "<u> <v>" per edge with u < v,
# lines sorted, '#' comments ignored, LF endings.


def graph_to_text(g: Graph) -> str:
    lines = [f"graph {g.n}"]
    lines += [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def graph_from_text(text: str) -> Graph:
    n = None
    edges = []
    prev = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            parts = line.split()
            if len(parts) != 2 or parts[0] != "graph":
                raise InputError("expected header 'graph <n>'", line=ln)
            try:
                n = int(parts[1])
            except ValueError:
                raise InputError(f"bad vertex count {parts[1]!r}", line=ln)
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InputError(f"expected '<u> <v>', got {line!r}", line=ln)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise InputError(f"non-integer edge {line!r}", line=ln)
        if not (0 <= u < v < n):
            raise InputError(f"edge ({u}, {v}) violates 0 <= u < v < {n}", line=ln)
        if prev is not None and (u, v) <= prev:
            raise InputError(f"edge ({u}, {v}) out of sorted order", line=ln)
        prev = (u, v)
        edges.append((u, v))
    if n is None:
        raise InputError("missing 'graph <n>' header")
    return Graph(n, edges)

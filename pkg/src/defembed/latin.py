"""Partial Latin squares, mutually orthogonal families, and their
correspondence with edge-disjoint clique families in complete multipartite
hosts.

Symbols are 1-indexed in grids and files; the host-vertex for symbol s in
square t is index s-1 of part t+2. Cell (i, j) of a family filled somewhere
corresponds to a clique holding i in part 0, j in part 1 and one symbol
vertex per filled square.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .errors import InfeasibleError, InputError, ValidationError
from .graphs import Decomposition, Graph, MultipartiteGraph, verify
from .solvers import find_kk_decomposition


def _ceil_sqrt(x: int) -> int:
    r = isqrt(x)
    return r if r * r == x else r + 1


@dataclass(frozen=True)
class PartialLatinSquare:
    """n x n grid over symbols >= 1 (None = empty), no repeats in rows/columns.

    Symbols above n are legal in intermediate objects (hosts grow during
    embedding); family-level operations require symbols within the order.
    """

    n: int
    cells: tuple

    def __post_init__(self):
        n = self.n
        cells = tuple(tuple(row) for row in self.cells)
        if len(cells) != n or any(len(r) != n for r in cells):
            raise ValidationError(f"grid must be {n}x{n}")
        for i in range(n):
            seen = {}
            for j in range(n):
                s = cells[i][j]
                if s is None:
                    continue
                if not isinstance(s, int) or s < 1:
                    raise ValidationError(f"cell ({i}, {j}) holds invalid symbol {s!r}")
                if s in seen:
                    raise ValidationError(
                        f"row {i} repeats symbol {s} (columns {seen[s]} and {j})"
                    )
                seen[s] = j
        for j in range(n):
            seen = {}
            for i in range(n):
                s = cells[i][j]
                if s is None:
                    continue
                if s in seen:
                    raise ValidationError(
                        f"column {j} repeats symbol {s} (rows {seen[s]} and {i})"
                    )
                seen[s] = i
        object.__setattr__(self, "cells", cells)

    @classmethod
    def empty(cls, n: int) -> "PartialLatinSquare":
        return cls(n, tuple((None,) * n for _ in range(n)))

    @classmethod
    def from_rows(cls, rows) -> "PartialLatinSquare":
        return cls(len(rows), tuple(tuple(r) for r in rows))

    def cell(self, i: int, j: int):
        return self.cells[i][j]

    def with_cell(self, i, j, s) -> "PartialLatinSquare":
        rows = [list(r) for r in self.cells]
        rows[i][j] = s
        return PartialLatinSquare(self.n, tuple(tuple(r) for r in rows))

    @property
    def filled_count(self) -> int:
        return sum(s is not None for row in self.cells for s in row)

    def filled_cells(self):
        return [(i, j, self.cells[i][j])
                for i in range(self.n) for j in range(self.n)
                if self.cells[i][j] is not None]

    def is_complete(self) -> bool:
        return self.filled_count == self.n * self.n and all(
            s <= self.n for row in self.cells for s in row
        )

    def embeds(self, other: "PartialLatinSquare") -> bool:
        """True when every filled cell of other holds the same symbol here."""
        if self.n < other.n:
            return False
        return all(self.cells[i][j] == s for i, j, s in other.filled_cells())


@dataclass(frozen=True)
class MolsFamily:
    """Pairwise orthogonal partial Latin squares of one order."""

    n: int
    squares: tuple

    def __post_init__(self):
        object.__setattr__(self, "squares", tuple(self.squares))
        for t, sq in enumerate(self.squares):
            if not isinstance(sq, PartialLatinSquare):
                raise ValidationError(f"entry {t} is not a partial Latin square")
            if sq.n != self.n:
                raise ValidationError(f"square {t} has order {sq.n}, family has {self.n}")
        _check_orthogonal(self.squares)

    @property
    def union_filled_count(self) -> int:
        """Cells filled in at least one square."""
        return len({(i, j) for sq in self.squares for i, j, _ in sq.filled_cells()})

    def embeds(self, other: "MolsFamily") -> bool:
        return len(self.squares) == len(other.squares) and all(
            mine.embeds(theirs) for mine, theirs in zip(self.squares, other.squares)
        )


def _check_orthogonal(squares):
    for a in range(len(squares)):
        for b in range(a + 1, len(squares)):
            seen = {}
            sa, sb = squares[a], squares[b]
            for i in range(sa.n):
                for j in range(sa.n):
                    x, y = sa.cells[i][j], sb.cells[i][j]
                    if x is None or y is None:
                        continue
                    if (x, y) in seen:
                        raise ValidationError(
                            f"squares {a} and {b} repeat the pair ({x}, {y}) "
                            f"at cells {seen[(x, y)]} and ({i}, {j})"
                        )
                    seen[(x, y)] = (i, j)


def validate_mols(squares) -> MolsFamily:
    """Validated family, or ValidationError naming the first violation."""
    squares = tuple(squares)
    if not squares:
        raise ValidationError("family must contain at least one square")
    return MolsFamily(squares[0].n, squares)


# --------------------------------------------------------------------------
# Clique families in multipartite hosts


@dataclass(frozen=True)
class CliqueFamily:
    """Edge-disjoint cliques in a balanced complete multipartite host.

    Vertices are (part, index) pairs; every clique holds at most one vertex
    per part and always one in part 0 and one in part 1.
    """

    num_parts: int
    part_size: int
    cliques: tuple

    def __post_init__(self):
        cliques = tuple(tuple(sorted(c)) for c in self.cliques)
        object.__setattr__(self, "cliques", cliques)
        seen_pairs = set()
        for c in cliques:
            if not (3 <= len(c) <= self.num_parts):
                raise ValidationError(f"clique {c} size outside [3, {self.num_parts}]")
            parts = [p for p, _ in c]
            if len(set(parts)) != len(parts):
                raise ValidationError(f"clique {c} repeats a part")
            if 0 not in parts or 1 not in parts:
                raise ValidationError(f"clique {c} misses part 0 or part 1")
            for p, i in c:
                if not (0 <= p < self.num_parts and 0 <= i < self.part_size):
                    raise ValidationError(f"vertex ({p}, {i}) out of host range")
            for a in range(len(c)):
                for b in range(a + 1, len(c)):
                    e = (c[a], c[b])
                    if e in seen_pairs:
                        raise ValidationError(f"edge {e} used by two cliques")
                    seen_pairs.add(e)

    def host(self) -> MultipartiteGraph:
        return MultipartiteGraph.complete([self.part_size] * self.num_parts)

    def flat(self, vertex) -> int:
        p, i = vertex
        return p * self.part_size + i

    def flat_cliques(self):
        return tuple(tuple(sorted(self.flat(v) for v in c)) for c in self.cliques)


def mols_to_cliques(fam: MolsFamily, r: int) -> CliqueFamily:
    """One clique per cell filled in at least one square of the family.

    The host has r parts; the family may hold up to r-2 squares (fewer
    squares behave as if padded with empty ones).
    """
    if r < 3:
        raise InputError("host needs at least 3 parts")
    q = len(fam.squares)
    if q > r - 2:
        raise InputError(f"{q} squares need at least {q + 2} parts, got {r}")
    n = fam.n
    cliques = []
    for i in range(n):
        for j in range(n):
            verts = [(0, i), (1, j)]
            for t, sq in enumerate(fam.squares):
                s = sq.cells[i][j]
                if s is None:
                    continue
                if s > n:
                    raise ValidationError(
                        f"square {t} cell ({i}, {j}) symbol {s} exceeds order {n}"
                    )
                verts.append((t + 2, s - 1))
            if len(verts) > 2:
                cliques.append(tuple(verts))
    return CliqueFamily(r, n, tuple(cliques))


def decomposition_to_mols(dec: Decomposition, host: MultipartiteGraph) -> MolsFamily:
    """Read a K_k-decomposition of a balanced complete k-partite host as
    k-2 complete pairwise orthogonal squares."""
    k = host.num_parts
    if dec.k != k:
        raise InputError(f"decomposition clique size {dec.k} != {k} parts")
    if not host.balanced():
        raise InputError("host parts must be balanced")
    n = len(host.parts[0])
    if host.graph.edge_count != (k * (k - 1) // 2) * n * n:
        raise InputError("host is not the complete multipartite graph")
    ok, why = verify(host.graph, dec)
    if not ok:
        raise InputError(f"not a decomposition of the host: {why}")
    vmap = host.part_index_map()
    grids = [[[None] * n for _ in range(n)] for _ in range(k - 2)]
    for c in dec.cliques:
        spots = dict(vmap[v] for v in c)
        i, j = spots[0], spots[1]
        for t in range(2, k):
            grids[t - 2][i][j] = spots[t] + 1
    squares = [PartialLatinSquare.from_rows(g) for g in grids]
    for t, sq in enumerate(squares):
        if not sq.is_complete():
            raise InputError(f"square {t} incomplete; decomposition misses cells")
    return validate_mols(squares)


def extend_cliques(cf: CliqueFamily, k: int, extra=None) -> CliqueFamily:
    """Grow every clique to size k inside a host enlarged by `extra` vertices
    per part, keeping the family edge-disjoint and each input clique inside
    its output clique.

    Frequently-hit vertices are set aside first; cliques meeting two of them
    extend through one reserved half of the new vertices, the rest extend
    through original vertices and the other half, always taking the
    least-used available vertex. Runs out of candidates only when the budget
    is genuinely too small, which raises InfeasibleError.
    """
    if k != cf.num_parts:
        raise InputError(f"target size {k} must equal the host part count {cf.num_parts}")
    m = len(cf.cliques)
    if extra is None:
        extra = _ceil_sqrt(64 * k * k * m)  # ceil(8k sqrt(m))
    if extra < 0:
        raise InputError("extra budget must be nonnegative")
    n = cf.part_size
    n2 = n + extra
    if m == 0:
        return CliqueFamily(k, n2, ())

    half = extra - extra // 2
    t_prime = range(n, n + half)
    t_second = range(n + half, n2)

    members = [list(c) for c in cf.cliques]
    cooccur = {}
    count = {}
    for c in members:
        for v in c:
            count[v] = count.get(v, 0) + 1
            cooccur.setdefault(v, set()).update(w for w in c if w != v)

    # set Q of the most clique-laden original vertices, chosen greedily
    q_size = _ceil_sqrt(m)
    q = []
    untouched = list(range(m))
    originals = [(p, i) for p in range(k) for i in range(n)]
    for _ in range(q_size):
        tally = {}
        for ci in untouched:
            for v in members[ci]:
                tally[v] = tally.get(v, 0) + 1
        pick = None
        for v in originals:
            if v in q:
                continue
            c = tally.get(v, 0)
            if pick is None or c > pick[0]:
                pick = (c, v)
        if pick is None:
            break
        q.append(pick[1])
        untouched = [ci for ci in untouched
                     if pick[1] not in members[ci]]
    qset = set(q)

    bad_idx = [i for i, c in enumerate(members) if sum(v in qset for v in c) >= 2]
    good_idx = [i for i in range(m) if i not in set(bad_idx)]

    def attach(ci, v):
        for w in members[ci]:
            cooccur.setdefault(v, set()).add(w)
            cooccur.setdefault(w, set()).add(v)
        members[ci].append(v)
        count[v] = count.get(v, 0) + 1

    def missing_parts(ci):
        have = {p for p, _ in members[ci]}
        return [p for p in range(k) if p not in have]

    for ci in bad_idx:
        for p in missing_parts(ci):
            cur = members[ci]
            chosen = None
            for i in t_prime:
                v = (p, i)
                if not (cooccur.get(v, set()) & set(cur)):
                    chosen = v
                    break
            if chosen is None:
                raise InfeasibleError(
                    f"reserved half exhausted extending clique {ci} in part {p}",
                    payload=cf,
                )
            attach(ci, chosen)

    for ci in good_idx:
        for p in missing_parts(ci):
            cur = set(members[ci])
            best = None
            for i in list(range(n)) + list(t_second):
                v = (p, i)
                if cooccur.get(v, set()) & cur:
                    continue
                key = (count.get(v, 0), i)
                if best is None or key < best[0]:
                    best = (key, v)
            if best is None:
                raise InfeasibleError(
                    f"no available vertex extending clique {ci} in part {p}",
                    payload=cf,
                )
            attach(ci, best[1])

    return CliqueFamily(k, n2, tuple(tuple(sorted(c)) for c in members))


# --------------------------------------------------------------------------
# Completion at the same order (used for the sharpness/threshold checks)


def complete_square(square: PartialLatinSquare, time_budget=None):
    """Exact completion of a partial square at its own order, or None.

    Works through the triangle-decomposition view of the order-n host.
    """
    n = square.n
    if any(s > n for _, _, s in square.filled_cells()):
        return None
    host = MultipartiteGraph.complete([n, n, n])
    forced = [(i, n + j, 2 * n + s - 1) for i, j, s in square.filled_cells()]
    edges = []
    for a, b, c in forced:
        edges += [(a, b), (a, c), (b, c)]
    residual = host.graph.with_edges_removed(edges)
    dec = find_kk_decomposition(residual, 3, time_budget)
    if dec is None:
        return None
    rows = [list(r) for r in square.cells]
    for c in dec.cliques:
        i = min(c)
        j = sorted(c)[1] - n
        s = max(c) - 2 * n + 1
        rows[i][j] = s
    return PartialLatinSquare.from_rows(rows)


# --------------------------------------------------------------------------
# Text formats


def _cell_token(s):
    return "*" if s is None else str(s)


def latin_to_text(square: PartialLatinSquare) -> str:
    lines = [f"latin {square.n}"]
    lines += [" ".join(_cell_token(s) for s in row) for row in square.cells]
    return "\n".join(lines) + "\n"


def _parse_rows(lines, n, start_ln):
    rows = []
    for off, (ln, line) in enumerate(lines):
        toks = line.split()
        if len(toks) != n:
            raise InputError(f"expected {n} cells, got {len(toks)}", line=ln)
        row = []
        for t in toks:
            if t == "*":
                row.append(None)
            else:
                try:
                    row.append(int(t))
                except ValueError:
                    raise InputError(f"bad cell token {t!r}", line=ln)
        rows.append(tuple(row))
    return rows


def latin_from_text(text: str) -> PartialLatinSquare:
    content = [(ln, raw.strip()) for ln, raw in enumerate(text.splitlines(), start=1)
               if raw.strip() and not raw.strip().startswith("#")]
    if not content:
        raise InputError("missing 'latin <n>' header")
    ln, header = content[0]
    parts = header.split()
    if len(parts) != 2 or parts[0] != "latin":
        raise InputError("expected header 'latin <n>'", line=ln)
    try:
        n = int(parts[1])
    except ValueError:
        raise InputError(f"bad order {parts[1]!r}", line=ln)
    if len(content) - 1 != n:
        raise InputError(f"expected {n} rows, got {len(content) - 1}", line=ln)
    rows = _parse_rows(content[1:], n, ln)
    return PartialLatinSquare(n, tuple(rows))


def mols_to_text(fam: MolsFamily) -> str:
    out = [f"mols {fam.n} {len(fam.squares)}"]
    for sq in fam.squares:
        out.append("")
        out += [" ".join(_cell_token(s) for s in row) for row in sq.cells]
    return "\n".join(out) + "\n"


def mols_from_text(text: str) -> MolsFamily:
    lines = list(enumerate(text.splitlines(), start=1))
    header = None
    for ln, raw in lines:
        s = raw.strip()
        if s and not s.startswith("#"):
            header = (ln, s)
            break
    if header is None:
        raise InputError("missing 'mols <n> <q>' header")
    ln, s = header
    parts = s.split()
    if len(parts) != 3 or parts[0] != "mols":
        raise InputError("expected header 'mols <n> <q>'", line=ln)
    try:
        n, q = int(parts[1]), int(parts[2])
    except ValueError:
        raise InputError("bad mols header numbers", line=ln)
    content = [(l, raw.strip()) for l, raw in lines
               if l > ln and raw.strip() and not raw.strip().startswith("#")]
    if len(content) != n * q:
        raise InputError(f"expected {q} squares of {n} rows, got {len(content)} rows")
    squares = []
    for t in range(q):
        rows = _parse_rows(content[t * n:(t + 1) * n], n, ln)
        squares.append(PartialLatinSquare(n, tuple(rows)))
    return validate_mols(squares)

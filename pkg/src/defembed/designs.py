"""Partial and complete block designs with blocks of size k covering pairs.

k = 3 gives partial/complete triple systems. Blocks are stored sorted and
serialized in lexicographic order so equal designs have equal files.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

from .errors import InputError, ValidationError
from .graphs import Decomposition, Graph, verify


def _norm_blocks(blocks):
    return tuple(sorted(tuple(sorted(b)) for b in blocks))


@dataclass(frozen=True, eq=False)
class PartialDesign:
    """Blocks of size k on points 0..n-1, every pair covered at most once."""

    n: int
    k: int
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", _norm_blocks(self.blocks))
        _check_partial(self.n, self.k, self.blocks)

    def __eq__(self, other):
        return (isinstance(other, PartialDesign)
                and (self.n, self.k, self.blocks) == (other.n, other.k, other.blocks))

    def __hash__(self):
        return hash((self.n, self.k, self.blocks))

    @property
    def pairs_covered(self) -> int:
        return len(self.blocks) * comb(self.k, 2)

    def is_complete(self) -> bool:
        return self.pairs_covered == comb(self.n, 2)

    def contains(self, other: "PartialDesign") -> bool:
        mine = set(self.blocks)
        return all(b in mine for b in other.blocks)


class CompleteDesign(PartialDesign):
    """Every pair covered exactly once; block count is C(n,2)/C(k,2)."""

    def __post_init__(self):
        super().__post_init__()
        want = comb(self.n, 2)
        if self.pairs_covered != want:
            raise ValidationError(
                f"{len(self.blocks)} blocks cover {self.pairs_covered} pairs, "
                f"a complete design on {self.n} points needs {want}"
            )


def _check_partial(n, k, blocks):
    if k < 3:
        raise ValidationError("block size must be at least 3")
    if n < 0:
        raise ValidationError("point count must be nonnegative")
    seen = {}
    for b in blocks:
        if len(b) != k or len(set(b)) != k:
            raise ValidationError(f"block {b} does not have {k} distinct points")
        for p in b:
            if not (0 <= p < n):
                raise ValidationError(f"point {p} out of range in block {b}")
        for pair in combinations(b, 2):
            if pair in seen:
                raise ValidationError(
                    f"pair {pair} covered by both {seen[pair]} and {b}"
                )
            seen[pair] = b


def validate_partial_design(n, k, blocks) -> PartialDesign:
    """Validated PartialDesign, or ValidationError naming the first bad pair."""
    return PartialDesign(n, k, _norm_blocks(blocks))


def design_admissible(n: int, k: int) -> bool:
    """Divisibility conditions (k-1) | (n-1) and C(k,2) | C(n,2).

    For k = 3 this is n = 1, 3 (mod 6). Necessary for a complete design at
    every order; sufficient only for large n, so this flag reports
    divisibility and nothing more.
    """
    if k < 3:
        raise InputError("block size must be at least 3")
    return (n - 1) % (k - 1) == 0 and comb(n, 2) % comb(k, 2) == 0


def design_to_graph(design: PartialDesign):
    """K_n minus the union of block cliques, plus the removed block list."""
    edges = []
    for b in design.blocks:
        edges.extend(combinations(b, 2))
    return Graph.complete(design.n).with_edges_removed(edges), design.blocks


def decomposition_to_design(n: int, k: int, dec: Decomposition) -> CompleteDesign:
    """Read a K_k-decomposition of K_n as a complete design."""
    if dec.k != k:
        raise InputError(f"decomposition has clique size {dec.k}, expected {k}")
    ok, why = verify(Graph.complete(n), dec)
    if not ok:
        raise InputError(f"not a decomposition of the complete graph: {why}")
    return CompleteDesign(n, k, dec.cliques)


# --------------------------------------------------------------------------
# Text format: "design <n> <k>", then one block per line, ascending points,
# blocks sorted lexicographically.


def design_to_text(design: PartialDesign) -> str:
    lines = [f"design {design.n} {design.k}"]
    lines += [" ".join(map(str, b)) for b in design.blocks]
    return "\n".join(lines) + "\n"


def design_from_text(text: str) -> PartialDesign:
    n = k = None
    blocks = []
    prev = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 3 or parts[0] != "design":
                raise InputError("expected header 'design <n> <k>'", line=ln)
            try:
                n, k = int(parts[1]), int(parts[2])
            except ValueError:
                raise InputError("bad design header numbers", line=ln)
            continue
        try:
            b = tuple(int(x) for x in parts)
        except ValueError:
            raise InputError(f"non-integer block {line!r}", line=ln)
        if len(b) != k:
            raise InputError(f"block has {len(b)} points, expected {k}", line=ln)
        if list(b) != sorted(set(b)):
            raise InputError(f"block {b} not strictly ascending", line=ln)
        if prev is not None and b <= prev:
            raise InputError(f"block {b} out of sorted order", line=ln)
        prev = b
        blocks.append(b)
    if n is None:
        raise InputError("missing 'design <n> <k>' header")
    return validate_partial_design(n, k, blocks)

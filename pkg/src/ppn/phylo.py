"""Distance matrices, UPGMA trees, Newick interchange, and tree metrics.

Trees are rooted node structures with optional branch lengths.  UPGMA
output is strictly binary and ultrametric; parsed trees may be
multifurcating.  The two comparison metrics (normalized Robinson-Foulds
and normalized quartet distance) operate on the unrooted form, so they
are insensitive to root placement.
"""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .core import EncodedSequence, Metric, PpnParams, PpnVector, distance, ppn_vector
from .errors import (
    DuplicateIdError,
    DuplicateLeafError,
    LeafSetMismatchError,
    NewickParseError,
    NonFiniteDistanceError,
    TooFewLeavesError,
    ValidationError,
)

__all__ = [
    "DistanceMatrix",
    "TreeNode",
    "PhyloTree",
    "pairwise_matrix",
    "upgma",
    "to_newick",
    "from_newick",
    "nrf",
    "nqd",
    "write_phylip",
    "read_phylip",
]

_NEWICK_RESERVED = set("():,;")


class DistanceMatrix:
    """Symmetric non-negative matrix over labeled taxa.

    Symmetry and the zero diagonal are exact; entries above and below
    the diagonal are the same float, never recomputed values that merely
    agree approximately.
    """

    __slots__ = ("labels", "values")

    def __init__(self, labels, values):
        labels = tuple(labels)
        values = np.asarray(values, dtype=np.float64)
        k = len(labels)
        if k < 2:
            raise ValidationError(f"distance matrix needs >= 2 taxa, got {k}")
        if len(set(labels)) != k:
            raise DuplicateIdError("distance matrix labels are not unique")
        if values.shape != (k, k):
            raise ValidationError(
                f"matrix shape {values.shape} does not match {k} labels"
            )
        if not np.array_equal(values, values.T, equal_nan=True):
            raise ValidationError("distance matrix is not exactly symmetric")
        if np.any(np.diagonal(values) != 0.0):
            raise ValidationError("distance matrix diagonal must be exactly zero")
        with np.errstate(invalid="ignore"):
            if np.any(values < 0.0):
                raise ValidationError("distance matrix entries must be non-negative")
        values = values.copy()
        values.flags.writeable = False
        self.labels = labels
        self.values = values

    @property
    def size(self) -> int:
        return len(self.labels)

    def __getitem__(self, pair):
        a, b = pair
        return float(self.values[self.labels.index(a), self.labels.index(b)])


def pairwise_matrix(
    seqs: list[EncodedSequence],
    params: PpnParams,
    threads: int | None = None,
    normalized: bool = False,
) -> DistanceMatrix:
    """All-pairs distance matrix over a sequence set.

    Each sequence's vector is computed exactly once (fanned out over a
    thread pool when ``threads`` != 1; results are assembled in input
    order, so the outcome is identical for any thread count).  Every
    pair is evaluated once and mirrored.
    """
    if len(seqs) < 2:
        raise ValidationError(f"need >= 2 sequences, got {len(seqs)}")
    ids = [s.id for s in seqs]
    if len(set(ids)) != len(ids):
        dup = next(i for i in ids if ids.count(i) > 1)
        raise DuplicateIdError(f"duplicate sequence id {dup!r}")

    def vector_for(seq: EncodedSequence) -> PpnVector:
        try:
            return ppn_vector(seq, params)
        except Exception as exc:
            raise type(exc)(f"record {seq.id!r}: {exc}") from exc

    if threads == 1 or len(seqs) == 1:
        vectors = [vector_for(s) for s in seqs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            vectors = list(pool.map(vector_for, seqs))

    k = len(seqs)
    values = np.zeros((k, k), dtype=np.float64)
    for i in range(k):
        for j in range(i + 1, k):
            d = distance(vectors[i], vectors[j], params.metric, normalized=normalized)
            values[i, j] = d
            values[j, i] = d
    return DistanceMatrix(ids, values)


@dataclass
class TreeNode:
    """One node of a rooted tree; leaves carry names, edges lengths."""

    name: str | None = None
    length: float | None = None
    children: list["TreeNode"] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


class PhyloTree:
    """A rooted tree with uniquely labeled leaves."""

    __slots__ = ("root",)

    def __init__(self, root: TreeNode):
        self.root = root
        names = self.leaf_names()
        if len(set(names)) != len(names):
            dup = next(n for n in names if names.count(n) > 1)
            raise DuplicateLeafError(f"duplicate leaf label {dup!r}")

    def walk(self):
        """Yield every node, parents before children."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(node.children)

    def leaf_names(self) -> list[str]:
        return [n.name for n in self.walk() if n.is_leaf]


# -- UPGMA -------------------------------------------------------------------

def upgma(matrix: DistanceMatrix) -> PhyloTree:
    """Average-linkage agglomerative clustering into an ultrametric tree.

    Cluster-to-cluster distances are the size-weighted means of member
    distances; a merge at distance d sits at height d/2, and children
    get branch lengths down to their own heights.  Ties on the minimum
    distance break toward the lexicographically smallest pair of cluster
    labels (a cluster is labeled by its smallest leaf), which makes the
    output deterministic and independent of input row order.
    """
    if not np.all(np.isfinite(matrix.values)):
        raise NonFiniteDistanceError("distance matrix has NaN or infinite entries")
    k = matrix.size
    work = matrix.values.copy()
    np.fill_diagonal(work, np.inf)
    active = list(range(k))
    key = list(matrix.labels)
    size = [1] * k
    height = [0.0] * k
    node = [TreeNode(name=label) for label in matrix.labels]
    # cached per-row minima keep each step near-linear; retired rows sit
    # at inf and never win
    row_min = work.min(axis=1)

    while len(active) > 1:
        best = float(row_min.min())
        # every cluster in a tied pair has row_min == best, so the
        # smallest key among them is the pair's first member, and its
        # smallest-keyed tied partner is the second; no pair list needed
        tied = np.nonzero(row_min == best)[0]
        a = int(min(tied, key=lambda i: key[i]))
        partners = np.nonzero(work[a] == best)[0]
        b = int(min(partners, key=lambda j: key[j]))
        if key[b] < key[a]:
            a, b = b, a
        h = best / 2.0
        first, second = node[a], node[b]
        first.length = h - height[a]
        second.length = h - height[b]
        node[a] = TreeNode(children=[first, second])
        active.remove(b)
        others = np.array([c for c in active if c != a], dtype=np.intp)
        old_to_a = work[others, a]
        old_to_b = work[others, b]
        merged_dist = (size[a] * old_to_a + size[b] * old_to_b) / (
            size[a] + size[b]
        )
        work[a, others] = merged_dist
        work[others, a] = merged_dist
        work[b, :] = np.inf
        work[:, b] = np.inf
        row_min[b] = np.inf
        size[a] += size[b]
        height[a] = h
        key[a] = min(key[a], key[b])
        row_min[a] = work[a].min() if len(active) > 1 else np.inf
        for pos, c in enumerate(others):
            d = merged_dist[pos]
            if d <= row_min[c]:
                row_min[c] = d
            elif row_min[c] in (old_to_a[pos], old_to_b[pos]):
                # the cached minimum may have lived in a retired entry
                row_min[c] = work[c].min()

    return PhyloTree(node[active[0]])


# -- Newick ------------------------------------------------------------------

def _fmt_length(x: float) -> str:
    return repr(float(x))


def _check_label(label: str) -> str:
    if not label:
        raise ValidationError("empty node label cannot be serialized")
    if any(c in _NEWICK_RESERVED or c.isspace() for c in label):
        raise ValidationError(
            f"label {label!r} contains whitespace or a reserved Newick character"
        )
    return label


def to_newick(tree: PhyloTree) -> str:
    """Serialize a tree to Newick text, terminating semicolon included.

    Iterative, so arbitrarily deep (caterpillar) trees serialize without
    hitting the interpreter recursion limit.
    """
    parts: list[str] = []
    stack: list[tuple[str, object]] = [("node", tree.root)]
    while stack:
        kind, payload = stack.pop()
        if kind == "text":
            parts.append(payload)
            continue
        node = payload
        if node.is_leaf:
            chunk = _check_label(node.name)
            if node.length is not None:
                chunk += ":" + _fmt_length(node.length)
            parts.append(chunk)
        else:
            tail = ")"
            if node.name is not None:
                tail += _check_label(node.name)
            if node.length is not None:
                tail += ":" + _fmt_length(node.length)
            stack.append(("text", tail))
            for i in range(len(node.children) - 1, -1, -1):
                stack.append(("node", node.children[i]))
                if i:
                    stack.append(("text", ","))
            parts.append("(")
    parts.append(";")
    return "".join(parts)


def from_newick(text: str) -> PhyloTree:
    """Parse Newick text; branch lengths and multifurcations optional.

    Errors carry the character offset at which parsing failed.  The
    parser keeps its own stack of open groups instead of recursing.
    """
    pos = 0
    n = len(text)

    def skip_ws():
        nonlocal pos
        while pos < n and text[pos].isspace():
            pos += 1

    def parse_label() -> str | None:
        nonlocal pos
        start = pos
        while pos < n and text[pos] not in _NEWICK_RESERVED and not text[pos].isspace():
            pos += 1
        return text[start:pos] if pos > start else None

    def parse_length() -> float | None:
        nonlocal pos
        skip_ws()
        if pos >= n or text[pos] != ":":
            return None
        pos += 1
        skip_ws()
        start = pos
        while pos < n and (text[pos] in "+-.eE" or text[pos].isdigit()):
            pos += 1
        try:
            return float(text[start:pos])
        except ValueError:
            raise NewickParseError("expected a branch length after ':'", start) from None

    frames: list[list[TreeNode]] = []
    completed: TreeNode | None = None
    need_element = True
    while True:
        skip_ws()
        if need_element:
            if pos < n and text[pos] == "(":
                pos += 1
                frames.append([])
                continue
            label = parse_label()
            if label is None:
                found = text[pos] if pos < n else "end of input"
                raise NewickParseError(f"expected a leaf label, found {found!r}", pos)
            completed = TreeNode(name=label)
            completed.length = parse_length()
            need_element = False
        if not frames:
            break
        frames[-1].append(completed)
        skip_ws()
        if pos >= n:
            raise NewickParseError("expected ',' or ')'", pos)
        ch = text[pos]
        if ch == ",":
            pos += 1
            need_element = True
        elif ch == ")":
            pos += 1
            completed = TreeNode(name=parse_label(), children=frames.pop())
            completed.length = parse_length()
        else:
            raise NewickParseError(f"expected ',' or ')', found {ch!r}", pos)

    skip_ws()
    if pos >= n or text[pos] != ";":
        raise NewickParseError("expected ';'", pos)
    pos += 1
    skip_ws()
    if pos < n:
        raise NewickParseError("unexpected text after ';'", pos)
    return PhyloTree(completed)


# -- unrooted structure ------------------------------------------------------

def _unrooted_adjacency(tree: PhyloTree):
    """Adjacency of the tree with every degree-2 vertex spliced out.

    Returns (adjacency dict over node ids, leaf name -> node id).  The
    root of a rooted binary tree has degree 2 and disappears, which is
    what makes the split and quartet metrics rooting-independent.
    """
    adj: dict[int, set[int]] = {}
    leaf_of: dict[str, int] = {}
    counter = 0
    ids: dict[int, int] = {}

    def nid(node: TreeNode) -> int:
        nonlocal counter
        key = id(node)
        if key not in ids:
            ids[key] = counter
            adj[counter] = set()
            counter += 1
        return ids[key]

    for node in tree.walk():
        u = nid(node)
        if node.is_leaf:
            leaf_of[node.name] = u
        for child in node.children:
            v = nid(child)
            adj[u].add(v)
            adj[v].add(u)

    leaf_ids = set(leaf_of.values())
    changed = True
    while changed:
        changed = False
        for u in list(adj):
            if len(adj[u]) == 2 and u not in leaf_ids:
                a, b = adj[u]
                adj[a].discard(u)
                adj[b].discard(u)
                adj[a].add(b)
                adj[b].add(a)
                del adj[u]
                changed = True
    return adj, leaf_of


def _splits(tree: PhyloTree) -> set[frozenset[str]]:
    """Nontrivial bipartitions of the leaf set, canonicalized.

    Each split is stored as the side not containing the reference leaf
    (the smallest label), so complementary descriptions collapse and the
    root edge never double-counts.
    """
    all_leaves = frozenset(tree.leaf_names())
    ref = min(all_leaves)
    order = list(tree.walk())
    below: dict[int, frozenset[str]] = {}
    for node in reversed(order):
        if node.is_leaf:
            below[id(node)] = frozenset((node.name,))
        else:
            below[id(node)] = frozenset().union(*(below[id(c)] for c in node.children))
    splits: set[frozenset[str]] = set()
    for node in order:
        if node is tree.root:
            continue
        side = below[id(node)]
        if ref in side:
            side = all_leaves - side
        if 2 <= len(side) <= len(all_leaves) - 2:
            splits.add(side)
    return splits


def _check_comparable(t1: PhyloTree, t2: PhyloTree) -> list[str]:
    s1, s2 = set(t1.leaf_names()), set(t2.leaf_names())
    if s1 != s2:
        only1 = sorted(s1 - s2)[:3]
        only2 = sorted(s2 - s1)[:3]
        raise LeafSetMismatchError(
            f"leaf sets differ (e.g. only in first: {only1}, only in second: {only2})"
        )
    if len(s1) < 4:
        raise TooFewLeavesError(f"tree comparison needs >= 4 leaves, got {len(s1)}")
    return sorted(s1)


def nrf(t1: PhyloTree, t2: PhyloTree) -> float:
    """Normalized Robinson-Foulds distance in [0, 1].

    The symmetric difference of the two nontrivial split sets, divided
    by their combined size (2(k-3) for two fully binary trees on k
    leaves).  Two trees with no nontrivial splits at all are identical
    stars and score 0.
    """
    _check_comparable(t1, t2)
    s1, s2 = _splits(t1), _splits(t2)
    denom = len(s1) + len(s2)
    if denom == 0:
        return 0.0
    return len(s1 ^ s2) / denom


def _leaf_distances(tree: PhyloTree, labels: list[str]) -> np.ndarray:
    """Pairwise edge-count distances between leaves, unrooted form."""
    adj, leaf_of = _unrooted_adjacency(tree)
    k = len(labels)
    out = np.zeros((k, k), dtype=np.int64)
    for i, label in enumerate(labels):
        start = leaf_of[label]
        dist = {start: 0}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        for j, other in enumerate(labels):
            out[i, j] = dist[leaf_of[other]]
    return out


def _quartet_category(D: np.ndarray, a: int, b: int, c: int, d: int) -> int:
    """Which pairing of {a,b,c,d} minimizes summed path lengths.

    Returns 0 for ab|cd, 1 for ac|bd, 2 for ad|bc, -1 when no strict
    minimum exists (the quartet is unresolved, as around a
    multifurcation).
    """
    s0 = int(D[a, b]) + int(D[c, d])
    s1 = int(D[a, c]) + int(D[b, d])
    s2 = int(D[a, d]) + int(D[b, c])
    m = min(s0, s1, s2)
    # plain ints: numpy bools add as logical OR and would hide ties
    hits = (s0 == m) + (s1 == m) + (s2 == m)
    if hits > 1:
        return -1
    return 0 if s0 == m else (1 if s1 == m else 2)


def nqd(t1: PhyloTree, t2: PhyloTree) -> float:
    """Normalized quartet distance in [0, 1].

    Every 4-subset of leaves induces one of three resolved topologies or
    an unresolved star in each tree; the distance is the fraction of
    quartets whose categories differ.  Unresolved matches only
    unresolved.  Brute force over all C(k, 4) quartets; fine for the
    tree sizes this toolkit targets.
    """
    labels = _check_comparable(t1, t2)
    k = len(labels)
    D1 = _leaf_distances(t1, labels)
    D2 = _leaf_distances(t2, labels)
    differ = 0
    for a, b, c, d in combinations(range(k), 4):
        if _quartet_category(D1, a, b, c, d) != _quartet_category(D2, a, b, c, d):
            differ += 1
    return differ / math.comb(k, 4)


# -- PHYLIP interchange ------------------------------------------------------

def write_phylip(matrix: DistanceMatrix, fh) -> None:
    """Write a relaxed PHYLIP matrix: count line, then label + full row.

    Entries are printed with full round-trip precision so that reading
    the file back reproduces the exact same doubles.
    """
    fh.write(f"{matrix.size}\n")
    for label, row in zip(matrix.labels, matrix.values):
        _check_label(label)
        fh.write(label)
        for v in row:
            fh.write(f"\t{float(v)!r}")
        fh.write("\n")


def read_phylip(source) -> DistanceMatrix:
    """Read a relaxed PHYLIP matrix written by :func:`write_phylip`."""
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    fh = open(source) if own else source
    try:
        lines = [line.strip() for line in fh if line.strip()]
    finally:
        if own:
            fh.close()
    if not lines:
        raise ValidationError("empty distance matrix file")
    try:
        k = int(lines[0])
    except ValueError:
        raise ValidationError(
            f"expected a taxon count on the first line, found {lines[0]!r}"
        ) from None
    if len(lines) - 1 != k:
        raise ValidationError(f"expected {k} matrix rows, found {len(lines) - 1}")
    labels = []
    values = np.zeros((k, k), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        parts = line.split()
        if len(parts) != k + 1:
            raise ValidationError(
                f"matrix row {i + 1}: expected a label and {k} values, "
                f"found {len(parts)} fields"
            )
        labels.append(parts[0])
        values[i] = [float(p) for p in parts[1:]]
    return DistanceMatrix(labels, values)

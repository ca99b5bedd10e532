# calcs/poset_calcs.py

import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import networkx as nx
import numpy as np

from .utils import InputFormatError, PosetError, expect_type

_logger = logging.getLogger(__name__)

ORIENTATION_LETTERS = ("f", "b")


@dataclass(frozen=True)
class Poset:
    labels: Tuple[str, ...]
    hasse: Tuple[Tuple[int, int], ...]
    leq: np.ndarray = field(compare=False, repr=False, hash=False)
    up_mask: Tuple[int, ...] = field(init=False, compare=False, repr=False, hash=False)
    down_mask: Tuple[int, ...] = field(init=False, compare=False, repr=False, hash=False)
    successors: Tuple[Tuple[int, ...], ...] = field(init=False, compare=False, repr=False, hash=False)
    predecessors: Tuple[Tuple[int, ...], ...] = field(init=False, compare=False, repr=False, hash=False)
    index: Dict[str, int] = field(init=False, compare=False, repr=False, hash=False)

    def __post_init__(self):
        n = len(self.labels)
        up = tuple(sum(1 << y for y in range(n) if self.leq[x, y]) for x in range(n))
        down = tuple(sum(1 << y for y in range(n) if self.leq[y, x]) for x in range(n))
        succ = tuple(tuple(b for a, b in self.hasse if a == x) for x in range(n))
        pred = tuple(tuple(a for a, b in self.hasse if b == x) for x in range(n))
        object.__setattr__(self, "up_mask", up)
        object.__setattr__(self, "down_mask", down)
        object.__setattr__(self, "successors", succ)
        object.__setattr__(self, "predecessors", pred)
        object.__setattr__(self, "index", {label: i for i, label in enumerate(self.labels)})

    @property
    def n(self) -> int:
        return len(self.labels)

    def le(self, x: int, y: int) -> bool:
        return bool(self.leq[x, y])

    def lt(self, x: int, y: int) -> bool:
        return x != y and bool(self.leq[x, y])

    def up_set(self, x: int) -> Tuple[int, ...]:
        return bits_to_members(self.up_mask[x])

    def down_set(self, x: int) -> Tuple[int, ...]:
        return bits_to_members(self.down_mask[x])

    def indices(self, labels: Iterable[str]) -> Tuple[int, ...]:
        out = []
        for label in labels:
            if label not in self.index:
                raise PosetError(f"Unknown element label {label!r}.")
            out.append(self.index[label])
        return tuple(sorted(set(out)))

    def names(self, members: Iterable[int]) -> List[str]:
        return [self.labels[i] for i in members]

    def hasse_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(self.hasse)
        return graph


@dataclass(frozen=True, order=True)
class Interval:
    size: int
    members: Tuple[int, ...]

    @classmethod
    def of(cls, members: Iterable[int]) -> "Interval":
        ordered = tuple(sorted(set(members)))
        return cls(size=len(ordered), members=ordered)

    def mask(self) -> int:
        return members_to_bits(self.members)

    def labels(self, p: Poset) -> List[str]:
        return p.names(self.members)

    def __contains__(self, x: int) -> bool:
        return x in self.members


@dataclass(frozen=True)
class SubposetEmbedding:
    sub: Poset
    host: Poset
    map: Tuple[int, ...]

    def image(self, members: Iterable[int]) -> Tuple[int, ...]:
        return tuple(sorted(self.map[i] for i in members))

    def preimage(self, members: Iterable[int]) -> Tuple[int, ...]:
        inverse = {h: s for s, h in enumerate(self.map)}
        return tuple(sorted(inverse[h] for h in members if h in inverse))


def bits_to_members(mask: int) -> Tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def members_to_bits(members: Iterable[int]) -> int:
    mask = 0
    for i in members:
        mask |= 1 << i
    return mask


def _hasse_from_leq(leq: np.ndarray) -> Tuple[Tuple[int, int], ...]:
    n = leq.shape[0]
    strict = leq & ~np.eye(n, dtype=bool)
    through = (strict.astype(np.int64) @ strict.astype(np.int64)) > 0
    cover = strict & ~through
    return tuple((int(a), int(b)) for a, b in zip(*np.nonzero(cover)))


def _poset_from_leq(labels: Sequence[str], leq: np.ndarray) -> Poset:
    leq = np.array(leq, dtype=bool)
    return Poset(labels=tuple(labels), hasse=_hasse_from_leq(leq), leq=leq)


def poset_from_relations(labels: Sequence[str], pairs: Iterable[Tuple[str, str]]) -> Poset:
    """
    Builds a poset from element labels and any generating set of order relations.

    Parameters:
    - labels: Unique element labels, in the order that fixes element indices.
    - pairs: Relations (a, b) meaning a <= b; closed reflexively and transitively.

    Returns:
    - Poset whose Hasse edges are the transitive reduction of the relations.
    """
    labels = [str(label) for label in labels]
    if len(set(labels)) != len(labels):
        dupes = sorted({label for label in labels if labels.count(label) > 1})
        raise PosetError(f"Element labels must be unique, repeated: {dupes}.")
    index = {label: i for i, label in enumerate(labels)}

    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(labels)))
    for a, b in pairs:
        for label in (a, b):
            if label not in index:
                raise PosetError(f"Relation mentions unknown element {label!r}.")
        if a != b:
            graph.add_edge(index[a], index[b])

    if not nx.is_directed_acyclic_graph(graph):
        cycle = nx.find_cycle(graph)
        witness = " -> ".join(labels[u] for u, _ in cycle) + f" -> {labels[cycle[0][0]]}"
        raise PosetError(f"Relations contain a cycle ({witness}); the order is not antisymmetric.")

    closure = nx.transitive_closure_dag(graph)
    leq = np.eye(len(labels), dtype=bool)
    for a, b in closure.edges():
        leq[a, b] = True
    reduction = nx.transitive_reduction(graph)
    hasse = tuple(sorted((int(a), int(b)) for a, b in reduction.edges()))
    return Poset(labels=tuple(labels), hasse=hasse, leq=leq)


def opposite(p: Poset) -> Poset:
    """
    The opposite poset: same labels, order reversed.
    """
    return Poset(
        labels=p.labels,
        hasse=tuple(sorted((b, a) for a, b in p.hasse)),
        leq=p.leq.T.copy(),
    )


def convex_hull_mask(p: Poset, mask: int) -> int:
    above = 0
    below = 0
    for x in bits_to_members(mask):
        above |= p.up_mask[x]
        below |= p.down_mask[x]
    return above & below


def convex_hull(p: Poset, s: Iterable[int]) -> Tuple[int, ...]:
    """
    All elements lying between two elements of s.

    Parameters:
    - p: Host poset.
    - s: Nonempty subset of element indices.

    Returns:
    - Sorted tuple {x | a <= x <= b for some a, b in s}; always convex.
    """
    s = tuple(s)
    if not s:
        raise ValueError("Convex hull of the empty set is undefined.")
    return bits_to_members(convex_hull_mask(p, members_to_bits(s)))


def is_convex(p: Poset, s: Iterable[int]) -> bool:
    mask = members_to_bits(s)
    return mask == 0 or convex_hull_mask(p, mask) == mask


def _connected_mask(p: Poset, mask: int) -> bool:
    members = bits_to_members(mask)
    if not members:
        return False
    seen = 1 << members[0]
    queue = deque([members[0]])
    while queue:
        x = queue.popleft()
        comparable = (p.up_mask[x] | p.down_mask[x]) & mask & ~seen
        for y in bits_to_members(comparable):
            seen |= 1 << y
            queue.append(y)
    return seen == mask


def connected_components(p: Poset, s: Iterable[int]) -> List[Tuple[int, ...]]:
    """
    Connected components of the full subposet on s, in canonical order.
    """
    remaining = members_to_bits(s)
    components = []
    while remaining:
        start = bits_to_members(remaining)[0]
        seen = 1 << start
        queue = deque([start])
        while queue:
            x = queue.popleft()
            comparable = (p.up_mask[x] | p.down_mask[x]) & remaining & ~seen
            for y in bits_to_members(comparable):
                seen |= 1 << y
                queue.append(y)
        components.append(bits_to_members(seen))
        remaining &= ~seen
    return sorted(components, key=lambda c: (len(c), c))


def is_interval(p: Poset, s: Iterable[int]) -> bool:
    """
    Checks the interval condition: nonempty, convex in p, connected as a poset.

    Parameters:
    - p: Host poset.
    - s: Subset of element indices.

    Returns:
    - True iff s is an interval of p.
    """
    mask = members_to_bits(s)
    if mask == 0:
        return False
    return convex_hull_mask(p, mask) == mask and _connected_mask(p, mask)


def enumerate_intervals(p: Poset) -> List[Interval]:
    """
    Enumerates all intervals of p by growing connected convex sets.

    Each set is grown by one Hasse-adjacent element and closed convexly; every
    interval is reached from any of its singletons this way.

    Parameters:
    - p: Poset.

    Returns:
    - List of Interval in canonical order (size, then member list).
    """
    neighbours = [0] * p.n
    for a, b in p.hasse:
        neighbours[a] |= 1 << b
        neighbours[b] |= 1 << a

    seen = set()
    queue = deque()
    for x in range(p.n):
        seen.add(1 << x)
        queue.append(1 << x)
    while queue:
        mask = queue.popleft()
        frontier = 0
        for x in bits_to_members(mask):
            frontier |= neighbours[x]
        frontier &= ~mask
        for y in bits_to_members(frontier):
            grown = convex_hull_mask(p, mask | (1 << y))
            if grown not in seen:
                seen.add(grown)
                queue.append(grown)

    intervals = sorted(Interval.of(bits_to_members(mask)) for mask in seen)
    _logger.debug("Enumerated %d intervals on %d elements", len(intervals), p.n)
    return intervals


def enumerate_intervals_bruteforce(p: Poset) -> List[Interval]:
    """
    Scans all 2^n - 1 nonempty subsets with the definitional interval test.
    """
    found = [
        Interval.of(bits_to_members(mask))
        for mask in range(1, 1 << p.n)
        if is_interval(p, bits_to_members(mask))
    ]
    return sorted(found)


def full_subposet(p: Poset, s: Iterable[int]) -> SubposetEmbedding:
    """
    The full subposet on s with its inclusion into p.

    Parameters:
    - p: Host poset.
    - s: Nonempty subset of element indices.

    Returns:
    - SubposetEmbedding whose sub carries the induced order.
    """
    members = tuple(sorted(set(s)))
    if not members:
        raise ValueError("A full subposet needs at least one element.")
    leq = p.leq[np.ix_(members, members)]
    sub = _poset_from_leq([p.labels[i] for i in members], leq)
    return SubposetEmbedding(sub=sub, host=p, map=members)


def identity_embedding(p: Poset) -> SubposetEmbedding:
    return SubposetEmbedding(sub=p, host=p, map=tuple(range(p.n)))


def is_isomorphic(p: Poset, q: Poset) -> bool:
    """
    Label-free isomorphism of posets via their Hasse digraphs.
    """
    if p.n != q.n or len(p.hasse) != len(q.hasse):
        return False
    return nx.is_isomorphic(p.hasse_graph(), q.hasse_graph())


############################################################
# Named families


def _check_word(word: str, length: int, family: str) -> str:
    if len(word) != length:
        raise PosetError(f"{family} needs an orientation word of length {length}, got {len(word)} ({word!r}).")
    bad = sorted(set(word) - set(ORIENTATION_LETTERS))
    if bad:
        raise PosetError(f"Orientation letters must be 'f' or 'b', got {bad}.")
    return word


def _oriented(a: str, b: str, letter: str) -> Tuple[str, str]:
    return (a, b) if letter == "f" else (b, a)


def make_a_n(n: int, orientation: str = "") -> Poset:
    """
    A_n-type poset 1 - 2 - ... - n; letter i of the word orients edge (i, i+1),
    'f' meaning i -> i+1. An empty word means equioriented.
    """
    if n < 1:
        raise PosetError(f"A_n needs n >= 1, got {n}.")
    word = _check_word(orientation or "f" * (n - 1), n - 1, "A_n")
    labels = [str(i) for i in range(1, n + 1)]
    pairs = [_oriented(labels[i], labels[i + 1], word[i]) for i in range(n - 1)]
    return poset_from_relations(labels, pairs)


def zigzag_word(n: int) -> str:
    return "".join("f" if i % 2 == 0 else "b" for i in range(n - 1))


def make_d4(orientation: str = "fbf") -> Poset:
    """
    D_4-type poset on 1, 2, 3, 4 with centre 3; the word orients the edges
    (1,3), (2,3), (3,4) in that order. The default 'fbf' is 1 -> 3, 3 -> 2, 3 -> 4.
    """
    word = _check_word(orientation, 3, "D_4")
    labels = ["1", "2", "3", "4"]
    edges = [("1", "3"), ("2", "3"), ("3", "4")]
    return poset_from_relations(labels, [_oriented(a, b, w) for (a, b), w in zip(edges, word)])


def make_c(m: int, l: int) -> Poset:
    """
    C(m, l): a global minimum 'bot' and maximum 'top' joined by the chains
    a1 < ... < am and b1 < ... < bl.
    """
    if m < 1 or l < 1:
        raise PosetError(f"C(m, l) needs m, l >= 1, got ({m}, {l}).")
    a_side = [f"a{i}" for i in range(1, m + 1)]
    b_side = [f"b{j}" for j in range(1, l + 1)]
    labels = ["bot"] + a_side + b_side + ["top"]
    pairs = []
    for chain in (a_side, b_side):
        path = ["bot"] + chain + ["top"]
        pairs.extend(zip(path, path[1:]))
    return poset_from_relations(labels, pairs)


def grid_label(i: int, j: int, rows: int, cols: int) -> str:
    return f"{i}{j}" if rows <= 10 and cols <= 10 else f"{i},{j}"


def make_grid(rows: int, cols: int) -> Poset:
    """
    Commutative grid {0..rows-1} x {0..cols-1} with the product order.
    """
    if rows < 1 or cols < 1:
        raise PosetError(f"Grid needs positive sizes, got ({rows}, {cols}).")
    labels = [grid_label(i, j, rows, cols) for i in range(rows) for j in range(cols)]
    pairs = []
    for i in range(rows):
        for j in range(cols):
            if i + 1 < rows:
                pairs.append((grid_label(i, j, rows, cols), grid_label(i + 1, j, rows, cols)))
            if j + 1 < cols:
                pairs.append((grid_label(i, j, rows, cols), grid_label(i, j + 1, rows, cols)))
    return poset_from_relations(labels, pairs)


def make_ladder(m: int, orientation: str = "") -> Poset:
    """
    Commutative ladder with lower row l1..lm, upper row u1..um, rungs li -> ui,
    and both rows oriented by the same word ('f' meaning i -> i+1).
    """
    if m < 1:
        raise PosetError(f"Ladder needs m >= 1, got {m}.")
    word = _check_word(orientation or "f" * (m - 1), m - 1, "Ladder")
    lower = [f"l{i}" for i in range(1, m + 1)]
    upper = [f"u{i}" for i in range(1, m + 1)]
    pairs = list(zip(lower, upper))
    for row in (lower, upper):
        pairs.extend(_oriented(row[i], row[i + 1], word[i]) for i in range(m - 1))
    return poset_from_relations(lower + upper, pairs)


def make_igusa(reduced: bool = False) -> Poset:
    """
    Seven-element poset bot < l1, r1 < c < l2, r2 < top (projective global
    dimension 2); with reduced=True the centre c is removed, giving the
    six-element full subposet of projective global dimension 3.
    """
    pairs = [("bot", "l1"), ("bot", "r1"), ("l2", "top"), ("r2", "top")]
    if reduced:
        labels = ["bot", "l1", "r1", "l2", "r2", "top"]
        pairs += [(a, b) for a in ("l1", "r1") for b in ("l2", "r2")]
    else:
        labels = ["bot", "l1", "r1", "c", "l2", "r2", "top"]
        pairs += [("l1", "c"), ("r1", "c"), ("c", "l2"), ("c", "r2")]
    return poset_from_relations(labels, pairs)


FAMILY_KINDS = ("A", "D4", "C", "grid", "ladder", "igusa", "igusa-reduced")


def make_family(kind: str, n: int = 0, m: int = 0, l: int = 0, rows: int = 0, cols: int = 0,
                orientation: str = "") -> Poset:
    """
    Dispatches to the named family constructors.

    Parameters:
    - kind: One of FAMILY_KINDS.
    - n: Size of A_n.
    - m, l: Chain lengths of C(m, l); m is also the ladder length.
    - rows, cols: Grid sizes.
    - orientation: Orientation word for A_n, D_4 and ladders.

    Returns:
    - Poset.
    """
    if kind == "A":
        return make_a_n(n, orientation)
    if kind == "D4":
        return make_d4(orientation or "fbf")
    if kind == "C":
        return make_c(m, l)
    if kind == "grid":
        return make_grid(rows, cols)
    if kind == "ladder":
        return make_ladder(m, orientation)
    if kind == "igusa":
        return make_igusa(False)
    if kind == "igusa-reduced":
        return make_igusa(True)
    raise PosetError(f"Unknown family {kind!r}; expected one of {', '.join(FAMILY_KINDS)}.")


def all_orientations(edges: int) -> List[str]:
    return ["".join(word) for word in itertools.product(ORIENTATION_LETTERS, repeat=edges)]


def random_poset(n: int, rng: np.random.Generator, density: float = 0.4, connected: bool = True) -> Poset:
    """
    Random poset on n elements: a random DAG along a shuffled linear order, closed.

    Parameters:
    - n: Number of elements.
    - rng: numpy random generator.
    - density: Probability of each forward relation.
    - connected: Resample until the poset is connected.

    Returns:
    - Poset with labels 'x0'..'x{n-1}'.
    """
    labels = [f"x{i}" for i in range(n)]
    while True:
        order = rng.permutation(n)
        pairs = [
            (labels[order[i]], labels[order[j]])
            for i in range(n) for j in range(i + 1, n)
            if rng.random() < density
        ]
        p = poset_from_relations(labels, pairs)
        if not connected or len(connected_components(p, range(n))) == 1:
            return p


############################################################
# JSON documents


def poset_to_doc(p: Poset) -> Dict[str, Any]:
    return {
        "elements": list(p.labels),
        "relations": [[p.labels[a], p.labels[b]] for a, b in p.hasse],
    }


def poset_from_doc(doc: Any, path: str = "poset") -> Poset:
    """
    Parses {"elements": [...], "relations": [[a, b], ...]}.
    """
    expect_type(doc, dict, path)
    for key in ("elements", "relations"):
        if key not in doc:
            raise InputFormatError(f"missing key '{key}'", path=path)
    elements = expect_type(doc["elements"], list, f"{path}.elements")
    for i, label in enumerate(elements):
        expect_type(label, str, f"{path}.elements[{i}]")
    relations = expect_type(doc["relations"], list, f"{path}.relations")
    pairs = []
    for i, pair in enumerate(relations):
        if not isinstance(pair, list) or len(pair) != 2 or not all(isinstance(x, str) for x in pair):
            raise InputFormatError("relation must be a pair of labels", path=f"{path}.relations[{i}]")
        pairs.append((pair[0], pair[1]))
    return poset_from_relations(elements, pairs)

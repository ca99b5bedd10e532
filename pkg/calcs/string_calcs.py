# calcs/string_calcs.py

import logging
from dataclasses import dataclass, field
from math import comb
from typing import Dict, List, Optional, Tuple

import networkx as nx

from .module_calcs import PersModule, interval_module
from .poset_calcs import Interval, Poset, connected_components, is_interval, make_c
from .utils import InvariantError, PosetError

_logger = logging.getLogger(__name__)

SHAPE_A = "A"
SHAPE_C = "C"
SHAPE_UNION = "union"
SHAPE_NONE = "none"

FAMILIES = ("i", "ii", "iii", "iv", "v")


@dataclass
class ShapeVerdict:
    accepted: bool
    shape: str
    params: Dict[str, object] = field(default_factory=dict)
    witness: str = ""
    components: List["ShapeVerdict"] = field(default_factory=list)

    def describe(self) -> str:
        if self.shape == SHAPE_A:
            word = self.params["orientation"]
            return f"A_{self.params['n']}({word})" if word else f"A_{self.params['n']}"
        if self.shape == SHAPE_C:
            return f"C({self.params['m']},{self.params['l']})"
        if self.shape == SHAPE_UNION:
            return " + ".join(c.describe() for c in self.components)
        return f"rejected: {self.witness}"

    def to_doc(self) -> Dict[str, object]:
        doc = {"accepted": self.accepted, "shape": self.shape, "params": self.params, "witness": self.witness}
        if self.components:
            doc["components"] = [c.to_doc() for c in self.components]
        return doc


def _path_orientation(p: Poset, graph: nx.Graph, nodes: List[int]) -> Tuple[str, List[str]]:
    ends = sorted(v for v in nodes if graph.degree(v) == 1)
    readings = []
    for start in ends:
        walk = [start]
        while len(walk) < len(nodes):
            walk.append(next(v for v in graph.neighbors(walk[-1]) if v not in walk[-2:-1] and v != walk[-1]))
        word = "".join("f" if p.le(a, b) else "b" for a, b in zip(walk, walk[1:]))
        readings.append((word, [p.labels[v] for v in walk]))
    return min(readings)


def _classify_component(p: Poset, nodes: List[int]) -> ShapeVerdict:
    if len(nodes) == 1:
        return ShapeVerdict(True, SHAPE_A, {"n": 1, "orientation": "", "path": [p.labels[nodes[0]]]})
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from((a, b) for a, b in p.hasse if a in graph and b in graph)

    for v in nodes:
        if graph.degree(v) >= 3:
            return ShapeVerdict(False, SHAPE_NONE,
                                witness=f"element {p.labels[v]} has Hasse degree {graph.degree(v)}")

    if graph.number_of_edges() == len(nodes) - 1:
        word, path = _path_orientation(p, graph, nodes)
        return ShapeVerdict(True, SHAPE_A, {"n": len(nodes), "orientation": word, "path": path})

    sources = [v for v in nodes if not any(b == v for a, b in p.hasse if a in graph)]
    sinks = [v for v in nodes if not any(a == v for a, b in p.hasse if b in graph)]
    if len(sources) != 1 or len(sinks) != 1:
        return ShapeVerdict(False, SHAPE_NONE,
                            witness=f"Hasse cycle with {len(sources)} sources and {len(sinks)} sinks")
    bottom, summit = sources[0], sinks[0]
    lengths = sorted((len(path) - 1 for path in nx.all_simple_paths(graph, bottom, summit)), reverse=True)
    m, l = lengths[0] - 1, lengths[1] - 1
    return ShapeVerdict(True, SHAPE_C, {"m": m, "l": l, "bottom": p.labels[bottom], "top": p.labels[summit]})


def classify_zero_gldim(p: Poset) -> ShapeVerdict:
    """
    Decides whether the interval resolution global dimension is zero from the
    Hasse diagram alone: every component must be an oriented path, or a cycle
    with a single source and a single sink.

    Parameters:
    - p: Poset, possibly disconnected.

    Returns:
    - ShapeVerdict; C(m, l) is reported with m >= l, and a disconnected poset
      gets a union verdict accepted iff every component is.
    """
    components = connected_components(p, range(p.n))
    verdicts = [_classify_component(p, list(c)) for c in components]
    if len(verdicts) == 1:
        return verdicts[0]
    accepted = all(v.accepted for v in verdicts)
    witness = next((v.witness for v in verdicts if not v.accepted), "")
    return ShapeVerdict(accepted, SHAPE_UNION if accepted else SHAPE_NONE, witness=witness, components=verdicts)


############################################################
# Strings on the quiver of C(m, l)


@dataclass(frozen=True)
class Letter:
    arrow: str
    inverse: bool = False

    def flipped(self) -> "Letter":
        return Letter(self.arrow, not self.inverse)

    def __str__(self) -> str:
        return f"{self.arrow}^-1" if self.inverse else self.arrow


@dataclass(frozen=True)
class StringWord:
    start: str
    letters: Tuple[Letter, ...] = ()

    def __str__(self) -> str:
        return " ".join(str(x) for x in self.letters) if self.letters else f"e_{self.start}"


@dataclass(frozen=True)
class CmlCombinatorics:
    m: int
    l: int

    def __post_init__(self):
        if self.m < 1 or self.l < 1:
            raise PosetError(f"C(m, l) needs m, l >= 1, got ({self.m}, {self.l}).")

    @property
    def vertices(self) -> List[str]:
        return ["bot"] + [f"a{i}" for i in range(1, self.m + 1)] + [f"b{j}" for j in range(1, self.l + 1)] + ["top"]

    @property
    def arrows(self) -> Dict[str, Tuple[str, str]]:
        """
        alpha_i runs from the i-th to the (i+1)-th vertex of bot, a1, ..., am, top;
        beta_j likewise through b1, ..., bl.
        """
        out = {}
        for name, chain in (("alpha", [f"a{i}" for i in range(1, self.m + 1)]),
                            ("beta", [f"b{j}" for j in range(1, self.l + 1)])):
            path = ["bot"] + chain + ["top"]
            for k in range(len(path) - 1):
                out[f"{name}{k}"] = (path[k], path[k + 1])
        return out

    def poset(self) -> Poset:
        return make_c(self.m, self.l)

    def forbidden(self) -> List[Tuple[Letter, ...]]:
        alpha = tuple(Letter(f"alpha{k}") for k in range(self.m + 1))
        beta = tuple(Letter(f"beta{k}") for k in range(self.l + 1))
        return [alpha, beta, inverse_letters(alpha), inverse_letters(beta)]

    def source(self, letter: Letter) -> str:
        s, t = self.arrows[letter.arrow]
        return t if letter.inverse else s

    def target(self, letter: Letter) -> str:
        s, t = self.arrows[letter.arrow]
        return s if letter.inverse else t


def inverse_letters(letters: Tuple[Letter, ...]) -> Tuple[Letter, ...]:
    return tuple(x.flipped() for x in reversed(letters))


def end_vertex(c: CmlCombinatorics, w: StringWord) -> str:
    return c.target(w.letters[-1]) if w.letters else w.start


def invert(c: CmlCombinatorics, w: StringWord) -> StringWord:
    return StringWord(end_vertex(c, w), inverse_letters(w.letters))


def _key(w: StringWord) -> Tuple:
    return (len(w.letters), tuple((x.arrow, x.inverse) for x in w.letters), w.start)


def representative(c: CmlCombinatorics, w: StringWord) -> StringWord:
    return min(w, invert(c, w), key=_key)


def is_string(c: CmlCombinatorics, w: StringWord) -> bool:
    """
    Checks composability, no letter next to its own inverse, and no forbidden
    full path (or its inverse) as a subword.
    """
    at = w.start
    for k, letter in enumerate(w.letters):
        if c.source(letter) != at:
            return False
        if k and w.letters[k - 1] == letter.flipped():
            return False
        at = c.target(letter)
    for bad in c.forbidden():
        for k in range(len(w.letters) - len(bad) + 1):
            if w.letters[k:k + len(bad)] == bad:
                return False
    return True


def _outgoing(c: CmlCombinatorics, vertex: str) -> List[Letter]:
    out = []
    for name, (s, t) in c.arrows.items():
        if s == vertex:
            out.append(Letter(name))
        if t == vertex:
            out.append(Letter(name, True))
    return out


def _walk_strings(c: CmlCombinatorics, limit: int) -> List[StringWord]:
    found = []

    def extend(w: StringWord):
        found.append(w)
        if len(w.letters) >= limit:
            return
        for letter in _outgoing(c, end_vertex(c, w)):
            candidate = StringWord(w.start, w.letters + (letter,))
            if is_string(c, candidate):
                extend(candidate)

    for vertex in c.vertices:
        extend(StringWord(vertex))
    return found


def find_bands(c: CmlCombinatorics, limit: Optional[int] = None) -> List[StringWord]:
    """
    Closed strings whose square is again a string, up to the given length.
    """
    limit = limit or 2 * (c.m + c.l + 2)
    bands = []
    for w in _walk_strings(c, limit):
        if w.letters and end_vertex(c, w) == w.start:
            square = StringWord(w.start, w.letters + w.letters)
            if is_string(c, square):
                bands.append(w)
    return bands


def enumerate_strings(c: CmlCombinatorics) -> List[StringWord]:
    """
    One representative per string and its inverse, ordered by length and then letters.

    Parameters:
    - c: CmlCombinatorics.

    Returns:
    - List of StringWord, trivial strings included.
    """
    limit = 2 * (c.m + c.l + 2)
    bands = find_bands(c, limit)
    if bands:
        raise InvariantError(f"Unexpected band {bands[0]} on C({c.m},{c.l}).")
    unique = {representative(c, w) for w in _walk_strings(c, limit)}
    strings = sorted(unique, key=_key)
    _logger.debug("C(%d,%d): %d strings", c.m, c.l, len(strings))
    return strings


def string_support(c: CmlCombinatorics, w: StringWord) -> List[str]:
    vertices = {w.start}
    for letter in w.letters:
        vertices.add(c.target(letter))
    return sorted(vertices, key=c.vertices.index)


def string_to_interval(c: CmlCombinatorics, w: StringWord, p: Optional[Poset] = None) -> Interval:
    """
    The vertex support of a string, as an interval of C(m, l).
    """
    p = p or c.poset()
    interval = Interval.of(p.indices(string_support(c, w)))
    if not is_interval(p, interval.members):
        raise InvariantError(f"Support of {w} is not an interval.")
    return interval


def string_module(c: CmlCombinatorics, w: StringWord, field_p: int = 2) -> PersModule:
    p = c.poset()
    return interval_module(p, string_to_interval(c, w, p), field_p)


def string_family(c: CmlCombinatorics, w: StringWord) -> str:
    """
    Which of the five families a string belongs to: trivial, alpha segment,
    beta segment, joined through bot, or joined through top.
    """
    if not w.letters:
        return "i"
    kinds = {x.arrow.rstrip("0123456789") for x in w.letters}
    if kinds == {"alpha"}:
        return "ii"
    if kinds == {"beta"}:
        return "iii"
    at = w.start
    for k, letter in enumerate(w.letters):
        at = c.target(letter)
        nxt = w.letters[k + 1] if k + 1 < len(w.letters) else None
        if nxt is not None and nxt.arrow.rstrip("0123456789") != letter.arrow.rstrip("0123456789"):
            return "iv" if at == "bot" else "v"
    raise InvariantError(f"Cannot place string {w} in a family.")


def family_counts(m: int, l: int) -> Dict[str, int]:
    """
    Closed-form size of each string family of C(m, l).
    """
    return {
        "i": m + l + 2,
        "ii": comb(m + 2, 2) - 1,
        "iii": comb(l + 2, 2) - 1,
        "iv": m * l,
        "v": m * l,
    }


def count_indecomposables(m: int, l: int) -> int:
    """
    Number of indecomposable modules over the incidence algebra of C(m, l),
    all of them interval modules: (m^2 + 4ml + l^2 + 5m + 5l + 6) / 2.
    """
    if m < 1 or l < 1:
        raise PosetError(f"C(m, l) needs m, l >= 1, got ({m}, {l}).")
    return (m * m + 4 * m * l + l * l + 5 * m + 5 * l + 6) // 2

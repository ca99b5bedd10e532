# calcs/approx_calcs.py

import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg_calcs as la
from .module_calcs import (
    HOM_SOLVES,
    HomSpace,
    IntervalMultiset,
    Morphism,
    PersModule,
    assemble,
    compose,
    extend_by_zero,
    extend_morphism_by_zero,
    hom_space,
    interval_module,
    kernel,
    matrix_to_rows,
    restrict,
    support,
)
from .poset_calcs import Interval, Poset, convex_hull, enumerate_intervals, full_subposet
from .utils import CapExceededError, InvariantError, Settings, StepLimitError

_logger = logging.getLogger(__name__)


class IntervalCatalog:
    """
    Intervals of one poset over one field, their modules, and the hom spaces
    between interval modules, all computed once.
    """

    def __init__(self, host: Poset, p: int):
        self.host = host
        self.p = p
        self.intervals = enumerate_intervals(host)
        self._modules: Dict[Interval, PersModule] = {}
        self._links: Dict[Tuple[Interval, Interval], np.ndarray] = {}

    def module(self, interval: Interval) -> PersModule:
        if interval not in self._modules:
            self._modules[interval] = interval_module(self.host, interval, self.p)
        return self._modules[interval]

    def links(self, source: Interval, target: Interval) -> np.ndarray:
        """
        Basis of Hom(k_source, k_target) as rows of per-element scalars.

        A morphism is a scalar per element of the intersection, constant along
        its Hasse components; a component is forced to zero when a Hasse edge
        leaves it into target minus source, or enters it from source minus target.

        Returns:
        - Int array of shape (dim, n).
        """
        key = (source, target)
        if key not in self._links:
            self._links[key] = self._solve_links(source, target)
        return self._links[key]

    def _solve_links(self, source: Interval, target: Interval) -> np.ndarray:
        host = self.host
        inside_source, inside_target = set(source.members), set(target.members)
        common = inside_source & inside_target
        parent = {x: x for x in common}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b in host.hasse:
            if a in common and b in common:
                parent[find(a)] = find(b)
        dead = set()
        for a, b in host.hasse:
            if a in common and b in inside_target and b not in inside_source:
                dead.add(find(a))
            if b in common and a in inside_source and a not in inside_target:
                dead.add(find(b))

        roots = sorted({find(x) for x in common} - dead)
        rows = np.zeros((len(roots), host.n), dtype=np.int64)
        for i, root in enumerate(roots):
            for x in common:
                if find(x) == root:
                    rows[i, x] = 1
        return rows


@lru_cache(maxsize=128)
def interval_catalog(host: Poset, p: int) -> IntervalCatalog:
    return IntervalCatalog(host, p)


@dataclass(frozen=True, eq=False)
class Cover:
    target: PersModule
    summands: IntervalMultiset
    map: Morphism
    generators: Tuple[Morphism, ...]

    @property
    def source(self) -> PersModule:
        return self.map.source


@dataclass(frozen=True, eq=False)
class Resolution:
    target: PersModule
    terms: Tuple[IntervalMultiset, ...]
    covers: Tuple[Morphism, ...]
    inclusions: Tuple[Morphism, ...]
    solves: int = 0

    @property
    def length(self) -> int:
        return max(len(self.terms) - 1, 0)

    def differentials(self) -> List[Morphism]:
        """
        The augmentation J_0 -> M followed by the maps J_i -> J_{i-1}.
        """
        if not self.covers:
            return []
        out = [self.covers[0]]
        for i in range(1, len(self.covers)):
            out.append(compose(self.inclusions[i - 1], self.covers[i]))
        return out


class _HomTable:
    """
    Hom(k_J, M) for every interval J of a catalog, as coordinate vectors in
    the direct sum of M over the members of J.
    """

    def __init__(self, module: PersModule, catalog: IntervalCatalog):
        self.module = module
        self.catalog = catalog
        self.spaces: Dict[Interval, HomSpace] = {}
        self.vectors: Dict[Interval, np.ndarray] = {}
        live = set(support(module))
        for interval in catalog.intervals:
            if live.isdisjoint(interval.members):
                continue
            space = hom_space(catalog.module(interval), module)
            if space.dim:
                self.spaces[interval] = space
                self.vectors[interval] = la.as_int(space.matrix)

    def dim(self, interval: Interval) -> int:
        return self.vectors[interval].shape[1] if interval in self.vectors else 0

    def width(self, interval: Interval) -> int:
        return sum(self.module.dims[x] for x in interval.members)

    def offset(self, interval: Interval) -> Dict[int, int]:
        out, at = {}, 0
        for x in interval.members:
            out[x] = at
            at += self.module.dims[x]
        return out

    def pull(self, into: Interval, source: Interval, columns: np.ndarray) -> np.ndarray:
        """
        Precomposes morphisms k_source -> M (given as columns) with every basis
        morphism k_into -> k_source.
        """
        dims, p = self.module.dims, self.module.p
        links = self.catalog.links(into, source)
        at_into, at_source = self.offset(into), self.offset(source)
        out = np.zeros((self.width(into), links.shape[0] * columns.shape[1]), dtype=np.int64)
        for i, scalars in enumerate(links):
            span = slice(i * columns.shape[1], (i + 1) * columns.shape[1])
            for x in into.members:
                if scalars[x] and dims[x]:
                    out[at_into[x]:at_into[x] + dims[x], span] = \
                        scalars[x] * columns[at_source[x]:at_source[x] + dims[x], :]
        return out % p


def _rank(p: int, dense: np.ndarray) -> int:
    if dense.size == 0:
        return 0
    return la.rank(la.matrix(p, dense))


def _generator_columns(cover_map: Morphism, summands: IntervalMultiset) -> List[Tuple[Interval, np.ndarray]]:
    """
    Splits an assembled map out of the sum of k_I into one column per copy,
    laid out like the vectors of a _HomTable.
    """
    target = cover_map.target
    seen = [0] * target.host.n
    out = []
    blocks = [la.as_int(b) for b in cover_map.blocks]
    for interval in summands.copies():
        parts = []
        for x in interval.members:
            parts.append(blocks[x][:, seen[x]])
            seen[x] += 1
        column = np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)
        out.append((interval, column.reshape(-1, 1)))
    return out


def _reaches(table: _HomTable, into: Interval, family: Sequence[Tuple[Interval, np.ndarray]]) -> np.ndarray:
    pulled = [table.pull(into, source, column) for source, column in family]
    pulled = [block for block in pulled if block.shape[1]]
    if not pulled:
        return np.zeros((table.width(into), 0), dtype=np.int64)
    return np.hstack(pulled)


############################################################
# Covers


def _cover_generators(table: _HomTable) -> Tuple[IntervalMultiset, List[Morphism]]:
    module, p = table.module, table.module.p
    counts: Dict[Interval, int] = {}
    generators: List[Morphism] = []
    for interval in table.catalog.intervals:
        dim = table.dim(interval)
        if not dim:
            continue
        radical = _reaches(table, interval, [
            (other, table.vectors[other]) for other in table.vectors if other != interval
        ])
        basis = table.vectors[interval]
        combined = la.matrix(p, np.hstack([radical, basis]), shape=(table.width(interval), radical.shape[1] + dim))
        _, pivots = la.rref(combined)
        lifts = [pc - radical.shape[1] for pc in pivots if pc >= radical.shape[1]]
        if lifts:
            counts[interval] = len(lifts)
            morphisms = table.spaces[interval].basis()
            generators.extend(morphisms[j] for j in lifts)
        _logger.debug("Interval %s: hom dimension %d, multiplicity %d",
                      interval.labels(module.host), dim, len(lifts))
    return IntervalMultiset.from_counts(module.host, counts), generators


def minimal_multiplicities(module: PersModule) -> IntervalMultiset:
    """
    Multiplicity of each k_I in the interval cover: dim Hom(k_I, M) minus the
    dimension of the part reached through k_J for intervals J other than I.

    Parameters:
    - module: PersModule.

    Returns:
    - IntervalMultiset with zero multiplicities omitted.
    """
    table = _HomTable(module, interval_catalog(module.host, module.p))
    summands, _ = _cover_generators(table)
    return summands


def interval_cover(module: PersModule, settings: Optional[Settings] = None) -> Cover:
    """
    Right minimal approximation of a module by interval-decomposables.

    Parameters:
    - module: PersModule.
    - settings: certify_covers toggles the approximation and minimality certificates.

    Returns:
    - Cover whose summands are the minimal multiplicities and whose generators
      lift a basis of Hom(k_I, M) modulo the radical part.
    """
    settings = settings or Settings()
    catalog = interval_catalog(module.host, module.p)
    table = _HomTable(module, catalog)
    summands, generators = _cover_generators(table)
    cover_map = assemble(module, generators)
    cover = Cover(target=module, summands=summands, map=cover_map, generators=tuple(generators))

    if settings.certify_covers and not module.is_zero():
        if not _approximates(table, cover_map, summands):
            raise InvariantError("Interval cover is not a right approximation.")
        if not is_right_minimal(cover_map):
            raise InvariantError("Interval cover failed the minimality certificate.")
    _logger.info("Cover of module with dims %s: %d summands", module.dims, summands.total())
    return cover


def _approximates(table: _HomTable, f: Morphism, summands: IntervalMultiset) -> bool:
    family = _generator_columns(f, summands)
    p = table.module.p
    for interval in table.catalog.intervals:
        dim = table.dim(interval)
        if dim and _rank(p, _reaches(table, interval, family)) != dim:
            return False
    return True


def is_right_approximation(f: Morphism, summands: IntervalMultiset) -> bool:
    """
    Checks that every morphism from an interval module to f.target factors through f.

    Parameters:
    - f: Morphism whose source is the sum of k_I over summands.copies(), in order.
    - summands: The interval presentation of f.source.

    Returns:
    - True iff Hom(k_J, f) is surjective for every interval J.
    """
    if f.source.dims != summands.dims():
        raise ValueError("Source dimensions do not match the interval multiset.")
    table = _HomTable(f.target, interval_catalog(f.target.host, f.target.p))
    return _approximates(table, f, summands)


def _endomorphism_kernel(f: Morphism) -> Tuple[List[np.ndarray], int]:
    """
    Basis of {g in End(f.source) : f g = 0} as per-element stacks (k, d_x, d_x).
    """
    source, p = f.source, f.source.p
    space = hom_space(source, source)
    if space.dim == 0:
        return [np.zeros((0, d, d), dtype=np.int64) for d in source.dims], 0
    stacks = [space.block_stack(x) for x in range(source.host.n)]
    products = [
        np.einsum("rc,icd->ird", la.as_int(f.blocks[x]), stacks[x]).reshape(space.dim, -1)
        for x in range(source.host.n)
    ]
    constraint = np.concatenate(products, axis=1).T % p
    if constraint.shape[0] == 0:
        coeffs = np.eye(space.dim, dtype=np.int64)
    else:
        null = la.kernel_matrix(la.matrix(p, constraint, shape=constraint.shape))
        coeffs = la.as_int(null).T
    ideal = [np.einsum("ki,irc->krc", coeffs, s) % p for s in stacks]
    return ideal, coeffs.shape[0]


def is_right_minimal(f: Morphism) -> bool:
    """
    Minimality certificate: K = {g : f g = 0} is a right ideal of End(source),
    and f is right minimal iff K is nilpotent. The powers K, K^2, ... are
    computed until they vanish or stop shrinking.

    Parameters:
    - f: Morphism out of an interval-decomposable module.

    Returns:
    - True iff every g with f g = f is an automorphism.
    """
    p = f.source.p
    ideal, size = _endomorphism_kernel(f)
    if size == 0:
        return True
    power, power_size = ideal, size
    while True:
        products = [
            np.einsum("irc,jcd->ijrd", a, b).reshape(a.shape[0] * b.shape[0], -1) % p
            for a, b in zip(power, ideal)
        ]
        flat = np.concatenate(products, axis=1)
        if not np.any(flat):
            return True
        reduced, pivots = la.rref(la.matrix(p, flat))
        rows = la.as_int(reduced)[:len(pivots)]
        if len(pivots) >= power_size:
            return False
        widths = [d * d for d in f.source.dims]
        at = 0
        power = []
        for x, d in enumerate(f.source.dims):
            power.append(rows[:, at:at + widths[x]].reshape(len(pivots), d, d))
            at += widths[x]
        power_size = len(pivots)


def greedy_cover(module: PersModule) -> Cover:
    """
    Starts from every basis morphism k_I -> M and drops each one that factors
    through the others, in canonical order.
    """
    catalog = interval_catalog(module.host, module.p)
    table = _HomTable(module, catalog)
    p = module.p
    family = [
        (interval, table.vectors[interval][:, [j]], table.spaces[interval].basis()[j])
        for interval in catalog.intervals if interval in table.vectors
        for j in range(table.dim(interval))
    ]
    keep = list(range(len(family)))
    for i in range(len(family)):
        rest = [(family[j][0], family[j][1]) for j in keep if j != i]
        interval, column, _ = family[i]
        reached = _reaches(table, interval, rest)
        if _rank(p, np.hstack([reached, column])) == _rank(p, reached):
            keep.remove(i)
    chosen = [family[j] for j in keep]
    summands = IntervalMultiset.from_copies(module.host, [c[0] for c in chosen])
    generators = [c[2] for c in chosen]
    return Cover(module, summands, assemble(module, generators), tuple(generators))


def brute_force_cover(module: PersModule, settings: Optional[Settings] = None) -> Cover:
    """
    Exhaustive oracle: the first subfamily of all basis morphisms k_I -> M, by
    total source dimension and then canonical order, that is a right approximation.

    Parameters:
    - module: PersModule within the configured caps.
    - settings: brute_force_max_dim, brute_force_max_elements and brute_force_max_family.

    Returns:
    - Cover (not certified).
    """
    settings = settings or Settings()
    if module.total_dim > settings.brute_force_max_dim:
        raise CapExceededError(
            f"Total dimension {module.total_dim} exceeds the brute-force cap {settings.brute_force_max_dim}."
        )
    if module.host.n > settings.brute_force_max_elements:
        raise CapExceededError(
            f"Poset has {module.host.n} elements, above the brute-force cap {settings.brute_force_max_elements}."
        )
    catalog = interval_catalog(module.host, module.p)
    table = _HomTable(module, catalog)
    p = module.p
    family = [
        (interval, j)
        for interval in catalog.intervals if interval in table.vectors
        for j in range(table.dim(interval))
    ]
    if len(family) > settings.brute_force_max_family:
        raise CapExceededError(
            f"Generating family has {len(family)} members, above the cap {settings.brute_force_max_family}."
        )
    if module.is_zero():
        return Cover(module, IntervalMultiset(module.host, ()), assemble(module, []), ())

    targets = [i for i in catalog.intervals if table.dim(i)]
    reach = {
        (c, into): table.pull(into, family[c][0], table.vectors[family[c][0]][:, [family[c][1]]])
        for c in range(len(family)) for into in targets
    }

    def passes(chosen: Sequence[int]) -> bool:
        for into in targets:
            blocks = [reach[(c, into)] for c in chosen if reach[(c, into)].shape[1]]
            if not blocks or _rank(p, np.hstack(blocks)) != table.dim(into):
                return False
        return True

    weights = [family[c][0].size for c in range(len(family))]

    def search(start: int, budget: int, chosen: List[int]):
        if not passes(chosen + list(range(start, len(family)))):
            return None
        if budget == 0:
            return list(chosen) if passes(chosen) else None
        for c in range(start, len(family)):
            if weights[c] <= budget:
                chosen.append(c)
                found = search(c + 1, budget - weights[c], chosen)
                chosen.pop()
                if found is not None:
                    return found
        return None

    for budget in range(module.total_dim, sum(weights) + 1):
        found = search(0, budget, [])
        if found is not None:
            generators = [table.spaces[family[c][0]].basis()[family[c][1]] for c in found]
            summands = IntervalMultiset.from_copies(module.host, [family[c][0] for c in found])
            return Cover(module, summands, assemble(module, generators), tuple(generators))
    raise InvariantError("No subfamily of all interval morphisms is a right approximation.")


def cover_contract_failures(cover: Cover) -> List[str]:
    """
    Lists violated cover properties: pointwise surjectivity, pointwise
    injectivity of every generator, and equal supports.
    """
    failures = []
    if not cover.map.is_surjective():
        failures.append("cover map is not surjective")
    for i, g in enumerate(cover.generators):
        if not g.is_injective():
            failures.append(f"generator {i} is not injective")
    if support(cover.source) != support(cover.target):
        failures.append("source and target supports differ")
    return failures


############################################################
# Resolutions


def syzygy(module: PersModule, settings: Optional[Settings] = None) -> PersModule:
    return kernel(interval_cover(module, settings).map)[0]


def _cover_step(current: PersModule, reduce_support: bool, settings: Settings):
    host = current.host
    if not reduce_support:
        cover = interval_cover(current, settings)
        syz, inclusion = kernel(cover.map)
        return cover.summands, cover.map, syz, inclusion

    emb = full_subposet(host, convex_hull(host, support(current)))
    local = restrict(current, emb)
    cover = interval_cover(local, settings)
    local_syz, local_inclusion = kernel(cover.map)
    summands = IntervalMultiset.from_counts(
        host, {Interval.of(emb.image(i.members)): m for i, m in cover.summands.pairs}
    )
    source = extend_by_zero(cover.source, emb)
    cover_map = extend_morphism_by_zero(cover.map, emb, source, current)
    syz = extend_by_zero(local_syz, emb)
    inclusion = extend_morphism_by_zero(local_inclusion, emb, syz, source)
    return summands, cover_map, syz, inclusion


def interval_resolution(module: PersModule, reduce_support: bool = True,
                        settings: Optional[Settings] = None) -> Resolution:
    """
    Iterates interval covers and syzygies until the syzygy vanishes.

    With reduce_support, each step works on the full subposet spanned by the
    convex hull of the current support and re-embeds the result by zero.

    Parameters:
    - module: PersModule to resolve.
    - reduce_support: Restrict each step to the convex hull of the support.
    - settings: max_steps and cover certification.

    Returns:
    - Resolution with one IntervalMultiset per term.
    """
    settings = settings or Settings()
    start = HOM_SOLVES.count
    terms, covers, inclusions = [], [], []
    current = module
    while not current.is_zero():
        if len(terms) >= settings.max_steps:
            raise StepLimitError(f"Resolution did not terminate within {settings.max_steps} steps.")
        summands, cover_map, current, inclusion = _cover_step(current, reduce_support, settings)
        terms.append(summands)
        covers.append(cover_map)
        inclusions.append(inclusion)
        _logger.info("Resolution step %d: %d summands, syzygy dims %s",
                     len(terms) - 1, summands.total(), current.dims)
    solves = HOM_SOLVES.count - start
    _logger.debug("Resolution used %d hom solves (reduce_support=%s)", solves, reduce_support)
    return Resolution(module, tuple(terms), tuple(covers), tuple(inclusions[:-1]), solves)


def interval_resdim(module: PersModule, reduce_support: bool = True, settings: Optional[Settings] = None) -> int:
    return interval_resolution(module, reduce_support, settings).length


def is_interval_decomposable(module: PersModule, settings: Optional[Settings] = None) -> bool:
    return module.is_zero() or syzygy(module, settings).is_zero()


def check_exactness(resolution: Resolution) -> bool:
    """
    Rank bookkeeping at every element: the augmentation is onto, consecutive
    differentials compose to zero, and dim J_i = rank d_i + rank d_{i+1}.
    """
    diffs = resolution.differentials()
    if not diffs:
        return resolution.target.is_zero()
    host = resolution.target.host
    for x in range(host.n):
        ranks = [d.rank_at(x) for d in diffs] + [0]
        if ranks[0] != resolution.target.dims[x]:
            return False
        for i, d in enumerate(diffs):
            if d.source.dims[x] != ranks[i] + ranks[i + 1]:
                return False
    for upper, lower in zip(diffs[1:], diffs):
        if not compose(lower, upper).is_zero():
            return False
    return True


def resolution_to_doc(resolution: Resolution) -> Dict[str, object]:
    labels = resolution.target.host.labels
    return {
        "field": resolution.target.p,
        "length": resolution.length,
        "terms": [t.to_doc() for t in resolution.terms],
        "differentials": [
            {labels[x]: matrix_to_rows(b) for x, b in enumerate(d.blocks) if b.size}
            for d in resolution.differentials()
        ],
    }


def multiset_from_labels(host: Poset, counts: Dict[Sequence[str], int]) -> IntervalMultiset:
    """
    IntervalMultiset from label lists, e.g. {("3", "4"): 1}.
    """
    return IntervalMultiset.from_counts(host, {Interval.of(host.indices(k)): m for k, m in counts.items()})


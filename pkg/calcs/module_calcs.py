# calcs/module_calcs.py

import itertools
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg_calcs as la
from .poset_calcs import (
    Interval,
    Poset,
    SubposetEmbedding,
    convex_hull,
    enumerate_intervals,
    is_convex,
    is_interval,
    poset_from_doc,
    poset_to_doc,
)
from .utils import (
    InputFormatError,
    IntresError,
    ModuleValidationError,
    Settings,
    expect_type,
    parse_json_text,
)

_logger = logging.getLogger(__name__)

Edge = Tuple[int, int]

ISOMORPHIC = "isomorphic"
NOT_ISOMORPHIC = "not isomorphic"
INCONCLUSIVE = "inconclusive"


class SolveCounter:
    """Running count of hom-space linear systems solved in this process."""

    def __init__(self):
        self.count = 0

    def bump(self) -> None:
        self.count += 1


HOM_SOLVES = SolveCounter()


@dataclass(frozen=True, eq=False)
class PersModule:
    host: Poset
    p: int
    dims: Tuple[int, ...]
    maps: Dict[Edge, la.FieldArray]
    _paths: Dict[Edge, la.FieldArray] = field(default_factory=dict, init=False, repr=False)

    @property
    def total_dim(self) -> int:
        return sum(self.dims)

    def is_zero(self) -> bool:
        return self.total_dim == 0

    def dim_vector(self) -> Dict[str, int]:
        return dict(zip(self.host.labels, self.dims))

    def map_along(self, x: int, y: int) -> la.FieldArray:
        """
        Structure map M(x <= y), composed along any Hasse path and memoized.
        """
        if not self.host.le(x, y):
            raise ValueError(f"No map from {self.host.labels[x]} to {self.host.labels[y]}: not x <= y.")
        if x == y:
            return la.identity(self.p, self.dims[x])
        key = (x, y)
        if key not in self._paths:
            step = next(s for s in self.host.successors[x] if self.host.le(s, y))
            self._paths[key] = la.matmul(self.map_along(step, y), self.maps[(x, step)])
        return self._paths[key]


@dataclass(frozen=True, eq=False)
class Morphism:
    source: PersModule
    target: PersModule
    blocks: Tuple[la.FieldArray, ...]

    def rank_at(self, x: int) -> int:
        return la.rank(self.blocks[x])

    def is_zero(self) -> bool:
        return all(not np.any(la.as_int(b)) for b in self.blocks if b.size)

    def is_surjective(self) -> bool:
        return all(self.rank_at(x) == self.target.dims[x] for x in range(self.source.host.n))

    def is_injective(self) -> bool:
        return all(self.rank_at(x) == self.source.dims[x] for x in range(self.source.host.n))

    def vec(self) -> np.ndarray:
        parts = [la.as_int(b).reshape(-1) for b in self.blocks]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


@dataclass(frozen=True)
class IntervalMultiset:
    host: Poset
    pairs: Tuple[Tuple[Interval, int], ...]

    @classmethod
    def from_counts(cls, host: Poset, counts: Dict[Interval, int]) -> "IntervalMultiset":
        return cls(host=host, pairs=tuple(sorted((i, m) for i, m in counts.items() if m > 0)))

    @classmethod
    def from_copies(cls, host: Poset, copies: Sequence[Interval]) -> "IntervalMultiset":
        counts: Dict[Interval, int] = {}
        for interval in copies:
            counts[interval] = counts.get(interval, 0) + 1
        return cls.from_counts(host, counts)

    def copies(self) -> List[Interval]:
        return [interval for interval, m in self.pairs for _ in range(m)]

    def total(self) -> int:
        return sum(m for _, m in self.pairs)

    def is_empty(self) -> bool:
        return not self.pairs

    def dims(self) -> Tuple[int, ...]:
        out = [0] * self.host.n
        for interval, m in self.pairs:
            for x in interval.members:
                out[x] += m
        return tuple(out)

    def to_doc(self) -> Dict[str, int]:
        return {",".join(i.labels(self.host)): m for i, m in self.pairs}


@dataclass(frozen=True, eq=False)
class HomSpace:
    source: PersModule
    target: PersModule
    matrix: la.FieldArray
    offsets: Tuple[int, ...]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def _unpack(self, column: np.ndarray) -> Tuple[la.FieldArray, ...]:
        blocks = []
        for x in range(self.source.host.n):
            rows, cols = self.target.dims[x], self.source.dims[x]
            chunk = column[self.offsets[x]:self.offsets[x] + rows * cols]
            blocks.append(la.matrix(self.source.p, chunk, shape=(rows, cols)))
        return tuple(blocks)

    def morphism(self, coeffs: Sequence[int]) -> Morphism:
        """
        The morphism sum(coeffs[i] * basis[i]).
        """
        if len(coeffs) != self.dim:
            raise ValueError(f"Expected {self.dim} coefficients, got {len(coeffs)}.")
        column = np.zeros(self.matrix.shape[0], dtype=np.int64)
        if self.dim:
            column = (la.as_int(self.matrix) @ np.asarray(coeffs, dtype=np.int64)) % self.source.p
        return Morphism(self.source, self.target, self._unpack(column))

    def basis(self) -> List[Morphism]:
        dense = la.as_int(self.matrix)
        return [Morphism(self.source, self.target, self._unpack(dense[:, j])) for j in range(self.dim)]

    def block_stack(self, x: int) -> np.ndarray:
        """
        All basis blocks at element x as an int array of shape (dim, target_x, source_x).
        """
        rows, cols = self.target.dims[x], self.source.dims[x]
        dense = la.as_int(self.matrix)[self.offsets[x]:self.offsets[x] + rows * cols, :]
        return dense.T.reshape(self.dim, rows, cols)


@dataclass
class ValidationReport:
    ok: bool
    message: str = ""
    square: Optional[Tuple[str, ...]] = None


@dataclass
class IsoResult:
    verdict: str
    witness: Optional[Morphism] = None


############################################################
# Construction


def build_module(host: Poset, p: int, dims: Sequence[int], maps: Optional[Dict[Edge, Any]] = None,
                 check: bool = True) -> PersModule:
    """
    Assembles a module from a dimension vector and maps on Hasse edges.

    Parameters:
    - host: Poset the module lives on.
    - p: Field characteristic.
    - dims: Dimension per element, in element order.
    - maps: Matrices keyed by Hasse edge (source, target); missing edges are zero.
    - check: Run validate and raise on a non-commuting square.

    Returns:
    - PersModule.
    """
    la.field(p)
    dims = tuple(int(d) for d in dims)
    if len(dims) != host.n:
        raise ModuleValidationError(f"Expected {host.n} dimensions, got {len(dims)}.")
    if any(d < 0 for d in dims):
        raise ModuleValidationError("Dimensions must be nonnegative.")
    maps = dict(maps or {})
    unknown = [e for e in maps if e not in set(host.hasse)]
    if unknown:
        a, b = unknown[0]
        raise ModuleValidationError(f"{host.labels[a]}->{host.labels[b]} is not a Hasse edge.")

    full: Dict[Edge, la.FieldArray] = {}
    for a, b in host.hasse:
        shape = (dims[b], dims[a])
        if (a, b) in maps:
            entries = maps[(a, b)]
            m = entries if isinstance(entries, la.FieldArray) else \
                la.matrix(p, entries, shape=shape if np.size(entries) == 0 else None)
            if m.shape != shape:
                raise ModuleValidationError(
                    f"Map {host.labels[a]}->{host.labels[b]} has shape {m.shape}, expected {shape}."
                )
            full[(a, b)] = m
        else:
            full[(a, b)] = la.zeros(p, *shape)

    module = PersModule(host=host, p=p, dims=dims, maps=full)
    if check:
        report = validate(module)
        if not report.ok:
            raise ModuleValidationError(report.message, square=report.square)
    return module


def zero_module(host: Poset, p: int) -> PersModule:
    return build_module(host, p, [0] * host.n, check=False)


def validate(module: PersModule) -> ValidationReport:
    """
    Checks every square commutes: all Hasse paths from x to y give one matrix.

    Parameters:
    - module: PersModule to check.

    Returns:
    - ValidationReport; on failure it names x, the two first steps, and y.
    """
    host = module.host
    for (a, b), m in module.maps.items():
        if m.shape != (module.dims[b], module.dims[a]):
            return ValidationReport(False, f"Map {host.labels[a]}->{host.labels[b]} has the wrong shape.",
                                    (host.labels[a], host.labels[b]))

    for x in range(host.n):
        for y in host.up_set(x):
            steps = [s for s in host.successors[x] if host.le(s, y)]
            if len(steps) < 2:
                continue
            first = la.as_int(la.matmul(module.map_along(steps[0], y), module.maps[(x, steps[0])]))
            for s in steps[1:]:
                other = la.as_int(la.matmul(module.map_along(s, y), module.maps[(x, s)]))
                if not np.array_equal(first, other):
                    square = (host.labels[x], host.labels[steps[0]], host.labels[s], host.labels[y])
                    return ValidationReport(
                        False,
                        f"Square does not commute: {square[0]}->{square[1]}->...->{square[3]} differs "
                        f"from {square[0]}->{square[2]}->...->{square[3]}.",
                        square,
                    )
    return ValidationReport(True)


def interval_module(host: Poset, interval: Interval, p: int) -> PersModule:
    """
    k_I: one-dimensional on the interval with identity maps inside it.
    """
    if not is_interval(host, interval.members):
        raise IntresError(f"{interval.labels(host)} is not an interval.")
    inside = set(interval.members)
    dims = [1 if x in inside else 0 for x in range(host.n)]
    maps = {(a, b): [[1]] for a, b in host.hasse if a in inside and b in inside}
    return build_module(host, p, dims, maps, check=False)


def projective_module(host: Poset, x: int, p: int) -> PersModule:
    return interval_module(host, Interval.of(host.up_set(x)), p)


def identity_morphism(module: PersModule) -> Morphism:
    return Morphism(module, module, tuple(la.identity(module.p, d) for d in module.dims))


def zero_morphism(source: PersModule, target: PersModule) -> Morphism:
    return Morphism(source, target, tuple(
        la.zeros(source.p, target.dims[x], source.dims[x]) for x in range(source.host.n)
    ))


def is_morphism(f: Morphism) -> bool:
    for a, b in f.source.host.hasse:
        left = la.matmul(f.target.maps[(a, b)], f.blocks[a])
        right = la.matmul(f.blocks[b], f.source.maps[(a, b)])
        if not np.array_equal(la.as_int(left), la.as_int(right)):
            return False
    return True


def compose(g: Morphism, f: Morphism) -> Morphism:
    """
    g after f.
    """
    if f.target is not g.source and f.target.dims != g.source.dims:
        raise ValueError("Morphisms are not composable.")
    return Morphism(f.source, g.target, tuple(la.matmul(gb, fb) for gb, fb in zip(g.blocks, f.blocks)))


def add_morphisms(f: Morphism, g: Morphism) -> Morphism:
    return Morphism(f.source, f.target, tuple(a + b for a, b in zip(f.blocks, g.blocks)))


def direct_sum(modules: Sequence[PersModule]) -> Tuple[PersModule, List[Morphism], List[Morphism]]:
    """
    Biproduct of modules on one host, with maps block-diagonal in list order.

    Parameters:
    - modules: Nonempty list of modules sharing host and field.

    Returns:
    - Tuple containing:
        - The sum module.
        - Inclusions, one per summand.
        - Projections, one per summand.
    """
    if not modules:
        raise ValueError("direct_sum needs at least one module.")
    host, p = modules[0].host, modules[0].p
    for m in modules[1:]:
        if m.host != host or m.p != p:
            raise ValueError("All summands must share host poset and field.")
    dims = [sum(m.dims[x] for m in modules) for x in range(host.n)]
    maps = {e: la.block_diagonal(p, [m.maps[e] for m in modules]) for e in host.hasse}
    total = build_module(host, p, dims, maps, check=False)

    inclusions, projections = [], []
    offsets = [0] * host.n
    for m in modules:
        inc, proj = [], []
        for x in range(host.n):
            block = np.zeros((dims[x], m.dims[x]), dtype=np.int64)
            block[offsets[x]:offsets[x] + m.dims[x], :] = np.eye(m.dims[x], dtype=np.int64)
            inc.append(la.matrix(p, block, shape=block.shape))
            proj.append(la.matrix(p, block.T, shape=block.T.shape))
            offsets[x] += m.dims[x]
        inclusions.append(Morphism(m, total, tuple(inc)))
        projections.append(Morphism(total, m, tuple(proj)))
    return total, inclusions, projections


def interval_decomposable(summands: IntervalMultiset, p: int) -> Tuple[PersModule, List[Morphism]]:
    """
    The module sum of k_I over the copies of a multiset, with one inclusion per copy.
    """
    copies = summands.copies()
    if not copies:
        return zero_module(summands.host, p), []
    total, inclusions, _ = direct_sum([interval_module(summands.host, i, p) for i in copies])
    return total, inclusions


def assemble(target: PersModule, generators: Sequence[Morphism]) -> Morphism:
    """
    The map from the direct sum of the generators' sources to target.
    """
    if not generators:
        return zero_morphism(zero_module(target.host, target.p), target)
    source, _, _ = direct_sum([g.source for g in generators])
    p = target.p
    blocks = tuple(
        la.hstack(p, [g.blocks[x] for g in generators], target.dims[x]) for x in range(target.host.n)
    )
    return Morphism(source, target, blocks)


############################################################
# Hom spaces


def hom_space(source: PersModule, target: PersModule) -> HomSpace:
    """
    Solves the commutation constraints N(a->b) f_a = f_b M(a->b) over all Hasse edges.

    Unknowns are the blocks f_x flattened row-major in element order.

    Parameters:
    - source: Module M.
    - target: Module N on the same host and field.

    Returns:
    - HomSpace whose matrix columns form a basis of Hom(M, N).
    """
    if source.host != target.host or source.p != target.p:
        raise ValueError("Hom needs modules on the same host and field.")
    host, p = source.host, source.p
    sizes = [target.dims[x] * source.dims[x] for x in range(host.n)]
    offsets = tuple(int(v) for v in np.cumsum([0] + sizes[:-1]))
    nvars = sum(sizes)
    HOM_SOLVES.bump()

    equations = []
    for a, b in host.hasse:
        ma, mb, na, nb = source.dims[a], source.dims[b], target.dims[a], target.dims[b]
        if nb * ma == 0:
            continue
        block = np.zeros((nb * ma, nvars), dtype=np.int64)
        if sizes[a]:
            block[:, offsets[a]:offsets[a] + sizes[a]] += np.kron(la.as_int(target.maps[(a, b)]),
                                                                  np.eye(ma, dtype=np.int64))
        if sizes[b]:
            block[:, offsets[b]:offsets[b] + sizes[b]] -= np.kron(np.eye(nb, dtype=np.int64),
                                                                  la.as_int(source.maps[(a, b)]).T)
        equations.append(block % p)

    if nvars == 0:
        basis = la.zeros(p, 0, 0)
    elif not equations:
        basis = la.identity(p, nvars)
    else:
        basis = la.kernel_matrix(la.matrix(p, np.vstack(equations)))
    _logger.debug("Hom solve #%d: %d unknowns, dimension %d", HOM_SOLVES.count, nvars, basis.shape[1])
    return HomSpace(source=source, target=target, matrix=basis, offsets=offsets)


def hom_basis(source: PersModule, target: PersModule) -> List[Morphism]:
    return hom_space(source, target).basis()


############################################################
# Kernels, images, cokernels


def submodule(module: PersModule, bases: Sequence[la.FieldArray]) -> Tuple[PersModule, Morphism]:
    """
    The submodule spanned pointwise by the given column bases, which must be
    stable under the structure maps.

    Parameters:
    - module: Ambient module.
    - bases: Per element, a matrix whose independent columns span the subspace.

    Returns:
    - Tuple containing the submodule and its inclusion.
    """
    host, p = module.host, module.p
    dims = [b.shape[1] for b in bases]
    maps = {}
    for a, b in host.hasse:
        pushed = la.matmul(module.maps[(a, b)], bases[a])
        maps[(a, b)] = la.express_in_basis(bases[b], pushed)
    sub = build_module(host, p, dims, maps, check=False)
    return sub, Morphism(sub, module, tuple(bases))


def kernel(f: Morphism) -> Tuple[PersModule, Morphism]:
    """
    Pointwise kernels of f with the induced maps and the inclusion into f.source.
    """
    return submodule(f.source, [la.kernel_matrix(b) for b in f.blocks])


def image(f: Morphism) -> Tuple[PersModule, Morphism]:
    return submodule(f.target, [la.column_space_basis(b) for b in f.blocks])


def cokernel(f: Morphism) -> Tuple[PersModule, Morphism]:
    """
    Pointwise cokernels of f with the induced maps and the projection from f.target.

    At each element the image basis is completed by standard vectors; the
    quotient coordinates are the complement rows of the inverse change of basis.

    Parameters:
    - f: Morphism.

    Returns:
    - Tuple containing the cokernel module and the projection.
    """
    target = f.target
    host, p = target.host, target.p
    complements, projections = [], []
    for x in range(host.n):
        n = target.dims[x]
        span = la.column_space_basis(f.blocks[x])
        extra = la.extend_to_basis(span, n)
        complements.append(extra)
        if n == 0:
            projections.append(la.zeros(p, 0, 0))
            continue
        change = la.hstack(p, [span, extra], n)
        inverse = np.linalg.inv(change)
        projections.append(inverse[span.shape[1]:, :])
    dims = [c.shape[1] for c in complements]
    maps = {
        (a, b): la.matmul(projections[b], la.matmul(target.maps[(a, b)], complements[a]))
        for a, b in host.hasse
    }
    quotient = build_module(host, p, dims, maps, check=False)
    return quotient, Morphism(target, quotient, tuple(projections))


def support(module: PersModule) -> Tuple[int, ...]:
    return tuple(x for x, d in enumerate(module.dims) if d > 0)


############################################################
# Restriction and re-embedding


def restrict(module: PersModule, emb: SubposetEmbedding) -> PersModule:
    """
    Restriction to a full subposet; a covering pair of the subposet that is not
    covering in the host gets the host composite along any path.
    """
    if emb.host != module.host:
        raise ValueError("Embedding host does not match the module's poset.")
    dims = [module.dims[h] for h in emb.map]
    maps = {(a, b): module.map_along(emb.map[a], emb.map[b]) for a, b in emb.sub.hasse}
    return build_module(emb.sub, module.p, dims, maps, check=False)


def restrict_morphism(f: Morphism, emb: SubposetEmbedding,
                      source: Optional[PersModule] = None, target: Optional[PersModule] = None) -> Morphism:
    source = source or restrict(f.source, emb)
    target = target or restrict(f.target, emb)
    return Morphism(source, target, tuple(f.blocks[h] for h in emb.map))


def extend_by_zero(module: PersModule, emb: SubposetEmbedding) -> PersModule:
    """
    Pushes a module on a convex full subposet to the host, zero outside it.

    Parameters:
    - module: Module on emb.sub.
    - emb: Embedding whose image is convex in the host.

    Returns:
    - PersModule on emb.host.
    """
    if not is_convex(emb.host, emb.map):
        raise IntresError("Extension by zero needs a convex full subposet.")
    inverse = {h: s for s, h in enumerate(emb.map)}
    dims = [module.dims[inverse[x]] if x in inverse else 0 for x in range(emb.host.n)]
    maps = {
        (a, b): module.map_along(inverse[a], inverse[b])
        for a, b in emb.host.hasse if a in inverse and b in inverse
    }
    return build_module(emb.host, module.p, dims, maps, check=False)


def extend_morphism_by_zero(f: Morphism, emb: SubposetEmbedding,
                            source: PersModule, target: PersModule) -> Morphism:
    inverse = {h: s for s, h in enumerate(emb.map)}
    blocks = tuple(
        f.blocks[inverse[x]] if x in inverse else la.zeros(f.source.p, target.dims[x], source.dims[x])
        for x in range(emb.host.n)
    )
    return Morphism(source, target, blocks)


def theta_interval(emb: SubposetEmbedding, interval: Interval) -> Interval:
    """
    Sends an interval of the subposet to the convex hull of its image in the host.
    """
    if not is_interval(emb.sub, interval.members):
        raise IntresError(f"{interval.labels(emb.sub)} is not an interval of the subposet.")
    return Interval.of(convex_hull(emb.host, emb.image(interval.members)))


############################################################
# Isomorphism testing and random modules


def _combination_blocks(stacks: List[np.ndarray], coeffs: np.ndarray, p: int) -> List[np.ndarray]:
    return [np.einsum("i,irc->rc", coeffs, s) % p for s in stacks]


def find_isomorphism(source: PersModule, target: PersModule, settings: Optional[Settings] = None) -> IsoResult:
    """
    Searches Hom(source, target) for a morphism invertible at every element.

    Small hom spaces are searched exhaustively; larger ones by seeded random
    combinations, where failing to find one is reported as inconclusive.

    Parameters:
    - source, target: Modules on the same host and field.
    - settings: Search caps and seed.

    Returns:
    - IsoResult with the verdict and, when isomorphic, a witness morphism.
    """
    settings = settings or Settings()
    if source.host != target.host or source.p != target.p or source.dims != target.dims:
        return IsoResult(NOT_ISOMORPHIC)
    if source.is_zero():
        return IsoResult(ISOMORPHIC, zero_morphism(source, target))
    hom = hom_space(source, target)
    if hom.dim == 0 or hom.dim != hom_space(target, target).dim:
        return IsoResult(NOT_ISOMORPHIC)

    p = source.p
    live = [x for x in range(source.host.n) if source.dims[x]]
    stacks = [hom.block_stack(x) for x in live]

    def invertible(coeffs: np.ndarray) -> bool:
        for block in _combination_blocks(stacks, coeffs, p):
            if la.rank(la.matrix(p, block, shape=block.shape)) != block.shape[0]:
                return False
        return True

    if hom.dim <= settings.iso_exhaustive_max_dim:
        for combo in itertools.product(range(p), repeat=hom.dim):
            coeffs = np.asarray(combo, dtype=np.int64)
            if coeffs.any() and invertible(coeffs):
                return IsoResult(ISOMORPHIC, hom.morphism(list(combo)))
        return IsoResult(NOT_ISOMORPHIC)

    rng = np.random.default_rng(settings.seed)
    for _ in range(settings.iso_random_trials):
        coeffs = rng.integers(0, p, size=hom.dim, dtype=np.int64)
        if invertible(coeffs):
            return IsoResult(ISOMORPHIC, hom.morphism(coeffs.tolist()))
    _logger.info("Isomorphism search inconclusive after %d trials (hom dimension %d)",
                 settings.iso_random_trials, hom.dim)
    return IsoResult(INCONCLUSIVE)


def is_isomorphic(source: PersModule, target: PersModule, settings: Optional[Settings] = None) -> bool:
    return find_isomorphism(source, target, settings).verdict == ISOMORPHIC


def random_basis_change(module: PersModule, rng: np.random.Generator) -> Tuple[PersModule, Morphism]:
    """
    Conjugates every structure map by random invertible matrices.

    Returns:
    - Tuple containing the new module and the isomorphism from the old one.
    """
    p = module.p
    changes = [la.random_invertible(p, d, rng) for d in module.dims]
    maps = {}
    for a, b in module.host.hasse:
        inverse_a = np.linalg.inv(changes[a]) if module.dims[a] else changes[a]
        maps[(a, b)] = la.matmul(changes[b], la.matmul(module.maps[(a, b)], inverse_a))
    changed = build_module(module.host, p, module.dims, maps, check=False)
    return changed, Morphism(module, changed, tuple(changes))


def random_module(host: Poset, p: int, rng: np.random.Generator, max_dim: int = 3,
                  max_generators: int = 3, max_relations: int = 2) -> PersModule:
    """
    Random module: the cokernel of a random map between random interval-decomposables.

    Parameters:
    - host: Poset.
    - p: Field characteristic.
    - rng: numpy random generator.
    - max_dim: Cap on every pointwise dimension.
    - max_generators: Most interval summands in the target of the random map.
    - max_relations: Most interval summands in its source.

    Returns:
    - Nonzero PersModule with every pointwise dimension at most max_dim.
    """
    intervals = enumerate_intervals(host)
    while True:
        gens = [intervals[i] for i in rng.integers(0, len(intervals), size=rng.integers(1, max_generators + 1))]
        rels = [intervals[i] for i in rng.integers(0, len(intervals), size=rng.integers(0, max_relations + 1))]
        generated, _ = interval_decomposable(IntervalMultiset.from_copies(host, gens), p)
        if max(generated.dims) > max_dim + max_relations:
            continue
        if not rels:
            module = generated
        else:
            relations, _ = interval_decomposable(IntervalMultiset.from_copies(host, rels), p)
            hom = hom_space(relations, generated)
            coeffs = rng.integers(0, p, size=hom.dim, dtype=np.int64).tolist()
            module, _ = cokernel(hom.morphism(coeffs))
        if not module.is_zero() and max(module.dims) <= max_dim:
            return module


############################################################
# JSON documents


def matrix_to_rows(m: la.FieldArray) -> List[List[int]]:
    return la.as_int(m).tolist()


def module_to_doc(module: PersModule) -> Dict[str, Any]:
    """
    Serializes a module; maps with a zero-dimensional end are implied and omitted.
    """
    labels = module.host.labels
    return {
        "poset": poset_to_doc(module.host),
        "p": module.p,
        "dims": dict(zip(labels, module.dims)),
        "maps": {
            f"{labels[a]}->{labels[b]}": matrix_to_rows(m)
            for (a, b), m in module.maps.items() if module.dims[a] and module.dims[b]
        },
    }


def _parse_matrix(raw: Any, shape: Tuple[int, int], path: str) -> List[List[int]]:
    expect_type(raw, list, path)
    rows, cols = shape
    if rows == 0 and raw in ([], [[]]):
        return []
    if len(raw) != rows:
        raise InputFormatError(f"expected {rows} rows, got {len(raw)}", path=path)
    for i, row in enumerate(raw):
        expect_type(row, list, f"{path}[{i}]")
        if len(row) != cols:
            raise InputFormatError(f"expected {cols} entries, got {len(row)}", path=f"{path}[{i}]")
        for j, entry in enumerate(row):
            expect_type(entry, int, f"{path}[{i}][{j}]")
    return raw


def module_from_doc(doc: Any, path: str = "module", base_dir: str = ".", default_p: int = 2) -> PersModule:
    """
    Parses a module document and validates commutativity.

    Parameters:
    - doc: Decoded JSON {"poset": ..., "p": ..., "dims": ..., "maps": ...}; "poset"
      may be an inline poset document or a file name relative to base_dir.
    - path: Field path prefix for diagnostics.
    - base_dir: Directory used to resolve a poset file reference.
    - default_p: Characteristic used when "p" is absent.

    Returns:
    - Validated PersModule.
    """
    expect_type(doc, dict, path)
    for key in ("poset", "dims"):
        if key not in doc:
            raise InputFormatError(f"missing key '{key}'", path=path)

    raw_poset = doc["poset"]
    if isinstance(raw_poset, str):
        ref = os.path.join(base_dir, raw_poset)
        try:
            with open(ref) as fh:
                raw_poset = parse_json_text(fh.read(), ref)
        except OSError as e:
            raise InputFormatError(f"cannot read poset file {ref!r} ({e.strerror})", path=f"{path}.poset")
    host = poset_from_doc(raw_poset, f"{path}.poset")

    p = doc.get("p", default_p)
    expect_type(p, int, f"{path}.p")
    try:
        la.field(p)
    except ValueError as e:
        raise InputFormatError(str(e), path=f"{path}.p")

    dims_doc = expect_type(doc["dims"], dict, f"{path}.dims")
    unknown = sorted(set(dims_doc) - set(host.labels))
    if unknown:
        raise InputFormatError(f"unknown elements {unknown}", path=f"{path}.dims")
    dims = []
    for label in host.labels:
        d = expect_type(dims_doc.get(label, 0), int, f"{path}.dims.{label}")
        if d < 0:
            raise InputFormatError("dimension must be nonnegative", path=f"{path}.dims.{label}")
        dims.append(d)

    maps = {}
    edges = set(host.hasse)
    for key, raw in expect_type(doc.get("maps", {}), dict, f"{path}.maps").items():
        where = f"{path}.maps.{key}"
        parts = key.split("->")
        if len(parts) != 2 or parts[0] not in host.index or parts[1] not in host.index:
            raise InputFormatError("map key must be 'a->b' with known labels", path=where)
        edge = (host.index[parts[0]], host.index[parts[1]])
        if edge not in edges:
            raise InputFormatError("map key is not a Hasse edge", path=where)
        shape = (dims[edge[1]], dims[edge[0]])
        maps[edge] = la.matrix(p, _parse_matrix(raw, shape, where), shape=shape)
    return build_module(host, p, dims, maps)

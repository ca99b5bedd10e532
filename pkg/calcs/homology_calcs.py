# calcs/homology_calcs.py

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import linalg_calcs as la
from .approx_calcs import interval_catalog, interval_resdim
from .module_calcs import (
    Morphism,
    PersModule,
    build_module,
    cokernel,
    compose,
    direct_sum,
    interval_module,
    kernel,
    projective_module,
    submodule,
    zero_module,
)
from .poset_calcs import Interval, Poset, SubposetEmbedding, opposite
from .utils import InvariantError, Settings, StepLimitError

_logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProjectiveCover:
    map: Morphism
    generators: Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class ProjectivePresentation:
    target: PersModule
    p0: Tuple[int, ...]
    p1: Tuple[int, ...]
    coefficients: np.ndarray
    augmentation: Morphism
    relations: Morphism


@dataclass
class GldimReport:
    value: int
    witness: Optional[Interval]
    per_interval: List[Tuple[Interval, int]]


@dataclass
class MonotonicityResult:
    sub_value: int
    host_value: int

    @property
    def holds(self) -> bool:
        return self.sub_value <= self.host_value


def projective_sum(host: Poset, p: int, generators: Sequence[int]) -> PersModule:
    if not generators:
        return zero_module(host, p)
    return direct_sum([projective_module(host, x, p) for x in generators])[0]


def projective_map(host: Poset, p: int, source: Sequence[int], target: Sequence[int],
                   coefficients: np.ndarray) -> Morphism:
    """
    The morphism between sums of projectives P_s -> P_t given by scalars.

    Hom(P_s, P_t) is one-dimensional exactly when t <= s, so a scalar matrix
    indexed by (target generator, source generator) determines the map.

    Parameters:
    - host: Poset.
    - p: Field characteristic.
    - source: Generator elements of the source sum, in order.
    - target: Generator elements of the target sum, in order.
    - coefficients: Int array (len(target), len(source)); entries with t not <= s are ignored.

    Returns:
    - Morphism between the two projective sums.
    """
    src = projective_sum(host, p, source)
    tgt = projective_sum(host, p, target)
    blocks = []
    for z in range(host.n):
        cols = [i for i, s in enumerate(source) if host.le(s, z)]
        rows = [j for j, t in enumerate(target) if host.le(t, z)]
        block = np.zeros((len(rows), len(cols)), dtype=np.int64)
        for r, j in enumerate(rows):
            for c, i in enumerate(cols):
                if host.le(target[j], source[i]):
                    block[r, c] = coefficients[j, i]
        blocks.append(la.matrix(p, block, shape=block.shape))
    return Morphism(src, tgt, tuple(blocks))


def radical(module: PersModule) -> Tuple[PersModule, Morphism]:
    """
    The radical: at each y, the span of the images of all maps into y from below.
    """
    host, p = module.host, module.p
    bases = []
    for y in range(host.n):
        images = [module.maps[(x, y)] for x in host.predecessors[y]]
        bases.append(la.column_space_basis(la.hstack(p, images, module.dims[y])))
    return submodule(module, bases)


def top(module: PersModule) -> PersModule:
    return cokernel(radical(module)[1])[0]


def projective_cover(module: PersModule) -> ProjectiveCover:
    """
    Projective cover: one copy of P_x per basis vector of a complement of the
    radical at x, sent to that vector.

    Parameters:
    - module: PersModule.

    Returns:
    - ProjectiveCover with the map out of the sum of P_x and its generator elements.
    """
    host, p = module.host, module.p
    rad, inclusion = radical(module)
    tops = []
    generators: List[int] = []
    for x in range(host.n):
        complement = la.extend_to_basis(inclusion.blocks[x], module.dims[x])
        for j in range(complement.shape[1]):
            tops.append((x, complement[:, [j]]))
            generators.append(x)
    source = projective_sum(host, p, generators)
    blocks = []
    for z in range(host.n):
        columns = [la.matmul(module.map_along(x, z), v) for x, v in tops if host.le(x, z)]
        blocks.append(la.hstack(p, columns, module.dims[z]))
    cover = Morphism(source, module, tuple(blocks))
    if not kernel_in_radical(cover):
        raise InvariantError("projective cover has kernel outside the radical of its source")
    return ProjectiveCover(cover, tuple(generators))


def kernel_in_radical(f: Morphism) -> bool:
    """
    True iff ker f sits inside rad f.source at every element, the minimality
    condition for a surjection out of a projective.
    """
    _, ker_inclusion = kernel(f)
    _, rad_inclusion = radical(f.source)
    for x in range(f.source.host.n):
        if not la.in_span(rad_inclusion.blocks[x], ker_inclusion.blocks[x]):
            _logger.debug("kernel leaves the radical at %s", f.source.host.labels[x])
            return False
    return True


def _column_of(host: Poset, generators: Sequence[int], z: int, index: int) -> int:
    return sum(1 for g in generators[:index] if host.le(g, z))


def minimal_presentation(module: PersModule) -> ProjectivePresentation:
    """
    P1 -> P0 -> M -> 0 with both maps projective covers onto their images.

    Parameters:
    - module: PersModule.

    Returns:
    - ProjectivePresentation; coefficients[i, j] is the scalar of the map from
      the j-th generator of P1 to the i-th generator of P0.
    """
    host, p = module.host, module.p
    cover0 = projective_cover(module)
    syz, inclusion = kernel(cover0.map)
    cover1 = projective_cover(syz)
    relations = compose(inclusion, cover1.map)

    p0, p1 = cover0.generators, cover1.generators
    coefficients = np.zeros((len(p0), len(p1)), dtype=np.int64)
    for j, y in enumerate(p1):
        block = la.as_int(relations.blocks[y])
        col = _column_of(host, p1, y, j)
        for i, x in enumerate(p0):
            if host.le(x, y):
                coefficients[i, j] = block[_column_of(host, p0, y, i), col]
    return ProjectivePresentation(module, p0, p1, coefficients, cover0.map, relations)


def presentation_is_exact(pres: ProjectivePresentation) -> bool:
    """
    Rank bookkeeping at every element: P0 maps onto M and
    dim P0 = rank(P1 -> P0) + dim M.
    """
    aug, rel = pres.augmentation, pres.relations
    for z in range(pres.target.host.n):
        if aug.rank_at(z) != pres.target.dims[z]:
            return False
        if aug.source.dims[z] != rel.rank_at(z) + pres.target.dims[z]:
            return False
    return compose(aug, rel).is_zero()


def dual(module: PersModule) -> PersModule:
    """
    Vector-space dual: a module over the opposite poset with transposed maps.
    """
    host = opposite(module.host)
    maps = {(b, a): m.T for (a, b), m in module.maps.items()}
    return build_module(host, module.p, module.dims, maps, check=False)


def transpose(module: PersModule) -> PersModule:
    """
    Tr M over the opposite poset: the cokernel of Hom(-, A) applied to the
    minimal presentation, which maps the opposite projectives of P0's
    generators to those of P1's by the transposed scalars.
    """
    pres = minimal_presentation(module)
    op = opposite(module.host)
    if not pres.p1:
        return zero_module(op, module.p)
    dualized = projective_map(op, module.p, pres.p0, pres.p1, pres.coefficients.T)
    return cokernel(dualized)[0]


def ar_translate(module: PersModule) -> PersModule:
    """
    Auslander-Reiten translate D Tr M; zero exactly on projectives.
    """
    if module.is_zero():
        return module
    return dual(transpose(module))


def projective_resolution_length(module: PersModule, settings: Optional[Settings] = None) -> int:
    settings = settings or Settings()
    current, length = module, 0
    while not current.is_zero():
        current = kernel(projective_cover(current).map)[0]
        if current.is_zero():
            break
        length += 1
        if length > settings.max_steps:
            raise StepLimitError(f"Projective resolution exceeded {settings.max_steps} steps.")
    return length


def projective_gldim(host: Poset, p: int = 2, settings: Optional[Settings] = None) -> int:
    """
    Global dimension of the incidence algebra: the longest minimal projective
    resolution of a simple module.
    """
    value = 0
    for x in range(host.n):
        simple = interval_module(host, Interval.of([x]), p)
        value = max(value, projective_resolution_length(simple, settings))
    _logger.info("Projective global dimension %d on %d elements", value, host.n)
    return value


def interval_gldim(host: Poset, p: int = 2, settings: Optional[Settings] = None) -> GldimReport:
    """
    Interval resolution global dimension: the largest interval resolution
    dimension of the translate of an interval module.

    Parameters:
    - host: Poset.
    - p: Field characteristic.
    - settings: Support reduction and step cap for each resolution.

    Returns:
    - GldimReport with the value, the first interval attaining it, and the
      per-interval values.
    """
    settings = settings or Settings()
    catalog = interval_catalog(host, p)
    per_interval = []
    for interval in catalog.intervals:
        translate = ar_translate(catalog.module(interval))
        value = interval_resdim(translate, settings.reduce_support, settings)
        per_interval.append((interval, value))
        _logger.debug("tau of k_%s has interval resolution dimension %d", interval.labels(host), value)
    best = max(per_interval, key=lambda pair: pair[1], default=(None, 0))
    witness = best[0] if best[1] > 0 else None
    return GldimReport(value=best[1], witness=witness, per_interval=per_interval)


def monotonicity_check(emb: SubposetEmbedding, p: int = 2,
                       settings: Optional[Settings] = None) -> Optional[MonotonicityResult]:
    """
    Compares interval global dimensions of a subposet and its host.

    Returns:
    - MonotonicityResult, or None when the subposet does not carry the induced
      order (the inequality need not hold then).
    """
    induced = emb.host.leq[np.ix_(emb.map, emb.map)]
    if not np.array_equal(induced, emb.sub.leq):
        _logger.warning("Subposet %s is not full; interval global dimension need not be monotone.",
                        list(emb.sub.labels))
        return None
    return MonotonicityResult(
        sub_value=interval_gldim(emb.sub, p, settings).value,
        host_value=interval_gldim(emb.host, p, settings).value,
    )

import pytest

from calcs.approx_calcs import (
    brute_force_cover,
    check_exactness,
    cover_contract_failures,
    greedy_cover,
    interval_catalog,
    interval_cover,
    interval_resdim,
    interval_resolution,
    is_interval_decomposable,
    is_right_approximation,
    is_right_minimal,
    minimal_multiplicities,
    multiset_from_labels,
    resolution_to_doc,
    syzygy,
)
from calcs.module_calcs import (
    IntervalMultiset,
    assemble,
    direct_sum,
    extend_by_zero,
    hom_basis,
    hom_space,
    identity_morphism,
    interval_decomposable,
    interval_module,
    is_isomorphic,
    random_basis_change,
    random_module,
    zero_module,
    zero_morphism,
)
from calcs.poset_calcs import (
    Interval,
    convex_hull,
    enumerate_intervals,
    full_subposet,
    make_a_n,
    make_c,
    make_grid,
    random_poset,
)
from calcs.utils import CapExceededError, Settings, StepLimitError


def k(host, labels, p=2):
    return interval_module(host, Interval.of(host.indices(labels)), p)


D4_COVER = {("3", "4"): 1, ("1", "2", "3", "4"): 1, ("2", "3"): 1}


def test_d4_cover(d4_module, d4):
    cover = interval_cover(d4_module)
    assert cover.summands == multiset_from_labels(d4, D4_COVER)
    assert cover.source.dims == (1, 2, 3, 2)
    assert cover_contract_failures(cover) == []


def test_d4_syzygy_and_resolution(d4_module, d4):
    assert is_isomorphic(syzygy(d4_module), k(d4, ["2", "3", "4"]))
    resolution = interval_resolution(d4_module)
    assert resolution.length == 1
    assert resolution.terms[0] == multiset_from_labels(d4, D4_COVER)
    assert resolution.terms[1] == multiset_from_labels(d4, {("2", "3", "4"): 1})
    assert check_exactness(resolution)
    assert interval_resdim(d4_module) == 1


def test_d4_resolution_is_the_same_without_support_reduction(d4_module):
    reduced = interval_resolution(d4_module, reduce_support=True)
    full = interval_resolution(d4_module, reduce_support=False)
    assert reduced.terms == full.terms
    assert check_exactness(full)


def test_resolution_doc(d4_module):
    doc = resolution_to_doc(interval_resolution(d4_module))
    assert doc["field"] == 2
    assert doc["length"] == 1
    assert doc["terms"] == [{"3,4": 1, "2,3": 1, "1,2,3,4": 1}, {"2,3,4": 1}]
    assert len(doc["differentials"]) == 2


def test_interval_module_covers_itself():
    grid = make_grid(2, 2)
    for interval in enumerate_intervals(grid):
        module = interval_module(grid, interval, 3)
        cover = interval_cover(module)
        assert cover.summands == IntervalMultiset.from_counts(grid, {interval: 1})
        assert interval_resdim(module) == 0
        assert is_interval_decomposable(module)


def test_zero_module_has_empty_cover():
    chain = make_a_n(3)
    zero = zero_module(chain, 2)
    cover = interval_cover(zero)
    assert cover.summands.is_empty()
    resolution = interval_resolution(zero)
    assert resolution.terms == ()
    assert resolution.length == 0
    assert check_exactness(resolution)


def test_repeated_summand_keeps_its_multiplicity():
    chain = make_a_n(2)
    double = direct_sum([k(chain, ["1"]), k(chain, ["1"])])[0]
    assert minimal_multiplicities(double) == multiset_from_labels(chain, {("1",): 2})
    assert interval_resdim(double) == 0


def test_interval_decomposable_modules_resolve_in_one_term(rng):
    for _ in range(10):
        host = random_poset(int(rng.integers(2, 6)), rng)
        intervals = enumerate_intervals(host)
        picks = [intervals[i] for i in rng.integers(0, len(intervals), size=3)]
        summands = IntervalMultiset.from_copies(host, picks)
        module, _ = interval_decomposable(summands, 3)
        changed, _ = random_basis_change(module, rng)
        assert minimal_multiplicities(changed) == summands
        assert interval_resdim(changed) == 0


def test_adding_an_interval_summand_keeps_resdim(d4_module, d4):
    extra = direct_sum([d4_module, k(d4, ["1", "3"])])[0]
    assert interval_resdim(extra) == 1
    assert not is_interval_decomposable(d4_module)


def test_missing_summand_is_not_an_approximation():
    chain = make_a_n(2)
    top = k(chain, ["1", "2"])
    (f,) = hom_basis(k(chain, ["2"]), top)
    assert not is_right_approximation(f, multiset_from_labels(chain, {("2",): 1}))


def test_redundant_summand_is_not_minimal():
    chain = make_a_n(2)
    top = k(chain, ["1", "2"])
    f = assemble(top, [identity_morphism(top), zero_morphism(top, top)])
    summands = multiset_from_labels(chain, {("1", "2"): 2})
    assert is_right_approximation(f, summands)
    assert not is_right_minimal(f)
    assert is_right_minimal(interval_cover(top).map)


def test_approximation_checks_dimensions():
    chain = make_a_n(2)
    top = k(chain, ["1", "2"])
    with pytest.raises(ValueError):
        is_right_approximation(identity_morphism(top), multiset_from_labels(chain, {("1",): 1}))


def test_greedy_and_brute_force_match_minimal(d4_module):
    minimal = interval_cover(d4_module).summands
    assert greedy_cover(d4_module).summands == minimal
    assert brute_force_cover(d4_module).summands == minimal


def test_brute_force_caps(d4_module):
    with pytest.raises(CapExceededError):
        brute_force_cover(d4_module, Settings(brute_force_max_dim=2))
    with pytest.raises(CapExceededError):
        brute_force_cover(d4_module, Settings(brute_force_max_elements=3))
    with pytest.raises(CapExceededError):
        brute_force_cover(d4_module, Settings(brute_force_max_family=1))


def test_step_limit(d4_module):
    with pytest.raises(StepLimitError):
        interval_resolution(d4_module, settings=Settings(max_steps=1))


def test_catalog_links_match_hom_spaces(rng):
    for host in (make_grid(2, 2), make_c(2, 1), random_poset(5, rng)):
        catalog = interval_catalog(host, 2)
        for source in catalog.intervals:
            for target in catalog.intervals:
                expected = hom_space(catalog.module(source), catalog.module(target)).dim
                assert catalog.links(source, target).shape[0] == expected


@pytest.mark.slow
@pytest.mark.parametrize("p", [2, 3])
def test_cover_contract_on_random_modules(p, rng):
    for _ in range(100):
        host = random_poset(int(rng.integers(1, 7)), rng)
        module = random_module(host, p, rng, max_dim=3)
        cover = interval_cover(module)
        assert cover_contract_failures(cover) == []
        assert is_right_minimal(cover.map)


@pytest.mark.slow
def test_minimal_cover_matches_brute_force_oracle(rng):
    checked = attempts = 0
    while checked < 100 and attempts < 1000:
        attempts += 1
        host = random_poset(int(rng.integers(1, 5)), rng)
        module = random_module(host, 2, rng, max_dim=2)
        try:
            oracle = brute_force_cover(module)
        except CapExceededError:
            continue
        assert interval_cover(module).summands == oracle.summands
        assert greedy_cover(module).summands == oracle.summands
        checked += 1
    assert checked == 100


@pytest.mark.slow
def test_support_reduction_is_invisible(rng):
    for _ in range(50):
        host = random_poset(int(rng.integers(2, 7)), rng)
        module = random_module(host, int(rng.choice([2, 3])), rng, max_dim=2)
        reduced = interval_resolution(module, reduce_support=True)
        full = interval_resolution(module, reduce_support=False)
        assert reduced.terms == full.terms
        assert reduced.solves <= full.solves
        assert check_exactness(reduced) and check_exactness(full)


@pytest.mark.slow
def test_resolution_commutes_with_extension_by_zero(rng):
    for _ in range(50):
        host = random_poset(int(rng.integers(2, 7)), rng)
        seeds = rng.choice(host.n, size=int(rng.integers(1, host.n + 1)), replace=False).tolist()
        emb = full_subposet(host, convex_hull(host, seeds))
        local_module = random_module(emb.sub, int(rng.choice([2, 3])), rng, max_dim=2)
        local = interval_resolution(local_module, reduce_support=False)
        full = interval_resolution(extend_by_zero(local_module, emb), reduce_support=False)
        pushed = tuple(
            IntervalMultiset.from_counts(host, {Interval.of(emb.image(i.members)): m for i, m in term.pairs})
            for term in local.terms
        )
        assert full.terms == pushed, (host.hasse, emb.map)

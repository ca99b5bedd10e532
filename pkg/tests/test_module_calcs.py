import numpy as np
import pytest

from calcs import linalg_calcs as la
from calcs.module_calcs import (
    INCONCLUSIVE,
    ISOMORPHIC,
    NOT_ISOMORPHIC,
    IntervalMultiset,
    Morphism,
    build_module,
    cokernel,
    compose,
    direct_sum,
    extend_by_zero,
    find_isomorphism,
    hom_basis,
    hom_space,
    identity_morphism,
    image,
    interval_decomposable,
    interval_module,
    is_isomorphic,
    is_morphism,
    kernel,
    module_from_doc,
    module_to_doc,
    projective_module,
    random_basis_change,
    random_module,
    restrict,
    restrict_morphism,
    support,
    theta_interval,
    validate,
    zero_module,
    zero_morphism,
)
from calcs.poset_calcs import (
    Interval,
    connected_components,
    enumerate_intervals,
    full_subposet,
    make_a_n,
    make_c,
    make_grid,
    random_poset,
)
from calcs.utils import InputFormatError, IntresError, ModuleValidationError, Settings
from conftest import DATA_DIR, load_fixture


def k(host, labels, p=2):
    return interval_module(host, Interval.of(host.indices(labels)), p)


def random_morphism(source, target, rng):
    space = hom_space(source, target)
    return space.morphism(rng.integers(0, source.p, size=space.dim).tolist())


def test_interval_module_examples():
    chain = make_a_n(3)
    simple = k(chain, ["2"])
    assert simple.dims == (0, 1, 0)
    full = k(chain, ["1", "2", "3"])
    assert full.dims == (1, 1, 1)
    assert all(la.as_int(m).tolist() == [[1]] for m in full.maps.values())
    with pytest.raises(IntresError):
        k(chain, ["1", "3"])


def test_full_interval_of_diamond_is_projective_and_injective():
    diamond = make_c(1, 1)
    full = k(diamond, diamond.labels)
    assert full.dims == (1, 1, 1, 1)
    assert is_isomorphic(full, projective_module(diamond, diamond.index["bot"], 2))


def test_validate_examples(d4_module):
    for interval in enumerate_intervals(make_grid(2, 2)):
        assert validate(interval_module(make_grid(2, 2), interval, 2)).ok
    assert validate(d4_module).ok

    grid = make_grid(2, 2)
    maps = {e: [[1]] for e in grid.hasse}
    broken_edge = grid.hasse[-1]
    maps[broken_edge] = [[0]]
    report = validate(build_module(grid, 2, [1, 1, 1, 1], maps, check=False))
    assert not report.ok
    assert report.square[0] == "00" and report.square[-1] == "11"
    with pytest.raises(ModuleValidationError):
        build_module(grid, 2, [1, 1, 1, 1], maps)


def test_build_module_shape_errors():
    chain = make_a_n(2)
    with pytest.raises(ModuleValidationError):
        build_module(chain, 2, [1, 1], {(0, 1): [[1, 1]]})
    with pytest.raises(ModuleValidationError):
        build_module(chain, 2, [1, 1], {(1, 0): [[1]]})
    with pytest.raises(ModuleValidationError):
        build_module(chain, 2, [1])


def test_direct_sum_examples():
    chain = make_a_n(2)
    single = k(chain, ["1"])
    total, inclusions, projections = direct_sum([single])
    assert total.dims == single.dims

    zero = zero_module(chain, 2)
    assert direct_sum([zero, zero])[0].is_zero()

    total, inclusions, projections = direct_sum([k(chain, ["1"]), k(chain, ["1", "2"])])
    assert total.dims == (2, 1)
    assert validate(total).ok
    for i, inc in enumerate(inclusions):
        assert is_morphism(inc)
        for j, proj in enumerate(projections):
            composite = compose(proj, inc)
            if i == j:
                assert all(np.array_equal(la.as_int(b), np.eye(b.shape[0], dtype=np.int64)) for b in composite.blocks)
            else:
                assert composite.is_zero()


def test_direct_sum_host_mismatch():
    with pytest.raises(ValueError):
        direct_sum([k(make_a_n(2), ["1"]), k(make_a_n(3), ["1"])])


def test_hom_examples():
    chain = make_a_n(3)
    assert len(hom_basis(k(chain, ["2", "3"]), k(chain, ["1", "2"]))) == 1
    assert len(hom_basis(k(chain, ["1", "2"]), k(chain, ["2", "3"]))) == 0
    assert len(hom_basis(k(chain, ["1"]), k(chain, ["3"]))) == 0


def test_interval_modules_are_bricks(rng):
    for host in (make_grid(2, 3), make_c(2, 1), random_poset(5, rng)):
        for interval in enumerate_intervals(host):
            module = interval_module(host, interval, 3)
            assert len(hom_basis(module, module)) == 1


def test_hom_basis_elements_are_morphisms(d4_module, d4):
    for interval in enumerate_intervals(d4):
        for f in hom_basis(interval_module(d4, interval, 2), d4_module):
            assert is_morphism(f)


def test_hom_dimension_survives_basis_change(rng):
    for _ in range(10):
        host = random_poset(int(rng.integers(2, 6)), rng)
        m = random_module(host, 3, rng, max_dim=2)
        n = random_module(host, 3, rng, max_dim=2)
        m2, iso_m = random_basis_change(m, rng)
        n2, _ = random_basis_change(n, rng)
        assert validate(m2).ok
        assert is_morphism(iso_m)
        assert len(hom_basis(m, n)) == len(hom_basis(m2, n2))


def test_kernel_and_cokernel_examples():
    chain = make_a_n(2)
    top = k(chain, ["1", "2"])
    ker, _ = kernel(identity_morphism(top))
    assert ker.is_zero()
    coker, _ = cokernel(identity_morphism(top))
    assert coker.is_zero()

    simple = k(chain, ["2"])
    ker, inc = kernel(zero_morphism(simple, top))
    assert ker.dims == simple.dims
    coker, _ = cokernel(zero_morphism(simple, top))
    assert coker.dims == top.dims

    (f,) = hom_basis(simple, top)
    coker, proj = cokernel(f)
    assert is_isomorphic(coker, k(chain, ["1"]))
    assert compose(proj, f).is_zero()


def test_kernel_cokernel_image_bookkeeping(rng):
    for _ in range(15):
        host = random_poset(int(rng.integers(2, 6)), rng)
        p = int(rng.choice([2, 3]))
        source = random_module(host, p, rng, max_dim=3)
        target = random_module(host, p, rng, max_dim=3)
        f = random_morphism(source, target, rng)
        ker, inc = kernel(f)
        coker, proj = cokernel(f)
        im, _ = image(f)
        assert validate(ker).ok and validate(coker).ok and validate(im).ok
        assert is_morphism(inc) and is_morphism(proj)
        assert compose(f, inc).is_zero()
        assert compose(proj, f).is_zero()
        for x in range(host.n):
            rank = f.rank_at(x)
            assert source.dims[x] == ker.dims[x] + rank
            assert coker.dims[x] == target.dims[x] - rank
            assert im.dims[x] == rank


def test_support_examples(d4_module, d4):
    assert support(k(d4, ["1", "3"])) == tuple(d4.indices(["1", "3"]))
    assert support(zero_module(d4, 2)) == ()
    assert support(d4_module) == (0, 1, 2, 3)


def test_restrict_examples():
    chain = make_a_n(3)
    full = k(chain, ["1", "2", "3"])
    whole = full_subposet(chain, range(3))
    assert restrict(full, whole).dims == full.dims

    emb = full_subposet(chain, chain.indices(["1", "3"]))
    restricted = restrict(full, emb)
    assert restricted.dims == (1, 1)
    assert la.as_int(restricted.maps[(0, 1)]).tolist() == [[1]]
    assert is_isomorphic(restricted, interval_module(emb.sub, Interval.of([0, 1]), 2))


def test_restriction_of_interval_splits_into_components(rng):
    for _ in range(15):
        host = random_poset(int(rng.integers(2, 7)), rng)
        keep = sorted(rng.choice(host.n, size=int(rng.integers(1, host.n + 1)), replace=False).tolist())
        emb = full_subposet(host, keep)
        intervals = enumerate_intervals(host)
        interval = intervals[int(rng.integers(0, len(intervals)))]
        restricted = restrict(interval_module(host, interval, 2), emb)
        inside = emb.preimage(interval.members)
        if not inside:
            assert restricted.is_zero()
            continue
        pieces = [interval_module(emb.sub, Interval.of(c), 2) for c in connected_components(emb.sub, inside)]
        expected = direct_sum(pieces)[0]
        assert is_isomorphic(restricted, expected)


def test_restriction_commutes_with_kernels(rng):
    for _ in range(10):
        host = random_poset(int(rng.integers(3, 6)), rng)
        source = random_module(host, 2, rng)
        target = random_module(host, 2, rng)
        f = random_morphism(source, target, rng)
        emb = full_subposet(host, sorted(rng.choice(host.n, size=2, replace=False).tolist()))
        left = restrict(kernel(f)[0], emb)
        right = kernel(restrict_morphism(f, emb))[0]
        assert left.dims == right.dims
        assert is_isomorphic(left, right)


def test_theta_interval_examples(d4):
    diamond = make_c(1, 1)
    ends = full_subposet(diamond, diamond.indices(["bot", "top"]))
    assert theta_interval(ends, Interval.of([0, 1])).members == (0, 1, 2, 3)

    whole = full_subposet(d4, range(4))
    for interval in enumerate_intervals(d4):
        assert theta_interval(whole, interval) == interval

    without_centre = full_subposet(d4, d4.indices(["1", "2", "4"]))
    assert theta_interval(without_centre, Interval.of([0, 1, 2])).members == (0, 1, 2, 3)


def test_restriction_undoes_theta(rng):
    for _ in range(12):
        host = random_poset(int(rng.integers(2, 7)), rng)
        keep = sorted(rng.choice(host.n, size=int(rng.integers(1, host.n + 1)), replace=False).tolist())
        emb = full_subposet(host, keep)
        for interval in enumerate_intervals(emb.sub):
            hull = theta_interval(emb, interval)
            back = restrict(interval_module(host, hull, 2), emb)
            assert is_isomorphic(back, interval_module(emb.sub, interval, 2))


def test_extend_by_zero_round_trip(d4):
    emb = full_subposet(d4, d4.indices(["3", "2", "4"]))
    module = interval_module(emb.sub, Interval.of(range(3)), 2)
    extended = extend_by_zero(module, emb)
    assert extended.dims == (0, 1, 1, 1)
    assert validate(extended).ok
    assert is_isomorphic(restrict(extended, emb), module)
    with pytest.raises(IntresError):
        extend_by_zero(k(full_subposet(d4, d4.indices(["1", "2"])).sub, ["1"]),
                       full_subposet(d4, d4.indices(["1", "2"])))


def test_isomorphism_verdicts(d4_module, rng):
    changed, iso = random_basis_change(d4_module, rng)
    result = find_isomorphism(d4_module, changed)
    assert result.verdict == ISOMORPHIC
    assert result.witness is not None and is_morphism(result.witness)

    chain = make_a_n(2)
    split = direct_sum([k(chain, ["1"]), k(chain, ["2"])])[0]
    assert find_isomorphism(split, k(chain, ["1", "2"])).verdict == NOT_ISOMORPHIC
    assert find_isomorphism(k(chain, ["1"]), k(chain, ["2"])).verdict == NOT_ISOMORPHIC


def test_large_hom_spaces_fall_back_to_sampling():
    chain = make_a_n(1)
    big = direct_sum([k(chain, ["1"])] * 3)[0]
    tight = Settings(iso_exhaustive_max_dim=2, iso_random_trials=0)
    assert find_isomorphism(big, big, tight).verdict == INCONCLUSIVE
    assert find_isomorphism(big, big, Settings(iso_exhaustive_max_dim=2)).verdict == ISOMORPHIC


def test_random_module_respects_caps(rng):
    for _ in range(20):
        host = random_poset(int(rng.integers(1, 6)), rng)
        module = random_module(host, 3, rng, max_dim=2)
        assert not module.is_zero()
        assert max(module.dims) <= 2
        assert validate(module).ok


def test_interval_decomposable_layout(d4):
    summands = IntervalMultiset.from_copies(d4, [Interval.of([2]), Interval.of([0, 2]), Interval.of([2])])
    assert summands.pairs == ((Interval.of([2]), 2), (Interval.of([0, 2]), 1))
    module, inclusions = interval_decomposable(summands, 2)
    assert module.dims == summands.dims() == (1, 0, 3, 0)
    assert len(inclusions) == 3
    assert summands.to_doc() == {"3": 2, "1,3": 1}


def test_module_doc_round_trip(d4_module):
    doc = load_fixture("d4_M.json")
    assert module_to_doc(d4_module) == doc
    again = module_from_doc(module_to_doc(d4_module))
    assert module_to_doc(again) == doc


def test_module_doc_with_poset_reference(d4):
    module = module_from_doc(load_fixture("d4_k13.json"), base_dir=DATA_DIR)
    assert module.host == d4
    assert is_isomorphic(module, k(d4, ["1", "3"]))


def test_module_doc_errors(d4):
    doc = load_fixture("d4_M.json")
    doc["maps"]["1->3"] = [[1, 0], [1, 0]]
    with pytest.raises(InputFormatError):
        module_from_doc(doc)

    doc = load_fixture("d4_M.json")
    doc["maps"]["1->2"] = [[1]]
    with pytest.raises(InputFormatError):
        module_from_doc(doc)

    doc = load_fixture("d4_M.json")
    doc["p"] = 4
    with pytest.raises(InputFormatError):
        module_from_doc(doc)

    doc = load_fixture("d4_M.json")
    doc["dims"]["9"] = 1
    with pytest.raises(InputFormatError):
        module_from_doc(doc)


def test_module_doc_rejects_non_commuting_square():
    grid = make_grid(2, 2)
    doc = {
        "poset": {"elements": list(grid.labels), "relations": [[grid.labels[a], grid.labels[b]] for a, b in grid.hasse]},
        "p": 2,
        "dims": {label: 1 for label in grid.labels},
        "maps": {"00->01": [[1]], "00->10": [[1]], "01->11": [[1]], "10->11": [[0]]},
    }
    with pytest.raises(ModuleValidationError) as excinfo:
        module_from_doc(doc)
    assert excinfo.value.square is not None


def test_omitted_maps_default_to_zero():
    chain = make_a_n(2)
    doc = {"poset": {"elements": ["1", "2"], "relations": [["1", "2"]]}, "p": 3, "dims": {"1": 1, "2": 1}}
    module = module_from_doc(doc)
    assert la.as_int(module.maps[(0, 1)]).tolist() == [[0]]
    assert is_isomorphic(module, direct_sum([k(chain, ["1"], 3), k(chain, ["2"], 3)])[0])


def test_morphism_helpers():
    chain = make_a_n(2)
    top = k(chain, ["1", "2"])
    ident = identity_morphism(top)
    assert ident.is_surjective() and ident.is_injective()
    zero = zero_morphism(top, top)
    assert zero.is_zero()
    assert isinstance(compose(ident, zero), Morphism)

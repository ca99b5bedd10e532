import logging

import numpy as np
import pytest

from calcs.approx_calcs import interval_resdim, is_interval_decomposable
from calcs.homology_calcs import (
    ar_translate,
    dual,
    interval_gldim,
    kernel_in_radical,
    minimal_presentation,
    monotonicity_check,
    presentation_is_exact,
    projective_cover,
    projective_gldim,
    projective_map,
    projective_resolution_length,
    radical,
    top,
    transpose,
)
from calcs.module_calcs import (
    direct_sum,
    interval_module,
    is_isomorphic,
    is_morphism,
    projective_module,
    random_module,
    validate,
)
from calcs.poset_calcs import (
    Interval,
    SubposetEmbedding,
    all_orientations,
    full_subposet,
    make_a_n,
    make_c,
    make_d4,
    make_igusa,
    opposite,
    poset_from_relations,
    random_poset,
)
from calcs.utils import Settings

from conftest import named_posets


def k(host, labels, p=2):
    return interval_module(host, Interval.of(host.indices(labels)), p)


def test_radical_and_top_on_a_chain():
    chain = make_a_n(2)
    module = k(chain, ["1", "2"])
    rad, inclusion = radical(module)
    assert rad.dims == (0, 1)
    assert is_morphism(inclusion)
    assert is_isomorphic(top(module), k(chain, ["1"]))
    assert radical(k(chain, ["2"]))[0].is_zero()


def test_projective_cover_of_fixture(d4_module):
    cover = projective_cover(d4_module)
    host = d4_module.host
    assert cover.generators == host.indices(["1", "3"])
    assert cover.map.source.dims == (1, 2, 2, 2)
    assert cover.map.is_surjective()
    assert is_morphism(cover.map)


def test_projective_cover_of_projective_is_iso():
    diamond = make_c(1, 1)
    for x in range(diamond.n):
        proj = projective_module(diamond, x, 3)
        cover = projective_cover(proj)
        assert cover.generators == (x,)
        assert cover.map.is_injective() and cover.map.is_surjective()


def test_projective_covers_are_minimal(rng):
    for _ in range(30):
        host = random_poset(int(rng.integers(1, 6)), rng)
        module = random_module(host, int(rng.choice([2, 3, 5])), rng, max_dim=2)
        cover = projective_cover(module)
        assert cover.map.is_surjective()
        assert kernel_in_radical(cover.map)


def test_split_surjection_is_not_minimal():
    diamond = make_c(1, 1)
    proj = projective_module(diamond, 0, 2)
    _, _, projections = direct_sum([proj, proj])
    assert projections[0].is_surjective()
    assert not kernel_in_radical(projections[0])


def test_projective_map_respects_order():
    chain = make_a_n(2)
    f = projective_map(chain, 2, [1], [0], np.array([[1]]))
    assert is_morphism(f)
    assert f.source.dims == (0, 1) and f.target.dims == (1, 1)
    assert f.rank_at(1) == 1


def test_presentation_of_fixture(d4_module):
    pres = minimal_presentation(d4_module)
    assert presentation_is_exact(pres)
    assert pres.coefficients.shape == (len(pres.p0), len(pres.p1))


def test_presentations_are_exact(rng):
    for _ in range(20):
        host = random_poset(int(rng.integers(1, 6)), rng)
        module = random_module(host, int(rng.choice([2, 3])), rng, max_dim=2)
        assert presentation_is_exact(minimal_presentation(module))


def test_dual_reverses_the_poset(d4_module):
    flipped = dual(d4_module)
    assert flipped.host == opposite(d4_module.host)
    assert flipped.dims == d4_module.dims
    assert validate(flipped).ok
    assert is_isomorphic(dual(flipped), d4_module)


def test_translate_kills_projectives():
    for host in (make_d4("fbf"), make_c(2, 1), make_igusa()):
        for x in range(host.n):
            assert ar_translate(projective_module(host, x, 2)).is_zero()


def test_translate_anchors_on_d4(d4_module, d4):
    assert is_isomorphic(ar_translate(k(d4, ["1", "3"])), d4_module)
    assert is_isomorphic(ar_translate(k(d4, ["3"])), k(d4, ["1", "2", "3", "4"]))


def test_transpose_lives_on_the_opposite(d4):
    assert transpose(k(d4, ["3"])).host == opposite(d4)


def test_translates_on_d4_have_one_non_interval_decomposable():
    d4 = make_d4("fbf")
    report = interval_gldim(d4)
    assert report.value == 1
    odd = [i for i, value in report.per_interval if value > 0]
    assert odd == [Interval.of(d4.indices(["1", "3"]))]
    assert report.witness == odd[0]
    assert not is_interval_decomposable(ar_translate(k(d4, ["1", "3"])))


@pytest.mark.parametrize("n", range(1, 7))
def test_a_n_has_zero_interval_gldim(n):
    for word in all_orientations(n - 1):
        report = interval_gldim(make_a_n(n, word))
        assert report.value == 0
        assert report.witness is None


@pytest.mark.parametrize("word", all_orientations(3))
def test_d4_has_interval_gldim_one(word):
    assert interval_gldim(make_d4(word)).value == 1


def test_c_family_has_zero_interval_gldim():
    for m in range(1, 5):
        for l in range(1, 6 - m):
            assert interval_gldim(make_c(m, l)).value == 0


@pytest.mark.parametrize("p", [2, 3])
def test_igusa_projective_gldim(p):
    assert projective_gldim(make_igusa(), p) == 2
    assert projective_gldim(make_igusa(True), p) == 3


def test_chain_projective_gldim():
    assert projective_gldim(make_a_n(1)) == 0
    for n in range(2, 6):
        assert projective_gldim(make_a_n(n)) == 1


def test_projective_resolution_length_of_simple():
    chain = make_a_n(3)
    assert projective_resolution_length(k(chain, ["3"])) == 0
    assert projective_resolution_length(k(chain, ["1"])) == 1


def test_interval_gldim_without_support_reduction_agrees():
    d4 = make_d4("bfb")
    reduced = interval_gldim(d4, settings=Settings(reduce_support=True))
    full = interval_gldim(d4, settings=Settings(reduce_support=False))
    assert reduced.per_interval == full.per_interval


def test_zero_versus_nonzero_does_not_depend_on_the_field():
    for host in (make_d4("ffb"), make_c(2, 1), make_a_n(4, "fbf"), make_igusa()):
        values = {p: interval_gldim(host, p).value for p in (2, 3, 5)}
        assert len({value == 0 for value in values.values()}) == 1


@pytest.mark.slow
def test_zero_versus_nonzero_across_fields_on_the_corpus(rng, record_property):
    hosts = named_posets() + [random_poset(int(rng.integers(1, 7)), rng) for _ in range(40)]
    table = []
    for host in hosts:
        values = {p: interval_gldim(host, p).value for p in (2, 3, 5)}
        table.append((host.labels, host.hasse, values))
        assert len({value == 0 for value in values.values()}) == 1, (host.hasse, values)
    record_property("interval_gldim_by_field", table)
    assert len(table) == len(hosts)


def test_monotonicity_on_named_pairs():
    d4 = make_d4("fbf")
    result = monotonicity_check(full_subposet(d4, d4.indices(["1", "2", "4"])))
    assert result.holds
    assert result.host_value == 1

    igusa = make_igusa()
    result = monotonicity_check(full_subposet(igusa, [x for x in range(igusa.n) if igusa.labels[x] != "c"]))
    assert result.holds


def test_non_full_subposet_is_rejected(caplog):
    chain = make_a_n(2)
    antichain = poset_from_relations(["1", "2"], [])
    emb = SubposetEmbedding(antichain, chain, (0, 1))
    with caplog.at_level(logging.WARNING):
        assert monotonicity_check(emb) is None
    assert "not full" in caplog.text


@pytest.mark.slow
def test_monotonicity_on_random_pairs(rng):
    for _ in range(50):
        host = random_poset(int(rng.integers(2, 7)), rng)
        keep = sorted(rng.choice(host.n, size=int(rng.integers(1, host.n + 1)), replace=False).tolist())
        result = monotonicity_check(full_subposet(host, keep))
        assert result.holds, (host.labels, host.hasse, keep)


@pytest.mark.slow
def test_resdim_of_translates_is_finite_on_random_posets(rng):
    settings = Settings(max_steps=16)
    for _ in range(20):
        host = random_poset(int(rng.integers(2, 7)), rng)
        for x in range(host.n):
            simple = interval_module(host, Interval.of([x]), 2)
            assert interval_resdim(ar_translate(simple), settings=settings) >= 0

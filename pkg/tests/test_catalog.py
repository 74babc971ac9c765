import pytest

from wdvvlab import catalog
from wdvvlab.algext import AlgElement
from wdvvlab.kernel import NotHomogeneous, Poly, RatFrac, as_mpq, weighted_degree

POTENTIALS = ["A3", "B3", "H3", "H3p", "H3pp", "D4_1", "F4_1", "H4_TH",
              "H4_0", "H4_1", "H4_2", "H4_3", "H4_6", "H4_7", "H4_9",
              "E6_1", "E7_1", "E8_1", "E8_2"]
FAMILIES = ["F_E6_1", "F_E7_1", "F_E8_1", "G_E12R", "G_E13R", "G_E14R",
            "G_H3", "G_H3pp", "G_H4_0", "G_H4_1", "H_E8_2"]
TRANSFORMS = ["T4_E6", "T4_E7", "T4_E8", "T5_H3P_H3", "T5_H3PP_H3",
              "T5_G_H3", "T5_H4_0", "T5_H4_1", "H4_U_T", "T5_PAIR_0_9",
              "T5_PAIR_1_7", "T5_PAIR_2_6", "ST34_MAP", "E8_1_PV",
              "E6_FIXTURES"]
SCHEDULES = ["E6_CONSTRUCT", "APPENDIX_E8"]
UNAVAILABLE = ["H4_4", "H4_5", "H4_8", "H4_10"]


def test_corpus_completeness():
    assert set(catalog.list_entries("potential")) == \
        set(POTENTIALS) | set(UNAVAILABLE)
    assert catalog.list_entries("vector_field") == ["ST34_PVF"]
    assert set(catalog.list_entries("family")) == set(FAMILIES)
    assert set(catalog.list_entries("transform")) == set(TRANSFORMS)
    assert set(catalog.list_entries("schedule")) == set(SCHEDULES)


@pytest.mark.parametrize("eid", POTENTIALS)
def test_potential_weighted_homogeneous(eid):
    e = catalog.load_entry(eid)
    w = list(e.weights)
    if e.relation is not None:
        w = w + [e.relation.z_weight(e.weights)]
    f = e.potential
    if isinstance(f, RatFrac):
        d = weighted_degree(f.num, w) - weighted_degree(f.den, w)
    else:
        d = weighted_degree(f, w)
    assert d == e.weights[0] + 2


@pytest.mark.parametrize("eid", POTENTIALS)
def test_weight_duality(eid):
    e = catalog.load_entry(eid)
    w = e.weights
    n = len(w)
    for j in range(n):
        assert w[j] + w[n - 1 - j] == 1 + w[0]


@pytest.mark.parametrize("eid", POTENTIALS + FAMILIES)
def test_roundtrip_through_renderer(eid):
    e = catalog.load_entry(eid)
    exprs = []
    if e.potential is not None:
        exprs.append(e.potential)
    if e.relation is not None:
        exprs.append(e.relation.m)
    if e.family is not None:
        exprs.append(e.family)
    assert exprs
    for x in exprs:
        assert catalog.roundtrip_ok(x)


def test_class_weights_match_invariant_degrees():
    for eid in POTENTIALS:
        e = catalog.load_entry(eid)
        if e.conjugacy is None:
            continue
        exps = e.conjugacy.exponents
        top = max(exps)
        assert tuple(as_mpq(d, top) for d in sorted(exps)) == tuple(e.weights)


def test_h4_3_degree_data():
    e = catalog.load_entry("H4_3")
    assert e.degree_data.exponents == (2, 6, 8, 12)
    assert e.degree_data.degree == 4


def test_e8_1_weights():
    e = catalog.load_entry("E8_1")
    assert tuple(str(x) for x in e.weights) == (
        "1/12", "1/4", "1/3", "1/2", "7/12", "3/4", "5/6", "1")


def test_unavailable_cases_error():
    with pytest.raises(catalog.EntryUnavailable) as exc:
        catalog.load_entry("H4_8")
    assert "to_be_determined" in str(exc.value)
    for eid in UNAVAILABLE:
        with pytest.raises(catalog.EntryUnavailable):
            catalog.load_entry(eid)


def test_unknown_id_rejected():
    with pytest.raises(catalog.CatalogError):
        catalog.load_entry("NO_SUCH_CASE")


def test_not_regular_classes_have_no_exponents():
    data = catalog.load_conjugacy_data()
    for d in data:
        if not d.regular:
            assert d.exponents == ()
            assert "not regular" in d.note
        else:
            assert len(d.exponents) == int(d.group[1])


def test_vector_field_entry_loads():
    e = catalog.load_entry("ST34_PVF")
    assert len(e.vector_field) == 6
    assert e.euler_weights[:2] == (as_mpq(1, 7), as_mpq(2, 7))
    ws = list(e.euler_weights)
    for k, h in enumerate(e.vector_field, 1):
        d = weighted_degree(h, ws)
        assert not isinstance(d, NotHomogeneous)


def test_h4_9_has_laurent_terms():
    e = catalog.load_entry("H4_9")
    assert isinstance(e.potential, RatFrac)
    assert e.potential.den.uses(e.ring.index["z"])


def test_relations_are_monic_with_stated_degree():
    # extension degree from the class table equals the z-degree of m
    for eid in POTENTIALS:
        e = catalog.load_entry(eid)
        if e.relation is None:
            assert e.conjugacy is None or e.conjugacy.degree == 1
            continue
        if e.conjugacy is not None:
            assert e.relation.d == e.conjugacy.degree


def test_transform_constants_parse():
    e = catalog.load_entry("T4_E6")
    assert e.constants == [("c6", 9, as_mpq(4, 2187))]
    assert set(e.transform) == {"x1", "x2", "x3", "x4", "x6", "z"}
    e8 = catalog.load_entry("T4_E8")
    assert e8.constants == [("c8", 12, as_mpq(-16, 243))]
    assert "x7" in e8.extras

import pytest

from wdvvlab import catalog
from wdvvlab.exprio import parse_poly, render
from wdvvlab.frobenius import (FrobeniusData, PotentialSpec, SpecError,
                               build_F0, check_homogeneity,
                               check_tri_hamiltonian, check_wdvv,
                               delta_extract, derive_frobenius, discriminant,
                               euler_antiderivative)
from wdvvlab.kernel import Poly, Ring, WeightVector, as_mpq, det, PolyMatrix


def spec_of(cid):
    return PotentialSpec.from_entry(catalog.load_entry(cid))


# ---------------------------------------------------------------------------
# the fixed cubic part


def test_f0_small_cases():
    R3 = Ring(["x1", "x2", "x3"])
    assert build_F0(3, R3) == parse_poly("1/2*x1*x3^2 + 1/2*x2^2*x3", R3)
    R4 = Ring(["x1", "x2", "x3", "x4"])
    assert build_F0(4, R4) == parse_poly("1/2*x1*x4^2 + x2*x3*x4", R4)
    R6 = Ring(["x1", "x2", "x3", "x4", "x5", "x6"])
    assert build_F0(6, R6) == parse_poly(
        "1/2*x1*x6^2 + x2*x5*x6 + x3*x4*x6", R6)


def test_every_potential_extends_f0():
    # F - F0 must be free of the last flat variable
    for cid in ["A3", "B3", "H3", "H3pp", "D4_1", "H4_0", "H4_1", "E6_1"]:
        e = catalog.load_entry(cid)
        n = len(e.weights)
        f0 = build_F0(n, e.ring)
        f = e.potential
        rest = f - f0
        assert not rest.uses(n - 1), cid


# ---------------------------------------------------------------------------
# homogeneity and the Euler field


def test_homogeneity_examples():
    assert check_homogeneity(spec_of("A3")) == as_mpq(5, 2)
    assert check_homogeneity(spec_of("H3")) == as_mpq(11, 5)
    assert check_homogeneity(spec_of("E6_1")) == as_mpq(2, 1) + as_mpq(2, 9)


def test_euler_derivation_matches_weight():
    # E F = w F checked through actual derivatives on a polynomial case
    e = catalog.load_entry("A3")
    f = e.potential
    acc = e.ring.zero()
    for j, name in enumerate(e.ring.vars):
        acc = acc + e.ring.var(name) * f.diff(j) * e.weights[j]
    assert acc == f * as_mpq(5, 2)


def test_homogeneity_rejects_broken_potential():
    e = catalog.load_entry("A3")
    bad = e.potential + parse_poly("x1^4", e.ring)
    spec = PotentialSpec("A3_broken", e.ring, e.weights, potential=bad)
    with pytest.raises(SpecError):
        check_homogeneity(spec)


# ---------------------------------------------------------------------------
# structure matrices


def test_b3_unit_structure_matrix():
    data = derive_frobenius(spec_of("A3"))
    ok, _ = data.bn_is_identity()
    assert ok


def test_wdvv_pass_base_cases():
    for cid in ["A3", "H3pp", "D4_1"]:
        rep = check_wdvv(spec_of(cid))
        assert rep.status == "pass", (cid, rep.to_dict())


def test_wdvv_detects_perturbation():
    # x1^5/60 -> x1^5/61 breaks a commutator
    e = catalog.load_entry("A3")
    bad = e.potential - parse_poly("x1^5/60", e.ring) \
        + parse_poly("x1^5/61", e.ring)
    spec = PotentialSpec("A3_bad", e.ring, e.weights, potential=bad)
    rep = check_wdvv(spec)
    assert rep.status == "fail"
    assert any(c.name.startswith("commutator") and c.status == "fail"
               for c in rep.checks)


def test_vector_field_integrability():
    rep = check_wdvv(spec_of("ST34_PVF"), pairs=[(0, 1)])
    names = {c.name: c.status for c in rep.checks}
    assert names["integrability"] == "pass"
    assert names["unit_structure_matrix"] == "pass"
    assert names["commutator_1_2"] == "pass"


# ---------------------------------------------------------------------------
# discriminants


def test_h3_discriminant_matches_display():
    d = discriminant(spec_of("H3"))
    e = catalog.load_entry("T5_H3PP_H3")
    R3 = Ring(["x1", "x2", "x3"])
    shown = parse_poly(e.extras["delta_h3"], R3)
    assert d.subs({}, R3) == shown


def test_h3pp_discriminant_matches_display():
    d = discriminant(spec_of("H3pp"))  # AlgElement in (x1,x2,x3,z)
    e = catalog.load_entry("H3pp")
    ring = e.ring
    # displayed over (u1, u3, v): u1=x1, u3=x3, v=z, u2 eliminated
    Ru = Ring(["u1", "u3", "v"])
    cat = catalog.load_entry("T5_H3PP_H3")
    shown = parse_poly(cat.extras["delta_h3pp"], Ru)
    # move the computed one into (u1,u3,v) via x2 = z^2 - x1^2
    z = ring.var("z")
    x1 = ring.var("x1")
    num = d if isinstance(d, Poly) else d.num
    num = num.subs({"x2": z * z - x1 * x1})
    got = num.subs({"x1": Ru.var("u1"), "x3": Ru.var("u3"),
                    "z": Ru.var("v")}, Ru)
    assert got == shown


def test_delta_h3_restriction():
    # setting x2 = x3 = 0 leaves the pure x1 power with its coefficient
    d = discriminant(spec_of("H3"))
    R = d.ring
    got = d.subs({"x2": R.zero(), "x3": R.zero()})
    assert got == parse_poly("-1/1000*x1^15", R)


# ---------------------------------------------------------------------------
# the rank-6 restriction fixture


@pytest.fixture(scope="module")
def e6_data():
    return derive_frobenius(spec_of("E6_1"))


def test_e6_restricted_matrix_matches_display(e6_data):
    # the display lives in (x4, x6, z) coordinates: x5 eliminated through
    # the relation (x5 = z^2 + v, and v vanishes on x1 = x2 = x3 = 0)
    e = catalog.load_entry("E6_FIXTURES")
    R0 = Ring(["x4", "x6", "z"])
    rows = [r.split(";") for r in e.extras["T0"].split("|")]
    z0 = R0.var("z")
    bind = {"x1": R0.zero(), "x2": R0.zero(), "x3": R0.zero(),
            "x5": z0 * z0, "x4": R0.var("x4"), "x6": R0.var("x6"),
            "z": z0}
    T = e6_data.T_matrix()
    for i in range(6):
        for j in range(6):
            got = T[i][j].subs(bind, R0)
            assert got == parse_poly(rows[i][j], R0), (i, j)


def test_e6_restricted_determinant_matches_display(e6_data):
    e = catalog.load_entry("E6_FIXTURES")
    R0 = Ring(["x4", "x6", "z"])
    z0 = R0.var("z")
    zero = {"x1": R0.zero(), "x2": R0.zero(), "x3": R0.zero(),
            "x5": z0 * z0, "x4": R0.var("x4"), "x6": R0.var("x6"),
            "z": z0}
    rows = [[x.subs(zero, R0) for x in row] for row in e6_data.T_matrix()]
    d = det(PolyMatrix(R0, rows), "auto")
    assert d == parse_poly(e.extras["det_T0"], R0)
    # and the two determinant strategies agree here
    assert d == det(PolyMatrix(R0, rows), "cofactor")


def test_e6_restriction_factored_form(e6_data):
    # on x1 = x2 = x3 = z = 0 (x5 eliminated through the relation) the
    # determinant factors as x6^2 (x6^2 - c x4^3)^2 with c = 16/3, the
    # solved value of 32/3 r1^2 v1
    ring = e6_data.ring
    z = ring.var("z")
    v = ring.zero() + parse_poly(
        "-9*x1^4 - 12*x1*x2^2 + 2*x2*x3 + 2*x1*x4", ring)
    rows = [[x.subs({"x5": z * z + v}).subs(
        {"x1": ring.zero(), "x2": ring.zero(), "x3": ring.zero(),
         "z": ring.zero()}) for x in row] for row in e6_data.T_matrix()]
    d = det(PolyMatrix(ring, rows), "auto")
    x4, x6 = ring.var("x4"), ring.var("x6")
    c = as_mpq(16, 3)
    target = x6 * x6 * (x6 * x6 - x4 ** 3 * c) ** 2
    assert d == target


def test_e6_restricted_determinant_squarefree(e6_data):
    from wdvvlab.kernel import Squarefree, is_squarefree_in
    e = catalog.load_entry("E6_FIXTURES")
    R0 = Ring(["x4", "x6", "z"])
    d = parse_poly(e.extras["det_T0"], R0)
    r = is_squarefree_in(d, R0.index["x6"], seed=7, trials=3)
    assert isinstance(r, Squarefree)


# ---------------------------------------------------------------------------
# tri-Hamiltonian classification


def test_tri_hamiltonian_classification():
    assert check_tri_hamiltonian(["1/2", "1/2", 1, 1])
    assert check_tri_hamiltonian(["1/3", "1/3", 1, 1])
    assert not check_tri_hamiltonian(["2/9", "1/3", "5/9", "2/3", "8/9", 1])
    assert not check_tri_hamiltonian(["1/2", "3/4", 1])
    assert not check_tri_hamiltonian([1, 1, 1, 1])


def test_tri_hamiltonian_exactly_three_in_catalog():
    hits = []
    for cid in catalog.list_entries("potential"):
        try:
            e = catalog.load_entry(cid)
        except catalog.EntryUnavailable:
            continue
        if check_tri_hamiltonian(e.weights):
            hits.append(cid)
    assert sorted(hits) == ["D4_1", "F4_1", "H4_TH"]


# ---------------------------------------------------------------------------
# Euler antiderivative


def test_euler_antiderivative_roundtrip():
    R = Ring(["x1", "x8"])
    w = [as_mpq(1, 12), as_mpq(1)]
    entry = parse_poly("x1*x8", R)
    out = euler_antiderivative([[entry]], w, R)
    assert out[0][0] == entry * (1 / (as_mpq(1, 12) + 1))
    # applying the Euler field reproduces the input
    back = R.zero()
    for j, name in enumerate(R.vars):
        back = back + R.var(name) * out[0][0].diff(j) * w[j]
    assert back == entry


# ---------------------------------------------------------------------------
# delta extraction (rank-6 case; ranks 7 and 8 run in the extended tier)


def test_delta_extract_e6():
    phi, delta, rep = delta_extract(spec_of("E6_1"))
    assert rep.status == "pass"
    ring = delta.ring
    # delta is monic of degree 5 in x6
    assert delta.degree(ring.index["x6"]) == 5
    from wdvvlab.kernel import to_univar
    lead = to_univar(delta, ring.index["x6"])[-1]
    assert lead == 1
    # and free of the eliminated variable and of z
    assert not delta.uses(ring.index["x5"])
    assert not delta.uses(ring.index["z"])
    assert not phi.uses(ring.index["x5"])

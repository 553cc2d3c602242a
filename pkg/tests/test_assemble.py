"""Hidden extension ledgers and homotopy group assembly."""

import pytest

from effss.assemble import (
    AssembleError,
    HiddenExtension,
    LedgerError,
    PiGenerator,
    _refuse_crossings,
    assemble,
    check_extension,
    expand_ledger,
    infinity_coords,
    load_ledger,
    order_pattern_check,
    tau4_mult,
    v14_mult,
)
from effss.engine import NotCertifiedError, SliceSS, Window
from effss.grading import PresentationError, TriDegree
from effss.objects import get_object


@pytest.fixture(scope="module")
def ko():
    # the preset window: s (-4, 24), f (0, 12), w (-12, 14)
    obj = get_object("ko")
    return SliceSS(obj, obj.default_window).run()


@pytest.fixture(scope="module")
def L():
    obj = get_object("L", window=Window((-4, 16), (0, 14), (-10, 10)))
    return SliceSS(obj, obj.default_window).run()


@pytest.fixture(scope="module")
def LC():
    obj = get_object("L_C", window=Window((-2, 12), (0, 14), (-8, 10)))
    return SliceSS(obj, obj.default_window).run()


@pytest.fixture(scope="module")
def ko_rows(ko):
    return expand_ledger(ko)


@pytest.fixture(scope="module")
def L_rows(L):
    return expand_ledger(L)


@pytest.fixture(scope="module")
def LC_rows(LC):
    return expand_ledger(LC)


# -- the shipped ledgers, checked row by row ------------------------------


def test_ko_ledger_has_the_six_printed_rows(ko):
    col, rows = load_ledger("ko", ko.pres)
    assert col == "target"
    assert len(rows) == 6
    kinds = sorted(r.kind for r in rows)
    assert kinds == ["eta", "eta", "h", "h", "rho", "rho"]
    assert all(r.tau4 and r.v14 and r.special is None for r in rows)


def test_ko_row_two_v2_lands_at_3_3_1(ko):
    # the rho extension on 2*v2, listed by its target degree
    _col, rows = load_ledger("ko", ko.pres)
    p = ko.pres
    row = next(r for r in rows if p.render(r.source) == "2*v2" and r.kind == "rho")
    assert row.target == p.parse("tau2*h1^3 + rho^2*h1*v2")
    assert p.degree_of_element(row.target) == TriDegree(3, 3, 1)
    assert row.coweight == 2


def test_L_ledger_census(L):
    col, rows = load_ledger("L", L.pres)
    assert col == "source"
    assert len(rows) == 13
    by_kind = {}
    for r in rows:
        by_kind[r.kind] = by_kind.get(r.kind, 0) + 1
    assert by_kind == {"h": 8, "rho": 2, "eta": 3}
    assert sum(1 for r in rows if r.special == "highest-filtration") == 1
    assert sum(1 for r in rows if r.special == "half-carrier-order") == 1
    proofs = {r.proof for r in rows}
    assert proofs == {"Sigma^-1 ko -> L", "L -> ko", "L/rho"}


def test_L_eta_on_two_tau2_does_not_spread_along_v1_4(L):
    _col, rows = load_ledger("L", L.pres)
    p = L.pres
    row = next(r for r in rows if r.kind == "eta" and p.render(r.source) == "2*tau2")
    assert row.tau4 and not row.v14
    assert row.degree == TriDegree(0, 0, -2)


def test_L_C_ledger_is_the_single_toda_bracket_family(LC):
    col, rows = load_ledger("L_C", LC.pres)
    assert col == "source"
    assert len(rows) == 1
    (row,) = rows
    assert row.kind == "h"
    assert LC.pres.render(row.source) == "4*iv2"
    assert LC.pres.render(row.target) == "tau*h1^3"
    assert row.degree == TriDegree(3, 1, 2)


def test_row_validation_rejects_wrong_kind_shift(ko):
    p = ko.pres
    bad = HiddenExtension(
        kind="h",
        source=p.parse("2*v2"),
        target=p.parse("tau2*h1^3"),
        degree=TriDegree(4, 0, 2),
        coweight=2,
    )
    with pytest.raises(LedgerError):
        check_extension(p, bad)


def test_row_validation_rejects_non_climbing_filtration(ko):
    # an eta extension must land strictly above the page product
    p = ko.pres
    bad = HiddenExtension(
        kind="eta",
        source=p.parse("h1"),
        target=p.parse("h1^2"),
        degree=TriDegree(1, 1, 1),
        coweight=0,
    )
    with pytest.raises(LedgerError):
        check_extension(p, bad)


# -- periodicity operators -------------------------------------------------


def test_tau4_mult_on_base_and_fiber(ko, L):
    assert ko.pres.render(tau4_mult(ko, ko.pres.parse("v2"))) == "tau2^2*v2"
    assert L.pres.render(tau4_mult(L, L.pres.parse("iv2"), 2)) == "tau2^4*iv2"


def test_v14_mult_moves_carriers(ko, L):
    assert ko.pres.render(v14_mult(ko, ko.pres.parse("v2"))) == "v2^3"
    p = L.pres
    assert p.render(v14_mult(L, p.parse("iv2"))) == "iv6"
    assert p.render(v14_mult(L, p.parse("thv2"))) == "thv6"
    assert p.render(v14_mult(L, p.parse("tau2*iv4"))) == "tau2*iv8"


def test_v14_mult_refuses_classes_with_no_carrier(L):
    # tau2 times v1^4 is not a class of the fiber theory
    with pytest.raises(PresentationError):
        v14_mult(L, L.pres.parse("tau2"))


# -- ledger expansion ------------------------------------------------------


def test_ko_expansion_count_in_this_window(ko_rows):
    assert len(ko_rows) == 84


def test_ko_expansion_contains_tau4_and_v14_steps(ko, ko_rows):
    p = ko.pres
    seen = {(r.kind, p.render(r.source), p.render(r.target)) for r in ko_rows}
    assert ("h", "tau2^2*th1", "rho*tau2^2*h1*th1") in seen
    assert ("h", "th1*v2^2", "rho*h1*th1*v2^2") in seen
    assert ("rho", "2*tau2^2*v2", "tau2^3*h1^3 + rho^2*tau2^2*h1*v2") in seen


def test_L_expansion_count_in_this_window(L_rows):
    assert len(L_rows) == 101


def test_half_carrier_order_follows_the_growing_torsion(L, L_rows):
    p = L.pres
    specials = {
        p.render(r.source): p.render(r.target)
        for r in L_rows
        if r.special == "half-carrier-order"
    }
    assert specials["8*tau2*iv4"] == "rho^2*thv4"
    # one v1^4 step doubles the carrier order, so the multiple doubles too
    assert specials["16*tau2*iv8"] == "rho^2*thv8"


def test_half_carrier_order_rejects_a_wrong_stored_multiple(L):
    p = L.pres
    bad = HiddenExtension(
        kind="h",
        source=p.parse("4*tau2*iv4"),
        target=p.parse("rho^2*thv4"),
        degree=TriDegree(7, 1, 2),
        coweight=5,
        proof="L/rho",
        special="half-carrier-order",
    )
    with pytest.raises(LedgerError):
        expand_ledger(L, rows=[bad])


def test_highest_filtration_target_climbs_with_tau4(L, L_rows):
    p = L.pres
    rows = [r for r in L_rows if r.special == "highest-filtration"]
    base = next(r for r in rows if r.degree == TriDegree(3, 3, 0))
    td = p.degree_of_element(base.target)
    assert td == TriDegree(3, 9, 0)
    # the stored printed form is another representative of the same class
    want = infinity_coords(L, p.parse("rho^2*tau2^2*h1^6*iv0"))[1]
    assert infinity_coords(L, base.target)[1] == want
    stepped = next(r for r in rows if r.degree == TriDegree(3, 3, -4))
    assert p.degree_of_element(stepped.target).f == 11


def test_eta_exception_row_never_picks_up_v1_4_steps(L_rows):
    for r in L_rows:
        if r.kind == "eta" and not r.v14:
            assert r.degree.s == 0, "a v1^4 step would move the stem to 8"


def test_L_C_family_lands_on_the_predicted_targets(LC, LC_rows):
    p = LC.pres
    seen = {(p.render(r.source), p.render(r.target)) for r in LC_rows}
    assert ("4*iv2", "tau*h1^3") in seen
    assert ("4*iv6", "tau*h1^2*hv4") in seen


# -- infinity page coordinates ---------------------------------------------


def test_boundary_projects_to_nothing(LC):
    # tau*h1^4 dies on page 2, and its whole degree dies with it
    G, coords = infinity_coords(LC, LC.pres.parse("tau*h1^4"))
    assert coords == [] and G.orders == []


def test_non_cycle_does_not_survive(LC):
    with pytest.raises(AssembleError):
        infinity_coords(LC, LC.pres.parse("iv2"))


# -- assembled homotopy groups ----------------------------------------------


def test_stem_3_of_L_C_is_Z8(LC, LC_rows):
    g = assemble(LC, 3, 2, ledger=LC_rows)
    assert g.render() == "Z/8"
    assert [x.label for x in g.generators] == ["2*iv2", "tau*h1^3"]
    # the glue: four times the bottom class is the top class
    assert g.relations[0] == (0, 4, {1: 1})
    assert g.order() == 8 and g.is_cyclic


def test_stem_7_of_L_C_is_Z16(LC, LC_rows):
    g = assemble(LC, 7, 4, ledger=LC_rows)
    assert g.render() == "Z/16"
    assert [x.label for x in g.generators] == ["iv4"]


def test_stem_3_of_L_is_Z8_through_the_hidden_h(L, L_rows):
    g = assemble(L, 3, 2, ledger=L_rows)
    assert g.render() == "Z/8"
    assert [x.label for x in g.generators] == ["2*iv2", "h1^2*th1"]
    assert g.relations[0] == (0, 4, {1: 1})


def test_stem_3_weight_0_of_L_glues_two_chains(L, L_rows):
    g = assemble(L, 3, 0, ledger=L_rows)
    assert g.render() == "Z/4 + Z/16"
    labels = [x.label for x in g.generators]
    assert labels[0] == "2*tau2*iv2"
    assert labels[-1] == "rho^6*h1^2*iv4"


def test_free_summand_of_ko(ko, ko_rows):
    g = assemble(ko, 4, 2, ledger=ko_rows)
    assert g.render() == "Z"
    assert g.order() == 0
    assert g.actions["rho"] == ["tau2*h1^3 + rho^2*h1*v2"]
    assert g.actions["h"] == ["2*(2*v2)"]
    assert g.actions["eta"] == ["0"]


def test_small_torsion_column_of_ko(ko, ko_rows):
    g = assemble(ko, 2, 1, ledger=ko_rows)
    assert g.render() == "Z/2"
    assert g.generators[0].label == "h1*th1"


def test_infinite_tower_columns_refuse(ko, ko_rows):
    # the Grothendieck-Witt style columns keep doubling past any window
    for s, w in [(0, 0), (8, 4)]:
        with pytest.raises((AssembleError, NotCertifiedError)):
            assemble(ko, s, w, ledger=ko_rows)


def test_provenance_marks_deep_L_coweights(L, L_rows):
    from effss.assemble import _provenance

    assert assemble(L, 3, 2, ledger=L_rows).provenance == "chart-certified"
    assert _provenance("L", 31) == "extrapolated beyond the exhibited charts"
    assert _provenance("L", 15) == "chart-certified"
    assert _provenance("ko", 31) == "chart-certified"


# -- crossing guard ----------------------------------------------------------


def _stub(f):
    return PiGenerator(TriDegree(0, f, 0), 0, 2, "g%d" % f, "coker")


def test_interleaved_extensions_refuse():
    gens = [_stub(1), _stub(2), _stub(3), _stub(4)]
    rels = [(0, 2, {2: 1}), (1, 2, {3: 1})]  # 1 -> 3 crosses 2 -> 4
    with pytest.raises(AssembleError):
        _refuse_crossings(gens, rels)


def test_nested_and_disjoint_extensions_pass():
    gens = [_stub(1), _stub(2), _stub(3), _stub(4)]
    _refuse_crossings(gens, [(0, 2, {3: 1}), (1, 2, {2: 1})])  # nested
    _refuse_crossings(gens, [(0, 2, {1: 1}), (2, 2, {3: 1})])  # disjoint


# -- the coweight 4j - 1 pattern ---------------------------------------------


def test_coweight_3_generic_stems_are_all_Z8(L, L_rows):
    rep = order_pattern_check(L, 1, ledger=L_rows)
    assert rep["expected_generic_order"] == 8
    assert rep["ok"]
    stems = [e["stem"] for e in rep["generic"]]
    assert stems == [-2, 0, 1, 2, 4, 5, 6, 8, 9, 10, 12]
    assert all(e["orders"] == [8] for e in rep["generic"])


def test_coweight_3_exceptional_stems_have_larger_glued_orders(L, L_rows):
    rep = order_pattern_check(L, 1, ledger=L_rows)
    byst = {e["stem"]: e for e in rep["exceptional"]}
    assert byst[3]["orders"] == [4, 16]
    assert byst[3]["h_glued"] >= 3
    assert byst[7]["orders"] == [8, 16]


def test_coweight_7_generic_order_is_16(L, L_rows):
    rep = order_pattern_check(L, 2, ledger=L_rows)
    assert rep["expected_generic_order"] == 16
    assert rep["ok"]
    assert all(e["orders"] == [16] for e in rep["generic"])

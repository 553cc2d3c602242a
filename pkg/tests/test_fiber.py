"""Fiber construction: carriers, generated rules, derived d1 and splitting."""

import json
import random

import pytest

from effss.engine import SliceSS, Window
from effss.fiber import (
    FiberError,
    build_fiber_object,
    splitting_report,
    val_3_pow_minus_1,
)
from effss.grading import PresentationError, TriDegree, presentation_from_dict
from effss.objects import get_object, load_data

SMALL = Window(s=(-2, 8), f=(0, 4), w=(-4, 6))


@pytest.fixture(scope="module")
def L():
    return build_fiber_object(load_data("L"), SMALL, r_max=2)


@pytest.fixture(scope="module")
def LC():
    return build_fiber_object(load_data("L_C"), SMALL, r_max=2)


# -- oracles first: closed forms against raw big-integer arithmetic ------


def test_val_3_pow_minus_1_against_direct_arithmetic():
    for n in range(1, 65):
        x = 3**n - 1
        direct = 0
        while x % 2 == 0:
            x //= 2
            direct += 1
        assert val_3_pow_minus_1(n) == direct, n


def test_val_3_pow_minus_1_large_input_is_closed_form():
    # 3^65536 - 1 has ~31k digits; the closed form must not build it
    assert val_3_pow_minus_1(65536) == 18
    assert val_3_pow_minus_1(3 * 2**40) == 42
    with pytest.raises(ValueError):
        val_3_pow_minus_1(0)


def test_iota_carrier_orders_frozen(L):
    p = L.pres
    want = {"iv0": 0, "iv2": 8, "iv4": 16, "iv6": 8, "iv8": 32, "iv10": 8}
    for name, o in want.items():
        assert p.generators[p.gen(name)].torsion == o, name


# -- generator census ----------------------------------------------------


def test_carrier_degrees_and_slots(L):
    p = L.pres
    got = {
        g.name: (tuple(g.degree), g.torsion, g.cap, tuple(sorted(g.slots)))
        for g in p.generators[:9]
    }
    assert got == {
        "rho": ((-1, 1, -1), 2, None, ()),
        "tau2": ((0, 0, -2), 0, None, ()),
        "h1": ((1, 1, 1), 2, None, ("xh1",)),
        "th1": ((1, 1, 0), 2, 1, ("xth1",)),
        "iv0": ((-1, 1, 0), 0, 1, ("fam",)),
        "rv2": ((3, 1, 1), 2, 1, ("fam", "xh1", "xth1")),
        "hv2": ((5, 1, 3), 2, 1, ("fam", "xth1")),
        "thv2": ((5, 1, 2), 2, 1, ("fam", "xth1")),
        "iv2": ((3, 1, 2), 8, 1, ("fam",)),
    }


def test_image_part_is_the_iota_side(L):
    p = L.pres
    assert L.part_of(p.monomial({"iv2": 1, "rho": 1})) == "image"
    assert L.part_of(p.monomial({"iv0": 1})) == "image"
    assert L.part_of(p.monomial({"rv2": 1, "tau2": 3})) == "cokernel"
    names = sorted(p.gen_name(i) for i in L.image_gens)
    assert names[:3] == ["iv0", "iv10", "iv12"]
    assert all(n.startswith("iv") for n in names)


def test_LC_has_no_rho_families(LC):
    names = [g.name for g in LC.pres.generators[:7]]
    assert names == ["tau", "h1", "iv0", "hv2", "iv2", "hv4", "iv4"]


# -- generated rewrite rules ----------------------------------------------


def mul(p, a, b):
    return p.render(p.multiply({p.monomial(a): 1}, {p.monomial(b): 1}))


def test_generated_products_frozen(L):
    p = L.pres
    assert mul(p, {"th1": 1}, {"th1": 1}) == "tau2*h1^2 + rho*rv2"
    assert mul(p, {"rv2": 1}, {"hv2": 1}) == "rho*hv4"
    assert mul(p, {"rv2": 1}, {"rv2": 1}) == "rho*rv4"
    assert mul(p, {"thv2": 1}, {"thv2": 1}) == "tau2*h1*hv4 + rho*rv6"
    assert mul(p, {"h1": 1}, {"rv2": 1}) == "rho*hv2"
    assert mul(p, {"th1": 1}, {"rv2": 1}) == "rho*thv2"
    assert mul(p, {"th1": 1}, {"hv2": 1}) == "h1*thv2"
    assert mul(p, {"th1": 1}, {"thv2": 1}) == "tau2*h1*hv2 + rho*rv4"
    assert mul(p, {"iv0": 1}, {"rv2": 1}) == "rho*iv2"
    assert mul(p, {"iv0": 1}, {"iv0": 1}) == "0"
    assert mul(p, {"iv2": 1}, {"iv4": 1}) == "0"
    assert mul(p, {"thv2": 1}, {"iv2": 1}) == "th1*iv4"


def test_normal_products_have_no_rule(L):
    p = L.pres
    assert mul(p, {"rho": 1}, {"iv2": 1}) == "rho*iv2"
    assert mul(p, {"th1": 1}, {"iv2": 1}) == "th1*iv2"
    assert mul(p, {"h1": 1}, {"hv2": 1}) == "h1*hv2"
    assert mul(p, {"rho": 1}, {"rv2": 1}) == "rho*rv2"
    assert mul(p, {"tau2": 2}, {"thv2": 1}) == "tau2^2*thv2"


def test_random_products_agree_with_base_ring_route(L):
    lay = L.meta["layout"]
    basis = L.pres.basis_window(SMALL.s, SMALL.f, SMALL.w)
    monos = [m for v in basis.values() for m in v]
    rng = random.Random(7)
    for _ in range(300):
        a, b = rng.choice(monos), rng.choice(monos)
        assert L.pres.multiply({a: 1}, {b: 1}) == lay.product_via_base(a, b)


def test_random_associativity(L):
    p = L.pres
    basis = p.basis_window(SMALL.s, SMALL.f, SMALL.w)
    monos = [m for v in basis.values() for m in v]
    rng = random.Random(13)
    for _ in range(60):
        a = {rng.choice(monos): 1}
        b = {rng.choice(monos): 1}
        c = {rng.choice(monos): 1}
        assert p.multiply(p.multiply(a, b), c) == p.multiply(a, p.multiply(b, c))


# -- the derived d1 table -------------------------------------------------


def test_d1_schedule_frozen(L):
    p = L.pres
    want = {
        "rho": "0",
        "tau2": "rho^2*th1",
        "h1": "0",
        "th1": "0",
        "iv0": "0",
        "rv2": "rho*h1^2*th1",
        "rv4": "0",
        "rv6": "rho*h1^2*thv4",
        "hv2": "h1^3*th1",
        "hv4": "0",
        "hv6": "h1^3*thv4",
        "thv2": "tau2*h1^4 + rho^2*h1*hv2",
        "thv4": "0",
        "thv6": "tau2*h1^3*hv4 + rho^2*h1*hv6",
        "iv2": "h1^2*th1*iv0",
        "iv4": "0",
        "iv6": "h1^2*th1*iv4",
    }
    for name, text in want.items():
        assert p.render(L.schedule[1][p.gen(name)]) == text, name


def test_d1_schedule_frozen_LC(LC):
    p = LC.pres
    want = {
        "tau": "0",
        "h1": "0",
        "iv0": "0",
        "hv2": "tau*h1^4",
        "hv4": "0",
        "hv6": "tau*h1^3*hv4",
        "iv2": "tau*h1^3*iv0",
        "iv4": "0",
        "iv6": "tau*h1^3*iv4",
    }
    for name, text in want.items():
        assert p.render(LC.schedule[1][p.gen(name)]) == text, name


# -- enumeration ----------------------------------------------------------


def test_hook_matches_generic_search(L):
    generic = presentation_from_dict(L.pres.to_dict())
    assert generic.basis_hook is None
    box = ((-3, 9), (0, 5), (-4, 6))
    a = L.pres.basis_window(*box)
    b = generic.basis_window(*box)
    assert a == b
    assert sum(len(v) for v in a.values()) > 500


def test_hook_refuses_uncovered_window(L):
    with pytest.raises(PresentationError):
        L.pres.basis_window((0, 500), (0, 4), (-4, 6))


def test_get_object_uses_manifest_defaults():
    obj = get_object("L_C", SMALL)
    assert obj.default_window == SMALL
    assert obj.stable_page == 7
    assert obj.default_r_max == 8
    assert obj.has_pattern


# -- splitting ------------------------------------------------------------


def test_splitting_report_small_windows(L, LC):
    rep = splitting_report(L, snf_budget=64)
    assert rep["kernelClasses"] > 0 and rep["imageClasses"] > 0
    assert rep["snfDegrees"] > 0
    rep = splitting_report(LC, snf_budget=64)
    assert rep["imageClasses"] > 0


def test_splitting_report_catches_a_wrong_order(L):
    broken = build_fiber_object(load_data("L"), SMALL, r_max=2)
    lay = broken.meta["layout"]
    gens = list(broken.pres.generators)
    i = broken.pres.gen("iv2")
    gens[i] = gens[i].__class__(
        name="iv2", degree=gens[i].degree, torsion=4, cap=1, slots=("fam",)
    )
    broken.pres.generators = tuple(gens)
    with pytest.raises(FiberError):
        splitting_report(broken, snf_budget=4)


# -- a first run through the engine ---------------------------------------


def test_small_window_second_page(L):
    ss = SliceSS(L, SMALL).run()
    p = L.pres

    g = ss.group(2, TriDegree(3, 1, 2))
    assert g.orders == [4] and g.parts == ["image"]
    assert p.render(g.lift(0)) == "2*iv2"

    g = ss.group(2, TriDegree(-1, 1, 0))
    assert g.orders == [0] and p.render(g.lift(0)) == "iv0"

    g = ss.group(2, TriDegree(1, 1, 1))
    assert g.orders == [2] and g.parts == ["cokernel"]

    g = ss.group(2, TriDegree(7, 1, 4))
    assert g.orders == [16] and p.render(g.lift(0)) == "iv4"


def test_small_window_second_page_LC(LC):
    ss = SliceSS(LC, SMALL).run()
    g = ss.group(2, TriDegree(7, 1, 4))
    assert g.orders == [16]
    assert LC.pres.render(g.lift(0)) == "iv4"
    g = ss.group(2, TriDegree(3, 1, 2))
    assert g.orders == [4]


def test_dump_round_trip(L):
    from effss.objects import spec_to_dict

    blob = json.dumps(spec_to_dict(L))
    back = presentation_from_dict(json.loads(blob))
    d = TriDegree(3, 1, 2)
    assert back.basis_at(d) == L.pres.basis_at(d)

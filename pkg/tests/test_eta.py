"""Eta-periodic closed forms, localization, and the comparison map."""

import dataclasses

import pytest

from effss.engine import SliceSS, Window
from effss.eta import (
    ETA_UNIT,
    EtaError,
    compare,
    coweight,
    eta_el_mul,
    eta_el_pow,
    eta_schedule,
    filtration,
    format_report,
    get_eta,
    localize,
    parse_eta,
    render_eta_element,
)
from effss.fiber import build_fiber_object
from effss.intlinalg import two_adic_valuation
from effss.objects import get_object, load_data, spec_to_dict


@pytest.fixture(scope="module")
def L():
    # wide enough in s to hold rv12 and tau2^4 * rv12
    w = Window(s=(-2, 26), f=(0, 8), w=(-8, 14))
    return build_fiber_object(load_data("L"), w, r_max=3)


@pytest.fixture(scope="module")
def ko():
    return get_object("ko")


# -- oracles first: the two quoted localization facts ---------------------


def test_localize_worked_example_tau8_rho_v12(L):
    """tau^8 * rho v1^12 maps to rho^9 (v1^2)^10 once tau^2 dies."""
    el = {L.pres.parse_monomial("tau2^4*rv12"): 1}
    lx = localize(L, el)
    assert lx == parse_eta("tau^8*rho*v2^6 + rho^9*v2^10")

    eo = get_eta("L_eta")
    cls2 = eo.reduce(2, lx)
    assert cls2 == parse_eta("rho^9*v2^10")
    assert eo.reduce(3, lx) == cls2

    (mono,) = cls2
    assert coweight(mono) == 20  # v2(20) = 2, so it fires d3
    assert eo.differential(3, mono) == parse_eta("rho^12*v2^10*iota")
    assert eo.differential(2, mono) == frozenset()


def test_d1_of_tau_h1_v_powers_localizes_both_ways(L):
    """d1(tau h1 v1^(4k+2)) comes out as tau^2 (v1^2)^(2k) on both routes."""
    eo = get_eta("L_eta")
    for name, k in (("thv2", 0), ("thv6", 1)):
        g = L.pres.gen(name)
        via_schedule = localize(L, L.schedule[1][g])
        want = frozenset({(2, 0, 2 * k, 0)})
        assert via_schedule == want
        assert eo.d_element(1, localize(L, {((g, 1),): 1})) == want


def test_generator_images_frozen(L):
    got = {
        name: render_eta_element(localize(L, {L.pres.parse_monomial(name): 1}))
        for name in (
            "rho", "h1", "th1", "tau2",
            "iv0", "rv2", "hv2", "hv4", "thv6", "iv4",
        )
    }
    assert got == {
        "rho": "rho",
        "h1": "1",
        "th1": "tau",
        "tau2": "tau^2 + rho^2*v2",
        "iv0": "iota",
        "rv2": "rho*v2",
        "hv2": "v2",
        "hv4": "v2^2",
        "thv6": "tau*v2^3",
        "iv4": "v2^2*iota",
    }


def test_eta_image_survives_presentation_dump(ko):
    out = spec_to_dict(ko)
    assert out["etaImage"]["tau2"] == [[0, 2, 1, 0], [2, 0, 0, 0]]
    assert out["etaImage"]["h1"] == [[0, 0, 0, 0]]


def test_images_preserve_coweight(L, ko):
    for obj in (L, ko):
        for g, img in obj.meta["etaImage"].items():
            cw = obj.pres.degree_of(((g, 1),)).coweight
            assert all(coweight(m) == cw for m in img), obj.pres.gen_name(g)


def test_localize_is_a_ring_map_on_sampled_pairs(L, ko):
    import random

    rng = random.Random(23)
    for obj in (ko, L):
        pool = []
        for _d, monos in obj.pres.basis_window((-2, 10), (0, 4), (-4, 6)).items():
            pool.extend(monos)
        for _ in range(120):
            x = {rng.choice(pool): rng.randrange(1, 8)}
            y = {rng.choice(pool): rng.randrange(1, 8)}
            lhs = localize(obj, obj.pres.multiply(x, y))
            rhs = eta_el_mul(localize(obj, x), localize(obj, y))
            assert lhs == rhs


# -- the schedule and its Leibniz extension -------------------------------


def test_eta_schedule_frozen():
    # one family entry per page from 3 on: v1^(2^n) fires d_(n+1)
    sched = eta_schedule("L_eta", r_max=9)
    assert sorted(sched) == [1, 3, 4, 5, 6, 7, 8, 9]
    assert sched[1] == {(0, 0, 1, 0): parse_eta("tau")}
    assert sched[3] == {(0, 0, 2, 0): parse_eta("rho^3*v2^2*iota")}
    assert sched[4] == {(0, 0, 4, 0): parse_eta("rho^4*v2^4*iota")}
    assert sched[5] == {(0, 0, 8, 0): parse_eta("rho^5*v2^8*iota")}
    assert sched[9] == {(0, 0, 128, 0): parse_eta("rho^9*v2^128*iota")}
    # no rho-iota family without both letters
    assert sorted(eta_schedule("ko_eta")) == [1]
    assert sorted(eta_schedule("L_C_eta")) == [1]


def test_higher_differentials_are_leibniz_of_the_schedule():
    eo = get_eta("L_eta")
    sched = eta_schedule("L_eta", r_max=9)
    for m in (2, 4, 6, 8, 10, 12, 16, 20, 24, 32):
        n = two_adic_valuation(m) + 1
        r = n + 1
        gen_m = 1 << (n - 1)  # v2 exponent of v1^(2^n)
        dgen = sched[r][(0, 0, gen_m, 0)]
        for b in (0, 1, 5):
            # x = rho^b (v1^(2^n))^u with u odd, so d_r x = (x / gen) d_r gen
            want = eta_el_mul({(0, b, m - gen_m, 0)}, dgen)
            assert eo.differential(r, (0, b, m, 0)) == want
            # and x is a cycle on every other later page
            for r2 in range(2, 10):
                if r2 != r:
                    assert eo.differential(r2, (0, b, m, 0)) == frozenset()


def test_d1_closed_form():
    eo = get_eta("L_eta")
    assert eo.differential(1, (2, 1, 3, 0)) == frozenset({(3, 1, 2, 0)})
    assert eo.differential(1, (2, 1, 4, 0)) == frozenset()
    assert eo.differential(1, (0, 0, 1, 1)) == frozenset({(1, 0, 0, 1)})


# -- page membership -------------------------------------------------------


def test_page_two_keeps_even_clean_monomials():
    eo = get_eta("L_eta")
    assert eo.alive(2, (0, 3, 4, 0))
    assert not eo.alive(2, (1, 0, 2, 0))  # hit by a d1
    assert not eo.alive(2, (0, 0, 1, 0))  # supports a d1
    assert eo.alive(1, (1, 0, 1, 0))


def test_family_band_membership():
    eo = get_eta("L_eta")
    # (v1^2)^2 fires d3: alive on page 3, gone from page 4
    assert eo.alive(3, (0, 0, 2, 0))
    assert not eo.alive(4, (0, 0, 2, 0))
    # its target rho^3 (v1^2)^2 iota is hit on page 3
    assert eo.alive(3, (0, 3, 2, 1))
    assert not eo.alive(4, (0, 3, 2, 1))
    # below the band the iota classes live forever
    assert eo.alive(4, (0, 2, 2, 1)) and eo.alive_infty((0, 2, 2, 1))
    # no family without rho and iota together
    assert get_eta("ko_eta").alive(9, (0, 7, 6, 0))
    assert get_eta("L_C_eta").alive(9, (0, 0, 6, 1))


def test_alive_infty_is_the_limit_of_alive():
    for name in ("ko_eta", "L_eta", "L_C_eta", "ko_C_eta"):
        eo = get_eta(name)
        for a in range(3):
            for b in range(9) if eo.has_rho else (0,):
                for m in range(21):
                    for e in (0, 1) if eo.has_iota else (0,):
                        mono = (a, b, m, e)
                        assert eo.alive(32, mono) == eo.alive_infty(mono), mono


def test_reduce_drops_boundaries_and_refuses_non_cycles():
    eo = get_eta("L_eta")
    assert eo.reduce(2, parse_eta("tau^2 + rho^2*v2^2")) == parse_eta("rho^2*v2^2")
    assert eo.reduce(4, parse_eta("rho^3*v2^2*iota")) == frozenset()
    assert eo.reduce(3, parse_eta("rho^3*v2^2*iota")) == parse_eta("rho^3*v2^2*iota")
    with pytest.raises(EtaError):
        eo.reduce(2, parse_eta("v2"))  # supports a d1
    with pytest.raises(EtaError):
        eo.reduce(4, parse_eta("v2^2"))  # already fired its d3
    with pytest.raises(EtaError):
        get_eta("ko_eta").reduce(1, parse_eta("iota"))  # not a ko monomial


# -- E1 description and the infinity profile ------------------------------


def _e1_count(eo, c, f_max):
    total = 0
    for e in (0, 1) if eo.has_iota else (0,):
        t = c + e
        if t < 0:
            continue
        width = f_max - e + 1 if eo.has_rho else 1
        total += width * (t // 2 + 1)
    return total


def test_E1_polynomial_description_by_coweight():
    f_max = 9
    for name in ("ko_eta", "L_eta", "L_C_eta"):
        eo = get_eta(name)
        got = eo.classes(1, (-2, 40), f_max=f_max)
        for c in range(-2, 41):
            assert len(got[c]) == _e1_count(eo, c, f_max), (name, c)
    sample = get_eta("L_eta").classes(1, (3, 3), f_max=2)[3]
    assert (0, 0, 2, 1) in sample and (3, 2, 0, 0) in sample
    assert (0, 0, 1, 0) not in sample  # coweight 2


def test_infinity_profile_L_eta():
    eo = get_eta("L_eta")
    prof = eo.classes(None, (-1, 16), f_max=8)
    assert prof[0] == [(0, b, 0, 0) for b in range(9)]  # F2[rho]
    assert prof[-1] == [(0, b, 0, 1) for b in range(8)]  # F2[rho] iota
    for c in range(2, 17, 2):
        assert prof[c] == [], c  # positive even coweights all die
    assert prof[3] == [(0, b, 2, 1) for b in range(3)]
    assert prof[7] == [(0, b, 4, 1) for b in range(4)]
    assert prof[11] == [(0, b, 6, 1) for b in range(3)]
    assert prof[15] == [(0, b, 8, 1) for b in range(5)]
    for c in (1, 5, 9, 13):
        assert prof[c] == [], c  # odd v2 power, killed by d1


def test_infinity_profile_ko_eta_and_L_C_eta():
    ko_eta = get_eta("ko_eta")
    prof = ko_eta.classes(None, (0, 12), f_max=5)
    for c in range(0, 13):
        if c % 4 == 0:
            assert prof[c] == [(0, b, c // 2, 0) for b in range(6)]
        else:
            assert prof[c] == []
    # E2 = E_infinity upstairs of the fiber
    assert ko_eta.classes(2, (0, 12), f_max=5) == prof

    lce = get_eta("L_C_eta").classes(None, (-1, 12), f_max=5)
    assert lce[8] == [(0, 0, 4, 0)]
    assert lce[7] == [(0, 0, 4, 1)]
    assert lce[6] == [] and lce[5] == []
    assert lce[-1] == [(0, 0, 0, 1)]


# -- the comparison map ----------------------------------------------------


def test_compare_ko_default_window(ko):
    rep = compare(SliceSS(ko))
    assert rep["eta"] == "ko_eta"
    assert rep["mismatches"] == []
    assert rep["skipped"] == 0
    assert rep["checked"] > 5000
    assert "no mismatches" in format_report(rep)


def test_compare_ko_C_default_window():
    rep = compare(SliceSS(get_object("ko_C")))
    assert rep["mismatches"] == []
    assert rep["checked"] > 1500


def test_compare_L_through_the_d3_family():
    w = Window(s=(-2, 20), f=(0, 8), w=(-6, 11))
    obj = build_fiber_object(load_data("L"), w, r_max=4)
    ss = SliceSS(obj, r_max=4)
    rep = compare(ss, pages=4)
    assert rep["mismatches"] == []
    assert rep["checked_per_page"][3] > 0
    fired = 0
    for d, i, _o, _lift, _part in ss.summands(3):
        if ss.differential_known(3, d) and ss.differential_value(3, d, i):
            fired += 1
    assert fired > 0  # the band actually moved something in this window


def test_compare_L_C_small_window():
    w = Window(s=(-2, 16), f=(0, 6), w=(-4, 9))
    rep = compare(SliceSS(build_fiber_object(load_data("L_C"), w, r_max=3), r_max=3))
    assert rep["mismatches"] == []
    assert rep["checked"] > 500


def test_compare_flags_a_corrupted_image_table(ko):
    bad = dict(ko.meta["etaImage"])
    bad[ko.pres.gen("th1")] = frozenset({(0, 1, 0, 0)})  # rho instead of tau
    broken = dataclasses.replace(ko, meta={**ko.meta, "etaImage": bad})
    rep = compare(SliceSS(broken, Window(s=(-2, 10), f=(0, 6), w=(-6, 7)), r_max=2))
    assert rep["mismatches"]
    entry = rep["mismatches"][0]
    for key in ("page", "degree", "class", "kind", "localized d_r", "d_r localized"):
        assert key in entry
    assert str(entry["page"]) in format_report(rep)


# -- shipped eta presentations ---------------------------------------------


def test_get_eta_flavors():
    assert get_eta("ko_eta").has_rho and not get_eta("ko_eta").has_iota
    assert get_eta("L_eta").has_family
    lce = get_eta("L_C_eta")
    assert lce.has_iota and not lce.has_rho and not lce.has_family
    kce = get_eta("ko_C_eta")
    assert not kce.has_rho and not kce.has_iota
    with pytest.raises(EtaError):
        get_eta("sphere_eta")


def test_render_parse_roundtrip():
    for text in ("1", "0", "tau^2 + rho^2*v2", "rho^12*v2^10*iota", "iota"):
        assert render_eta_element(parse_eta(text)) == text
    assert eta_el_pow(parse_eta("tau + rho"), 2) == parse_eta("tau^2 + rho^2")
    assert eta_el_mul(parse_eta("iota"), parse_eta("iota")) == frozenset()
    assert ETA_UNIT == parse_eta("1")


def test_coweight_and_filtration():
    assert coweight((1, 4, 3, 1)) == 1 + 6 - 1
    assert filtration((1, 4, 3, 1)) == 5
    assert coweight((0, 0, 0, 0)) == 0

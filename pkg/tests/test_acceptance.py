"""Acceptance suite.

One test per named check in effss.verify, run in an order that reuses
the engine runs cached inside that module.  Each test prints a single
PASS/FAIL line with the check's own summary (uncaptured, so it shows up
in plain ``pytest -v`` output) and then asserts.

The checks themselves carry the real content: independent oracles,
frozen golden files, and wall-clock budgets.  See effss/verify.py.
"""

from effss.verify import run_check


def _run(capsys, name):
    ok, detail = run_check(name)
    with capsys.disabled():
        print("\n%s %s: %s" % ("PASS" if ok else "FAIL", name, detail),
              end=" ", flush=True)
    assert ok, "%s: %s" % (name, detail)


def test_two_adic_valuation_of_3_pow_minus_1(capsys):
    _run(capsys, "valuation")


def test_first_page_bases_match_closed_forms(capsys):
    _run(capsys, "e1-basis")


def test_leibniz_spot_identity_and_d_squared_zero(capsys):
    _run(capsys, "leibniz")


def test_complex_connective_infinity_page(capsys):
    _run(capsys, "ko-C-einfty")


def test_real_connective_collapse_at_page_two(capsys):
    _run(capsys, "ko-einfty")


def test_fiber_sequence_order_bookkeeping(capsys):
    _run(capsys, "les-orders")


def test_fiber_d1_table_and_higher_pattern_pass(capsys):
    _run(capsys, "L-d1-pattern")


def test_infinity_structure_by_coweight(capsys):
    _run(capsys, "coweight-orders")


def test_eta_inverted_comparison(capsys):
    _run(capsys, "eta-compare")


def test_hidden_extension_ledger(capsys):
    _run(capsys, "hidden-ledger")


def test_image_carrier_orders_against_big_integers(capsys):
    _run(capsys, "iota-orders")


def test_chart_golden_regression(capsys):
    _run(capsys, "charts")

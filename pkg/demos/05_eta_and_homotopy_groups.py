"""
Inverting eta, then reading off homotopy groups
===============================================

Two consumers sit on top of the page engine.  The eta-inverted models
are small enough to write down in closed form, so comparing them with
the localization of the full computation cross-checks both.  And once
the last page is reached, the hidden extension ledger glues the column
at each (stem, weight) into an actual abelian group.
"""

from effss import SliceSS, Window, assemble, compare, eta_schedule, expand_ledger, get_object

window = Window(s=(-2, 26), f=(0, 12), w=(-10, 20))
obj = get_object("L", window=window)
ss = SliceSS(obj, window)
ss.run()

# localization kills rho-torsion-free discrepancies; every surviving
# summand must match its eta-local counterpart page by page
report = compare(ss, pages=4)
print("eta-local comparison on pages <= 4: %d summands checked, "
      "%d mismatches" % (report["checked"], len(report["mismatches"])))

# after inverting eta the differentials form one clean family
from effss.eta import render_eta, render_eta_element

print("\neta-local differential table:")
for r, rows in sorted(eta_schedule("L_eta", r_max=6).items()):
    for src, val in sorted(rows.items()):
        print("  d%d(%s) = %s" % (r, render_eta(src), render_eta_element(val)))

# now assemble actual homotopy groups out of the infinity page.
# stem 3, weight 2 is the classic Z/8 glued from three order-2 lines
ledger = expand_ledger(ss)
for s, w in ((3, 2), (7, 4), (11, 6)):
    pi = assemble(ss, s, w, ledger=ledger)
    gens = ", ".join(g.label for g in pi.generators)
    print("\npi(%d, %d) = %s" % (s, w, pi.render()))
    print("  generated by %s" % gens)
    print("  eta action: %s" % ", ".join(
        "%s -> %s" % (g.label, v)
        for g, v in zip(pi.generators, pi.actions["eta"])))

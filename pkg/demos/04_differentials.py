"""
Differentials in the fiber
==========================

Page 1 of L has a genuine generator-level d1 table and the Leibniz rule
does the rest.  From page 2 on there is no formula; instead a rule
pattern fires on classes whose coweight is divisible by 4, pairing each
with the unique order-2 class in the target spot.  This script prints
the d1 table, runs the sequence, and tallies where the pattern fired.
"""

from collections import Counter

from effss import SliceSS, Window, get_object

window = Window(s=(-2, 30), f=(0, 10), w=(-10, 18))
obj = get_object("L", window=window)
pres = obj.pres

print("the d1 table on generators, carriers up to v-power 6:")
for idx, img in sorted(obj.schedule[1].items()):
    name = pres.gen_name(idx)
    digits = name[len(name.rstrip("0123456789")):]
    if digits and int(digits) > 6:
        continue
    print("  d1(%s) = %s" % (name, pres.render(img) if img else "0"))
print("  (higher carriers repeat this shape with period 4 in the v-power)")

ss = SliceSS(obj, window)
ss.run()

# count pattern differentials by page and by source coweight mod 4;
# only multiples of 4 may fire, and the page is pinned to the 2-adic
# valuation: a coweight-c class first moves on page v(c) + 1
fired = Counter()
by_residue = Counter()
for r in range(2, ss.r_max):
    for d, M in ss.diffs[r].items():
        if M.is_zero():
            continue
        fired[r] += 1
        by_residue[d.coweight % 4] += 1
        assert d.coweight % (1 << (r - 1)) == 0

print("\nsources with a nonzero pattern differential, by page:")
for r in sorted(fired):
    print("  d%d fires at %d spots" % (r, fired[r]))
print("source coweights mod 4:", dict(by_residue))

# one concrete value: nothing can move before page 3 because the
# smallest positive multiple of 4 already has valuation 2, and a
# coweight-c class first moves on page v(c) + 1
d = min((d for d, M in ss.diffs[3].items()
         if not M.is_zero() and ss.window.contains(d)),
        key=lambda d: (d.s, d.f))
print("\nlowest page-3 source in the window, at (%d,%d,%d):" % (d.s, d.f, d.w))
print("  d3(%s) = %s"
      % (pres.render(ss.group(3, d).lift(0)),
         pres.render(ss.differential_value(3, d, 0))))

"""
Turning pages with integer homology
===================================

Run the complex connective object out to its last page and watch what
the single d1 does: odd powers of v2 lose half their integral line,
h1-towers above them get truncated at height three.
"""

from effss import SliceSS, Window, get_object

window = Window(s=(0, 16), f=(0, 8), w=(-4, 10))
obj = get_object("ko_C", window=window)
ss = SliceSS(obj, window)
ss.run()

# d1 is a derivation over the differential on the generators; here only
# v2 supports one, d1(v2) = tau*h1^3, and everything else follows
shown = 0
print("d1 on the v2-powers in their own weight:")
for line in ss.dump_lines(1):
    s, f, w = map(int, line.split("|")[1].split())
    if f == 0 and 2 * w == s and not line.endswith("-> -"):
        print(" ", line)
        shown += 1
        if shown == 4:
            break

print("\ninfinity page in stems 4, 8, 12 at weight = stem/2:")
for s in (4, 8, 12):
    for d, i, order, lift, _part in ss.summands(ss.r_max):
        if d.s == s and d.w == s // 2 and d.f == 0:
            print("  (%2d,0,%d)  %-8s %s"
                  % (d.s, d.w, "Z" if order == 0 else "Z/%d" % order,
                     ss.pres.render(lift)))

# the alternation survives multiplication: twice an odd power is the
# product of the two surviving generators below it
lhs = ss.pres.multiply(ss.pres.parse("2*v2"), ss.pres.parse("v2^2"))
print("\n(2*v2) * v2^2 =", ss.pres.render(lhs), "read off the chart as the")
print("generator of the stem-12 integral line, so the ring remembers the")
print("index-two inclusion even though both factors look like generators.")

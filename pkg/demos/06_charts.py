"""
Publication charts
==================

chart_data flattens an infinity (or earlier) page into one datum per
glyph: position, shape for the summand order, color and line endpoints
for the product structure, extension and differential markers.  The SVG
emitter is deterministic, so the same window always gives the same
bytes, which is what the golden regression relies on.

Charts of the fiber are drawn one coweight class at a time, the same
way the published figures slice it.
"""

import os

from effss import ChartSpec, SliceSS, Window, chart_data, emit_svg, get_object, render_chart_text

outdir = os.environ.get("EFFSS_OUTDIR", "out")
os.makedirs(outdir, exist_ok=True)

# the complex connective chart: boxes on the integral lines, the
# truncated h1-towers, dashes where a class is divisible by tau
window = Window(s=(-2, 26), f=(0, 14), w=(-4, 20))
obj = get_object("ko_C", window=window)
ss = SliceSS(obj, window)
ss.run()

spec = ChartSpec(name="ko_C", page=None, stems=(0, 24), f_cap=12,
                 differentials=False)
data = chart_data(ss, spec)
with open(os.path.join(outdir, "ko_C.svg"), "w", encoding="utf-8") as fh:
    fh.write(emit_svg(data, spec))
print("ko_C: %d glyphs -> %s/ko_C.svg" % (len(data), outdir))

# one row of the sidecar text, the format the golden tests freeze
print("sample sidecar row:", render_chart_text(data[:1]).strip())

# the fiber, coweight 3 mod 8: the column where the image-of-J pattern
# shows its Z/16 and Z/32 boxes and the hidden extensions climb
window = Window(s=(-2, 26), f=(0, 14), w=(-10, 24))
obj = get_object("L", window=window)
ss = SliceSS(obj, window)
ss.run()

for residue, modulus in ((1, 4), (3, 8)):
    spec = ChartSpec(name="L", page=None, residue=residue, modulus=modulus,
                     stems=(0, 24) if modulus == 4 else (-2, 22),
                     f_cap=12, differentials=False, hidden=True)
    data = chart_data(ss, spec)
    path = os.path.join(outdir, "L_c%dm%d.svg" % (residue, modulus))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(emit_svg(data, spec))
    hidden = sum(1 for datum in data for t in datum.lines if t.startswith("hidden"))
    print("L coweight %d mod %d: %d glyphs, %d hidden tokens -> %s"
          % (residue, modulus, len(data), hidden, path))

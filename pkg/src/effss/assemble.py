"""Homotopy groups from the infinity page plus a hidden extension ledger.

The infinity page only shows the associated graded of the homotopy
groups.  Recovering the groups themselves takes two more inputs:

* products on the page, which detect the actions of rho and eta, and the
  doubling of any class whose double is visible in its own filtration;
* a short ledger of hidden extensions, one row per spot where the page
  product vanishes but the product in homotopy does not.

The ledger rows ship as data files (hidden_ko.json and friends) in the
same normal forms the printed tables use.  Almost every row generates an
infinite family under tau^4- and v1^4-periodicity; expand_ledger
materializes those families inside a window.  Three rows deviate from
plain periodicity and carry flags saying how:

* the eta extension on 2*tau2 stops at v1^0, because 2*tau2 times a
  positive power of v1^4 is not a permanent cycle;
* the h extension on (tau h1)^3 always points at the class of highest
  filtration in its column, which climbs as the family expands;
* the h extension hitting rho^2*thv(4k) starts on half the carrier order
  of the iota class, and the carrier orders grow with k.

Multiplication by 2 resolves through the identity 2 = rho*eta + h.  The
h summand is what the page sees as literal doubling; once that dies, the
ledger supplies the hidden h value and the rho*eta summand is computed
letter by letter from page products.  Iterating the doubling until each
summand's order runs out produces the relations of the column, and a
Smith normal form turns the presentation into invariant factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import NotCertifiedError, SliceSS
from .grading import (
    EffssError,
    Element,
    PresentationError,
    RingPresentation,
    TriDegree,
    el_iadd,
    el_scale,
)
from .intlinalg import (
    LinearAlgebraError,
    Mat,
    diagonal,
    smith_normal_form,
    two_adic_valuation,
)
from .objects import load_data


class AssembleError(EffssError):
    """A column could not be assembled inside the certified region."""


class LedgerError(EffssError):
    """A hidden extension row failed validation."""


#: degree of the page 1 element detecting each kind of extension
KIND_DEGREE = {
    "rho": TriDegree(-1, 1, -1),
    "h": TriDegree(0, 0, 0),
    "eta": TriDegree(1, 1, 1),
}

#: degree shifts of the two periodicity operators
TAU4_DEGREE = TriDegree(0, 0, -4)
V14_DEGREE = TriDegree(8, 0, 4)

#: recognized deviant propagation rules (the special column of the ledger)
SPECIALS = ("highest-filtration", "half-carrier-order")


@dataclass(frozen=True, eq=False)
class HiddenExtension:
    """One hidden extension: kind times source equals target.

    source and target are page 1 elements.  The source may carry an
    integer multiple: "4*iv2" is four times the class of iv2, which is
    the order 2 element of its cyclic summand.  degree is the tri-degree
    of the source.  tau4 and v14 say whether the row propagates along the
    two periodicities, and special picks one of the documented deviant
    propagation rules.
    """

    kind: str
    source: Element
    target: Element
    degree: TriDegree
    coweight: int
    proof: str = ""
    tau4: bool = True
    v14: bool = True
    special: Optional[str] = None


def check_extension(pres: RingPresentation, ext: HiddenExtension) -> None:
    """Degree arithmetic every ledger row must satisfy.

    The (s, w) shift is the kind's homotopy degree.  Filtration has to
    jump strictly past the page product: a rho or eta product already
    climbs one filtration on the page, so a hidden value starts higher.
    """
    if ext.kind not in KIND_DEGREE:
        raise LedgerError("unknown extension kind %r" % ext.kind)
    if ext.special is not None and ext.special not in SPECIALS:
        raise LedgerError("unknown special rule %r" % ext.special)
    sd = pres.degree_of_element(ext.source)
    td = pres.degree_of_element(ext.target)
    if sd is None or td is None:
        raise LedgerError("ledger row with a zero endpoint")
    if sd != ext.degree:
        raise LedgerError(
            "row source %s has degree %s, row says %s"
            % (pres.render(ext.source), sd, ext.degree)
        )
    kd = KIND_DEGREE[ext.kind]
    if (td.s - sd.s, td.w - sd.w) != (kd.s, kd.w):
        raise LedgerError(
            "%s extension has the wrong (s, w) shift: %s to %s"
            % (ext.kind, sd, td)
        )
    if td.f <= sd.f + kd.f:
        raise LedgerError(
            "%s extension from %s does not climb past the page product"
            % (ext.kind, sd)
        )
    if sd.coweight != ext.coweight:
        raise LedgerError(
            "row in coweight %d but its source has coweight %d"
            % (ext.coweight, sd.coweight)
        )


def load_ledger(name: str, pres: Optional[RingPresentation] = None):
    """Parse data/hidden_<name>.json into validated base rows.

    Returns (degree_column, rows).  degree_column records whether the
    printed table's degree column refers to sources or to targets; the
    parsed rows always store the source degree.
    """
    if pres is None:
        from .objects import get_object

        pres = get_object(name).pres
    data = load_data("hidden_" + name)
    if data.get("object") != name:
        raise LedgerError("ledger file is for %r, not %r" % (data.get("object"), name))
    degree_column = str(data.get("degreeColumn", "source"))
    if degree_column not in ("source", "target"):
        raise LedgerError("degreeColumn must be 'source' or 'target'")
    rows: List[HiddenExtension] = []
    for raw in data["rows"]:
        source = pres.parse(str(raw["source"]))
        target = pres.parse(str(raw["target"]))
        listed = TriDegree(*raw["degree"])
        sd = pres.degree_of_element(source)
        if degree_column == "target":
            td = pres.degree_of_element(target)
            if td != listed:
                raise LedgerError(
                    "row target %s has degree %s, table says %s"
                    % (pres.render(target), td, listed)
                )
        elif sd != listed:
            raise LedgerError(
                "row source %s has degree %s, table says %s"
                % (pres.render(source), sd, listed)
            )
        ext = HiddenExtension(
            kind=str(raw["kind"]),
            source=source,
            target=target,
            degree=sd,
            coweight=int(raw["coweight"]),
            proof=str(raw.get("proof", "")),
            tau4=bool(raw.get("tau4", True)),
            v14=bool(raw.get("v14", True)),
            special=raw.get("special"),
        )
        check_extension(pres, ext)
        rows.append(ext)
    return degree_column, rows


# ---------------------------------------------------------------------------
# periodicity operators
# ---------------------------------------------------------------------------


def tau4_mult(ss: SliceSS, e: Element, steps: int = 1) -> Element:
    """Multiply by tau^(4*steps), whatever generator spells that."""
    if steps == 0:
        return dict(e)
    pres = ss.pres
    tail = next(
        i
        for i in range(len(pres.generators))
        if pres.generators[i].degree.s == 0 and pres.generators[i].degree.f == 0
    )
    per_step = -4 // pres.generators[tail].degree.w
    return pres.multiply(e, {((tail, per_step * steps),): 1})


def v14_mult(ss: SliceSS, e: Element, steps: int = 1) -> Element:
    """Multiply by v1^(4*steps).

    On the base theories this is an honest ring multiplication by a
    power of v2.  The fiber presentations carry no bare v generator, so
    there the shift is done through the carrier bookkeeping: expand each
    monomial over the base, raise the v exponent, and renormalize.  A
    monomial with no letter to absorb the extra v power (a bare tau
    power) has no v1^4 translate in the fiber, and that failure is
    exactly why such rows are flagged not v1^4-periodic.
    """
    if steps == 0:
        return dict(e)
    pres = ss.pres
    layout = ss.obj.meta.get("layout")
    if layout is None:
        v = pres.gen("v2")
        return pres.multiply(e, {((v, 2 * steps),): 1})
    out: Element = {}
    for m, c in e.items():
        exps, iota = layout.debase(m)
        exps[layout.b_v] = exps.get(layout.b_v, 0) + 2 * steps
        bm = tuple(sorted((g, x) for g, x in exps.items() if x))
        t = layout.translate_mono(bm, iota=bool(iota))
        out[t] = out.get(t, 0) + c
    return pres.reduce(out)


# ---------------------------------------------------------------------------
# infinity page coordinates
# ---------------------------------------------------------------------------


def infinity_coords(ss: SliceSS, e: Element, degree: Optional[TriDegree] = None):
    """Coordinates of a permanent cycle over the infinity page summands.

    Returns (group, coords).  Torsion coordinates come back reduced
    modulo their summand orders.  Raises AssembleError when the element
    is not a cycle at some page, which is the signal that it does not
    survive, and NotCertifiedError outside the boundary-safe region.
    """
    pres = ss.pres
    red = pres.reduce(e)
    if degree is None:
        degree = pres.degree_of_element(red)
        if degree is None:
            raise AssembleError("cannot place the zero element on the page")
    G = ss.group(ss.r_max, degree)
    if not G.orders and G.prev is None and G.monomials is None:
        # groups that die during a turn are dropped from later pages, so
        # a certified degree with a detached empty group means the whole
        # column entry is zero and every class projects to nothing
        return G, []
    try:
        return G, G.project_element(pres, red)
    except LinearAlgebraError as exc:
        raise AssembleError(
            "element %s at %s does not survive to the infinity page: %s"
            % (pres.render(red), degree, exc)
        )


def _norm_coords(G, coords: Sequence[int]) -> Tuple[int, ...]:
    """Canonical form for summand coordinates, for dictionary keys.

    Torsion entries are reduced modulo their orders.  Free entries keep
    their integers, but the overall sign is normalized so that the same
    class and its negative are not told apart; every hidden extension
    here has a 2-torsion target, so that loss is harmless.
    """
    out = [c % o if o else c for c, o in zip(coords, G.orders)]
    for c in out:
        if c:
            if c < 0:
                out = [-x if not o else (-x) % o for x, o in zip(out, G.orders)]
            break
    return tuple(out)


def _coords_nonzero(coords: Sequence[int]) -> bool:
    return any(coords)


# ---------------------------------------------------------------------------
# ledger expansion
# ---------------------------------------------------------------------------


def _highest_filtration_class(ss: SliceSS, s: int, w: int, above_f: int) -> Element:
    """Lift of the top nonzero infinity summand in one (s, w) column."""
    for f in range(ss.window.f[1], above_f, -1):
        d = TriDegree(s, f, w)
        if not ss.certified(d):
            raise NotCertifiedError(
                "top of column (%d, %d) is not certified" % (s, w)
            )
        G = ss.group(ss.r_max, d)
        if G.orders:
            if len(G.orders) > 1:
                raise LedgerError(
                    "highest filtration at (%d, *, %d) is not a single class"
                    % (s, w)
                )
            return G.lift(0)
    raise LedgerError(
        "no class above filtration %d in column (%d, %d)" % (above_f, s, w)
    )


def _carrier_half_order(pres: RingPresentation, e: Element) -> Element:
    """Replace the integer multiple by half the carrier order.

    Used by rows whose source is "the appropriate multiple" of a class
    whose torsion grows along v1^4: the order 2 element of the cyclic
    summand on tau2 * iv(4k) is (order / 2) times it, and the order
    depends on k.
    """
    if len(e) != 1:
        raise LedgerError("half-carrier-order rows need a single term source")
    ((m, _c),) = tuple(e.items())
    order = pres.order_of(m)
    if order < 4:
        raise LedgerError("carrier order too small for a half-order source")
    return {m: order // 2}


def expand_ledger(
    ss: SliceSS,
    rows: Optional[Sequence[HiddenExtension]] = None,
    window=None,
) -> List[HiddenExtension]:
    """Materialize the tau^4 and v1^4 families of the base rows in a window.

    Every expanded endpoint is validated against the infinity page: rows
    whose endpoints leave the certified region are dropped, while an
    endpoint that is certified but dead is a ledger error, since the
    printed periodicity statements promise it survives.
    """
    ss.run()
    pres = ss.pres
    if rows is None:
        _, rows = load_ledger(ss.obj.name, pres)
    if window is None:
        window = ss.window

    # how many periodicity steps can possibly stay inside the window
    k_max = max(0, (window.s[1] - window.s[0]) // V14_DEGREE.s) + 1
    j_max = max(0, (window.w[1] - window.w[0] + 4 * k_max) // 4) + 1

    out: List[HiddenExtension] = []
    for row in rows:
        for j in range(j_max + 1):
            if j and not row.tau4:
                break
            for k in range(k_max + 1):
                if k and not row.v14:
                    break
                sd = TriDegree(
                    row.degree.s + k * V14_DEGREE.s,
                    row.degree.f,
                    row.degree.w - 4 * j + k * V14_DEGREE.w,
                )
                td = TriDegree(
                    sd.s + KIND_DEGREE[row.kind].s,
                    sd.f,
                    sd.w + KIND_DEGREE[row.kind].w,
                )
                if not (window.contains(sd) and window.contains(td)):
                    continue
                try:
                    source = tau4_mult(ss, v14_mult(ss, row.source, k), j)
                    if row.special == "half-carrier-order":
                        source = _carrier_half_order(pres, source)
                        if j == 0 and k == 0 and source != pres.reduce(row.source):
                            raise LedgerError(
                                "stored multiple in %s is not half the carrier order"
                                % pres.render(row.source)
                            )
                    if row.special == "highest-filtration":
                        target = _highest_filtration_class(ss, td.s, td.w, sd.f)
                        if j == 0 and k == 0:
                            want = (
                                pres.degree_of_element(pres.reduce(row.target)),
                                infinity_coords(ss, row.target)[1],
                            )
                            got = (
                                pres.degree_of_element(target),
                                infinity_coords(ss, target)[1],
                            )
                            if want != got:
                                raise LedgerError(
                                    "stored target %s is not the highest"
                                    " filtration class of its column"
                                    % pres.render(row.target)
                                )
                    else:
                        target = tau4_mult(ss, v14_mult(ss, row.target, k), j)
                except (PresentationError, NotCertifiedError):
                    continue
                ext = HiddenExtension(
                    kind=row.kind,
                    source=source,
                    target=target,
                    degree=sd,
                    coweight=sd.coweight,
                    proof=row.proof
                    + ("; tau^4 step %d" % j if j else "")
                    + ("; v1^4 step %d" % k if k else ""),
                    tau4=row.tau4,
                    v14=row.v14,
                    special=row.special,
                )
                check_extension(pres, ext)
                try:
                    _, scoords = infinity_coords(ss, ext.source, sd)
                    tg, tcoords = infinity_coords(ss, ext.target)
                except NotCertifiedError:
                    continue
                if not (_coords_nonzero(scoords) and _coords_nonzero(tcoords)):
                    raise LedgerError(
                        "expanded %s row at %s has a dead endpoint"
                        % (ext.kind, sd)
                    )
                out.append(ext)
    return out


class _LedgerIndex:
    """Expanded rows keyed by (kind, source degree, source coordinates).

    Each source must sit in a single infinity summand; that keeps the
    action computation honest when it works one summand at a time, and
    it holds for every shipped row because the page homology routine
    always returns the boundary-canceling combination as one summand.
    """

    def __init__(self, ss: SliceSS, rows: Sequence[HiddenExtension]):
        self.ss = ss
        self._map: Dict[Tuple[str, TriDegree, Tuple[int, ...]], HiddenExtension] = {}
        for ext in rows:
            G, coords = infinity_coords(ss, ext.source, ext.degree)
            if sum(1 for c in coords if c) != 1:
                raise LedgerError(
                    "source %s spreads over several summands at %s"
                    % (ss.pres.render(ext.source), ext.degree)
                )
            key = (ext.kind, ext.degree, _norm_coords(G, coords))
            if key in self._map:
                raise LedgerError(
                    "two %s rows share the source at %s" % (ext.kind, ext.degree)
                )
            self._map[key] = ext

    def lookup(
        self, kind: str, degree: TriDegree, G, coords: Sequence[int]
    ) -> Optional[HiddenExtension]:
        return self._map.get((kind, degree, _norm_coords(G, coords)))


# ---------------------------------------------------------------------------
# actions on infinity classes
# ---------------------------------------------------------------------------

#: an infinity class: {(degree, summand index): integer coefficient}
InfinityClass = Dict[Tuple[TriDegree, int], int]


def _gen_element(pres: RingPresentation, name: str) -> Optional[Element]:
    try:
        return {((pres.gen(name), 1),): 1}
    except PresentationError:
        return None


def action(ss: SliceSS, index: _LedgerIndex, kind: str, cls: InfinityClass) -> InfinityClass:
    """Apply rho, eta, or h to an infinity class, one summand at a time.

    The page product is used whenever it is nonzero in the target degree;
    otherwise the ledger supplies the hidden value, and a class with
    neither is sent to zero, which is the published convention that
    unlisted extensions are absent.  Over C there is no rho and that
    action is identically zero.
    """
    pres = ss.pres
    out: InfinityClass = {}
    mult: Optional[Element]
    if kind == "h":
        mult = None
    else:
        mult = _gen_element(pres, "rho" if kind == "rho" else "h1")
        if mult is None:
            return {}
    for (d, i), c in cls.items():
        G = ss.group(ss.r_max, d)
        o = G.orders[i]
        c = c % o if o else c
        if not c:
            continue
        elt = pres.reduce(el_scale(G.lift(i), c))
        if kind == "h":
            prod, td = pres.reduce(el_scale(elt, 2)), d
        else:
            prod, td = pres.multiply(elt, mult), d + KIND_DEGREE[kind]
        coords: Sequence[int] = []
        if prod:
            _T, coords = infinity_coords(ss, prod, td)
        if _coords_nonzero(coords):
            for j, x in enumerate(coords):
                if x:
                    key = (td, j)
                    out[key] = out.get(key, 0) + x
            continue
        vec = [0] * len(G.orders)
        vec[i] = c
        row = index.lookup(kind, d, G, vec)
        if row is None:
            continue
        _T, coords = infinity_coords(ss, row.target)
        rd = pres.degree_of_element(row.target)
        for j, x in enumerate(coords):
            if x:
                key = (rd, j)
                out[key] = out.get(key, 0) + x
    return _trim(ss, out)


def _trim(ss: SliceSS, cls: InfinityClass) -> InfinityClass:
    out: InfinityClass = {}
    for (d, i), c in cls.items():
        o = ss.group(ss.r_max, d).orders[i]
        c = c % o if o else c
        if c:
            out[(d, i)] = c
    return out


def double(ss: SliceSS, index: _LedgerIndex, cls: InfinityClass) -> InfinityClass:
    """Multiply an infinity class by 2, using 2 = rho*eta + h when needed.

    Doubling inside a cyclic summand stays on the page until it hits the
    order, at which point the value, if any, lives in higher filtration:
    the h part comes from the ledger and the rho*eta part from two page
    products.
    """
    out: InfinityClass = {}
    for (d, i), c in cls.items():
        G = ss.group(ss.r_max, d)
        o = G.orders[i]
        t = 2 * c % o if o else 2 * c
        if t:
            out[(d, i)] = out.get((d, i), 0) + t
            continue
        term = {(d, i): c}
        for key, x in action(ss, index, "h", term).items():
            out[key] = out.get(key, 0) + x
        for key, x in action(ss, index, "rho", action(ss, index, "eta", term)).items():
            out[key] = out.get(key, 0) + x
    return _trim(ss, out)


# ---------------------------------------------------------------------------
# columns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PiGenerator:
    """One infinity summand contributing to a homotopy group."""

    degree: TriDegree
    index: int
    order: int
    label: str
    part: str


@dataclass
class HomotopyGroup:
    """An assembled homotopy group in one (stem, weight) spot.

    generators follow the column bottom up.  relations record, for each
    torsion generator, what its summand order times it equals in terms of
    the higher generators; SNF of that presentation gives the invariant
    factors in ``orders`` (0 standing for a free summand).  actions hold
    the rho, h, and eta action on each generator as rendered infinity
    classes, and provenance says whether the published charts exhibit this part
    of the pattern or the periodicity rules extrapolate it.
    """

    s: int
    w: int
    generators: List[PiGenerator]
    relations: List[Tuple[int, int, Dict[int, int]]]
    orders: List[int]
    actions: Dict[str, List[str]]
    provenance: str

    def render(self) -> str:
        if not self.orders:
            return "0"
        parts = []
        for o in self.orders:
            parts.append("Z" if o == 0 else "Z/%d" % o)
        return " + ".join(parts)

    @property
    def is_cyclic(self) -> bool:
        return len(self.orders) == 1

    def order(self) -> int:
        """Total order, 0 when a free summand makes it infinite."""
        n = 1
        for o in self.orders:
            if o == 0:
                return 0
            n *= o
        return n


def _provenance(name: str, coweight: int) -> str:
    """The charts exhibit the patterns up to coweights 15 mod 32."""
    if name == "L" and coweight >= 0 and coweight % 2 == 1:
        if two_adic_valuation(coweight + 1) >= 5:
            return "extrapolated beyond the exhibited charts"
    return "chart-certified"


def assemble(
    ss: SliceSS,
    s: int,
    w: int,
    ledger: Optional[Sequence[HiddenExtension]] = None,
    check_identity: bool = True,
) -> HomotopyGroup:
    """Assemble the homotopy group at one (stem, weight) from the column.

    One generator per infinity summand, read bottom up.  Each torsion
    summand of order 2^k contributes the relation 2^k * x = value, where
    the value is found by doubling k times through 2 = rho*eta + h.  The
    doubling fails loudly (NotCertifiedError) when the column or one of
    its action neighbors leaks out of the certified region, which is the
    precondition the caller must arrange.

    Crossing extensions would make the hidden value ill defined; they do
    not occur in this material, and an occurrence raises AssembleError
    rather than producing a silently wrong group.
    """
    ss.run()
    pres = ss.pres
    if ledger is None:
        ledger = expand_ledger(ss)
    index = ledger if isinstance(ledger, _LedgerIndex) else _LedgerIndex(ss, ledger)

    gens: List[PiGenerator] = []
    key_to_idx: Dict[Tuple[TriDegree, int], int] = {}
    for f in range(ss.window.f[0], ss.window.f[1] + 1):
        d = TriDegree(s, f, w)
        G = ss.group(ss.r_max, d)
        for i, o in enumerate(G.orders):
            key_to_idx[(d, i)] = len(gens)
            gens.append(
                PiGenerator(d, i, o, pres.render(G.lift(i)), G.parts[i])
            )

    relations: List[Tuple[int, int, Dict[int, int]]] = []
    for gi, gen in enumerate(gens):
        if gen.order == 0:
            continue
        k = two_adic_valuation(gen.order)
        cls: InfinityClass = {(gen.degree, gen.index): 1}
        for _ in range(k):
            cls = double(ss, index, cls)
        value: Dict[int, int] = {}
        for key, c in cls.items():
            ti = key_to_idx.get(key)
            if ti is None:
                raise AssembleError(
                    "relation for %s leaves the column at %s"
                    % (gen.label, key[0])
                )
            value[ti] = value.get(ti, 0) + c
        relations.append((gi, gen.order, value))

    _refuse_crossings(gens, relations)

    actions: Dict[str, List[str]] = {"rho": [], "h": [], "eta": []}
    for gi, gen in enumerate(gens):
        base: InfinityClass = {(gen.degree, gen.index): 1}
        vals = {}
        for kind in ("rho", "h", "eta"):
            vals[kind] = action(ss, index, kind, base)
            actions[kind].append(_render_class(ss, vals[kind]))
        if check_identity:
            _check_two_identity(ss, index, gen, base, vals)

    orders = _invariant_factors(len(gens), relations)
    return HomotopyGroup(
        s=s,
        w=w,
        generators=gens,
        relations=relations,
        orders=orders,
        actions=actions,
        provenance=_provenance(ss.obj.name, s - w),
    )


def _render_class(ss: SliceSS, cls: InfinityClass) -> str:
    if not cls:
        return "0"
    pres = ss.pres
    parts = []
    for (d, i), c in sorted(cls.items()):
        G = ss.group(ss.r_max, d)
        label = pres.render(G.lift(i))
        parts.append(label if c == 1 else "%d*(%s)" % (c, label))
    return " + ".join(parts)


def _check_two_identity(ss, index, gen, base, vals) -> None:
    """2 = rho*eta + h, checked at the leading filtration.

    Infinity coordinates only see a homotopy element through its top
    nonzero filtration, so the identity is checked where it is visible:
    the lowest filtration terms of both sides must agree, and the right
    side must not reach below the left.
    """
    two = double(ss, index, dict(base))
    rhs: InfinityClass = dict(vals["h"])
    for key, x in action(ss, index, "rho", vals["eta"]).items():
        rhs[key] = rhs.get(key, 0) + x
    rhs = _trim(ss, rhs)
    if not two:
        if rhs:
            raise AssembleError(
                "2 = rho*eta + h fails on %s: doubling gives 0, actions give %s"
                % (gen.label, _render_class(ss, rhs))
            )
        return
    lead = min(d.f for (d, _i) in two)
    if any(d.f < lead for (d, _i) in rhs):
        raise AssembleError(
            "2 = rho*eta + h fails on %s below filtration %d" % (gen.label, lead)
        )
    left = {k: v for k, v in two.items() if k[0].f == lead}
    right = {k: v for k, v in rhs.items() if k[0].f == lead}
    if left != right:
        raise AssembleError(
            "2 = rho*eta + h fails on %s: %s vs %s"
            % (gen.label, _render_class(ss, two), _render_class(ss, rhs))
        )


def _refuse_crossings(gens, relations) -> None:
    """Interleaved hidden 2-power extensions make the order ambiguous.

    Drawn on the chart, each torsion relation is a segment from the
    generator's filtration up to the filtration of its value.  Nested
    and disjoint segments reconstruct a unique group; two segments that
    strictly interleave do not, and the assembly refuses rather than
    guessing.  (The material here never produces an interleaved pair.)
    """
    jumps = []
    for gi, _o, value in relations:
        above = [gens[ti].degree.f for ti in value if value[ti]]
        if above:
            jumps.append((gens[gi].degree.f, min(above), gens[gi].label))
    for a in jumps:
        for b in jumps:
            if a[0] < b[0] < a[1] < b[1]:
                raise AssembleError(
                    "crossing extensions between %s and %s" % (a[2], b[2])
                )


def _invariant_factors(n: int, relations) -> List[int]:
    """Invariant factors of Z^n modulo the relation lattice."""
    if n == 0:
        return []
    cols = []
    for gi, o, value in relations:
        vec = [0] * n
        vec[gi] = o
        for ti, c in value.items():
            vec[ti] -= c
        cols.append(vec)
    if not cols:
        return [0] * n
    D, _U, _V = smith_normal_form(Mat.from_cols(cols, n))
    dia = diagonal(D)
    factors = [abs(x) for x in dia if abs(x) > 1]
    rank = sum(1 for x in dia if x)
    factors.sort()
    return factors + [0] * (n - rank)


# ---------------------------------------------------------------------------
# the coweight 4j-1 order pattern
# ---------------------------------------------------------------------------


def order_pattern_check(
    ss: SliceSS,
    j: int,
    stems: Optional[Sequence[int]] = None,
    ledger: Optional[Sequence[HiddenExtension]] = None,
) -> Dict[str, object]:
    """Survey the assembled groups in coweight 4j - 1.

    Generic stems there carry a single cyclic group of order 2^(v(j)+3)
    with v the 2-adic valuation.  Stems of the form 4i - 1 are the
    documented exception: larger powers of 2, glued by powers of h.  The
    survey is report-only; it never raises on a surprising column.
    """
    ss.run()
    c = 4 * j - 1
    expected = 1 << (two_adic_valuation(j) + 3)
    if ledger is None:
        ledger = expand_ledger(ss)
    index = _LedgerIndex(ss, ledger) if not isinstance(ledger, _LedgerIndex) else ledger
    if stems is None:
        stems = range(ss.window.s[0] + 2, ss.window.s[1] - 1)
    report: Dict[str, object] = {
        "object": ss.obj.name,
        "coweight": c,
        "expected_generic_order": expected,
        "generic": [],
        "exceptional": [],
        "empty": [],
        "skipped": [],
        "ok": True,
    }
    for s in stems:
        w = s - c
        if not (ss.window.w[0] <= w <= ss.window.w[1]):
            continue
        try:
            grp = assemble(ss, s, w, ledger=index)
        except (AssembleError, NotCertifiedError) as exc:
            report["skipped"].append((s, str(exc)))
            continue
        if not grp.orders:
            report["empty"].append(s)
            continue
        entry = {"stem": s, "orders": grp.orders, "group": grp.render()}
        if s % 4 == 3:
            entry["h_glued"] = sum(
                1 for _gi, _o, value in grp.relations if value
            )
            report["exceptional"].append(entry)
        else:
            entry["ok"] = grp.orders == [expected]
            if not entry["ok"]:
                report["ok"] = False
            report["generic"].append(entry)
    return report

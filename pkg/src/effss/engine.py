"""Spectral sequence pages over a tri-graded monomial presentation.

The first page of each object is the graded algebra described by its
presentation.  The d_1 differential is given on generators and extended as a
derivation; higher differentials, where an object has them, follow a coweight
pattern: on page r exactly the non-image classes whose coweight has 2-adic
valuation r - 1 support a differential, and the value is the generator of the
target group, which the pattern requires to be a single Z/2.

Differentials lower the stem by one, raise the filtration by 2r + 1 and
preserve the weight.

Page turning is integer homology, done blockwise over the image/non-image
splitting so that every summand of every page stays on one side of it.  A
window is widened internally and a validity region is tracked page by page:
a degree stays certified only while every differential that could reach it
or leave it connects two certified degrees.  Results are only reported on the
certified part, so boundary effects are visible instead of silent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from .grading import (
    Element,
    EffssError,
    Monomial,
    RingPresentation,
    TriDegree,
    el_iadd,
)
from .intlinalg import (
    F2Homology,
    Homology,
    LinearAlgebraError,
    Mat,
    homology,
    two_adic_valuation,
)


class EngineError(EffssError):
    """Structural failure while running a spectral sequence."""


class NotCertifiedError(EngineError):
    """A degree outside the certified region was queried."""


def page_shift(r: int) -> TriDegree:
    """Degree shift of d_r."""
    return TriDegree(-1, 2 * r + 1, 0)


@dataclass(frozen=True)
class Window:
    """Closed tri-degree box, each component as (lo, hi) inclusive."""

    s: Tuple[int, int]
    f: Tuple[int, int]
    w: Tuple[int, int]

    def __post_init__(self):
        for lo, hi in (self.s, self.f, self.w):
            if lo > hi:
                raise EngineError("empty window range (%d, %d)" % (lo, hi))

    def contains(self, d: TriDegree) -> bool:
        return (
            self.s[0] <= d.s <= self.s[1]
            and self.f[0] <= d.f <= self.f[1]
            and self.w[0] <= d.w <= self.w[1]
        )

    def degrees(self) -> Iterator[TriDegree]:
        for s in range(self.s[0], self.s[1] + 1):
            for f in range(self.f[0], self.f[1] + 1):
                for w in range(self.w[0], self.w[1] + 1):
                    yield TriDegree(s, f, w)


@dataclass
class ObjectSpec:
    """Everything the engine needs to run one object's spectral sequence."""

    name: str
    pres: RingPresentation
    schedule: Dict[int, Dict[int, Element]] = field(default_factory=dict)
    has_pattern: bool = False
    image_gens: FrozenSet[int] = frozenset()
    stable_page: int = 2
    default_window: Optional[Window] = None
    default_r_max: Optional[int] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def part_of(self, m: Monomial) -> str:
        for g, _ in m:
            if g in self.image_gens:
                return "image"
        return "cokernel"


PART_ORDER = ("cokernel", "image")


def validate_schedule(pres: RingPresentation, images: Dict[int, Element], r: int) -> None:
    """Degree and torsion checks for a generator-level differential table.

    Every value must sit in the right degree and consist of order 2
    monomials; the latter is what makes the sign-free Leibniz rule exact,
    since any sign discrepancy is a multiple of 2.
    """
    shift = page_shift(r)
    for g, img in images.items():
        if not img:
            continue
        want = pres.generators[g].degree + shift
        got = pres.degree_of_element(img)
        if got != want:
            raise EngineError(
                "d%d(%s) has degree %s, expected %s"
                % (r, pres.gen_name(g), got, want)
            )
        for m in img:
            if pres.order_of(m) != 2:
                raise EngineError(
                    "d%d(%s) hits a monomial of order != 2; the derivation "
                    "extension would be sign-sensitive" % (r, pres.gen_name(g))
                )


def derive(pres: RingPresentation, m: Monomial, images: Dict[int, Element]) -> Element:
    """Extend the generator table to the monomial m by the Leibniz rule."""
    acc: Element = {}
    for i, (g, e) in enumerate(m):
        img = images.get(g)
        if not img:
            continue
        if e == 1:
            rest = m[:i] + m[i + 1 :]
        else:
            rest = m[:i] + ((g, e - 1),) + m[i + 1 :]
        term = pres.multiply_monomial(rest, img)
        el_iadd(acc, term, e)
    return pres.reduce(acc)


class PageGroup:
    """The group at one tri-degree of one page, with lifts back to page 1.

    Three flavors share the class: page 1 groups carry their basis
    monomials, pass-through groups alias the previous page when no
    differential touched the degree, and homology groups carry the
    blockwise subquotient data.
    """

    __slots__ = (
        "degree",
        "r",
        "orders",
        "parts",
        "prev",
        "monomials",
        "blocks",
        "_lifts",
        "_mono_index",
    )

    def __init__(self, degree, r, orders, parts, prev=None, monomials=None, blocks=None, lifts=None):
        self.degree = degree
        self.r = r
        self.orders: List[int] = orders
        self.parts: List[str] = parts
        self.prev: Optional[PageGroup] = prev
        self.monomials: Optional[List[Monomial]] = monomials
        self.blocks = blocks
        self._lifts: Optional[List[Element]] = lifts
        self._mono_index: Optional[Dict[Monomial, int]] = None

    @classmethod
    def basis(cls, obj: ObjectSpec, degree: TriDegree, monomials: List[Monomial]) -> "PageGroup":
        orders = [obj.pres.order_of(m) for m in monomials]
        parts = [obj.part_of(m) for m in monomials]
        return cls(degree, 1, orders, parts, monomials=monomials)

    @classmethod
    def passthrough(cls, g: "PageGroup") -> "PageGroup":
        return cls(g.degree, g.r + 1, g.orders, g.parts, prev=g, lifts=g._lifts, monomials=g.monomials)

    def __len__(self) -> int:
        return len(self.orders)

    def lift(self, i: int) -> Element:
        if self._lifts is not None:
            return self._lifts[i]
        return {self.monomials[i]: 1}

    def mono_index(self) -> Dict[Monomial, int]:
        if self._mono_index is None:
            self._mono_index = {m: i for i, m in enumerate(self.monomials)}
        return self._mono_index

    def coords(self, pres: RingPresentation, e: Element) -> List[int]:
        """Coordinates of a reduced element over a page 1 basis group."""
        idx = self.mono_index()
        vec = [0] * len(self.orders)
        for m, c in e.items():
            i = idx.get(m)
            if i is None:
                raise EngineError(
                    "element %s not supported on the window basis at %s"
                    % (pres.render(e), self.degree)
                )
            vec[i] = c
        return vec

    def project_element(self, pres: RingPresentation, e: Element) -> List[int]:
        """Coefficients of a page 1 element over this page's summands."""
        if self.monomials is not None and self.prev is None:
            return self.coords(pres, pres.reduce(e))
        vec = self.prev.project_element(pres, e)
        if self.blocks is None:  # pass-through
            return vec
        out: List[int] = []
        for _part, idx, H in self.blocks:
            out.extend(H.project([vec[i] for i in idx]))
        return out


def _empty_group(degree: TriDegree, r: int) -> PageGroup:
    return PageGroup(degree, r, [], [], lifts=[])


def _f2_out_cols(M: Mat, col_idx: Sequence[int], tgt_orders: Sequence[int]) -> List[int]:
    """Translate outgoing matrix columns into bit masks over the target.

    A map from an order 2 class into Z/o factors through the order 2
    subgroup, so each entry must be 0 or o/2 modulo o; into a free class it
    must vanish.
    """
    cols = []
    for j in col_idx:
        mask = 0
        for i, o in enumerate(tgt_orders):
            e = M.rows[i][j]
            if o == 0:
                if e:
                    raise LinearAlgebraError(
                        "order 2 class maps nontrivially to a free class"
                    )
                continue
            em = e % o
            if em == 0:
                continue
            if o % 2 or em != o // 2:
                raise LinearAlgebraError("map from order 2 class is ill defined")
            mask |= 1 << i
        cols.append(mask)
    return cols


class SliceSS:
    """Run one object's slice spectral sequence on a window."""

    def __init__(
        self,
        obj: ObjectSpec,
        window: Optional[Window] = None,
        r_max: Optional[int] = None,
        s_margin: Optional[int] = None,
        f_margin: Optional[int] = None,
        check: bool = True,
    ) -> None:
        if window is None:
            window = obj.default_window
        if window is None:
            raise EngineError("object %s has no default window" % obj.name)
        self.obj = obj
        self.pres = obj.pres
        self.window = window
        self.r_max = r_max or obj.default_r_max or obj.stable_page + 1
        self.check = check
        sm = self.r_max if s_margin is None else s_margin
        fm = 2 * self.r_max + 2 if f_margin is None else f_margin
        self.box = Window(
            s=(window.s[0] - sm, window.s[1] + sm),
            f=(0, window.f[1] + fm),
            w=window.w,
        )

        for r, images in obj.schedule.items():
            validate_schedule(self.pres, images, r)

        self._bases = self.pres.basis_window(self.box.s, self.box.f, self.box.w)
        first: Dict[TriDegree, PageGroup] = {}
        for d, monos in self._bases.items():
            first[d] = PageGroup.basis(obj, d, monos)
        self.pages: Dict[int, Dict[TriDegree, PageGroup]] = {1: first}
        self.valid: Dict[int, Set[TriDegree]] = {1: set(self.box.degrees())}
        self.diffs: Dict[int, Dict[TriDegree, Mat]] = {}
        self.unknown_out: Dict[int, Set[TriDegree]] = {}
        self._ran_to = 1

    # -- running --------------------------------------------------------

    def run(self, r_to: Optional[int] = None) -> "SliceSS":
        r_to = r_to or self.r_max
        if r_to > self.r_max:
            raise EngineError("run beyond r_max; rebuild with a larger r_max")
        while self._ran_to < r_to:
            self._turn(self._ran_to)
        return self

    def _in_box(self, d: TriDegree) -> bool:
        return self.box.contains(d)

    def _may_fire(self, r: int, d: TriDegree) -> bool:
        """Could d_r be nonzero out of this degree, as far as we know?"""
        if not self._in_box(d) or d not in self.valid[r]:
            return True  # no knowledge, stay conservative
        g = self.pages[r].get(d)
        if g is None or not g.orders:
            return False
        if r == 1:
            return bool(self.obj.schedule.get(1))
        if not self.obj.has_pattern:
            return False
        cw = d.coweight
        if cw == 0 or two_adic_valuation(cw) != r - 1:
            return False
        return any(p == "cokernel" for p in g.parts)

    def _ensure_diffs(self, r: int) -> Dict[TriDegree, Mat]:
        if r not in self.diffs:
            if r > self._ran_to:
                raise EngineError("page %d has not been reached yet" % r)
            mats, unknown = self._differentials(r)
            self.diffs[r] = mats
            self.unknown_out[r] = unknown
        return self.diffs[r]

    def _differentials(self, r: int) -> Tuple[Dict[TriDegree, Mat], Set[TriDegree]]:
        if r == 1:
            return self._d1_matrices()
        return self._pattern_matrices(r)

    def _d1_matrices(self) -> Tuple[Dict[TriDegree, Mat], Set[TriDegree]]:
        images = self.obj.schedule.get(1, {})
        shift = page_shift(1)
        mats: Dict[TriDegree, Mat] = {}
        unknown: Set[TriDegree] = set()
        pres = self.pres
        for d, G in self.pages[1].items():
            vals = [derive(pres, m, images) for m in G.monomials]
            tgt = d + shift
            if not self._in_box(tgt):
                if any(vals):
                    unknown.add(d)
                else:
                    mats[d] = Mat.zeros(0, len(vals))
                continue
            T = self.pages[1].get(tgt)
            if T is None:
                for v in vals:
                    if v:
                        raise EngineError(
                            "nonzero d1 value lands in an empty degree %s" % (tgt,)
                        )
                mats[d] = Mat.zeros(0, len(vals))
                continue
            cols = [T.coords(pres, v) for v in vals]
            mats[d] = Mat.from_cols(cols, len(T.orders))
        return mats, unknown

    def _pattern_matrices(self, r: int) -> Tuple[Dict[TriDegree, Mat], Set[TriDegree]]:
        shift = page_shift(r)
        mats: Dict[TriDegree, Mat] = {}
        unknown: Set[TriDegree] = set()
        if not self.obj.has_pattern:
            return mats, unknown
        page = self.pages[r]
        for d, G in page.items():
            cw = d.coweight
            if cw == 0 or two_adic_valuation(cw) != r - 1:
                continue
            fire = [i for i, p in enumerate(G.parts) if p == "cokernel"]
            if not fire:
                continue
            tgt = d + shift
            if not self._in_box(tgt) or tgt not in self.valid[r]:
                unknown.add(d)
                continue
            T = page.get(tgt)
            if T is None or not T.orders:
                mats[d] = Mat.zeros(0, len(G.orders))
                continue
            if len(T.orders) != 1 or T.orders[0] != 2:
                # the pattern has no single candidate here
                if self.window.contains(d):
                    raise EngineError(
                        "pattern differential d%d at %s is ambiguous: target "
                        "group is not a single Z/2" % (r, d)
                    )
                unknown.add(d)
                continue
            fire_set = set(fire)
            cols = [[1 if i in fire_set else 0] for i in range(len(G.orders))]
            mats[d] = Mat.from_cols(cols, 1)
        return mats, unknown

    def _turn(self, r: int) -> None:
        mats = self._ensure_diffs(r)
        unknown = self.unknown_out[r]
        shift = page_shift(r)
        prev_valid = self.valid[r]

        nv: Set[TriDegree] = set()
        for d in prev_valid:
            if self._may_fire(r, d):
                tgt = d + shift
                if tgt not in prev_valid or d in unknown:
                    continue
            src = d - shift
            if src.f >= 0 and self._may_fire(r, src):
                if src not in prev_valid or src in unknown:
                    continue
            nv.add(d)
        self.valid[r + 1] = nv

        page = self.pages[r]
        newpage: Dict[TriDegree, PageGroup] = {}
        for d, G in page.items():
            if d not in nv or not G.orders:
                continue
            Mout = mats.get(d)
            Min = mats.get(d - shift)
            if (Mout is None or Mout.is_zero()) and (Min is None or Min.is_zero()):
                newpage[d] = PageGroup.passthrough(G)
                continue
            srcG = page.get(d - shift)
            tgtG = page.get(d + shift)
            newpage[d] = self._turn_group(G, Min, srcG, Mout, tgtG)
        self.pages[r + 1] = newpage
        self._ran_to = r + 1

    def _turn_group(
        self,
        G: PageGroup,
        Min: Optional[Mat],
        srcG: Optional[PageGroup],
        Mout: Optional[Mat],
        tgtG: Optional[PageGroup],
    ) -> PageGroup:
        n = len(G.orders)
        if Min is None:
            Min = Mat.zeros(n, 0)
            src_orders: List[int] = []
        else:
            src_orders = srcG.orders if srcG is not None else []
        if Mout is None:
            Mout = Mat.zeros(0, n)
            tgt_orders: List[int] = []
        else:
            tgt_orders = tgtG.orders if tgtG is not None else []

        part_idx: Dict[str, List[int]] = {}
        for i, p in enumerate(G.parts):
            part_idx.setdefault(p, []).append(i)

        # incoming columns must live in a single part each
        in_cols: Dict[str, List[Tuple[List[int], int]]] = {p: [] for p in part_idx}
        for j in range(Min.n):
            col = Min.col(j)
            touched = {G.parts[i] for i in range(n) if col[i]}
            if not touched:
                continue
            if len(touched) > 1:
                raise EngineError(
                    "incoming differential at %s mixes the image splitting" % (G.degree,)
                )
            p = touched.pop()
            in_cols[p].append((col, src_orders[j]))

        # outgoing blocks may not share target rows
        rows_used: Dict[str, Set[int]] = {}
        for p, idx in part_idx.items():
            used = set()
            for j in idx:
                for i in range(Mout.m):
                    if Mout.rows[i][j]:
                        used.add(i)
            rows_used[p] = used
        parts_present = [p for p in PART_ORDER if p in part_idx]
        for a in range(len(parts_present)):
            for b in range(a + 1, len(parts_present)):
                if rows_used[parts_present[a]] & rows_used[parts_present[b]]:
                    raise EngineError(
                        "outgoing differential at %s mixes the image splitting"
                        % (G.degree,)
                    )

        blocks = []
        orders: List[int] = []
        parts: List[str] = []
        lifts: List[Element] = []
        pres = self.pres
        for p in parts_present:
            idx = part_idx[p]
            sub_orders = [G.orders[i] for i in idx]
            cols_p = in_cols[p]
            if all(o == 2 for o in sub_orders):
                masks = []
                for col, _o in cols_p:
                    mask = 0
                    for k, i in enumerate(idx):
                        if col[i] & 1:
                            mask |= 1 << k
                    masks.append(mask)
                sub_out = Mat([[Mout.rows[i][j] for j in idx] for i in range(Mout.m)], Mout.m, len(idx))
                H = F2Homology(len(idx), masks, _f2_out_cols(sub_out, range(len(idx)), tgt_orders))
            else:
                d_in = Mat.from_cols([[col[i] for i in idx] for col, _o in cols_p], len(idx))
                d_out = Mat([[Mout.rows[i][j] for j in idx] for i in range(Mout.m)], Mout.m, len(idx))
                H = homology(
                    d_in,
                    d_out,
                    [o for _c, o in cols_p],
                    sub_orders,
                    tgt_orders,
                    check=self.check,
                )
            blocks.append((p, tuple(idx), H))
            for k, o in enumerate(H.orders):
                orders.append(o)
                parts.append(p)
                acc: Element = {}
                for j, c in enumerate(H.gens[k]):
                    if c:
                        el_iadd(acc, G.lift(idx[j]), c)
                lifts.append(pres.reduce(acc))

        return PageGroup(
            G.degree, G.r + 1, orders, parts, prev=G, blocks=blocks, lifts=lifts
        )

    # -- reading results --------------------------------------------------

    def group(self, r: int, d: TriDegree) -> PageGroup:
        if r not in self.pages:
            raise EngineError("page %d not computed" % r)
        if d not in self.valid[r]:
            raise NotCertifiedError(
                "degree %s is not certified on page %d for this window" % (d, r)
            )
        g = self.pages[r].get(d)
        return g if g is not None else _empty_group(d, r)

    def infinity(self, d: TriDegree) -> PageGroup:
        self.run()
        return self.group(self.r_max, d)

    def certified(self, d: TriDegree, r: Optional[int] = None) -> bool:
        return d in self.valid[r or self._ran_to]

    def certified_user_degrees(self, r: Optional[int] = None) -> List[TriDegree]:
        r = r or self._ran_to
        return sorted(d for d in self.valid[r] if self.window.contains(d))

    def differential_known(self, r: int, d: TriDegree) -> bool:
        """False when d_r out of this degree cannot be certified in the box.

        differential_value returns zero there; callers that care about
        the difference between certified-zero and not-computable must
        check this first.
        """
        self._ensure_diffs(r)
        return d not in self.unknown_out[r]

    def differential_value(self, r: int, d: TriDegree, i: int) -> Element:
        """d_r of summand i at degree d, as an element of page 1."""
        M = self._ensure_diffs(r).get(d)
        if M is None or M.m == 0:
            return {}
        T = self.pages[r].get(d + page_shift(r))
        acc: Element = {}
        for k in range(M.m):
            c = M.rows[k][i]
            if c:
                el_iadd(acc, T.lift(k), c)
        return self.pres.reduce(acc)

    def check_stability(self) -> None:
        """No differential may fire in the user part of the certified region
        on or after the stable page."""
        self.run()
        for r in range(self.obj.stable_page, self.r_max):
            mats = self._ensure_diffs(r)
            for d, M in mats.items():
                if not self.window.contains(d) or d not in self.valid[r]:
                    continue
                if not M.is_zero():
                    raise EngineError(
                        "expected stability from page %d but d%d at %s is nonzero"
                        % (self.obj.stable_page, r, d)
                    )

    def summands(self, r: int, user_only: bool = True) -> Iterator[Tuple[TriDegree, int, int, Element, str]]:
        """Yield (degree, index, order, lift, part), degree-sorted."""
        if r not in self.pages:
            raise EngineError("page %d not computed" % r)
        for d in sorted(self.pages[r]):
            if user_only and not self.window.contains(d):
                continue
            if d not in self.valid[r]:
                continue
            G = self.pages[r][d]
            for i, o in enumerate(G.orders):
                yield d, i, o, G.lift(i), G.parts[i]

    def dump_lines(self, r: int, user_only: bool = True) -> Iterator[str]:
        """One line per summand:

        page {r} | {s} {f} {w} | {order} | {label} | d{r} -> {value}
        """
        have_diffs = r in self.diffs or r <= self._ran_to
        for d, i, o, lift, _part in self.summands(r, user_only=user_only):
            if have_diffs:
                v = self.differential_value(r, d, i)
                vtext = self.pres.render(v) if v else "-"
            else:
                vtext = "-"
            yield "page %d | %d %d %d | %d | %s | d%d -> %s" % (
                r, d.s, d.f, d.w, o, self.pres.render(lift), r, vtext,
            )

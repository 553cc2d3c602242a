"""Tri-graded monomial algebras with exact integer coefficients.

Every page of every spectral sequence in this package is, additively, a direct
sum of cyclic groups indexed by monomials in a fixed generator list.  This
module holds the shared machinery for that picture:

* ``TriDegree`` is a degree (s, f, w) = (stem, filtration, weight).  The
  combination s - w, the coweight, grades everything on the eta-periodic side
  and controls which classes a higher differential can touch.

* A ``Monomial`` is a sorted sparse exponent tuple ``((gen_index, exp), ...)``
  and an element is a dict mapping monomials to integer coefficients.

* ``RingPresentation`` bundles generators (each with a degree, an additive
  torsion, an optional exponent cap and optional exclusion slots) together
  with monomial rewrite rules.  Products are computed by rewriting to normal
  form; the rule lists used here are confluent and terminating, which the test
  suite checks on random products.

Coefficients are reduced modulo the additive order of the monomial they sit
on.  The order of a monomial is the gcd of the torsions of the generators
appearing in it (torsion 0 means a free summand), further capped by the
presentation-wide torsion if one is set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple


class EffssError(Exception):
    """Base class for errors raised by this package."""


class PresentationError(EffssError):
    """A generator list or rule list violates an invariant we rely on."""


class TriDegree(NamedTuple):
    """Degree triple (stem, filtration, weight) with componentwise arithmetic."""

    s: int
    f: int
    w: int

    @property
    def coweight(self) -> int:
        return self.s - self.w

    def __add__(self, other: "TriDegree") -> "TriDegree":  # type: ignore[override]
        return TriDegree(self.s + other.s, self.f + other.f, self.w + other.w)

    def __sub__(self, other: "TriDegree") -> "TriDegree":
        return TriDegree(self.s - other.s, self.f - other.f, self.w - other.w)

    def scaled(self, n: int) -> "TriDegree":
        return TriDegree(n * self.s, n * self.f, n * self.w)

    def __str__(self) -> str:
        return "({}, {}, {})".format(self.s, self.f, self.w)


def lam(degree: TriDegree) -> int:
    """The enumeration weight 2f + s - w.

    Each presentation we ship has lam >= 1 on every generator, so lam bounds
    the total exponent of a monomial and makes basis enumeration finite.

    >>> lam(TriDegree(-1, 1, -1))
    2
    """
    return 2 * degree.f + degree.s - degree.w


# ---------------------------------------------------------------------------
# monomials and elements
# ---------------------------------------------------------------------------

#: Sparse exponent vector, sorted by generator index, exponents positive.
Monomial = Tuple[Tuple[int, int], ...]

#: The unit monomial.
MONE: Monomial = ()

#: Sparse linear combination of monomials.
Element = Dict[Monomial, int]


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    """Merge two sorted exponent tuples.

    >>> mono_mul(((0, 1), (2, 3)), ((0, 2),))
    ((0, 3), (2, 3))
    """
    if not a:
        return b
    if not b:
        return a
    out: List[Tuple[int, int]] = []
    i = j = 0
    while i < len(a) and j < len(b):
        ga, ea = a[i]
        gb, eb = b[j]
        if ga == gb:
            out.append((ga, ea + eb))
            i += 1
            j += 1
        elif ga < gb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def mono_div(a: Monomial, b: Monomial) -> Optional[Monomial]:
    """Exact quotient a / b, or None when b does not divide a."""
    quot: List[Tuple[int, int]] = []
    i = 0
    for gb, eb in b:
        while i < len(a) and a[i][0] < gb:
            quot.append(a[i])
            i += 1
        if i >= len(a) or a[i][0] != gb or a[i][1] < eb:
            return None
        ea = a[i][1]
        if ea > eb:
            quot.append((gb, ea - eb))
        i += 1
    quot.extend(a[i:])
    return tuple(quot)


def mono_exp(m: Monomial, gen: int) -> int:
    """Exponent of one generator in a monomial (0 when absent)."""
    for g, e in m:
        if g == gen:
            return e
        if g > gen:
            break
    return 0


def el_iadd(acc: Element, other: Element, scale: int = 1) -> Element:
    """Accumulate ``scale * other`` into ``acc`` in place and return it."""
    for m, c in other.items():
        acc[m] = acc.get(m, 0) + scale * c
    return acc


def el_scale(e: Element, scale: int) -> Element:
    return {m: scale * c for m, c in e.items()}


# ---------------------------------------------------------------------------
# presentations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorSpec:
    """One generator of a presentation.

    torsion   additive order of the generator (0 for a free class); the
              order of a monomial is the gcd of the torsions present.
    cap       largest exponent the generator carries in a normal-form
              monomial, or None when powers are unbounded.
    slots     exclusion groups.  A normal monomial contains at most one
              generator from each named slot.  Used for the single
              v-power carrier in the fiber presentations.
    """

    name: str
    degree: TriDegree
    torsion: int = 0
    cap: Optional[int] = None
    slots: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RewriteRule:
    """lhs -> sum of (coeff, monomial).  lhs divides a monomial, fire."""

    lhs: Monomial
    rhs: Tuple[Tuple[int, Monomial], ...]


class RingPresentation:
    """A tri-graded algebra given by generators and monomial rewrite rules.

    The normal-form monomials (those passing caps, slots, and not divisible
    by any rule lhs) form an additive basis.  ``multiply`` and ``reduce``
    rewrite arbitrary products onto that basis with exact coefficients.
    """

    def __init__(
        self,
        name: str,
        generators: Sequence[GeneratorSpec],
        rules: Sequence[RewriteRule] = (),
        global_torsion: int = 0,
    ) -> None:
        self.name = name
        self.generators: Tuple[GeneratorSpec, ...] = tuple(generators)
        self.rules: Tuple[RewriteRule, ...] = tuple(rules)
        self.global_torsion = int(global_torsion)

        self._index: Dict[str, int] = {}
        for i, g in enumerate(self.generators):
            if g.name in self._index:
                raise PresentationError("duplicate generator name %r" % g.name)
            self._index[g.name] = i

        for g in self.generators:
            if lam(g.degree) < 1:
                raise PresentationError(
                    "generator %s has 2f + s - w = %d < 1; basis enumeration "
                    "would not terminate" % (g.name, lam(g.degree))
                )
            if g.torsion < 0 or g.cap is not None and g.cap < 1:
                raise PresentationError("bad torsion or cap on %s" % g.name)

        # Rules are looked up through the set of generators in their lhs.
        # All our rules touch one or two generators, and monomial supports
        # stay small, so scanning the subsets of a support is cheap.
        self._rules_by_key: Dict[Tuple[int, ...], List[RewriteRule]] = {}
        for r in self.rules:
            if not r.lhs:
                raise PresentationError("rule with empty lhs")
            key = tuple(g for g, _ in r.lhs)
            self._rules_by_key.setdefault(key, []).append(r)

        # Enumeration hints, validated rather than assumed.  With
        # s >= -lam and s <= 2*lam on every generator the window search
        # can prune on partial stems.
        self._s_lower_ok = all(g.degree.s >= -lam(g.degree) for g in self.generators)
        self._s_upper_ok = all(g.degree.s <= 2 * lam(g.degree) for g in self.generators)
        self._f_monotone = all(g.degree.f >= 0 for g in self.generators)

        tails = [
            i
            for i, g in enumerate(self.generators)
            if g.degree.s == 0 and g.degree.f == 0
        ]
        if len(tails) > 1:
            raise PresentationError(
                "at most one pure-weight generator is supported, got %s"
                % [self.generators[i].name for i in tails]
            )
        self._tail: Optional[int] = tails[0] if tails else None
        if self._tail is not None and self.generators[self._tail].degree.w >= 0:
            raise PresentationError("pure-weight generator must lower the weight")

        self._dfs_order: List[int] = [
            i for i in range(len(self.generators)) if i != self._tail
        ]

        self._reduce_memo: Dict[Monomial, Element] = {}

        #: optional replacement enumerator with the same contract as
        #: basis_window; the fiber construction installs a closed-form one
        #: because its generator list is long and mostly mutually exclusive
        self.basis_hook = None

    # -- bookkeeping --------------------------------------------------

    def gen(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise PresentationError("no generator named %r in %s" % (name, self.name))

    def gen_name(self, i: int) -> str:
        return self.generators[i].name

    def monomial(self, exps: Dict[str, int]) -> Monomial:
        """Build a monomial from a name -> exponent dict."""
        pairs = sorted((self.gen(n), e) for n, e in exps.items() if e)
        for _, e in pairs:
            if e < 0:
                raise PresentationError("negative exponent")
        return tuple(pairs)

    def degree_of(self, m: Monomial) -> TriDegree:
        s = f = w = 0
        for g, e in m:
            d = self.generators[g].degree
            s += e * d.s
            f += e * d.f
            w += e * d.w
        return TriDegree(s, f, w)

    def order_of(self, m: Monomial) -> int:
        """Additive order of the cyclic summand on monomial m (0 = free)."""
        o = self.global_torsion
        for g, _ in m:
            o = math.gcd(o, self.generators[g].torsion)
        return o

    def degree_of_element(self, e: Element) -> Optional[TriDegree]:
        """Common degree of a homogeneous element, None for the zero element.

        Raises PresentationError when terms of mixed degree are present;
        every element handled by the page machinery is homogeneous.
        """
        deg: Optional[TriDegree] = None
        for m in e:
            d = self.degree_of(m)
            if deg is None:
                deg = d
            elif d != deg:
                raise PresentationError(
                    "inhomogeneous element: %s vs %s" % (deg, d)
                )
        return deg

    # -- reduction and products ----------------------------------------

    def _find_rule(self, m: Monomial) -> Optional[RewriteRule]:
        sup = [g for g, _ in m]
        n = len(sup)
        for i in range(n):
            for r in self._rules_by_key.get((sup[i],), ()):
                if mono_div(m, r.lhs) is not None:
                    return r
            for j in range(i + 1, n):
                for r in self._rules_by_key.get((sup[i], sup[j]), ()):
                    if mono_div(m, r.lhs) is not None:
                        return r
        return None

    def reduce_monomial(self, m: Monomial) -> Element:
        """Rewrite a single monomial to a combination of normal monomials.

        Coefficients are not yet reduced modulo torsion; ``reduce`` does
        that.  Results of nontrivial rewrites are memoized, monomials that
        are already normal are passed through without touching the memo.
        """
        rule = self._find_rule(m)
        if rule is None:
            return {m: 1}
        hit = self._reduce_memo.get(m)
        if hit is not None:
            return hit
        quot = mono_div(m, rule.lhs)
        assert quot is not None
        acc: Element = {}
        for coeff, rm in rule.rhs:
            part = self.reduce_monomial(mono_mul(rm, quot))
            el_iadd(acc, part, coeff)
        acc = {mm: c for mm, c in acc.items() if c}
        self._reduce_memo[m] = acc
        return acc

    def _norm_coeff(self, m: Monomial, c: int) -> int:
        o = self.order_of(m)
        return c % o if o else c

    def reduce(self, e: Element) -> Element:
        """Normal form of an element; coefficients reduced mod torsion."""
        acc: Element = {}
        for m, c in e.items():
            if not c:
                continue
            el_iadd(acc, self.reduce_monomial(m), c)
        out: Element = {}
        for m, c in acc.items():
            c = self._norm_coeff(m, c)
            if c:
                out[m] = c
        return out

    def multiply(self, a: Element, b: Element) -> Element:
        raw: Element = {}
        for ma, ca in a.items():
            for mb, cb in b.items():
                m = mono_mul(ma, mb)
                raw[m] = raw.get(m, 0) + ca * cb
        return self.reduce(raw)

    def multiply_monomial(self, m: Monomial, e: Element) -> Element:
        raw: Element = {}
        for mb, cb in e.items():
            mm = mono_mul(m, mb)
            raw[mm] = raw.get(mm, 0) + cb
        return self.reduce(raw)

    def is_normal(self, m: Monomial) -> bool:
        """True when m is a basis monomial (caps, slots, no rule applies)."""
        used_slots: set = set()
        for g, e in m:
            spec = self.generators[g]
            if spec.cap is not None and e > spec.cap:
                return False
            for sl in spec.slots:
                if sl in used_slots:
                    return False
                used_slots.add(sl)
        return self._find_rule(m) is None

    # -- basis enumeration ----------------------------------------------

    def basis_window(
        self,
        s_range: Tuple[int, int],
        f_range: Tuple[int, int],
        w_range: Tuple[int, int],
    ) -> Dict[TriDegree, List[Monomial]]:
        """All normal monomials with degree in the closed box, by degree.

        Runs a depth-first search over exponent vectors.  Total exponents
        are bounded because 2f + s - w is at least 1 on every generator,
        and the pure-weight generator (the tau power) is peeled off into a
        closed-form range at the leaves instead of being searched.
        """
        s0, s1 = s_range
        f0, f1 = f_range
        w0, w1 = w_range
        if s0 > s1 or f0 > f1 or w0 > w1:
            return {}
        if self.basis_hook is not None:
            return self.basis_hook(s_range, f_range, w_range)
        lam_max = 2 * f1 + s1 - w0

        gens = self.generators
        order = self._dfs_order
        tail = self._tail
        tail_w = -gens[tail].degree.w if tail is not None else 0
        tail_cap = gens[tail].cap if tail is not None else None
        out: Dict[TriDegree, List[Monomial]] = {}

        def emit(parts: List[Tuple[int, int]], s: int, f: int, w: int) -> None:
            m = tuple(sorted(parts))
            if self._find_rule(m) is not None:
                # Caps and slots are enforced during the search; a rule
                # hitting a capped monomial here would mean the declared
                # normal form disagrees with the rules.
                raise PresentationError(
                    "enumerated monomial %s is reducible; presentation "
                    "normal-form data is inconsistent" % (m,)
                )
            out.setdefault(TriDegree(s, f, w), []).append(m)

        def leaf(parts: List[Tuple[int, int]], s: int, f: int, w: int) -> None:
            if not (s0 <= s <= s1 and f0 <= f <= f1):
                return
            if tail is None:
                if w0 <= w <= w1:
                    emit(parts, s, f, w)
                return
            # solve w - e * tail_w in [w0, w1] for e >= 0
            lo = -(-(w - w1) // tail_w)  # ceil
            hi = (w - w0) // tail_w
            if lo < 0:
                lo = 0
            if tail_cap is not None and hi > tail_cap:
                hi = tail_cap
            for e in range(lo, hi + 1):
                if e:
                    emit(parts + [(tail, e)], s, f, w - e * tail_w)
                else:
                    emit(parts, s, f, w)

        def rec(
            pos: int,
            parts: List[Tuple[int, int]],
            s: int,
            f: int,
            w: int,
            lam_used: int,
            slots: frozenset,
        ) -> None:
            lam_rem = lam_max - lam_used
            if lam_rem < 0:
                return
            if self._f_monotone and f > f1:
                return
            if self._s_lower_ok and s - lam_rem > s1:
                return
            if self._s_upper_ok and s + 2 * lam_rem < s0:
                return
            if pos == len(order):
                leaf(parts, s, f, w)
                return
            gi = order[pos]
            spec = gens[gi]
            d = spec.degree
            gl = lam(d)
            emax = lam_rem // gl
            if spec.cap is not None and emax > spec.cap:
                emax = spec.cap
            if self._f_monotone and d.f > 0:
                e_by_f = (f1 - f) // d.f
                if emax > e_by_f:
                    emax = e_by_f
            blocked = bool(slots and set(spec.slots) & slots)
            rec(pos + 1, parts, s, f, w, lam_used, slots)
            if blocked:
                return
            new_slots = slots | frozenset(spec.slots) if spec.slots else slots
            for e in range(1, emax + 1):
                rec(
                    pos + 1,
                    parts + [(gi, e)],
                    s + e * d.s,
                    f + e * d.f,
                    w + e * d.w,
                    lam_used + e * gl,
                    new_slots,
                )

        rec(0, [], 0, 0, 0, 0, frozenset())
        for degree in out:
            out[degree].sort(key=self.mono_key)
        return out

    def basis_at(self, degree: TriDegree) -> List[Monomial]:
        box = self.basis_window(
            (degree.s, degree.s), (degree.f, degree.f), (degree.w, degree.w)
        )
        return box.get(degree, [])

    # -- printing and serialization ---------------------------------------

    def mono_key(self, m: Monomial):
        """Dense exponent tuple, the canonical sort key for monomials."""
        key = [0] * len(self.generators)
        for g, e in m:
            key[g] = e
        return tuple(key)

    def render_monomial(self, m: Monomial) -> str:
        if not m:
            return "1"
        parts = []
        for g, e in m:
            name = self.generators[g].name
            parts.append(name if e == 1 else "%s^%d" % (name, e))
        return "*".join(parts)

    def render_term(self, coeff: int, m: Monomial) -> str:
        if not m:
            return str(coeff)
        if coeff == 1:
            return self.render_monomial(m)
        if coeff == -1:
            return "-" + self.render_monomial(m)
        return "%d*%s" % (coeff, self.render_monomial(m))

    def render(self, e: Element) -> str:
        if not e:
            return "0"
        items = sorted(e.items(), key=lambda mc: self.mono_key(mc[0]))
        text = self.render_term(items[0][1], items[0][0])
        for m, c in items[1:]:
            if c < 0:
                text += " - " + self.render_term(-c, m)
            else:
                text += " + " + self.render_term(c, m)
        return text

    def parse_monomial(self, text: str) -> Monomial:
        """Inverse of render_monomial for well-formed input.

        >>> # doctest helper lives in the test suite; format is g1^e1*g2
        """
        text = text.strip()
        if text == "1":
            return MONE
        exps: Dict[str, int] = {}
        for chunk in text.split("*"):
            chunk = chunk.strip()
            if "^" in chunk:
                name, _, pw = chunk.partition("^")
                exps[name.strip()] = exps.get(name.strip(), 0) + int(pw)
            else:
                exps[chunk] = exps.get(chunk, 0) + 1
        return self.monomial(exps)

    def parse(self, text: str) -> Element:
        """Inverse of render: sums of terms like ``8*tau2*iv4``.

        The reduced element is returned, so the input does not have to be
        in normal form ("th1^2" parses fine).
        """
        text = text.strip()
        if text in ("0", ""):
            return {}
        out: Element = {}
        for term in text.replace("- ", "+ -").split("+"):
            term = term.strip()
            coeff = 1
            if term.startswith("-"):
                coeff = -1
                term = term[1:].strip()
            chunks = [c.strip() for c in term.split("*")]
            names = []
            for chunk in chunks:
                if chunk.lstrip("-").isdigit():
                    coeff *= int(chunk)
                else:
                    names.append(chunk)
            m = self.parse_monomial("*".join(names)) if names else MONE
            out[m] = out.get(m, 0) + coeff
        return self.reduce(out)

    def mono_to_dict(self, m: Monomial) -> Dict[str, int]:
        return {self.generators[g].name: e for g, e in m}

    def element_to_list(self, e: Element) -> List[List[object]]:
        items = sorted(e.items(), key=lambda mc: self.mono_key(mc[0]))
        return [[c, self.mono_to_dict(m)] for m, c in items]

    def element_from_list(self, data: Iterable[Sequence[object]]) -> Element:
        out: Element = {}
        for coeff, exps in data:
            m = self.monomial(dict(exps))  # type: ignore[arg-type]
            out[m] = out.get(m, 0) + int(coeff)  # type: ignore[call-overload]
        return self.reduce(out)

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "globalTorsion": self.global_torsion,
            "generators": [
                {
                    "name": g.name,
                    "degree": [g.degree.s, g.degree.f, g.degree.w],
                    "torsion": g.torsion,
                    "cap": g.cap,
                    "slots": list(g.slots),
                }
                for g in self.generators
            ],
            "rules": [
                {
                    "lhs": self.mono_to_dict(r.lhs),
                    "rhs": [[c, self.mono_to_dict(m)] for c, m in r.rhs],
                }
                for r in self.rules
            ],
        }


def presentation_from_dict(data: Dict[str, object]) -> RingPresentation:
    """Rebuild a RingPresentation from its ``to_dict`` form."""
    gens = []
    for g in data["generators"]:  # type: ignore[index]
        s, f, w = g["degree"]
        gens.append(
            GeneratorSpec(
                name=g["name"],
                degree=TriDegree(s, f, w),
                torsion=int(g.get("torsion", 0)),
                cap=g.get("cap"),
                slots=tuple(g.get("slots", ())),
            )
        )
    pres = RingPresentation(
        str(data["name"]),
        gens,
        global_torsion=int(data.get("globalTorsion", 0)),  # type: ignore[arg-type]
    )
    rules = []
    for r in data.get("rules", ()):  # type: ignore[attr-defined]
        lhs = pres.monomial(dict(r["lhs"]))
        rhs = tuple((int(c), pres.monomial(dict(m))) for c, m in r["rhs"])
        rules.append(RewriteRule(lhs=lhs, rhs=rhs))
    return RingPresentation(
        str(data["name"]),
        gens,
        rules=rules,
        global_torsion=int(data.get("globalTorsion", 0)),  # type: ignore[arg-type]
    )

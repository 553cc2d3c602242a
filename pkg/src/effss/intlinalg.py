"""Exact integer linear algebra: Smith form, kernels, homology of complexes.

Page turning reduces to one computation: the homology of

    G_prev --d_in--> G --d_out--> G_next

where each group is a finite direct sum of cyclic groups Z/o_i (o_i = 0 for a
free summand) with a preferred basis.  ``homology`` returns the subquotient
in invariant-factor form together with explicit generator vectors and a
projection map, so that classes on the next page can be expressed in the old
coordinates and old classes can be pushed forward.

Everything here is plain Python integers.  Matrices are dense lists of rows;
the blocks that show up in practice are small (a handful of monomials per
tri-degree), so no effort is spent on sparsity.
"""

from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .grading import EffssError


class LinearAlgebraError(EffssError):
    """Raised for ill-posed inputs: maps not well defined, non-cycles, etc."""


def two_adic_valuation(n: int) -> int:
    """Largest e with 2^e dividing n.

    >>> two_adic_valuation(48)
    4
    """
    if n == 0:
        raise LinearAlgebraError("the 2-adic valuation of 0 is infinite")
    return (n & -n).bit_length() - 1


class Mat:
    """A dense integer matrix with explicit shape, so 0 x n and n x 0 work."""

    __slots__ = ("m", "n", "rows")

    def __init__(self, rows: Sequence[Sequence[int]], m: Optional[int] = None, n: Optional[int] = None):
        self.rows: List[List[int]] = [list(r) for r in rows]
        self.m = len(self.rows) if m is None else m
        if n is None:
            n = len(self.rows[0]) if self.rows else 0
        self.n = n
        if len(self.rows) != self.m:
            raise LinearAlgebraError("row count mismatch")
        for r in self.rows:
            if len(r) != self.n:
                raise LinearAlgebraError("ragged matrix")

    @classmethod
    def zeros(cls, m: int, n: int) -> "Mat":
        return cls([[0] * n for _ in range(m)], m, n)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_cols(cls, cols: Sequence[Sequence[int]], m: int) -> "Mat":
        return cls([[col[i] for col in cols] for i in range(m)], m, len(cols))

    def col(self, j: int) -> List[int]:
        return [self.rows[i][j] for i in range(self.m)]

    def cols(self) -> List[List[int]]:
        return [self.col(j) for j in range(self.n)]

    def hstack(self, other: "Mat") -> "Mat":
        if self.m != other.m:
            raise LinearAlgebraError("hstack shape mismatch")
        return Mat([self.rows[i] + other.rows[i] for i in range(self.m)], self.m, self.n + other.n)

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.n != other.m:
            raise LinearAlgebraError("matmul shape mismatch")
        out = [[0] * other.n for _ in range(self.m)]
        for i in range(self.m):
            ri = self.rows[i]
            oi = out[i]
            for k in range(self.n):
                a = ri[k]
                if a:
                    rk = other.rows[k]
                    for j in range(other.n):
                        oi[j] += a * rk[j]
        return Mat(out, self.m, other.n)

    def vec(self, x: Sequence[int]) -> List[int]:
        if len(x) != self.n:
            raise LinearAlgebraError("vector length mismatch")
        return [sum(self.rows[i][j] * x[j] for j in range(self.n)) for i in range(self.m)]

    def is_zero(self) -> bool:
        return all(all(a == 0 for a in r) for r in self.rows)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Mat)
            and self.m == other.m
            and self.n == other.n
            and self.rows == other.rows
        )

    def __hash__(self):  # pragma: no cover - Mats are not dict keys
        raise TypeError("Mat is mutable, not hashable")

    def __repr__(self) -> str:
        return "Mat(%r)" % (self.rows,)


def smith_normal_form(M: Mat) -> Tuple[Mat, Mat, Mat]:
    """Return (D, U, V) with U @ M @ V = D diagonal, d_i | d_{i+1}, d_i >= 0.

    U and V are unimodular.  Pivot choice is the smallest absolute value in
    the remaining block, scanned row-major, so the output is deterministic.
    """
    m, n = M.m, M.n
    A = [row[:] for row in M.rows]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            for r in A:
                r[i], r[j] = r[j], r[i]
            for r in V:
                r[i], r[j] = r[j], r[i]

    def addmul_row(dst, src, q):
        # row_dst += q * row_src
        Ad, As = A[dst], A[src]
        for j in range(n):
            Ad[j] += q * As[j]
        Ud, Us = U[dst], U[src]
        for j in range(m):
            Ud[j] += q * Us[j]

    def addmul_col(dst, src, q):
        for r in A:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]

    def negate_row(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < m and t < n:
        # locate the smallest nonzero entry of the trailing block
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = abs(A[i][j])
                if a and (best is None or a < best):
                    best = a
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])

        while True:
            # clear column t with row operations
            restart = False
            for i in range(t + 1, m):
                if A[i][t]:
                    q = A[i][t] // A[t][t]
                    addmul_row(i, t, -q)
                    if A[i][t]:
                        swap_rows(t, i)
                        restart = True
            if restart:
                continue
            for j in range(t + 1, n):
                if A[t][j]:
                    q = A[t][j] // A[t][t]
                    addmul_col(j, t, -q)
                    if A[t][j]:
                        swap_cols(t, j)
                        restart = True
            if restart:
                continue
            # both clear; enforce divisibility of the rest of the block
            d = A[t][t]
            offender = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % d:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            addmul_row(t, offender, 1)

        if A[t][t] < 0:
            negate_row(t)
        t += 1

    return Mat(A, m, n), Mat(U, m, m), Mat(V, n, n)


def diagonal(D: Mat) -> List[int]:
    return [D.rows[i][i] for i in range(min(D.m, D.n))]


def det(M: Mat) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    if M.m != M.n:
        raise LinearAlgebraError("determinant of a non-square matrix")
    n = M.m
    if n == 0:
        return 1
    A = [row[:] for row in M.rows]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k]:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def unimodular_inverse(U: Mat) -> Mat:
    """Exact inverse of a unimodular matrix."""
    D, A, B = smith_normal_form(U)
    if diagonal(D) != [1] * U.m or U.m != U.n:
        raise LinearAlgebraError("matrix is not unimodular")
    return B @ A


def kernel_basis(M: Mat) -> Mat:
    """Columns form a lattice basis of the integer kernel of M."""
    D, U, V = smith_normal_form(M)
    dia = diagonal(D)
    cols = []
    for j in range(M.n):
        if j >= len(dia) or dia[j] == 0:
            cols.append(V.col(j))
    return Mat.from_cols(cols, M.n)


def solve(M: Mat, b: Sequence[int]) -> Optional[List[int]]:
    """One integer solution of M x = b, or None when there is none."""
    if len(b) != M.m:
        raise LinearAlgebraError("rhs length mismatch")
    D, U, V = smith_normal_form(M)
    y = U.vec(list(b))
    dia = diagonal(D)
    z = [0] * M.n
    for i in range(M.m):
        d = dia[i] if i < len(dia) else 0
        if d:
            if y[i] % d:
                return None
            if i < M.n:
                z[i] = y[i] // d
        elif y[i]:
            return None
    return V.vec(z)


def lattice_basis(P: Mat) -> Mat:
    """Independent columns spanning the column span of P (a lattice basis)."""
    if P.n == 0:
        return Mat.zeros(P.m, 0)
    D, U, V = smith_normal_form(P)
    Uinv = unimodular_inverse(U)
    dia = diagonal(D)
    cols = [
        [dia[i] * Uinv.rows[r][i] for r in range(P.m)]
        for i in range(len(dia))
        if dia[i]
    ]
    return Mat.from_cols(cols, P.m)


# ---------------------------------------------------------------------------
# homology of a two-step complex of finitely generated abelian groups
# ---------------------------------------------------------------------------


def _check_well_defined(M: Mat, src_orders, tgt_orders, what: str) -> None:
    for j, o in enumerate(src_orders):
        if not o:
            continue
        for i, ot in enumerate(tgt_orders):
            v = o * M.rows[i][j]
            if (ot and v % ot) or (not ot and v):
                raise LinearAlgebraError(
                    "%s does not respect torsion at column %d row %d" % (what, j, i)
                )


class Homology:
    """ker(d_out)/im(d_in) with generators and a projection back onto it.

    orders   invariant factors of the summands, 0 meaning a free summand,
             entries 1 already dropped.
    gens     one ambient coordinate vector per summand.
    """

    def __init__(self, ambient_rank, orders, gens, K, Uy, kept, dys, signs=None):
        self.ambient_rank = ambient_rank
        self.orders: List[int] = orders
        self.gens: List[List[int]] = gens
        self._K = K
        self._K_snf = smith_normal_form(K) if K is not None else None
        self._Uy = Uy
        self._kept = kept
        self._dys = dys
        self._signs = signs if signs is not None else [1] * len(kept)

    @property
    def is_zero(self) -> bool:
        return not self.orders

    def cycle_coordinates(self, x: Sequence[int]) -> Optional[List[int]]:
        """Coordinates of x in the cycle lattice, or None when x is no cycle."""
        if self._K is None:
            return None
        D, U, V = self._K_snf
        y = U.vec(list(x))
        dia = diagonal(D)
        z = [0] * self._K.n
        for i in range(self._K.m):
            d = dia[i] if i < len(dia) else 0
            if d:
                if y[i] % d:
                    return None
                if i < self._K.n:
                    z[i] = y[i] // d
            elif y[i]:
                return None
        return V.vec(z)

    def project(self, x: Sequence[int]) -> List[int]:
        """Express a cycle x as coefficients over the homology generators."""
        if len(x) != self.ambient_rank:
            raise LinearAlgebraError("projection input has wrong length")
        if self._K is None:
            if any(x):
                raise LinearAlgebraError("nonzero vector in a zero group")
            return []
        z = self.cycle_coordinates(x)
        if z is None:
            raise LinearAlgebraError("vector is not a cycle")
        h = self._Uy.vec(z)
        out = []
        for i, d, sg in zip(self._kept, self._dys, self._signs):
            v = sg * h[i]
            out.append(v % d if d else v)
        return out

    def is_cycle(self, x: Sequence[int]) -> bool:
        if self._K is None:
            return not any(x)
        return self.cycle_coordinates(x) is not None


class F2Homology:
    """Same interface as Homology, specialized to all-order-2 ambient groups.

    Bit masks over the ambient coordinates stand in for vectors, so kernel,
    image and quotient are a handful of xor reductions per class.  This is
    the path almost every tri-degree takes: any monomial carrying a torsion
    letter is killed by 2, so away from the bottom filtration rows the
    groups are elementary abelian.
    """

    def __init__(self, n: int, in_masks: Sequence[int], out_cols: Sequence[int]):
        self.ambient_rank = n
        self._out_cols = list(out_cols)
        if len(self._out_cols) != n:
            raise LinearAlgebraError("need one outgoing column per coordinate")

        # reduced span of Z = ker(out), as pivot -> (mask, generator index set)
        self._piv: dict = {}
        gens_masks: List[int] = []

        def insert(mask: int, coeffs: frozenset, as_gen: bool) -> None:
            m, c = mask, coeffs
            while m:
                low = m & -m
                hit = self._piv.get(low)
                if hit is None:
                    if as_gen:
                        k = len(gens_masks)
                        gens_masks.append(m)
                        self._piv[low] = (m, frozenset([k]))
                    else:
                        self._piv[low] = (m, c)
                    return
                m ^= hit[0]
                c = c ^ hit[1]
            # reduced to zero: dependent, nothing to record

        for b in in_masks:
            if self._cycle_defect(b):
                raise LinearAlgebraError("boundary is not a cycle")
            insert(b, frozenset(), as_gen=False)

        # kernel of the outgoing map, found by reducing the value columns
        vp: dict = {}
        for i in range(n):
            v = self._out_cols[i]
            c = 1 << i
            placed = False
            while v:
                low = v & -v
                hit = vp.get(low)
                if hit is None:
                    vp[low] = (v, c)
                    placed = True
                    break
                v ^= hit[0]
                c ^= hit[1]
            if not placed and not v:
                insert(c, frozenset(), as_gen=True)

        self._gens_masks = gens_masks
        self.orders = [2] * len(gens_masks)
        self.gens = [
            [1 if g & (1 << i) else 0 for i in range(n)] for g in gens_masks
        ]

    @property
    def is_zero(self) -> bool:
        return not self.orders

    def _to_mask(self, x: Sequence[int]) -> int:
        if len(x) != self.ambient_rank:
            raise LinearAlgebraError("projection input has wrong length")
        m = 0
        for i, v in enumerate(x):
            if v & 1:
                m |= 1 << i
        return m

    def _cycle_defect(self, mask: int) -> int:
        acc = 0
        m = mask
        while m:
            low = m & -m
            acc ^= self._out_cols[low.bit_length() - 1]
            m ^= low
        return acc

    def is_cycle(self, x: Sequence[int]) -> bool:
        return self._cycle_defect(self._to_mask(x)) == 0

    def project(self, x: Sequence[int]) -> List[int]:
        m = self._to_mask(x)
        if self._cycle_defect(m):
            raise LinearAlgebraError("vector is not a cycle")
        coeffs: frozenset = frozenset()
        while m:
            low = m & -m
            hit = self._piv.get(low)
            if hit is None:
                raise LinearAlgebraError("cycle outside the recorded span")
            m ^= hit[0]
            coeffs = coeffs ^ hit[1]
        return [1 if k in coeffs else 0 for k in range(len(self.orders))]


def homology(
    d_in: Mat,
    d_out: Mat,
    orders_prev: Sequence[int],
    orders: Sequence[int],
    orders_next: Sequence[int],
    check: bool = True,
) -> Homology:
    """Homology of G_prev -> G -> G_next at the middle spot.

    The groups are given by their summand orders; the matrices act on the
    corresponding preferred bases.  With ``check`` on, both maps are verified
    to respect torsion and the composite is verified to vanish.
    """
    n = len(orders)
    if d_in.m != n or d_out.n != n:
        raise LinearAlgebraError("differential shapes do not match the group")
    if d_in.n != len(orders_prev) or d_out.m != len(orders_next):
        raise LinearAlgebraError("differential shapes do not match neighbors")

    if check:
        _check_well_defined(d_out, orders, orders_next, "outgoing differential")
        _check_well_defined(d_in, orders_prev, orders, "incoming differential")
        comp = d_out @ d_in
        for i, ot in enumerate(orders_next):
            for j in range(comp.n):
                v = comp.rows[i][j]
                if (ot and v % ot) or (not ot and v):
                    raise LinearAlgebraError("composite of differentials is nonzero")

    if n == 0:
        return Homology(0, [], [], None, None, [], [])

    # cycle lattice: x with d_out(x) = 0 in the target group
    tors_cols = [
        [orders_next[i] if r == i else 0 for r in range(len(orders_next))]
        for i in range(len(orders_next))
        if orders_next[i]
    ]
    stacked = d_out.hstack(Mat.from_cols(tors_cols, len(orders_next)))
    big = kernel_basis(stacked)
    proj = Mat([big.rows[i] for i in range(n)], n, big.n)
    K = lattice_basis(proj)
    if K.n == 0:
        return Homology(n, [], [], None, None, [], [])

    # boundaries and ambient torsion, written in cycle coordinates
    hom = Homology(n, [], [], K, None, [], [])  # temporary, for the solver
    ycols = []
    for j in range(d_in.n):
        z = hom.cycle_coordinates(d_in.col(j))
        if z is None:
            raise LinearAlgebraError("image of incoming differential is not a cycle")
        ycols.append(z)
    for i, o in enumerate(orders):
        if o:
            z = hom.cycle_coordinates([o if r == i else 0 for r in range(n)])
            if z is None:
                raise LinearAlgebraError("torsion relation is not a cycle")
            ycols.append(z)
    Y = Mat.from_cols(ycols, K.n)

    Dy, Uy, Vy = smith_normal_form(Y)
    dia = diagonal(Dy)
    Uy_inv = unimodular_inverse(Uy)
    gen_mat = K @ Uy_inv

    kept, dys, gens, signs = [], [], [], []
    for i in range(K.n):
        d = dia[i] if i < len(dia) else 0
        if d == 1:
            continue
        kept.append(i)
        dys.append(d)
        g = gen_mat.col(i)
        # fix the sign so the first nonzero coordinate is positive (free
        # ambient summand) or in the lower half of its cyclic group
        sign = 1
        for gi, o in zip(g, orders):
            v = gi % o if o else gi
            if v == 0:
                continue
            if (o == 0 and v < 0) or (o and v > o - v):
                sign = -1
            break
        if sign < 0:
            g = [-x for x in g]
        g = [
            gi % o if o else gi
            for gi, o in zip(g, orders)
        ]
        gens.append(g)
        signs.append(sign)

    return Homology(n, dys[:], gens, K, Uy, kept, dys, signs)

"""Exact sparse linear algebra over the rationals.

Scalars are `fractions.Fraction` (arbitrary precision, always reduced,
positive denominator).  Matrices are sparse triples; rank is computed by
integer fraction-free (Bareiss-style) elimination, kernels by a separate
fraction-based reduction so the two routes stay independent and can be
cross-checked via rank + nullity = #cols.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


class SparseMatrix:
    """A rows x cols matrix holding exact rational entries.

    Entries are stored as a dict (row, col) -> Fraction with no explicit
    zeros and no duplicate positions.
    """

    def __init__(self, rows, cols, entries=()):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        for r, c, v in entries:
            self[r, c] = v

    def __setitem__(self, pos, value):
        r, c = pos
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"entry {pos} outside {self.rows}x{self.cols} matrix")
        value = Fraction(value)
        if value == 0:
            self.entries.pop(pos, None)
        else:
            self.entries[pos] = value

    def __getitem__(self, pos):
        return self.entries.get(pos, Fraction(0))

    def __eq__(self, other):
        return (
            isinstance(other, SparseMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"

    @property
    def nnz(self):
        return len(self.entries)

    def transpose(self):
        return SparseMatrix(
            self.cols, self.rows, ((c, r, v) for (r, c), v in self.entries.items())
        )

    def row_lists(self):
        """Rows as dicts col -> integer entry, denominators cleared per row."""
        rows = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            rows[r][c] = v
        int_rows = []
        for row in rows:
            if not row:
                int_rows.append({})
                continue
            denom = 1
            for v in row.values():
                denom = denom * v.denominator // gcd(denom, v.denominator)
            int_rows.append({c: int(v * denom) for c, v in row.items()})
        return int_rows

    def mul_vector(self, vec):
        """Exact product m . v for a dict col -> Fraction."""
        out = {}
        for (r, c), v in self.entries.items():
            x = vec.get(c)
            if x:
                out[r] = out.get(r, Fraction(0)) + v * x
        return {r: v for r, v in out.items() if v != 0}

    def compose(self, other):
        """Matrix product self . other (self.cols must equal other.rows)."""
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in matrix product")
        by_row = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        out = SparseMatrix(self.rows, other.cols)
        acc = {}
        for (r, k), v in self.entries.items():
            for c, w in by_row.get(k, ()):
                acc[(r, c)] = acc.get((r, c), Fraction(0)) + v * w
        for pos, v in acc.items():
            out[pos] = v
        return out

    def is_zero(self):
        return not self.entries


def _smallest_pivot(rows, live, col):
    """Pick the live row with the smallest nonzero |entry| in `col`.

    Ties are broken towards sparser rows; this is the pivoting rule that
    keeps the fraction-free elimination from blowing up on our matrices.
    """
    best = None
    for r in live:
        a = rows[r].get(col)
        if not a:
            continue
        key = (abs(a), len(rows[r]))
        if best is None or key < best[0]:
            best = (key, r)
    return None if best is None else best[1]


def rank(m: SparseMatrix) -> int:
    """Rank over Q, by integer fraction-free elimination."""
    rows = [row for row in m.row_lists() if row]
    live = set(range(len(rows)))
    prev_pivot = 1
    rk = 0
    for col in range(m.cols):
        p = _smallest_pivot(rows, live, col)
        if p is None:
            continue
        live.discard(p)
        rk += 1
        piv = rows[p][col]
        prow = rows[p]
        for r in list(live):
            row = rows[r]
            a = row.get(col, 0)
            # Bareiss step: every remaining row is updated, and the division
            # by the previous pivot is exact.
            new = {}
            for c in row.keys() | (prow.keys() if a else set()):
                val = piv * row.get(c, 0) - a * prow.get(c, 0)
                if val:
                    new[c] = val // prev_pivot
            new.pop(col, None)
            rows[r] = new
            if not new:
                live.discard(r)
        prev_pivot = piv
    return rk


def kernel_basis(m: SparseMatrix):
    """A basis of {v : m.v = 0}, as dicts col -> Fraction.

    Uses plain fraction arithmetic (reduced row echelon form), so it is an
    independent route from `rank`.
    """
    rows = []
    for r in range(m.rows):
        rows.append({})
    for (r, c), v in m.entries.items():
        rows[r][c] = v
    rows = [row for row in rows if row]

    pivots = {}  # col -> reduced row with leading 1 in col
    for row in rows:
        row = dict(row)
        while row:
            lead = min(row)
            if lead in pivots:
                coef = row[lead]
                prow = pivots[lead]
                for c, v in prow.items():
                    nv = row.get(c, Fraction(0)) - coef * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
            else:
                inv = Fraction(1) / row[lead]
                pivots[lead] = {c: v * inv for c, v in row.items()}
                break

    # Back-substitute so each pivot row has zeros in the other pivot columns.
    for lead in sorted(pivots, reverse=True):
        prow = pivots[lead]
        for other_lead, orow in pivots.items():
            if other_lead >= lead:
                continue
            coef = orow.get(lead)
            if coef:
                for c, v in prow.items():
                    nv = orow.get(c, Fraction(0)) - coef * v
                    if nv:
                        orow[c] = nv
                    else:
                        orow.pop(c, None)

    free_cols = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free_cols:
        vec = {f: Fraction(1)}
        for lead, prow in pivots.items():
            coef = prow.get(f)
            if coef:
                vec[lead] = -coef
        basis.append(vec)
    return basis

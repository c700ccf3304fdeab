"""Linear algebra over GF(2) on integer-packed bit vectors."""

from __future__ import annotations


class EchelonBasis:
    """Incrementally built echelon basis that remembers how each row was formed.

    Every stored row is keyed by its leading bit. ``combo`` masks record which
    of the inserted vectors (by insertion label) XOR to that row, so
    :meth:`decompose` can express a member of the span in the original vectors.
    """

    __slots__ = ("rows", "_count")

    def __init__(self):
        self.rows: dict[int, tuple[int, int]] = {}
        self._count = 0

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: int) -> tuple[int, int]:
        combo = 0
        rows = self.rows
        while v:
            lead = v.bit_length() - 1
            row = rows.get(lead)
            if row is None:
                break
            v ^= row[0]
            combo ^= row[1]
        return v, combo

    def decompose(self, v: int) -> int | None:
        """Mask of inserted vectors XORing to ``v``, or None if outside the span."""
        residual, combo = self.reduce(v)
        return None if residual else combo

    def contains(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    def add(self, v: int) -> bool:
        """Insert ``v``; returns False (and stores nothing) if it is dependent.

        Only independent vectors consume a label, so labels are 0..rank-1.
        """
        residual, combo = self.reduce(v)
        if not residual:
            return False
        self.rows[residual.bit_length() - 1] = (residual, combo ^ (1 << self._count))
        self._count += 1
        return True


def rank(vectors) -> int:
    basis = EchelonBasis()
    for v in vectors:
        basis.add(v)
    return len(basis)


def rref(vectors) -> tuple[int, ...]:
    """Reduced row echelon form, rows sorted by descending leading bit."""
    rows: list[int] = []
    for v in vectors:
        for r in rows:
            if v >> (r.bit_length() - 1) & 1:
                v ^= r
        if v:
            lead = v.bit_length() - 1
            rows = [r ^ v if r >> lead & 1 else r for r in rows]
            rows.append(v)
    return tuple(sorted(rows, reverse=True))


def kernel(rows, nbits: int) -> list[int]:
    """Basis of ``{w : popcount(w & r) even for every r in rows}``."""
    red = rref(rows)
    pivots = [r.bit_length() - 1 for r in red]
    pivot_set = set(pivots)
    basis = []
    for free in range(nbits):
        if free in pivot_set:
            continue
        w = 1 << free
        for r, p in zip(red, pivots):
            if r >> free & 1:
                w |= 1 << p
        basis.append(w)
    return basis

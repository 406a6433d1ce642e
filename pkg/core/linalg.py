"""
Integer linear algebra: sparse matrices, Smith normal form with transforms,
ranks over Z and F_p.
"""
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

Dense = List[List[int]]


class SparseMatrix:
    """Integer matrix stored as {(row, col): value} without zeros."""

    def __init__(self, rows: int, cols: int, entries: Optional[Dict[Tuple[int, int], int]] = None):
        self.rows = rows
        self.cols = cols
        self.entries: Dict[Tuple[int, int], int] = {}
        for key, value in (entries or {}).items():
            if value:
                self.entries[key] = value

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "SparseMatrix":
        return cls(rows, cols)

    @classmethod
    def identity(cls, size: int) -> "SparseMatrix":
        return cls(size, size, {(i, i): 1 for i in range(size)})

    @classmethod
    def from_dense(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "SparseMatrix":
        width = cols if cols is not None else (len(rows[0]) if rows else 0)
        entries = {(i, j): v for i, row in enumerate(rows) for j, v in enumerate(row) if v}
        return cls(len(rows), width, entries)

    def __getitem__(self, key: Tuple[int, int]) -> int:
        return self.entries.get(key, 0)

    def __setitem__(self, key: Tuple[int, int], value: int):
        if value:
            self.entries[key] = value
        else:
            self.entries.pop(key, None)

    def add(self, row: int, col: int, value: int):
        self[(row, col)] = self[(row, col)] + value

    def __eq__(self, other) -> bool:
        return (isinstance(other, SparseMatrix) and self.shape == other.shape
                and self.entries == other.entries)

    def __repr__(self) -> str:
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={self.nnz})"

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def is_zero(self) -> bool:
        return not self.entries

    def triplets(self) -> List[Tuple[int, int, int]]:
        """(row, col, value), sorted by row then column."""
        return [(i, j, v) for (i, j), v in sorted(self.entries.items())]

    def items(self) -> Iterator[Tuple[Tuple[int, int], int]]:
        return iter(sorted(self.entries.items()))

    def to_dense(self) -> Dense:
        out = [[0] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.cols, self.rows, {(j, i): v for (i, j), v in self.entries.items()})

    def scale(self, factor: int) -> "SparseMatrix":
        return SparseMatrix(self.rows, self.cols, {k: v * factor for k, v in self.entries.items()})

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} + {other.shape}")
        out = SparseMatrix(self.rows, self.cols, self.entries)
        for key, value in other.entries.items():
            out[key] = out[key] + value
        return out

    def __neg__(self) -> "SparseMatrix":
        return self.scale(-1)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        return self + (-other)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        by_row: Dict[int, List[Tuple[int, int]]] = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        out: Dict[Tuple[int, int], int] = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                out[(i, j)] = out.get((i, j), 0) + a * b
        return SparseMatrix(self.rows, other.cols, out)

    def apply(self, vector: Sequence[int]) -> List[int]:
        out = [0] * self.rows
        for (i, j), v in self.entries.items():
            out[i] += v * vector[j]
        return out

    def column(self, j: int) -> Dict[int, int]:
        return {i: v for (i, c), v in self.entries.items() if c == j}

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SparseMatrix":
        row_pos = {r: i for i, r in enumerate(rows)}
        col_pos = {c: j for j, c in enumerate(cols)}
        entries = {(row_pos[i], col_pos[j]): v for (i, j), v in self.entries.items()
                   if i in row_pos and j in col_pos}
        return SparseMatrix(len(rows), len(cols), entries)


def block(rows: Sequence[int], cols: Sequence[int],
          pieces: Iterable[Tuple[int, int, SparseMatrix]]) -> SparseMatrix:
    """Assemble a matrix from blocks placed at (row offset, col offset)."""
    out = SparseMatrix(sum(rows), sum(cols))
    for r0, c0, piece in pieces:
        for (i, j), v in piece.entries.items():
            out.add(r0 + i, c0 + j, v)
    return out


# ---------------------------------------------------------------------------
# Smith normal form

@dataclass
class SmithForm:
    """L @ A @ R == D with L, R unimodular; invariant factors are positive."""
    diagonal: List[int]
    L: Dense
    R: Dense
    L_inv: Dense
    R_inv: Dense
    shape: Tuple[int, int]

    @property
    def rank(self) -> int:
        return len(self.diagonal)

    def invariant_factors(self) -> List[int]:
        return list(self.diagonal)


def _identity(n: int) -> Dense:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


class _Reducer:
    def __init__(self, matrix: Dense, rows: int, cols: int):
        self.D = [list(r) for r in matrix]
        self.m, self.n = rows, cols
        self.L, self.L_inv = _identity(rows), _identity(rows)
        self.R, self.R_inv = _identity(cols), _identity(cols)

    # row operations act on D and L from the left, on L_inv from the right
    def swap_rows(self, i: int, j: int):
        if i == j:
            return
        for M in (self.D, self.L):
            M[i], M[j] = M[j], M[i]
        for row in self.L_inv:
            row[i], row[j] = row[j], row[i]

    def add_row(self, target: int, source: int, c: int):
        if not c:
            return
        for M in (self.D, self.L):
            src = M[source]
            tgt = M[target]
            for k in range(len(tgt)):
                tgt[k] += c * src[k]
        for row in self.L_inv:
            row[source] -= c * row[target]

    def negate_row(self, i: int):
        for M in (self.D, self.L):
            M[i] = [-v for v in M[i]]
        for row in self.L_inv:
            row[i] = -row[i]

    # column operations act on D and R from the right, on R_inv from the left
    def swap_cols(self, i: int, j: int):
        if i == j:
            return
        for M in (self.D, self.R):
            for row in M:
                row[i], row[j] = row[j], row[i]
        self.R_inv[i], self.R_inv[j] = self.R_inv[j], self.R_inv[i]

    def add_col(self, target: int, source: int, c: int):
        if not c:
            return
        for M in (self.D, self.R):
            for row in M:
                row[target] += c * row[source]
        src = self.R_inv[source]
        tgt = self.R_inv[target]
        for k in range(len(src)):
            src[k] -= c * tgt[k]

    def min_entry(self, t: int) -> Optional[Tuple[int, int]]:
        best = None
        for i in range(t, self.m):
            row = self.D[i]
            for j in range(t, self.n):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        return i, j
        return None if best is None else (best[1], best[2])

    def reduce(self) -> List[int]:
        diagonal = []
        t = 0
        while t < min(self.m, self.n):
            pos = self.min_entry(t)
            if pos is None:
                break
            self.swap_rows(t, pos[0])
            self.swap_cols(t, pos[1])
            while True:
                p = self.D[t][t]
                dirty = False
                for i in range(t + 1, self.m):
                    if self.D[i][t]:
                        self.add_row(i, t, -(self.D[i][t] // p))
                        dirty = dirty or bool(self.D[i][t])
                for j in range(t + 1, self.n):
                    if self.D[t][j]:
                        self.add_col(j, t, -(self.D[t][j] // p))
                        dirty = dirty or bool(self.D[t][j])
                if dirty:
                    self._repivot(t)
                    continue
                bad = self._non_divisible(t, p)
                if bad is None:
                    break
                self.add_row(t, bad, 1)
            if self.D[t][t] < 0:
                self.negate_row(t)
            diagonal.append(self.D[t][t])
            t += 1
        return diagonal

    def _repivot(self, t: int):
        best = (abs(self.D[t][t]), t, t)
        for i in range(t + 1, self.m):
            v = self.D[i][t]
            if v and abs(v) < best[0]:
                best = (abs(v), i, t)
        for j in range(t + 1, self.n):
            v = self.D[t][j]
            if v and abs(v) < best[0]:
                best = (abs(v), t, j)
        self.swap_rows(t, best[1])
        self.swap_cols(t, best[2])

    def _non_divisible(self, t: int, p: int) -> Optional[int]:
        for i in range(t + 1, self.m):
            for j in range(t + 1, self.n):
                if self.D[i][j] % p:
                    return i
        return None


def smith_normal_form(matrix) -> SmithForm:
    """
    Smith normal form of an integer matrix (dense rows or SparseMatrix).

    Returns the nonzero invariant factors d_1 | d_2 | ... together with
    unimodular L, R and their inverses such that L A R is diagonal.
    """
    if isinstance(matrix, SparseMatrix):
        rows, cols, dense = matrix.rows, matrix.cols, matrix.to_dense()
    else:
        dense = [list(r) for r in matrix]
        rows = len(dense)
        cols = len(dense[0]) if dense else 0
    reducer = _Reducer(dense, rows, cols)
    diagonal = reducer.reduce()
    return SmithForm(diagonal, reducer.L, reducer.R, reducer.L_inv, reducer.R_inv, (rows, cols))


def dense_mul(A: Dense, B: Dense) -> Dense:
    if not A:
        return []
    inner = len(B)
    width = len(B[0]) if B else 0
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(width)] for i in range(len(A))]


def dense_apply(A: Dense, vector: Sequence[int]) -> List[int]:
    return [sum(a * v for a, v in zip(row, vector)) for row in A]


def rank_mod_p(matrix: SparseMatrix, p: int) -> int:
    """Rank over F_p by row reduction on sparse rows."""
    rows: Dict[int, Dict[int, int]] = {}
    for (i, j), v in matrix.entries.items():
        if v % p:
            rows.setdefault(i, {})[j] = v % p
    pivots: Dict[int, Dict[int, int]] = {}
    for i in sorted(rows):
        row = rows[i]
        while row:
            lead = min(row)
            if lead not in pivots:
                inv = pow(row[lead], -1, p)
                pivots[lead] = {j: (v * inv) % p for j, v in row.items()}
                break
            factor = row[lead]
            for j, v in pivots[lead].items():
                nv = (row.get(j, 0) - factor * v) % p
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
    return len(pivots)


def integer_rank(matrix: SparseMatrix) -> int:
    return smith_normal_form(matrix).rank

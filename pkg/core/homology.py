"""
Integer homology of the bigraded complex, computed one quantum degree at a time.
"""
import csv
import io
import json
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from sympy import Abs, I, Poly, cancel, expand, factorint, fraction, symbols

from core.differential import ChainComplex
from core.linalg import SparseMatrix, dense_apply, rank_mod_p, smith_normal_form
from core.logger import logger
from core.models import HomologyRow
from core.monitoring import TimerContext

Bidegree = Tuple[int, int]


@dataclass(frozen=True)
class Summand:
    free_rank: int = 0
    torsion: Tuple[int, ...] = ()

    def is_zero(self) -> bool:
        return self.free_rank == 0 and not self.torsion


@dataclass
class BigradedGroup:
    """(h, q) -> free rank and prime-power torsion orders; zero groups are not stored."""
    groups: Dict[Bidegree, Summand] = field(default_factory=dict)

    def __post_init__(self):
        self.groups = {k: v for k, v in sorted(self.groups.items()) if not v.is_zero()}

    def __getitem__(self, key: Bidegree) -> Summand:
        return self.groups.get(key, Summand())

    def __eq__(self, other) -> bool:
        return isinstance(other, BigradedGroup) and self.groups == other.groups

    def items(self):
        return sorted(self.groups.items())

    def free_part(self) -> Dict[Bidegree, int]:
        return {k: v.free_rank for k, v in self.items() if v.free_rank}

    def torsion_part(self) -> Dict[Bidegree, Tuple[int, ...]]:
        return {k: v.torsion for k, v in self.items() if v.torsion}

    def total_rank(self) -> int:
        return sum(v.free_rank for v in self.groups.values())

    def rows(self) -> List[HomologyRow]:
        return [HomologyRow(h=h, q=q, free_rank=v.free_rank, torsion=list(v.torsion))
                for (h, q), v in self.items()]


def prime_power_split(order: int) -> List[int]:
    """12 -> [3, 4]."""
    return sorted(p ** e for p, e in factorint(order).items())


def _eliminate_units(matrix: SparseMatrix) -> Tuple[int, SparseMatrix]:
    """
    Remove +-1 pivots by sparse Schur complements.  Returns the number removed
    and the residual, whose invariant factors are the remaining ones.
    """
    rows: Dict[int, Dict[int, int]] = {}
    cols: Dict[int, set] = {}
    for (i, j), v in matrix.entries.items():
        rows.setdefault(i, {})[j] = v
        cols.setdefault(j, set()).add(i)
    removed = 0
    pending = deque(sorted(rows))
    queued = set(pending)
    while pending:
        r = pending.popleft()
        queued.discard(r)
        prow = rows.get(r)
        if not prow:
            continue
        c = next((j for j in sorted(prow) if abs(prow[j]) == 1), None)
        if c is None:
            continue
        del rows[r]
        p = prow[c]
        for j in prow:
            cols.get(j, set()).discard(r)
        for i in sorted(cols.pop(c, ())):
            row = rows[i]
            factor = row[c] * p
            for j, v in prow.items():
                nv = row.get(j, 0) - factor * v
                if nv:
                    if j not in row:
                        cols.setdefault(j, set()).add(i)
                    row[j] = nv
                elif j in row:
                    del row[j]
                    if j in cols:
                        cols[j].discard(i)
            if not row:
                del rows[i]
            elif i not in queued:
                pending.append(i)
                queued.add(i)
        removed += 1
    live_rows = sorted(rows)
    live_cols = sorted({j for row in rows.values() for j in row})
    rpos = {r: k for k, r in enumerate(live_rows)}
    cpos = {c: k for k, c in enumerate(live_cols)}
    residual = SparseMatrix(len(live_rows), len(live_cols),
                            {(rpos[i], cpos[j]): v for i, row in rows.items() for j, v in row.items()})
    return removed, residual


def matrix_invariants(matrix: SparseMatrix) -> Tuple[int, List[int]]:
    """Rank and the invariant factors greater than one."""
    if matrix.is_zero():
        return 0, []
    removed, residual = _eliminate_units(matrix)
    if residual.is_zero():
        return removed, []
    snf = smith_normal_form(residual)
    return removed + snf.rank, [d for d in snf.diagonal if d > 1]


def _slice_homology(c: ChainComplex, q: int) -> Dict[Bidegree, Summand]:
    hs = [h for h in c.hdegs() if c.slice(h, q)]
    invariants = {}
    for h in hs:
        invariants[h] = matrix_invariants(c.differential(h, q))
    out = {}
    for h in hs:
        dim = len(c.slice(h, q))
        rank_out = invariants[h][0]
        rank_in, factors = invariants.get(h - 1, (0, []))
        torsion = tuple(sorted(t for d in factors for t in prime_power_split(d)))
        out[(h, q)] = Summand(dim - rank_out - rank_in, torsion)
    return out


def homology(c: ChainComplex, threads: int = 1) -> BigradedGroup:
    """Kernel modulo image per bidegree, free ranks and torsion via Smith normal form."""
    qs = c.qdegs()
    with TimerContext("homology"):
        if threads > 1 and len(qs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda q: _slice_homology(c, q), qs))
        else:
            parts = [_slice_homology(c, q) for q in qs]
    groups = {}
    for part in parts:
        groups.update(part)
    result = BigradedGroup(groups)
    logger.debug(f"Homology: total rank {result.total_rank()} over {len(qs)} quantum degrees")
    return result


def homology_mod_p(c: ChainComplex, p: int) -> BigradedGroup:
    """Ranks over F_p, returned as free ranks."""
    groups = {}
    for q in c.qdegs():
        ranks = {h: rank_mod_p(c.differential(h, q), p) for h in c.hdegs() if c.slice(h, q)}
        for h in ranks:
            dim = len(c.slice(h, q))
            groups[(h, q)] = Summand(dim - ranks[h] - ranks.get(h - 1, 0))
    return BigradedGroup(groups)


def universal_coefficient_ranks(g: BigradedGroup, p: int) -> Dict[Bidegree, int]:
    """dim H^h(C; F_p) = free rank + p-torsion summands in degrees h and h+1."""
    def torsion_count(key):
        return sum(1 for t in g[key].torsion if t % p == 0)

    keys = {k for k in g.groups} | {(h - 1, q) for (h, q) in g.groups}
    out = {}
    for h, q in sorted(keys):
        dim = g[(h, q)].free_rank + torsion_count((h, q)) + torsion_count((h + 1, q))
        if dim:
            out[(h, q)] = dim
    return out


# ---------------------------------------------------------------------------
# presentation

def _power(var: str, e: int) -> str:
    if e == 0:
        return ""
    if e == 1:
        return var
    return f"{var}^{e}"


def _monomial(coeff: int, h: int, q: int) -> str:
    body = _power("t", h) + _power("q", q)
    if not body:
        return str(coeff)
    return body if coeff == 1 else f"{coeff}{body}"


def poincare_string(g: BigradedGroup) -> str:
    """Terms by ascending h then descending q; torsion appended as [Z/n+...]."""
    terms = []
    for (h, q), s in sorted(g.groups.items(), key=lambda kv: (kv[0][0], -kv[0][1])):
        if s.free_rank:
            terms.append(_monomial(s.free_rank, h, q))
        if s.torsion:
            body = _power("t", h) + _power("q", q)
            terms.append(body + "[" + "+".join(f"Z/{t}" for t in s.torsion) + "]")
    return " + ".join(terms) if terms else "0"


def euler_characteristic(source) -> Dict[int, int]:
    """Sum of (-1)^h q^q over a ChainComplex's generators or a group's free part."""
    poly: Dict[int, int] = {}
    if isinstance(source, ChainComplex):
        for h, gens in source.generators.items():
            for g in gens:
                poly[g.qdeg] = poly.get(g.qdeg, 0) + (-1) ** (h % 2)
    else:
        for (h, q), s in source.groups.items():
            poly[q] = poly.get(q, 0) + (-1) ** (h % 2) * s.free_rank
    return {q: v for q, v in sorted(poly.items()) if v}


def determinant(source) -> Optional[int]:
    """
    |J(i)| where J = chi / (q + 1/q) is the Jones polynomial read off the Euler
    characteristic.  None when chi is not divisible, as for the empty diagram.
    """
    q = symbols("q")
    chi = sum(v * q ** e for e, v in euler_characteristic(source).items())
    jones = cancel(chi * q / (q ** 2 + 1))
    _, denominator = fraction(jones)
    if not Poly(denominator, q).is_monomial:
        return None
    return int(Abs(expand(jones.subs(q, I))))


def is_thin(g: BigradedGroup) -> bool:
    """Every nonzero group sits on one of two adjacent diagonals q - 2h."""
    diagonals = {q - 2 * h for h, q in g.groups}
    return not diagonals or max(diagonals) - min(diagonals) <= 2


def laurent_string(poly: Dict[int, int]) -> str:
    if not poly:
        return "0"
    terms = []
    for q, v in sorted(poly.items(), reverse=True):
        mono = _power("q", q)
        if not mono:
            terms.append(str(v))
        elif v == 1:
            terms.append(mono)
        elif v == -1:
            terms.append(f"-{mono}")
        else:
            terms.append(f"{v}{mono}")
    return " + ".join(terms).replace("+ -", "- ")


def to_json(g: BigradedGroup, indent: Optional[int] = 2) -> str:
    return json.dumps([row.model_dump() for row in g.rows()], indent=indent)


def to_csv(g: BigradedGroup) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["h", "q", "free_rank", "torsion"])
    for row in g.rows():
        writer.writerow([row.h, row.q, row.free_rank, ";".join(str(t) for t in row.torsion)])
    return buffer.getvalue()


# ---------------------------------------------------------------------------
# explicit bases, for maps induced on homology

class HomologyBasis:
    """
    Generators of H^h in one quantum degree with a coordinate function on cycles.
    Coordinates are (free part, torsion part mod the listed orders).
    """

    def __init__(self, c: ChainComplex, h: int, q: int):
        self.h, self.q = h, q
        self.dim = len(c.slice(h, q))
        out_snf = smith_normal_form(c.differential(h, q)) if self.dim else None
        r = out_snf.rank if out_snf else 0
        kernel_dim = self.dim - r
        self._R_inv = out_snf.R_inv if out_snf else []
        self._r = r
        kernel = [[out_snf.R[i][j] for j in range(r, self.dim)] for i in range(self.dim)] if out_snf else []
        incoming = c.differential(h - 1, q) if kernel_dim else SparseMatrix(0, 0)
        image = [[0] * incoming.cols for _ in range(kernel_dim)]
        if kernel_dim and incoming.cols:
            dense = incoming.to_dense()
            for a in range(kernel_dim):
                row = self._R_inv[r + a]
                for col in range(incoming.cols):
                    image[a][col] = sum(row[i] * dense[i][col] for i in range(self.dim))
        if kernel_dim and incoming.cols:
            img_snf = smith_normal_form(image)
            self._L2 = img_snf.L
            L2_inv = img_snf.L_inv
            factors = img_snf.diagonal
        else:
            self._L2 = [[1 if i == j else 0 for j in range(kernel_dim)] for i in range(kernel_dim)]
            L2_inv = self._L2
            factors = []
        self._factors = factors
        self.torsion_orders: List[int] = [d for d in factors if d > 1]
        self._torsion_slots = [i for i, d in enumerate(factors) if d > 1]
        self._free_slots = list(range(len(factors), kernel_dim))
        self.free_rank = len(self._free_slots)

        def representative(slot):
            column = [L2_inv[a][slot] for a in range(kernel_dim)]
            return [sum(kernel[i][a] * column[a] for a in range(kernel_dim)) for i in range(self.dim)]

        self.free_representatives = [representative(s) for s in self._free_slots]
        self.torsion_representatives = [representative(s) for s in self._torsion_slots]

    def coordinates(self, cycle: Sequence[int]) -> Tuple[List[int], List[int]]:
        if not self.dim:
            return [], []
        y = [sum(self._R_inv[self._r + a][i] * cycle[i] for i in range(self.dim))
             for a in range(self.dim - self._r)]
        w = dense_apply(self._L2, y)
        free = [w[s] for s in self._free_slots]
        torsion = [w[s] % self._factors[s] for s in self._torsion_slots]
        return free, torsion


def induced_matrix(source: HomologyBasis, target: HomologyBasis, chain_map: SparseMatrix) -> List[List[int]]:
    """Matrix of the induced map on free parts: columns are source free generators."""
    columns = []
    for rep in source.free_representatives:
        image = chain_map.apply(rep)
        free, _ = target.coordinates(image)
        columns.append(free)
    return [[columns[j][i] for j in range(len(columns))] for i in range(target.free_rank)]


def torsion_images(source: HomologyBasis, target: HomologyBasis, chain_map: SparseMatrix) -> List[List[int]]:
    """Torsion coordinates of the images of the source torsion generators."""
    return [target.coordinates(chain_map.apply(rep))[1] for rep in source.torsion_representatives]

"""
Reidemeister moves on PD codes and the chain maps they induce.

The larger complex is reduced by Gaussian elimination of +-1 entries at the
move site; the survivors are matched with the generators of the other side
by a relabelling sigma, and a per-generator sign phi makes the identification
a chain isomorphism.
"""
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from core.chain_map import ChainMap
from core.cube import PAIRINGS, Vertex, flip
from core.diagram import CCW, CW, Diagram, PdCode, PdParseError, UnknotRecord, build_diagram, canonical_flow
from core.differential import AUTO, ChainComplex, totalize
from core.generators import ONE, X, Generator
from core.linalg import SparseMatrix
from core.logger import logger
from core.moves import MovieError, MovieStep
from core.monitoring import TimerContext, increment_counter

Key = Tuple[Vertex, Tuple[Tuple[int, str], ...]]
Vector = Dict[Key, int]


class EliminationError(RuntimeError):
    """The move site does not reduce to the other diagram's complex."""


@dataclass(frozen=True)
class MoveSite:
    """
    Site of a move inside the larger diagram (for R3, the source diagram).
    seg_map sends its segments to the other diagram's, internal ones to None.
    """
    kind: str
    crossings: Tuple[int, ...]
    internal: FrozenSet[int]
    seg_map: Dict[int, Optional[int]] = field(default_factory=dict)
    loop: Optional[int] = None


def _require_outer_unknots(d: Diagram, what: str):
    if any(host != d.outer for host in d.unknot_hosts):
        raise MovieError(f"{what} needs every crossingless circle in the outer region")


def _outer_unknots(unknots: Iterable[UnknotRecord]) -> Tuple[UnknotRecord, ...]:
    return tuple(UnknotRecord(u.orientation) for u in unknots)


def _build(pd: PdCode, what: str) -> Diagram:
    try:
        return build_diagram(pd)
    except PdParseError as e:
        raise MovieError(f"{what} produced an invalid diagram: {e}") from e


# ---------------------------------------------------------------------------
# PD surgery

def insert_kink(d: Diagram, arc: int, sign: int) -> Tuple[PdCode, MoveSite]:
    """Curl on `arc` with a crossing of the given sign, appended as the last crossing."""
    _require_outer_unknots(d, "R1")
    n, m = d.n, len(d.pd.unknots)
    if arc not in d.segment_ids():
        raise MovieError(f"R1: no arc {arc}")
    rows = [list(x) for x in d.pd.crossings]
    unknots = list(d.pd.unknots)
    seg_map: Dict[int, Optional[int]] = {}
    if d.is_unknot_segment(arc):
        j = arc - 2 * n - 1
        a = a2 = 2 * n + 1
        loop = 2 * n + 2
        del unknots[j]
        seg_map[a] = arc
        for jj in range(m - 1):
            seg_map[2 * (n + 1) + 1 + jj] = 2 * n + 1 + (jj if jj < j else jj + 1)
    else:
        a, loop, a2 = arc, 2 * n + 1, 2 * n + 2
        k, s = d.arcs[arc].head
        rows[k][s] = a2
        for label in range(1, 2 * n + 1):
            seg_map[label] = label
        seg_map[a2] = a
        for jj in range(m):
            seg_map[2 * (n + 1) + 1 + jj] = 2 * n + 1 + jj
    seg_map[loop] = None
    rows.append([a, loop, loop, a2] if sign > 0 else [a, a2, loop, loop])
    pd = PdCode(tuple(tuple(x) for x in rows), _outer_unknots(unknots))
    site = MoveSite("r1+" if sign > 0 else "r1-", (n,), frozenset({loop}), seg_map, loop)
    return pd, site


def _r2_tuples(side_a: str, side_b: str, a, b, a_mid, a_3, b_mid, b_3):
    if (side_a, side_b) == ("R", "L"):
        return [b, a_mid, b_mid, a], [b_mid, a_mid, b_3, a_3]
    if (side_a, side_b) == ("R", "R"):
        return [b_mid, a, b_3, a_mid], [b, a_3, b_mid, a_mid]
    if (side_a, side_b) == ("L", "L"):
        return [b_mid, a_mid, b_3, a], [b, a_mid, b_mid, a_3]
    return [b, a, b_mid, a_mid], [b_mid, a_3, b_3, a_mid]


def bigon_region(d: Diagram, a: int, b: int, face: Optional[int] = None) -> int:
    """A region bordered by both arcs; `face` if given and valid."""
    sides_a = {d.face_of[(a, 1)], d.face_of[(a, -1)]}
    sides_b = {d.face_of[(b, 1)], d.face_of[(b, -1)]}
    common = sorted(sides_a & sides_b)
    if face is not None:
        if face not in common:
            raise MovieError(f"R2: arcs {a} and {b} do not both border region {face}")
        return face
    if not common:
        raise MovieError(f"R2: arcs {a} and {b} share no region")
    return common[0]


def insert_bigon(d: Diagram, a: int, b: int, face: Optional[int] = None) -> Tuple[PdCode, MoveSite]:
    """Push arc a over arc b across a common region; two crossings are appended."""
    _require_outer_unknots(d, "R2")
    n, m = d.n, len(d.pd.unknots)
    for s in (a, b):
        if s not in d.arcs:
            raise MovieError(f"R2: {s} is not an arc between crossings")
    if a == b:
        raise MovieError("R2 needs two different arcs")
    region = bigon_region(d, a, b, face)
    side_a = "L" if d.face_of[(a, 1)] == region else "R"
    side_b = "L" if d.face_of[(b, 1)] == region else "R"
    a_mid, a_3, b_mid, b_3 = 2 * n + 1, 2 * n + 2, 2 * n + 3, 2 * n + 4
    rows = [list(x) for x in d.pd.crossings]
    ka, sa = d.arcs[a].head
    kb, sb = d.arcs[b].head
    rows[ka][sa] = a_3
    rows[kb][sb] = b_3
    rows.extend(_r2_tuples(side_a, side_b, a, b, a_mid, a_3, b_mid, b_3))
    seg_map: Dict[int, Optional[int]] = {label: label for label in range(1, 2 * n + 1)}
    seg_map.update({a_3: a, b_3: b, a_mid: None, b_mid: None})
    for jj in range(m):
        seg_map[2 * (n + 2) + 1 + jj] = 2 * n + 1 + jj
    pd = PdCode(tuple(tuple(x) for x in rows), _outer_unknots(d.pd.unknots))
    return pd, MoveSite("r2", (n, n + 1), frozenset({a_mid, b_mid}), seg_map)


@dataclass(frozen=True)
class Triangle:
    arcs: Tuple[int, int, int]
    bottom: int
    top: int
    middle: int
    p: int
    q: int
    c: int
    corner_bit: int


def _is_under(port) -> bool:
    return port[1] in (0, 2)


def triangle(d: Diagram, face: Optional[int] = None, arcs: Optional[Sequence[int]] = None) -> Triangle:
    """Roles of the three strands around a triangular region (given by id or by its arcs)."""
    if arcs is None:
        if face is None or not 0 <= face < len(d.regions):
            raise MovieError(f"R3: region {face} does not exist")
        cycles = d.regions[face].cycles
        if len(cycles) != 1 or len(cycles[0]) != 3:
            raise MovieError(f"R3: region {face} is not a triangle")
        arcs = [he[0] for he in cycles[0]]
    arcs = tuple(sorted(arcs))
    if len(set(arcs)) != 3:
        raise MovieError("R3: the triangle must have three distinct edges")
    corners = {d.arcs[a].tail[0] for a in arcs} | {d.arcs[a].head[0] for a in arcs}
    if len(corners) != 3 or any(d.arcs[a].tail[0] == d.arcs[a].head[0] for a in arcs):
        raise MovieError("R3: the triangle must have three distinct corners")
    roles = {}
    for a in arcs:
        under = (_is_under(d.arcs[a].tail), _is_under(d.arcs[a].head))
        roles.setdefault({(True, True): "bottom", (False, False): "top"}.get(under, "middle"), []).append(a)
    if sorted(roles) != ["bottom", "middle", "top"] or any(len(v) != 1 for v in roles.values()):
        raise MovieError("R3: the triangle needs one strand under, one over and one in between")
    bottom, top, middle = roles["bottom"][0], roles["top"][0], roles["middle"][0]
    p, q = d.arcs[bottom].tail[0], d.arcs[bottom].head[0]
    c = (corners - {p, q}).pop()
    slots = [port[1] for a in (top, middle) for port in (d.arcs[a].tail, d.arcs[a].head) if port[0] == c]
    corner = frozenset(slots)
    beta = 1 if corner in (frozenset({0, 1}), frozenset({2, 3})) else 0
    return Triangle(arcs, bottom, top, middle, p, q, c, beta)


def triangle_sites(d: Diagram) -> List[int]:
    """Regions where an R3 move applies."""
    out = []
    for r in d.regions:
        if len(r.cycles) == 1 and len(r.cycles[0]) == 3:
            try:
                triangle(d, face=r.id)
            except MovieError:
                continue
            out.append(r.id)
    return out


def triangle_move(d: Diagram, face: int) -> Tuple[PdCode, MoveSite, Triangle]:
    """Slide the strand opposite each corner across it; crossings keep their index and sign."""
    _require_outer_unknots(d, "R3")
    tri = triangle(d, face=face)
    pairs: Dict[int, List[Tuple[bool, int, int]]] = {}
    for mid in tri.arcs:
        (p, tslot), (q, hslot) = d.arcs[mid].tail, d.arcs[mid].head
        in_s = d.label_at((p, (tslot + 2) % 4))
        out_s = d.label_at((q, (hslot + 2) % 4))
        # after the move the strand meets q first, then p
        pairs.setdefault(q, []).append((_is_under((q, hslot)), in_s, mid))
        pairs.setdefault(p, []).append((_is_under((p, tslot)), mid, out_s))
    rows = [list(x) for x in d.pd.crossings]
    for k, strands in pairs.items():
        (under_in, under_out), = [(i, o) for u, i, o in strands if u]
        (over_in, over_out), = [(i, o) for u, i, o in strands if not u]
        if d.crossings[k].sign > 0:
            rows[k] = [under_in, over_in, under_out, over_out]
        else:
            rows[k] = [under_in, over_out, under_out, over_in]
    pd = PdCode(tuple(tuple(x) for x in rows), _outer_unknots(d.pd.unknots))
    seg_map = {s: (None if s in tri.arcs else s) for s in d.segment_ids()}
    site = MoveSite("r3", tuple(sorted((tri.p, tri.q, tri.c))), frozenset(tri.arcs), seg_map)
    return pd, site, tri


def remove_crossings(d: Diagram, ks: Sequence[int], internal: FrozenSet[int]) -> Tuple[PdCode, Dict[int, Optional[int]]]:
    """Delete crossings, joining the strands through them; closed strands become unknots."""
    removed = set(ks)
    parent = {label: label for label in d.arcs}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for k in removed:
        x = d.crossings[k].labels
        for s in (0, 1):
            ra, rb = find(x[s]), find(x[s + 2])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    kept = [k for k in range(d.n) if k not in removed]
    rows = [[find(a) for a in d.crossings[k].labels] for k in kept]
    used = sorted({a for row in rows for a in row})
    rank = {a: i + 1 for i, a in enumerate(used)}
    n2 = len(kept)
    flow = canonical_flow(d)
    closed = sorted({find(a) for a in d.arcs} - set(used))
    unknots = list(_outer_unknots(d.pd.unknots))
    seg_map: Dict[int, Optional[int]] = {}
    for j in range(len(d.pd.unknots)):
        seg_map[d.unknot_segment(j)] = 2 * n2 + 1 + j
    for idx, root in enumerate(closed):
        members = [a for a in d.arcs if find(a) == root and a not in internal]
        value = flow[members[0]] if members else 1
        unknots.append(UnknotRecord(CW if value > 0 else CCW))
        rank[root] = 2 * n2 + 1 + len(d.pd.unknots) + idx
    for a in d.arcs:
        seg_map[a] = None if a in internal else rank[find(a)]
    pd = PdCode(tuple(tuple(rank[a] for a in row) for row in rows), tuple(unknots))
    return pd, seg_map


def undo_kink(d: Diagram, k: int) -> Tuple[PdCode, MoveSite]:
    _require_outer_unknots(d, "R1 undo")
    if not 0 <= k < d.n:
        raise MovieError(f"R1 undo: no crossing {k + 1}")
    labels = d.crossings[k].labels
    loops = [a for a in set(labels) if d.arcs[a].tail[0] == k and d.arcs[a].head[0] == k]
    if len(loops) == 2:
        # a lone curl: both edges are loops; the one through slot 2 is the curl insert_kink makes
        loops = [labels[2]]
    if len(loops) != 1:
        raise MovieError(f"R1 undo: crossing {k + 1} is not a curl")
    pd, seg_map = remove_crossings(d, [k], frozenset(loops))
    kind = "r1+" if d.crossings[k].sign > 0 else "r1-"
    return pd, MoveSite(kind, (k,), frozenset(loops), seg_map, loops[0])


def bigon_arcs(d: Diagram, k: int, l: int) -> Optional[Tuple[int, int]]:
    """The two edges of a bigon between crossings k and l with one strand over at both ends."""
    for r in d.regions:
        for cycle in r.cycles:
            if len(cycle) != 2:
                continue
            arcs = [he[0] for he in cycle]
            ends = [{d.arcs[a].tail[0], d.arcs[a].head[0]} for a in arcs]
            if any(e != {k, l} for e in ends):
                continue
            kinds = sorted((_is_under(d.arcs[a].tail), _is_under(d.arcs[a].head)) for a in arcs)
            if kinds == [(False, False), (True, True)]:
                return arcs[0], arcs[1]
    return None


def undo_bigon(d: Diagram, k: int, l: int) -> Tuple[PdCode, MoveSite]:
    _require_outer_unknots(d, "R2 undo")
    if k == l or not (0 <= k < d.n and 0 <= l < d.n):
        raise MovieError(f"R2 undo: crossings {k + 1},{l + 1} are not two crossings of the diagram")
    if d.crossings[k].sign == d.crossings[l].sign:
        raise MovieError(f"R2 undo: crossings {k + 1},{l + 1} have equal signs")
    arcs = bigon_arcs(d, k, l)
    if arcs is None:
        raise MovieError(f"R2 undo: crossings {k + 1},{l + 1} do not bound a bigon")
    internal = frozenset(arcs)
    pd, seg_map = remove_crossings(d, [k, l], internal)
    return pd, MoveSite("r2", tuple(sorted((k, l))), internal, seg_map)


def kink_sites(d: Diagram) -> List[int]:
    return [k for k in range(d.n)
            if any(d.arcs[a].tail[0] == k and d.arcs[a].head[0] == k for a in d.crossings[k].labels)]


def bigon_sites(d: Diagram) -> List[Tuple[int, int, int]]:
    """(a, b, region) triples accepted by insert_bigon."""
    out = []
    for r in d.regions:
        labels = sorted({he[0] for cycle in r.cycles for he in cycle})
        for a, b in itertools.combinations(labels, 2):
            out.append((a, b, r.id))
    return out


# ---------------------------------------------------------------------------
# Gaussian elimination

def out_dict(c: ChainComplex) -> Dict[Key, Vector]:
    out: Dict[Key, Vector] = {g.key: {} for gens in c.generators.values() for g in gens}
    for h, matrix in c.differentials.items():
        src, dst = c.generators[h], c.generators.get(h + 1, [])
        for (r, col), v in matrix.entries.items():
            out[src[col].key][dst[r].key] = v
    return out


class Elimination:
    """
    Repeated Gaussian elimination on a complex, keeping the data of the
    projection f onto the reduced complex and the inclusion g back.
    """

    def __init__(self, c: ChainComplex):
        self.complex = c
        self.order = {key: pos for key, pos in c.position.items()}
        self.out = out_dict(c)
        self.into: Dict[Key, Vector] = {k: {} for k in self.out}
        for x, row in self.out.items():
            for y, v in row.items():
                self.into[y][x] = v
        self.alive = set(self.out)
        self.steps: List[Tuple[Key, Key, int, Vector, Vector]] = []

    def entry(self, b: Key, c: Key) -> int:
        return self.out[b].get(c, 0)

    def _set(self, x: Key, y: Key, value: int):
        if value:
            self.out[x][y] = value
            self.into[y][x] = value
        else:
            self.out[x].pop(y, None)
            self.into[y].pop(x, None)

    def eliminate(self, b: Key, c: Key):
        lam = self.out[b][c]
        if abs(lam) != 1:
            raise EliminationError(f"pivot {b} -> {c} is {lam}, not a unit")
        gamma = {y: v for y, v in self.out[b].items() if y != c}
        delta = {x: v for x, v in self.into[c].items() if x != b}
        for x, dx in delta.items():
            for y, gy in gamma.items():
                self._set(x, y, self.out[x].get(y, 0) - dx * lam * gy)
        for key in (b, c):
            for x in list(self.into[key]):
                self._set(x, key, 0)
            for y in list(self.out[key]):
                self._set(key, y, 0)
        self.alive -= {b, c}
        self.steps.append((b, c, lam, gamma, delta))

    def run(self, candidates: Iterable[Tuple[Key, Key]]) -> int:
        """Eliminate the lexicographically first unit candidate until none is left."""
        pending = sorted(candidates, key=lambda bc: (self.order[bc[0]], self.order[bc[1]]))
        count = 0
        while True:
            chosen = None
            keep = []
            for b, c in pending:
                if b in self.alive and c in self.alive:
                    keep.append((b, c))
                    if chosen is None and abs(self.out[b].get(c, 0)) == 1:
                        chosen = (b, c)
            pending = keep
            if chosen is None:
                break
            self.eliminate(*chosen)
            count += 1
        increment_counter("eliminations", count)
        return count

    def project(self, vector: Vector) -> Vector:
        """f: original complex -> reduced complex."""
        v = dict(vector)
        for b, c, lam, gamma, _ in self.steps:
            beta = v.pop(c, 0)
            v.pop(b, None)
            if beta:
                for y, gy in gamma.items():
                    value = v.get(y, 0) - lam * beta * gy
                    if value:
                        v[y] = value
                    else:
                        v.pop(y, None)
        return v

    def include(self, key: Key) -> Vector:
        """g: reduced complex -> original complex."""
        v: Vector = {key: 1}
        for b, c, lam, gamma, delta in reversed(self.steps):
            s = sum(coeff * delta.get(x, 0) for x, coeff in v.items())
            if s:
                value = v.get(b, 0) - lam * s
                if value:
                    v[b] = value
                else:
                    v.pop(b, None)
        return v

    def reduced(self) -> Dict[Key, Vector]:
        return {x: dict(self.out[x]) for x in self.alive}


# ---------------------------------------------------------------------------
# site families

Pair = Tuple[Generator, Generator]


def _entries(c: ChainComplex) -> Iterable[Pair]:
    for h, matrix in c.differentials.items():
        src, dst = c.generators[h], c.generators.get(h + 1, [])
        for (r, col), _ in matrix.entries.items():
            yield src[col], dst[r]


def _bubble(c: ChainComplex, u: Vertex, internal: FrozenSet[int]) -> Optional[int]:
    for circle in c.cube.resolutions[u].circles:
        if set(circle) <= internal:
            return circle[0]
    return None


@dataclass
class Plan:
    candidates: List[Tuple[Key, Key]]
    survives: Callable[[Generator], bool]


def kink_plan(c: ChainComplex, site: MoveSite) -> Plan:
    k = site.crossings[0]
    positive = c.diagram.crossings[k].sign > 0
    loop_of = lambda u: c.cube.resolutions[u].circle_of[site.loop]
    candidates = []
    for src, tgt in _entries(c):
        if src.vertex[k] != 0 or tgt.vertex != flip(src.vertex, k):
            continue
        if positive and src.label(loop_of(src.vertex)) == ONE:
            candidates.append((src.key, tgt.key))
        elif not positive and tgt.label(loop_of(tgt.vertex)) == X:
            candidates.append((src.key, tgt.key))
    if positive:
        survives = lambda g: g.vertex[k] == 0 and g.label(loop_of(g.vertex)) == X
    else:
        survives = lambda g: g.vertex[k] == 1 and g.label(loop_of(g.vertex)) == ONE
    return Plan(candidates, survives)


def bubble_plan(c: ChainComplex, pair: Tuple[int, int], internal: FrozenSet[int],
                fixed: Optional[Dict[int, int]] = None) -> Plan:
    """
    R2-shaped elimination on crossings `pair` inside the sub-cube where the
    `fixed` bits hold: the mixed state carrying a circle of internal arcs
    only is cancelled against both of its neighbours.
    """
    fixed = fixed or {}
    m1, m2 = pair
    n = c.diagram.n
    state = None
    for candidate in ((1, 0), (0, 1)):
        u = [0] * n
        for k, v in fixed.items():
            u[k] = v
        u[m1], u[m2] = candidate
        if _bubble(c, tuple(u), internal) is not None:
            state = candidate
            break
    if state is None:
        raise EliminationError(f"no bubble between crossings {m1} and {m2}")
    first = m1 if state == (1, 0) else m2
    second = m2 if first == m1 else m1
    other = (1 - state[0], 1 - state[1])

    def in_subcube(u):
        return all(u[k] == v for k, v in fixed.items())

    def local(u):
        return u[m1], u[m2]

    candidates = []
    for src, tgt in _entries(c):
        u, v = src.vertex, tgt.vertex
        if not in_subcube(u):
            continue
        if local(u) == (0, 0) and v == flip(u, first):
            bubble = _bubble(c, v, internal)
            if bubble is not None and tgt.label(bubble) == X:
                candidates.append((src.key, tgt.key))
        elif local(u) == state and v == flip(u, second):
            bubble = _bubble(c, u, internal)
            if bubble is not None and src.label(bubble) == ONE:
                candidates.append((src.key, tgt.key))
    return Plan(candidates, lambda g: not in_subcube(g.vertex) or local(g.vertex) == other)


def reduce_site(c: ChainComplex, plan: Plan) -> Elimination:
    elim = Elimination(c)
    elim.run(plan.candidates)
    expected = {g.key for gens in c.generators.values() for g in gens if plan.survives(g)}
    if elim.alive != expected:
        raise EliminationError(f"elimination left {len(elim.alive)} generators, expected {len(expected)}")
    return elim


# ---------------------------------------------------------------------------
# relabelling and signs

def _circle_image(c1: ChainComplex, c2: ChainComplex, u1: Vertex, u2: Vertex, labels, seg_map) -> Optional[Key]:
    res1, res2 = c1.cube.resolutions[u1], c2.cube.resolutions[u2]
    out = {}
    for circle, value in labels:
        outside = sorted(s for s in res1.circle_segments(circle) if seg_map.get(s) is not None)
        if not outside:
            continue
        target = res2.circle_of[seg_map[outside[0]]]
        if target in out:
            return None
        out[target] = value
    key = (u2, tuple(sorted(out.items())))
    return key if key in c2.position else None


def relabel(c1: ChainComplex, c2: ChainComplex, keys: Iterable[Key],
            seg_map: Dict[int, Optional[int]], vertex_map: Callable[[Vertex], Vertex]) -> Optional[Dict[Key, Key]]:
    sigma = {}
    for key in keys:
        u1, labels = key
        image = _circle_image(c1, c2, u1, vertex_map(u1), labels, seg_map)
        if image is None:
            return None
        sigma[key] = image
    if len(set(sigma.values())) != len(sigma):
        return None
    return sigma


def solve_phi(source: Dict[Key, Vector], target: Dict[Key, Vector], sigma: Dict[Key, Key]) -> Optional[Dict[Key, int]]:
    """Signs phi with source[x][y] = phi(x) phi(y) target[sigma x][sigma y], or None."""
    if set(sigma.values()) != set(target):
        return None
    adjacency: Dict[Key, List[Tuple[Key, int]]] = {}
    for x, row in source.items():
        mapped = {sigma[y]: v for y, v in row.items()}
        other = target[sigma[x]]
        if set(mapped) != set(other):
            return None
        for y, v in row.items():
            w = other[sigma[y]]
            if abs(w) != abs(v):
                return None
            relation = 1 if w == v else -1
            adjacency.setdefault(x, []).append((y, relation))
            adjacency.setdefault(y, []).append((x, relation))
    phi: Dict[Key, int] = {}
    for root in sorted(source):
        if root in phi:
            continue
        phi[root] = 1
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for b, relation in adjacency.get(a, ()):
                want = phi[a] * relation
                if b not in phi:
                    phi[b] = want
                    queue.append(b)
                elif phi[b] != want:
                    return None
    return phi


def _assemble(source: ChainComplex, target: ChainComplex, images: Dict[Key, Vector]) -> ChainMap:
    blocks = {h: SparseMatrix(target.rank(h), source.rank(h)) for h in source.hdegs()}
    for key, vector in images.items():
        h, col = source.position[key]
        for tkey, v in vector.items():
            th, row = target.position[tkey]
            if th != h:
                raise EliminationError(f"map changes homological degree at {key}")
            blocks[h].add(row, col, v)
    return ChainMap(source, target, blocks)


@dataclass
class Identification:
    """Reduced larger complex identified with the smaller one: y -> phi(y) sigma(y)."""
    elimination: Elimination
    sigma: Dict[Key, Key]
    phi: Dict[Key, int]


def identify(big: ChainComplex, small: ChainComplex, site: MoveSite) -> Identification:
    """Reduce the larger complex at an R1 or R2 site and match it with the smaller one."""
    with TimerContext("reidemeister_reduce"):
        if site.kind.startswith("r1"):
            plan = kink_plan(big, site)
        else:
            plan = bubble_plan(big, site.crossings, site.internal)
        elim = reduce_site(big, plan)
    drop = set(site.crossings)
    vertex_map = lambda u: tuple(b for i, b in enumerate(u) if i not in drop)
    sigma = relabel(big, small, sorted(elim.alive), site.seg_map, vertex_map)
    if sigma is None:
        raise EliminationError(f"{site.kind}: survivors do not match the generators of the smaller diagram")
    phi = solve_phi(elim.reduced(), out_dict(small), sigma)
    if phi is None:
        raise EliminationError(f"{site.kind}: no sign change identifies the reduced complex")
    return Identification(elim, sigma, phi)


def reidemeister_retract(big: ChainComplex, small: ChainComplex, site: MoveSite) -> ChainMap:
    """Chain map from the larger diagram's complex onto the smaller one's (f, then sigma and phi)."""
    ident = identify(big, small, site)
    images = {}
    for gens in big.generators.values():
        for g in gens:
            reduced = ident.elimination.project({g.key: 1})
            images[g.key] = {ident.sigma[y]: v * ident.phi[y] for y, v in reduced.items()}
    logger.debug(f"{site.kind} retraction with {len(ident.elimination.steps)} eliminations")
    return _assemble(big, small, images)


def reidemeister_include(big: ChainComplex, small: ChainComplex, site: MoveSite) -> ChainMap:
    """Chain map from the smaller diagram's complex into the larger one's (inverse phi sigma, then g)."""
    ident = identify(big, small, site)
    inverse = {t: y for y, t in ident.sigma.items()}
    images = {}
    for gens in small.generators.values():
        for g in gens:
            y = inverse[g.key]
            images[g.key] = {k: v * ident.phi[y] for k, v in ident.elimination.include(y).items()}
    return _assemble(small, big, images)


# ---------------------------------------------------------------------------
# R3

def _site_state(u: Vertex, crossings: Sequence[int]) -> Tuple[int, ...]:
    return tuple(u[k] for k in crossings)


def _with_state(u: Vertex, crossings: Sequence[int], state: Sequence[int]) -> Vertex:
    out = list(u)
    for k, b in zip(crossings, state):
        out[k] = b
    return tuple(out)


def local_partition(d: Diagram, crossings: Sequence[int], state: Sequence[int], internal: FrozenSet[int]):
    """How the smoothed site connects the ends of the outside arcs, plus its closed loops."""
    parent: Dict[Tuple[int, int], Tuple[int, int]] = {}

    def find(a):
        parent.setdefault(a, a)
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    site = set(crossings)
    for k, bit in zip(crossings, state):
        for s, t in PAIRINGS[bit]:
            union((k, s), (k, t))
    for a in internal:
        union(d.arcs[a].tail, d.arcs[a].head)
    terminals: Dict[Tuple[int, int], List[Tuple[int, str]]] = {}
    for label, arc in d.arcs.items():
        if label in internal:
            continue
        for port, end in ((arc.tail, "tail"), (arc.head, "head")):
            if port[0] in site:
                terminals.setdefault(find(port), []).append((label, end))
    roots = {find((k, s)) for k in crossings for s in range(4)}
    groups = frozenset(frozenset(v) for v in terminals.values())
    return groups, sum(1 for r in roots if r not in terminals)


def _state_bijections(d1: Diagram, states1, d2: Diagram, states2, crossings, internal1, internal2):
    def bucket(d, states, internal):
        out: Dict[Tuple, List] = {}
        for s in states:
            out.setdefault((sum(s), local_partition(d, crossings, s, internal)), []).append(s)
        return out

    b1, b2 = bucket(d1, states1, internal1), bucket(d2, states2, internal2)
    if set(b1) != set(b2) or any(len(b1[k]) != len(b2[k]) for k in b1):
        return
    keys = sorted(b1, key=lambda k: (k[0], sorted(map(sorted, k[1][0])), k[1][1]))
    options = [[dict(zip(sorted(b1[k]), perm)) for perm in itertools.permutations(sorted(b2[k]))] for k in keys]
    for combo in itertools.product(*options):
        merged = {}
        for part in combo:
            merged.update(part)
        yield merged


def r3_map(c1: ChainComplex, c2: ChainComplex, site: MoveSite, tri1: Triangle, tri2: Triangle) -> ChainMap:
    """Reduce both sides inside the sub-cube where the top-middle crossing closes the triangle, then match."""
    with TimerContext("reidemeister_reduce"):
        e1 = reduce_site(c1, bubble_plan(c1, (tri1.p, tri1.q), site.internal, {tri1.c: tri1.corner_bit}))
        e2 = reduce_site(c2, bubble_plan(c2, (tri2.p, tri2.q), site.internal, {tri2.c: tri2.corner_bit}))
    crossings = site.crossings
    states1 = sorted({_site_state(k[0], crossings) for k in e1.alive})
    states2 = sorted({_site_state(k[0], crossings) for k in e2.alive})
    reduced1, reduced2 = e1.reduced(), e2.reduced()
    for bijection in _state_bijections(c1.diagram, states1, c2.diagram, states2, crossings,
                                       site.internal, site.internal):
        vertex_map = lambda u: _with_state(u, crossings, bijection[_site_state(u, crossings)])
        sigma = relabel(c1, c2, sorted(e1.alive), site.seg_map, vertex_map)
        if sigma is None or set(sigma.values()) != e2.alive:
            continue
        phi = solve_phi(reduced1, reduced2, sigma)
        if phi is None:
            continue
        images = {}
        for gens in c1.generators.values():
            for g in gens:
                total: Vector = {}
                for y, v in e1.project({g.key: 1}).items():
                    for z, w in e2.include(sigma[y]).items():
                        total[z] = total.get(z, 0) + v * phi[y] * w
                images[g.key] = {k: v for k, v in total.items() if v}
        logger.debug(f"R3 matched site states {bijection}")
        return _assemble(c1, c2, images)
    raise EliminationError("R3: no relabelling identifies the two reduced complexes")


# ---------------------------------------------------------------------------
# movie steps

def reidemeister_step(c: ChainComplex, step: MovieStep, policy: str = AUTO) -> Tuple[ChainComplex, ChainMap]:
    d = c.diagram
    if step.kind in ("r1+", "r1-"):
        pd, site = insert_kink(d, step.one("arc"), 1 if step.kind == "r1+" else -1)
        big = totalize(_build(pd, "R1"), policy=policy)
        return big, reidemeister_include(big, c, site)
    if step.kind == "r2":
        face = step.params.get("face", [None])[0]
        pd, site = insert_bigon(d, *step.two("arcs"), face=face)
        big = totalize(_build(pd, "R2"), policy=policy)
        return big, reidemeister_include(big, c, site)
    if step.kind == "r3":
        pd, site, tri1 = triangle_move(d, step.one("site"))
        d2 = _build(pd, "R3")
        tri2 = triangle(d2, arcs=tri1.arcs)
        c2 = totalize(d2, policy=policy)
        return c2, r3_map(c, c2, site, tri1, tri2)
    if step.kind == "r1 undo":
        pd, site = undo_kink(d, step.one("crossing") - 1)
        small = totalize(_build(pd, "R1 undo"), policy=policy)
        return small, reidemeister_retract(c, small, site)
    if step.kind == "r2 undo":
        k, l = step.two("crossings")
        pd, site = undo_bigon(d, k - 1, l - 1)
        small = totalize(_build(pd, "R2 undo"), policy=policy)
        return small, reidemeister_retract(c, small, site)
    raise MovieError(f"unknown Reidemeister step '{step.kind}'")

"""
Edge maps of the cube in the signed basis, sign assignment, totalization and
certification of the resulting complex.
"""
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from core.cube import (MERGE, SPLIT, UNZIP, ZIP, Resolution, SurgeryDescriptor, Vertex, cube_edges,
                       cube_faces, flip, resolve_all, surgery_data, vertices)
from core.diagram import Diagram, Flow, canonical_flow
from core.generators import ONE, X, BasisTable, Generator
from core.linalg import SparseMatrix
from core.logger import logger
from core.models import CheckResult, VerificationReport
from core.monitoring import TimerContext, increment_counter

CONVENTIONS_TAG = "blanchet-v1"

LOCAL = "local"
ANCHORED = "anchored"
TREE = "tree"
PLAIN = "plain"
AUTO = "auto"

Edge = Tuple[Vertex, int]
Face = Tuple[Vertex, int, int]


class GaugeError(RuntimeError):
    """No edge-sign assignment makes every face commute."""


@dataclass(frozen=True)
class EdgeMap:
    source: Vertex
    target: Vertex
    crossing: int
    descriptor: SurgeryDescriptor
    sign: int
    matrix: SparseMatrix

    @property
    def magnitude(self) -> SparseMatrix:
        return self.matrix.scale(self.sign)


def edge_sign(s: SurgeryDescriptor) -> int:
    """Merges are +1; a split takes the flow of the strand left of the web edge."""
    return 1 if s.kind == MERGE else s.site_flow


def surgery_terms(s: SurgeryDescriptor, labels: Mapping[int, str]) -> List[Tuple[Dict[int, str], int]]:
    """Unsigned Frobenius image of one labelling: (target labels, coefficient) pairs."""
    rest = {c: v for c, v in labels.items() if c not in s.sources}
    if s.kind == MERGE:
        a, b = (labels[c] for c in s.sources)
        if a == X and b == X:
            return []
        out = dict(rest)
        out[s.targets[0]] = ONE if a == ONE and b == ONE else X
        return [(out, 1)]
    p, q = s.targets
    if labels[s.sources[0]] == ONE:
        return [({**rest, p: ONE, q: X}, 1), ({**rest, p: X, q: ONE}, 1)]
    return [({**rest, p: X, q: X}, 1)]


def build_edge_map(src: Resolution, dst: Resolution, s: SurgeryDescriptor, basis: BasisTable,
                   sign: Optional[int] = None) -> EdgeMap:
    """Matrix of the edge map with rows indexed by dst's basis and columns by src's."""
    eps = edge_sign(s) if sign is None else sign
    matrix = SparseMatrix(basis.size(dst.vertex), basis.size(src.vertex))
    for col, g in enumerate(basis[src.vertex]):
        for labels, coeff in surgery_terms(s, dict(g.labels)):
            try:
                row = basis.index_of(dst.vertex, labels)
            except KeyError:
                raise ValueError(f"surgery at crossing {s.crossing} produced circles {sorted(labels)} "
                                 f"not present at {dst.vertex}") from None
            matrix.add(row, col, eps * coeff)
    return EdgeMap(src.vertex, dst.vertex, s.crossing, s, eps, matrix)


def cube_sign(u: Vertex, i: int) -> int:
    return -1 if sum(u[:i]) % 2 else 1


class ResolvedCube:
    """All resolutions, bases, surgery descriptors and unsigned edge maps of a diagram."""

    def __init__(self, d: Diagram, flow: Optional[Flow] = None, threads: int = 1, memoize: bool = True):
        self.diagram = d
        self.flow = flow if flow is not None else canonical_flow(d)
        self.threads = threads
        with TimerContext("resolve"):
            self.resolutions: Dict[Vertex, Resolution] = resolve_all(d, self.flow, threads, memoize)
        self.basis = BasisTable(d, self.resolutions)
        self.descriptors: Dict[Edge, SurgeryDescriptor] = {}
        self.magnitudes: Dict[Edge, SparseMatrix] = {}
        edges = list(cube_edges(d.n))
        with TimerContext("edge_maps"):
            if threads > 1 and len(edges) > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    built = list(pool.map(lambda e: self._unsigned(e[0], e[1], e[2]), edges))
            else:
                built = [self._unsigned(u, i, v) for u, i, v in edges]
        for (u, i, _), (desc, mat) in zip(edges, built):
            self.descriptors[(u, i)] = desc
            self.magnitudes[(u, i)] = mat
        increment_counter("cube_edges", len(edges))
        logger.debug(f"Cube of {d.n} crossings: {len(self.resolutions)} vertices, {len(edges)} edges")

    def _unsigned(self, u: Vertex, i: int, v: Vertex):
        desc = surgery_data(self.resolutions[u], self.resolutions[v], i)
        emap = build_edge_map(self.resolutions[u], self.resolutions[v], desc, self.basis, sign=1)
        return desc, emap.matrix

    @property
    def n(self) -> int:
        return self.diagram.n

    def edges(self) -> List[Edge]:
        return list(self.descriptors)

    def faces(self) -> List[Face]:
        return list(cube_faces(self.n))

    def edge_map(self, edge: Edge, sign: int) -> EdgeMap:
        u, i = edge
        return EdgeMap(u, flip(u, i), i, self.descriptors[edge], sign, self.magnitudes[edge].scale(sign))

    def path(self, u: Vertex, first: int, second: int, signs: Optional[Mapping[Edge, int]] = None) -> SparseMatrix:
        """Composite u -> u+e_first -> u+e_first+e_second, before cube signs."""
        mid = flip(u, first)
        a = self.magnitudes[(u, first)]
        b = self.magnitudes[(mid, second)]
        out = b @ a
        if signs is not None:
            out = out.scale(signs[(u, first)] * signs[(mid, second)])
        return out

    def face_relation(self, face: Face) -> Optional[int]:
        """+1 or -1 if the unsigned composites agree up to that sign; None if both vanish."""
        u, i, j = face
        p1, p2 = self.path(u, i, j), self.path(u, j, i)
        if p1.is_zero() and p2.is_zero():
            return None
        if p1 == p2:
            return 1
        if p1 == -p2:
            return -1
        raise GaugeError(f"face {u} ({i},{j}): unsigned composites differ beyond sign")


# ---------------------------------------------------------------------------
# sign assignment

def face_edges(face: Face) -> Tuple[Edge, Edge, Edge, Edge]:
    u, i, j = face
    return (u, i), (flip(u, i), j), (u, j), (flip(u, j), i)


def face_failures(cube: ResolvedCube, signs: Mapping[Edge, int]) -> List[Face]:
    bad = []
    for face in cube.faces():
        rel = cube.face_relation(face)
        if rel is None:
            continue
        e1, e2, e3, e4 = face_edges(face)
        if signs[e1] * signs[e2] * signs[e3] * signs[e4] != rel:
            bad.append(face)
    return bad


def local_signs(cube: ResolvedCube) -> Dict[Edge, int]:
    return {e: edge_sign(s) for e, s in cube.descriptors.items()}


def anchor_signs(cube: ResolvedCube) -> Dict[Edge, int]:
    """Edges whose sign is fixed by the theta and zip computations."""
    pinned = {}
    for e, s in cube.descriptors.items():
        if s.direction == ZIP and s.kind == MERGE:
            pinned[e] = 1
        elif s.direction == UNZIP and s.kind == SPLIT:
            pinned[e] = s.site_flow
    return pinned


def anchored_signs(cube: ResolvedCube) -> Dict[Edge, int]:
    """
    Vertex gauge phi with phi(u) phi(v) equal to the pinned sign on every
    anchor edge; remaining edges get phi(u) phi(v).
    """
    pinned = anchor_signs(cube)
    adjacency: Dict[Vertex, List[Tuple[Vertex, int, Edge]]] = {}
    for (u, i), value in pinned.items():
        v = flip(u, i)
        adjacency.setdefault(u, []).append((v, value, (u, i)))
        adjacency.setdefault(v, []).append((u, value, (u, i)))
    phi: Dict[Vertex, int] = {}
    for root in vertices(cube.n):
        if root in phi:
            continue
        phi[root] = 1
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for b, value, edge in adjacency.get(a, ()):
                want = phi[a] * value
                if b not in phi:
                    phi[b] = want
                    queue.append(b)
                elif phi[b] != want:
                    raise GaugeError(f"anchors inconsistent around edge {edge[0]} along crossing {edge[1]}")
    return {(u, i): phi[u] * phi[flip(u, i)] for (u, i) in cube.descriptors}


def spanning_tree(n: int) -> List[Edge]:
    """BFS tree of the cube rooted at the all-0 vertex, edges tried by crossing index."""
    root = (0,) * n
    seen = {root}
    tree = []
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for i in range(n):
            v = flip(u, i)
            if v in seen:
                continue
            seen.add(v)
            tree.append((u, i) if u[i] == 0 else (v, i))
            queue.append(v)
    return tree


def gauge_solve(cube: ResolvedCube) -> Dict[Edge, int]:
    """Spanning tree at +1, remaining signs forced by face commutation."""
    signs: Dict[Edge, int] = {e: 1 for e in spanning_tree(cube.n)}
    faces = [(face, cube.face_relation(face)) for face in cube.faces()]
    progress = True
    while progress:
        progress = False
        for face, rel in faces:
            if rel is None:
                continue
            edges = face_edges(face)
            unknown = [e for e in edges if e not in signs]
            if len(unknown) != 1:
                continue
            product = rel
            for e in edges:
                if e in signs:
                    product *= signs[e]
            signs[unknown[0]] = product
            progress = True
    for e in cube.descriptors:
        signs.setdefault(e, 1)
    bad = face_failures(cube, signs)
    if bad:
        u, i, j = bad[0]
        raise GaugeError(f"face {u} ({i},{j}) does not commute after propagation")
    return signs


def choose_signs(cube: ResolvedCube, policy: str = AUTO) -> Tuple[Dict[Edge, int], str]:
    """Edge signs and the name of the rule that produced them."""
    if policy == PLAIN:
        return {e: 1 for e in cube.descriptors}, PLAIN
    if policy == TREE:
        return gauge_solve(cube), TREE
    if policy == ANCHORED:
        return anchored_signs(cube), ANCHORED
    signs = local_signs(cube)
    if policy == LOCAL:
        return signs, LOCAL
    bad = face_failures(cube, signs)
    if not bad:
        return signs, LOCAL
    logger.warning(f"Local sign rule fails on {len(bad)} faces; solving anchored gauge")
    try:
        signs = anchored_signs(cube)
        if not face_failures(cube, signs):
            return signs, ANCHORED
    except GaugeError as e:
        logger.warning(f"Anchored gauge unavailable: {e}")
    logger.warning("Falling back to spanning-tree gauge")
    return gauge_solve(cube), TREE


# ---------------------------------------------------------------------------
# chain complex

class ChainComplex:
    """
    Totalized complex.  generators[h] lists the generators of homological
    degree h (vertices lexicographic, basis order within a vertex);
    differentials[h] maps C^h to C^{h+1}.
    """

    def __init__(self, cube: ResolvedCube, signs: Mapping[Edge, int], sign_source: str):
        self.cube = cube
        self.diagram = cube.diagram
        self.signs = dict(signs)
        self.sign_source = sign_source
        self.digest = cube.diagram.digest
        self.generators: Dict[int, List[Generator]] = {}
        self.position: Dict[Tuple, Tuple[int, int]] = {}
        for u in cube.basis.vertices():
            for g in cube.basis[u]:
                column = self.generators.setdefault(g.hdeg, [])
                self.position[g.key] = (g.hdeg, len(column))
                column.append(g)
        self.generators = dict(sorted(self.generators.items()))
        self.differentials: Dict[int, SparseMatrix] = {
            h: SparseMatrix(len(self.generators.get(h + 1, [])), len(gens))
            for h, gens in self.generators.items()
        }
        for (u, i), sign in self.signs.items():
            coeff = sign * cube_sign(u, i)
            src_basis = cube.basis[u]
            dst_basis = cube.basis[flip(u, i)]
            for (row, col), value in cube.magnitudes[(u, i)].entries.items():
                h, c = self.position[src_basis[col].key]
                _, r = self.position[dst_basis[row].key]
                self.differentials[h].add(r, c, coeff * value)
        self._slices: Dict[Tuple[int, int], List[int]] = {}

    def edge_map(self, edge: Edge) -> EdgeMap:
        return self.cube.edge_map(edge, self.signs[edge])

    def edge_maps(self) -> Dict[Edge, EdgeMap]:
        return {e: self.edge_map(e) for e in self.signs}

    def hdegs(self) -> List[int]:
        return list(self.generators)

    def qdegs(self) -> List[int]:
        return sorted({g.qdeg for gens in self.generators.values() for g in gens})

    def slice(self, h: int, q: int) -> List[int]:
        """Positions within generators[h] of the generators of degree q."""
        key = (h, q)
        if key not in self._slices:
            self._slices[key] = [i for i, g in enumerate(self.generators.get(h, [])) if g.qdeg == q]
        return self._slices[key]

    def differential(self, h: int, q: Optional[int] = None) -> SparseMatrix:
        full = self.differentials.get(h)
        if full is None:
            rows = len(self.generators.get(h + 1, []))
            full = SparseMatrix(rows, 0)
        if q is None:
            return full
        return full.submatrix(self.slice(h + 1, q), self.slice(h, q))

    def rank(self, h: int) -> int:
        return len(self.generators.get(h, []))

    def graded_ranks(self) -> Dict[Tuple[int, int], int]:
        ranks: Dict[Tuple[int, int], int] = {}
        for h, gens in self.generators.items():
            for g in gens:
                ranks[(h, g.qdeg)] = ranks.get((h, g.qdeg), 0) + 1
        return dict(sorted(ranks.items()))

    def to_json(self) -> Dict:
        return {
            "tag": CONVENTIONS_TAG,
            "digest": self.digest,
            "sign_source": self.sign_source,
            "generators": {str(h): [g.to_json() for g in gens] for h, gens in self.generators.items()},
            "differentials": {
                str(h): {"shape": list(m.shape), "triplets": [list(t) for t in m.triplets()]}
                for h, m in self.differentials.items()
            },
        }


def totalize(d: Diagram, f: Optional[Flow] = None, policy: str = AUTO, threads: int = 1,
             memoize: bool = True, cube: Optional[ResolvedCube] = None) -> ChainComplex:
    """Total complex of the cube; `policy="plain"` gives the all-+1 Khovanov complex."""
    with TimerContext("totalize"):
        if cube is None:
            cube = ResolvedCube(d, f, threads, memoize)
        signs, source = choose_signs(cube, policy)
        complex_ = ChainComplex(cube, signs, source)
    logger.debug(f"Totalized {d.n}-crossing diagram with {source} signs")
    return complex_


# ---------------------------------------------------------------------------
# certification

def _check_coherence(c: ChainComplex) -> CheckResult:
    result = CheckResult(name="C1 sign coherence")
    for (u, i), desc in c.cube.descriptors.items():
        result.checked += 1
        emap = c.edge_map((u, i))
        values = set(emap.matrix.entries.values())
        if values and values != {emap.sign}:
            result.fail(f"edge {u} along {i}: entries {sorted(values)} not all {emap.sign}")
            continue
        expected = build_edge_map(c.cube.resolutions[u], c.cube.resolutions[flip(u, i)], desc,
                                  c.cube.basis, sign=emap.sign).matrix
        if expected != emap.matrix:
            result.fail(f"edge {u} along {i}: pattern differs from {desc.kind}")
    return result


def _check_faces(c: ChainComplex) -> CheckResult:
    result = CheckResult(name="C2 face commutation")
    for face in c.cube.faces():
        result.checked += 1
        u, i, j = face
        if c.cube.path(u, i, j, c.signs) != c.cube.path(u, j, i, c.signs):
            result.fail(f"face {u} ({i},{j}) does not commute")
    return result


def _check_square_zero(c: ChainComplex) -> CheckResult:
    result = CheckResult(name="C3 d^2=0")
    for h in c.hdegs():
        if h + 1 not in c.differentials:
            continue
        result.checked += 1
        product = c.differentials[h + 1] @ c.differentials[h]
        if not product.is_zero():
            result.fail(f"d{h + 1} d{h} has {product.nnz} nonzero entries")
    return result


def _check_anchors(c: ChainComplex) -> CheckResult:
    result = CheckResult(name="C4 anchors")
    if c.sign_source == PLAIN:
        expected = {e: 1 for e in c.signs}
    elif c.sign_source == TREE:
        expected = {e: 1 for e in spanning_tree(c.diagram.n)}
    elif c.sign_source == LOCAL:
        expected = local_signs(c.cube)
    else:
        expected = anchor_signs(c.cube)
    for (u, i), value in sorted(expected.items()):
        result.checked += 1
        if c.signs[(u, i)] != value:
            result.fail(f"edge {u} along {i} has sign {c.signs[(u, i)]}, anchor requires {value}")
    return result


def _check_cancellation(c: ChainComplex) -> CheckResult:
    result = CheckResult(name="C5 no cancellation")
    for u, i, j in c.cube.faces():
        result.checked += 1
        contributions: Dict[Tuple[int, int], set] = {}
        for first, second in ((i, j), (j, i)):
            mid = flip(u, first)
            a = c.cube.magnitudes[(u, first)]
            b = c.cube.magnitudes[(mid, second)]
            scale = c.signs[(u, first)] * c.signs[(mid, second)]
            by_col: Dict[int, List[Tuple[int, int]]] = {}
            for (r, col), v in b.entries.items():
                by_col.setdefault(col, []).append((r, v))
            for (k, src), v in a.entries.items():
                for r, w in by_col.get(k, ()):
                    contributions.setdefault((src, r), set()).add(1 if scale * v * w > 0 else -1)
        mixed = [key for key, s in contributions.items() if len(s) > 1]
        if mixed:
            result.fail(f"face {u} ({i},{j}): opposite contributions for {len(mixed)} source/target pairs")
    return result


def verify_complex(c: ChainComplex) -> VerificationReport:
    """Run C1-C5; failures name the offending edge or face."""
    with TimerContext("verify_complex"):
        report = VerificationReport(
            digest=c.digest,
            sign_source=c.sign_source,
            checks=[_check_coherence(c), _check_faces(c), _check_square_zero(c),
                    _check_anchors(c), _check_cancellation(c)],
        )
    for check in report.checks:
        if not check.passed:
            logger.warning(f"{check.name} failed: {check.failures[0]}")
    return report

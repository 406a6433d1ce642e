"""
Signed Burnside functor of the oriented cube.

Edge correspondences are the nonzero entries of the signed edge maps (cube
signs excluded).  Each square carries a 2-morphism, a sign-preserving bijection
between its two composite correspondences; it is unique except in ladybug
squares, where the doubled fiber is matched by the ladybug rule below.
"""
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from core.cube import LEFT, RIGHT, Resolution, Vertex, flip
from core.differential import ChainComplex
from core.generators import ONE, X
from core.logger import logger
from core.models import BurnsideReport, FaceStatus, HexagonStatus
from core.monitoring import TimerContext

# a composite element: generator indices at the bottom, middle and top vertex
Element = Tuple[int, int, int]


class LadybugError(ValueError):
    """Chord endpoints are not interleaved on the ladybug circle."""


class TwoMorphismError(RuntimeError):
    """No sign-preserving bijection exists between the composites of a square."""


class SignSolveError(RuntimeError):
    """No diagonal sign change takes one complex onto the other."""


@dataclass(frozen=True)
class SignedCorrespondence:
    source: Vertex
    target: Vertex
    elements: Tuple[Tuple[int, int, int], ...]

    def s(self, element) -> int:
        return element[0]

    def t(self, element) -> int:
        return element[1]

    def sign(self, element) -> int:
        return element[2]

    def images(self, x: int) -> List[Tuple[int, int]]:
        return [(y, sign) for a, y, sign in self.elements if a == x]

    def __len__(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ChordEnd:
    crossing: int
    segment: int
    side: str
    circle_after_a: int
    circle_after_b: int


@dataclass(frozen=True)
class LadybugConfig:
    circle: int
    chord_a: int
    chord_b: int
    ends: Tuple[ChordEnd, ...]
    a_circles: Tuple[int, int]
    b_circles: Tuple[int, int]


def detect_ladybug(resolutions: Mapping[Vertex, Resolution], u: Vertex, a: int, b: int) -> Optional[LadybugConfig]:
    """
    Ladybug data for the square at u spanned by crossings a and b: both
    surgeries split one circle with interleaved chords.  None otherwise.
    """
    bottom = resolutions[u]
    ca, cb = bottom.site_circles(a), bottom.site_circles(b)
    if ca[0] != ca[1] or cb[0] != cb[1] or ca[0] != cb[0]:
        return None
    circle = ca[0]
    passages = list(bottom.passages[circle])
    sides = {p.side for p in passages if p.crossing == a}
    if len(sides) != 1:
        raise LadybugError(f"chord at crossing {a} meets circle {circle} on both sides")
    forward = sides == {LEFT}
    if not forward:
        passages = passages[::-1]
    marked = [p for p in passages if p.crossing in (a, b)]
    if len(marked) != 4:
        return None
    start = next(k for k, p in enumerate(marked) if p.crossing == a)
    marked = marked[start:] + marked[:start]
    if [p.crossing for p in marked] != [a, b, a, b]:
        return None
    res_a, res_b = resolutions[flip(u, a)], resolutions[flip(u, b)]
    ends = []
    for p in marked:
        after = p.seg_out if forward else p.seg_in
        side = p.side if forward else (RIGHT if p.side == LEFT else LEFT)
        ends.append(ChordEnd(p.crossing, after, side, res_a.circle_of[after], res_b.circle_of[after]))
    a_circles = tuple(sorted(set(res_a.site_circles(a))))
    b_circles = tuple(sorted(set(res_b.site_circles(b))))
    return LadybugConfig(circle, a, b, tuple(ends), a_circles, b_circles)


def ladybug_match(cfg: LadybugConfig) -> Dict[int, int]:
    """
    With the circle oriented so chord a is on its left and endpoints p1(a),
    p2(b), p3(a), p4(b): the a-circle through p2 goes to the b-circle through
    p3, the a-circle through p4 to the b-circle through p1.
    """
    ends = cfg.ends
    if len(ends) != 4 or [e.crossing for e in ends] != [cfg.chord_a, cfg.chord_b, cfg.chord_a, cfg.chord_b]:
        raise LadybugError("chord endpoints are not interleaved a, b, a, b")
    match = {ends[1].circle_after_a: ends[2].circle_after_b,
             ends[3].circle_after_a: ends[0].circle_after_b}
    if len(match) != 2 or len(set(match.values())) != 2:
        raise LadybugError(f"degenerate ladybug on circle {cfg.circle}")
    return match


class BurnsideFunctor:
    """Vertex sets, edge correspondences and square 2-morphisms of one complex."""

    def __init__(self, c: ChainComplex, q: Optional[int] = None, threads: int = 1):
        self.complex = c
        self.cube = c.cube
        self.q = q
        self.n = c.diagram.n
        self.vertex_sets: Dict[Vertex, List[int]] = {
            u: [k for k, g in enumerate(self.cube.basis[u]) if q is None or g.qdeg == q]
            for u in self.cube.basis.vertices()
        }
        self.correspondences: Dict[Tuple[Vertex, int], SignedCorrespondence] = {}
        for (u, i), sign in sorted(c.signs.items()):
            allowed = set(self.vertex_sets[u])
            elements = tuple(sorted((col, row, sign * value)
                                    for (row, col), value in self.cube.magnitudes[(u, i)].entries.items()
                                    if col in allowed))
            self.correspondences[(u, i)] = SignedCorrespondence(u, flip(u, i), elements)
        self._ladybugs: Dict[Tuple[Vertex, int, int], Optional[LadybugConfig]] = {}
        self._two_morphisms: Dict[Tuple[Vertex, int, int], Dict[Element, Element]] = {}
        squares = [(u, i, j) for u, i, j in self.cube.faces()]
        keys = [key for u, i, j in squares for key in ((u, i, j), (u, j, i))]
        with TimerContext("two_morphisms"):
            if threads > 1 and len(keys) > 1:
                with ThreadPoolExecutor(max_workers=threads) as pool:
                    results = list(pool.map(self._safe_two_morphism, keys))
            else:
                results = [self._safe_two_morphism(k) for k in keys]
        self.errors: Dict[Tuple[Vertex, int, int], str] = {}
        for key, (bijection, error) in zip(keys, results):
            if error is None:
                self._two_morphisms[key] = bijection
            else:
                self.errors[key] = error

    def summand(self, q: int) -> "BurnsideFunctor":
        """Restriction to quantum degree q."""
        return BurnsideFunctor(self.complex, q)

    def faces(self) -> List[Tuple[Vertex, int, int]]:
        return list(self.cube.faces())

    def ladybug(self, u: Vertex, first: int, second: int) -> Optional[LadybugConfig]:
        key = (u, first, second)
        if key not in self._ladybugs:
            self._ladybugs[key] = detect_ladybug(self.cube.resolutions, u, first, second)
        return self._ladybugs[key]

    def composite(self, u: Vertex, first: int, second: int) -> Dict[Element, int]:
        """Elements x -> y -> z along u -> u+e_first -> u+e_first+e_second, with sign products."""
        mid = flip(u, first)
        step1 = self.correspondences[(u, first)]
        step2 = self.correspondences[(mid, second)]
        onward: Dict[int, List[Tuple[int, int]]] = {}
        for y, z, sign in step2.elements:
            onward.setdefault(y, []).append((z, sign))
        out = {}
        for x, y, s1 in step1.elements:
            for z, s2 in onward.get(y, ()):
                out[(x, y, z)] = s1 * s2
        return out

    def two_morphism(self, u: Vertex, first: int, second: int) -> Dict[Element, Element]:
        key = (u, first, second)
        if key in self.errors:
            raise TwoMorphismError(self.errors[key])
        return self._two_morphisms[key]

    def _safe_two_morphism(self, key):
        try:
            return face_two_morphism(self, *key), None
        except (TwoMorphismError, LadybugError) as e:
            return None, str(e)


def build_functor(c: ChainComplex, threads: int = 1) -> BurnsideFunctor:
    """Functor of the signed edge maps of c; cube signs stay out of the correspondences."""
    with TimerContext("burnside"):
        F = BurnsideFunctor(c, threads=threads)
    logger.debug(f"Burnside functor: {len(F.correspondences)} edges, {len(F.errors)} failed squares")
    return F


def _fibers(elements: Mapping[Element, int]) -> Dict[Tuple[int, int], List[Element]]:
    fibers: Dict[Tuple[int, int], List[Element]] = {}
    for e in sorted(elements):
        fibers.setdefault((e[0], e[2]), []).append(e)
    return fibers


def face_two_morphism(F: BurnsideFunctor, u: Vertex, first: int, second: int) -> Dict[Element, Element]:
    """Bijection from the composite through u+e_first to the one through u+e_second."""
    here = F.composite(u, first, second)
    there = F.composite(u, second, first)
    src_fibers, dst_fibers = _fibers(here), _fibers(there)
    if set(src_fibers) != set(dst_fibers):
        raise TwoMorphismError(f"face {u} ({first},{second}): composites have different supports")
    config = None
    bijection = {}
    for key, elems in src_fibers.items():
        targets = dst_fibers[key]
        if len(elems) != len(targets):
            raise TwoMorphismError(f"face {u} ({first},{second}): fiber {key} sizes differ")
        if len(elems) == 1:
            if here[elems[0]] != there[targets[0]]:
                raise TwoMorphismError(f"face {u} ({first},{second}): fiber {key} signs differ")
            bijection[elems[0]] = targets[0]
            continue
        if config is None:
            config = F.ladybug(u, first, second)
            if config is None or len(elems) != 2:
                raise TwoMorphismError(f"face {u} ({first},{second}): fiber {key} of size {len(elems)}")
            match = ladybug_match(config)
        bijection.update(_match_ladybug_fiber(F, u, first, second, elems, targets, match))
        if len({here[e] for e in elems} | {there[t] for t in targets}) != 1:
            raise TwoMorphismError(f"face {u} ({first},{second}): ladybug fiber {key} has mixed signs")
    return bijection


def _match_ladybug_fiber(F, u, first, second, elems, targets, match):
    mid_a = F.cube.basis[flip(u, first)]
    mid_b = F.cube.basis[flip(u, second)]
    out = {}
    for e in elems:
        y = mid_a[e[1]]
        wanted = {b: y.label(a) for a, b in match.items()}
        hit = [t for t in targets if all(mid_b[t[1]].label(b) == v for b, v in wanted.items())]
        if len(hit) != 1:
            raise TwoMorphismError(f"face {u} ({first},{second}): ladybug matching is not a bijection")
        out[e] = hit[0]
    if len(set(out.values())) != len(out):
        raise TwoMorphismError(f"face {u} ({first},{second}): ladybug matching is not injective")
    return out


# ---------------------------------------------------------------------------
# verification

def _chains(F: BurnsideFunctor, u: Vertex, path: Tuple[int, int, int]) -> Dict[Tuple[int, int, int, int], int]:
    p0, p1, p2 = path
    v1 = flip(u, p0)
    v2 = flip(v1, p1)
    first = F.composite(u, p0, p1)
    onward: Dict[int, List[Tuple[int, int]]] = {}
    for y, z, sign in F.correspondences[(v2, p2)].elements:
        onward.setdefault(y, []).append((z, sign))
    out = {}
    for (x, g1, g2), sign in first.items():
        for y, s3 in onward.get(g2, ()):
            out[(x, g1, g2, y)] = sign * s3
    return out


def _swap12(F, u, path, chain):
    p0, p1, p2 = path
    x, g1, g2, y = chain
    image = F.two_morphism(u, p0, p1)[(x, g1, g2)]
    return (p1, p0, p2), (x, image[1], g2, y)


def _swap23(F, u, path, chain):
    p0, p1, p2 = path
    x, g1, g2, y = chain
    image = F.two_morphism(flip(u, p0), p1, p2)[(g1, g2, y)]
    return (p0, p2, p1), (x, g1, image[1], y)


def hexagon_status(F: BurnsideFunctor, u: Vertex, i: int, j: int, k: int) -> HexagonStatus:
    status = HexagonStatus(vertex=list(u), directions=[i, j, k])
    start = (i, j, k)
    try:
        chains = _chains(F, u, start)
        for chain in chains:
            path, current = start, chain
            for step in range(6):
                path, current = (_swap12 if step % 2 == 0 else _swap23)(F, u, path, current)
            if path != start or current != chain:
                status.ok = False
                status.message = f"chain {chain} returns as {current}"
                break
    except (TwoMorphismError, KeyError) as e:
        status.ok = False
        status.message = f"missing 2-morphism: {e}"
    return status


def verify_hexagons(F: BurnsideFunctor) -> Tuple[List[HexagonStatus], bool]:
    """Hexagon around every 3-dimensional subcube, plus inverse pairs on every square."""
    hexagons = []
    for u in F.cube.basis.vertices():
        zeros = [i for i in range(F.n) if u[i] == 0]
        for a in range(len(zeros)):
            for b in range(a + 1, len(zeros)):
                for c in range(b + 1, len(zeros)):
                    hexagons.append(hexagon_status(F, u, zeros[a], zeros[b], zeros[c]))
    inverses_ok = True
    for u, i, j in F.faces():
        key, back = (u, i, j), (u, j, i)
        if key in F.errors or back in F.errors:
            inverses_ok = False
            continue
        forward = F.two_morphism(u, i, j)
        backward = F.two_morphism(u, j, i)
        if any(backward.get(target) != source for source, target in forward.items()):
            inverses_ok = False
            logger.warning(f"2-morphisms at {u} ({i},{j}) are not mutually inverse")
    return hexagons, inverses_ok


def ladybug_composites_ok(F: BurnsideFunctor) -> bool:
    """In a ladybug square the undotted circle maps to +-2 times the dotted one."""
    ok = True
    for u, i, j in F.faces():
        config = F.ladybug(u, i, j)
        if config is None:
            continue
        composite = F.cube.path(u, i, j, F.complex.signs)
        top_circle = F.cube.resolutions[flip(u, i, j)].circle_of[config.circle]
        bottom = F.cube.basis[u]
        top = F.cube.basis[flip(u, i, j)]
        for (row, col), value in composite.entries.items():
            if bottom[col].label(config.circle) != ONE or abs(value) != 2 or top[row].label(top_circle) != X:
                logger.warning(f"ladybug square {u} ({i},{j}): composite entry {value} off the doubled fiber")
                ok = False
    return ok


def face_statuses(F: BurnsideFunctor) -> List[FaceStatus]:
    out = []
    for u, i, j in F.faces():
        status = FaceStatus(vertex=list(u), directions=[i, j])
        try:
            status.ladybug = F.ladybug(u, i, j) is not None
        except LadybugError as e:
            status.ok = False
            status.message = str(e)
        for key in ((u, i, j), (u, j, i)):
            if key in F.errors:
                status.ok = False
                status.message = F.errors[key]
        if status.ok:
            status.size = len(F.two_morphism(u, i, j))
        out.append(status)
    return out


# ---------------------------------------------------------------------------
# comparison with the plain complex

def generator_tag(g) -> str:
    return "".join(str(b) for b in g.vertex) + ":" + "".join(v for _, v in g.labels)


def solve_diagonal_phi(c_or: ChainComplex, c_kh: ChainComplex) -> Dict[Tuple, int]:
    """
    Signs phi on generators with phi(target) phi(source) kh = or on every
    entry, by breadth-first propagation per connected component.
    """
    if c_or.hdegs() != c_kh.hdegs():
        raise SignSolveError("complexes have different homological supports")
    adjacency: Dict[Tuple, List[Tuple[Tuple, int]]] = {}
    for h, matrix in c_or.differentials.items():
        other = c_kh.differentials[h]
        if set(matrix.entries) != set(other.entries):
            raise SignSolveError(f"differential d{h} has different supports")
        src, dst = c_or.generators[h], c_or.generators.get(h + 1, [])
        for (r, col), value in matrix.entries.items():
            kh = other[(r, col)]
            if abs(kh) != abs(value):
                raise SignSolveError(f"d{h} entry ({r},{col}) differs in magnitude")
            relation = 1 if kh == value else -1
            a, b = src[col].key, dst[r].key
            adjacency.setdefault(a, []).append((b, relation))
            adjacency.setdefault(b, []).append((a, relation))
    phi: Dict[Tuple, int] = {}
    for h in c_or.hdegs():
        for g in c_or.generators[h]:
            if g.key in phi:
                continue
            phi[g.key] = 1
            queue = deque([g.key])
            while queue:
                a = queue.popleft()
                for b, relation in adjacency.get(a, ()):
                    want = phi[a] * relation
                    if b not in phi:
                        phi[b] = want
                        queue.append(b)
                    elif phi[b] != want:
                        raise SignSolveError(f"inconsistent sign between {a} and {b}")
    return phi


def conjugate_matches(c_or: ChainComplex, c_kh: ChainComplex, phi: Mapping[Tuple, int]) -> bool:
    """Entrywise check that phi carries the oriented differential onto the plain one."""
    for h, matrix in c_or.differentials.items():
        src, dst = c_or.generators[h], c_or.generators.get(h + 1, [])
        other = c_kh.differentials[h]
        for (r, col), value in matrix.entries.items():
            if phi[dst[r].key] * phi[src[col].key] * other[(r, col)] != value:
                return False
        if set(matrix.entries) != set(other.entries):
            return False
    return True


def burnside_report(c_or: ChainComplex, c_kh: Optional[ChainComplex] = None, threads: int = 1) -> BurnsideReport:
    """Face, hexagon and ladybug status of the functor, plus the phi solve when c_kh is given."""
    F = build_functor(c_or, threads=threads)
    hexagons, inverses_ok = verify_hexagons(F)
    report = BurnsideReport(
        digest=c_or.digest,
        faces=face_statuses(F),
        hexagons=hexagons,
        inverse_pairs_ok=inverses_ok,
        ladybug_composites_ok=ladybug_composites_ok(F),
    )
    if c_kh is not None:
        try:
            phi = solve_diagonal_phi(c_or, c_kh)
            lookup = {g.key: g for gens in c_or.generators.values() for g in gens}
            report.phi = {generator_tag(lookup[k]): v for k, v in sorted(phi.items())}
        except SignSolveError as e:
            report.phi_error = str(e)
    return report

"""
Cube of resolutions.

Bit 0 at every crossing is the smoothing pairing slots {0,3},{1,2}; bit 1 pairs
{0,1},{2,3}.  Whether that smoothing is the oriented one or the web (2-labelled
edge deleted) depends on the crossing sign.
"""
import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Sequence, Tuple

from core.cache import cache_resolution, get_cached_resolution
from core.diagram import Diagram, Flow
from core.logger import logger

Vertex = Tuple[int, ...]

ORIENTED = "oriented"
WEB = "web"
MERGE = "merge"
SPLIT = "split"
ZIP = "zip"
UNZIP = "unzip"
LEFT = "left"
RIGHT = "right"

PAIRINGS = {
    0: ((0, 3), (1, 2)),
    1: ((0, 1), (2, 3)),
}


class SurgeryError(ValueError):
    """Two resolutions are not the ends of a cube edge."""


def pairing(bit: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    return PAIRINGS[bit]


def partner_map(bit: int) -> Dict[int, int]:
    partners = {}
    for s, t in PAIRINGS[bit]:
        partners[s], partners[t] = t, s
    return partners


def state_of(sign: int, bit: int) -> str:
    if sign > 0:
        return ORIENTED if bit == 0 else WEB
    return WEB if bit == 0 else ORIENTED


@dataclass(frozen=True)
class Passage:
    """One smoothing arc as met by a circle traversal."""
    crossing: int
    enter: int
    leave: int
    seg_in: int
    seg_out: int

    @property
    def side(self) -> str:
        # turning towards slot+1 keeps the crossing centre on the left
        return LEFT if self.leave == (self.enter + 1) % 4 else RIGHT


@dataclass(frozen=True, eq=False)
class Resolution:
    vertex: Vertex
    circles: Tuple[Tuple[int, ...], ...]
    circle_of: Mapping[int, int]
    passages: Mapping[int, Tuple[Passage, ...]]
    segment_flow: Mapping[int, int]
    crossing_state: Tuple[str, ...]
    web_left_flow: Mapping[int, int]
    site_labels: Tuple[Tuple[Tuple[int, int], Tuple[int, int]], ...]

    @property
    def circle_ids(self) -> Tuple[int, ...]:
        return tuple(c[0] for c in self.circles)

    @property
    def circle_count(self) -> int:
        return len(self.circles)

    def circle_segments(self, circle: int) -> frozenset:
        for c in self.circles:
            if c[0] == circle:
                return frozenset(c)
        raise KeyError(circle)

    def site_circles(self, k: int) -> Tuple[int, int]:
        """Circles through the two smoothing arcs at crossing k."""
        (a, _), (b, _) = self.site_labels[k]
        return self.circle_of[a], self.circle_of[b]


@dataclass(frozen=True)
class SurgeryDescriptor:
    crossing: int
    direction: str
    kind: str
    sources: Tuple[int, ...]
    targets: Tuple[int, ...]
    site_flow: int


def vertices(n: int) -> Iterator[Vertex]:
    """All cube vertices, lexicographic."""
    return itertools.product((0, 1), repeat=n)


def height(u: Vertex) -> int:
    return sum(u)


def hdeg(d: Diagram, u: Vertex) -> int:
    return sum(u) - d.n_minus


def cube_edges(n: int) -> Iterator[Tuple[Vertex, int, Vertex]]:
    for u in vertices(n):
        for i in range(n):
            if u[i] == 0:
                yield u, i, u[:i] + (1,) + u[i + 1:]


def cube_faces(n: int) -> Iterator[Tuple[Vertex, int, int]]:
    for u in vertices(n):
        zeros = [i for i in range(n) if u[i] == 0]
        for i, j in itertools.combinations(zeros, 2):
            yield u, i, j


def flip(u: Vertex, *bits: int) -> Vertex:
    out = list(u)
    for i in bits:
        out[i] ^= 1
    return tuple(out)


def qshift(d: Diagram, u: Vertex) -> int:
    """Sum of (-1 - u_i) over positive crossings and (2 - u_i) over negative ones."""
    total = 0
    for x, bit in zip(d.crossings, u):
        total += (-1 - bit) if x.sign > 0 else (2 - bit)
    return total


def _web_left_flow(d: Diagram, flow: Flow, k: int) -> int:
    x = d.crossings[k]
    first, second = x.incoming_slots
    # the incoming port whose counterclockwise successor is the other incoming port
    i1 = first if (first + 1) % 4 == second else second
    return flow[x.labels[i1]]


def _flow_tag(flow: Flow) -> str:
    return str(hash(tuple(flow.items())))


def resolve(d: Diagram, f: Flow, u: Sequence[int], memoize: bool = True) -> Resolution:
    """
    Resolve every crossing of d according to vertex u.

    Circles come from union-find over segment identifications and are listed
    by smallest segment; each is stored in traversal order starting on that
    segment.
    """
    u = tuple(u)
    if len(u) != d.n:
        raise ValueError(f"vertex has {len(u)} bits, diagram has {d.n} crossings")
    tag = f"{d.digest}:{_flow_tag(f)}"
    if memoize:
        cached = get_cached_resolution(tag, u)
        if cached is not None:
            return cached

    segments = d.segment_ids()
    parent = {s: s for s in segments}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    site_labels = []
    partners = []
    for x, bit in zip(d.crossings, u):
        pairs = pairing(bit)
        site_labels.append(tuple((x.labels[s], x.labels[t]) for s, t in pairs))
        partners.append(partner_map(bit))
        for s, t in pairs:
            ra, rb = find(x.labels[s]), find(x.labels[t])
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    members: Dict[int, List[int]] = {}
    for s in segments:
        members.setdefault(find(s), []).append(s)
    circle_of = {s: min(group) for group in members.values() for s in group}

    circles = []
    passages = {}
    for root in sorted(min(g) for g in members.values()):
        if d.is_unknot_segment(root):
            circles.append((root,))
            passages[root] = ()
            continue
        order, met = _traverse(d, partners, root)
        circles.append(order)
        passages[root] = met

    states = tuple(state_of(x.sign, bit) for x, bit in zip(d.crossings, u))
    web_left = {k: _web_left_flow(d, f, k) for k in range(d.n) if states[k] == WEB}
    res = Resolution(
        vertex=u,
        circles=tuple(circles),
        circle_of=circle_of,
        passages=passages,
        segment_flow={s: f[s] for s in segments},
        crossing_state=states,
        web_left_flow=web_left,
        site_labels=tuple(site_labels),
    )
    if memoize:
        res = cache_resolution(tag, u, res)
    return res


def _traverse(d: Diagram, partners, root: int) -> Tuple[Tuple[int, ...], Tuple[Passage, ...]]:
    order = [root]
    met = []
    label, direction = root, 1
    while True:
        k, s = d.arrival((label, direction))
        t = partners[k][s]
        nxt = d.leaving((k, t))
        met.append(Passage(k, s, t, label, nxt[0]))
        if nxt == (root, 1):
            break
        label, direction = nxt
        order.append(label)
        if len(order) > len(d.arcs):
            raise RuntimeError(f"circle through segment {root} does not close up")
    return tuple(order), tuple(met)


def resolve_all(d: Diagram, f: Flow, threads: int = 1, memoize: bool = True) -> Dict[Vertex, Resolution]:
    """Materialise every vertex; order of the returned mapping is lexicographic."""
    verts = list(vertices(d.n))
    if threads > 1 and len(verts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda u: resolve(d, f, u, memoize), verts))
    else:
        results = [resolve(d, f, u, memoize) for u in verts]
    logger.debug(f"Resolved {len(verts)} vertices")
    return dict(zip(verts, results))


def surgery_data(src: Resolution, dst: Resolution, i: int) -> SurgeryDescriptor:
    """Describe the cube edge src -> dst changing crossing i from 0 to 1."""
    if len(src.vertex) != len(dst.vertex) or not (0 <= i < len(src.vertex)):
        raise SurgeryError(f"crossing {i} is not a coordinate of both resolutions")
    expected = flip(src.vertex, i)
    if src.vertex[i] != 0 or dst.vertex != expected:
        raise SurgeryError(f"{src.vertex} -> {dst.vertex} is not a cube edge along crossing {i}")
    web_side = src if src.crossing_state[i] == WEB else dst
    direction = ZIP if src.crossing_state[i] == ORIENTED else UNZIP
    a, b = src.site_circles(i)
    if a != b:
        merged = dst.site_circles(i)
        if merged[0] != merged[1]:
            raise SurgeryError(f"site circles at crossing {i} do not merge")
        return SurgeryDescriptor(i, direction, MERGE, tuple(sorted((a, b))), (merged[0],),
                                 web_side.web_left_flow[i])
    p, q = dst.site_circles(i)
    if p == q:
        raise SurgeryError(f"site circle at crossing {i} does not split")
    return SurgeryDescriptor(i, direction, SPLIT, (a,), tuple(sorted((p, q))), web_side.web_left_flow[i])


def resolution_to_dict(res: Resolution) -> Dict:
    """Debug dump: circles as segment lists in traversal order."""
    return {
        "vertex": list(res.vertex),
        "circles": [list(c) for c in res.circles],
        "segment_flow": {str(s): v for s, v in sorted(res.segment_flow.items())},
        "crossing_state": list(res.crossing_state),
        "web_left_flow": {str(k): v for k, v in sorted(res.web_left_flow.items())},
    }

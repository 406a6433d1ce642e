"""
Planar diagram codes and the combinatorics of oriented link diagrams.

A PD code lists, per crossing, the four incident arc labels counterclockwise
from the incoming under-strand.  Slots 0..3 of a tuple are treated as the
cyclic rotation at the crossing.  Closed components without crossings are
carried as unknot records next to the crossing list.
"""
import json
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from core.cache import diagram_digest
from core.logger import logger

CW = "cw"
CCW = "ccw"
WHITE = "white"
BLACK = "black"

Port = Tuple[int, int]          # (crossing index, slot)
HalfEdge = Tuple[int, int]      # (arc label, +1 forward / -1 backward)


class PdParseError(ValueError):
    """Malformed or invalid PD input; carries every collected message."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class FaceSelectionError(ValueError):
    """An outer-face or placement selector names a region that does not exist."""


@dataclass(frozen=True)
class UnknotRecord:
    """A closed component without crossings, placed in region `face` (None = outer)."""
    orientation: str
    face: Optional[int] = None

    def to_json(self):
        if self.face is None:
            return self.orientation
        return {"orientation": self.orientation, "face": self.face}


@dataclass(frozen=True)
class PdCode:
    crossings: Tuple[Tuple[int, int, int, int], ...] = ()
    unknots: Tuple[UnknotRecord, ...] = ()
    outer_face: Optional[int] = None

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)

    @property
    def arc_count(self) -> int:
        return 2 * len(self.crossings)

    @property
    def component_count(self) -> int:
        parent = {label: label for x in self.crossings for label in x}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for x in self.crossings:
            for s in (0, 1):
                ra, rb = find(x[s]), find(x[s + 2])
                if ra != rb:
                    parent[ra] = rb
        return len({find(label) for label in parent}) + len(self.unknots)

    def to_dict(self) -> Dict:
        return {
            "crossings": [list(x) for x in self.crossings],
            "unknots": [u.to_json() for u in self.unknots],
            "outer_face": self.outer_face,
        }

    def to_text(self) -> str:
        body = "PD[" + ",".join("X[" + ",".join(str(a) for a in x) + "]" for x in self.crossings) + "]"
        for u in self.unknots:
            body += f";O[{u.orientation}]" if u.face is None else f";O[{u.orientation},{u.face}]"
        return body

    def digest(self) -> str:
        return diagram_digest(self.to_dict())


@dataclass(frozen=True)
class Arc:
    label: int
    tail: Port
    head: Port
    component: int


@dataclass(frozen=True)
class Crossing:
    index: int
    labels: Tuple[int, int, int, int]
    sign: int

    @property
    def incoming_slots(self) -> Tuple[int, int]:
        return (0, 1) if self.sign > 0 else (0, 3)

    @property
    def outgoing_slots(self) -> Tuple[int, int]:
        return (2, 3) if self.sign > 0 else (1, 2)


@dataclass(frozen=True)
class Region:
    id: int
    cycles: Tuple[Tuple[HalfEdge, ...], ...]
    color: str
    is_outer: bool
    unknots: Tuple[int, ...] = ()

    @property
    def boundary(self) -> Tuple[HalfEdge, ...]:
        return tuple(he for cycle in self.cycles for he in cycle)


@dataclass(frozen=True, eq=False)
class Diagram:
    pd: PdCode
    crossings: Tuple[Crossing, ...]
    arcs: Mapping[int, Arc]
    regions: Tuple[Region, ...]
    face_of: Mapping[HalfEdge, int]
    outer: int
    unknot_hosts: Tuple[int, ...]
    unknot_regions: Tuple[int, ...]
    digest: str

    @property
    def n(self) -> int:
        return len(self.crossings)

    @property
    def n_plus(self) -> int:
        return sum(1 for x in self.crossings if x.sign > 0)

    @property
    def n_minus(self) -> int:
        return sum(1 for x in self.crossings if x.sign < 0)

    @property
    def faces(self) -> Tuple[Region, ...]:
        return self.regions

    def unknot_segment(self, j: int) -> int:
        """Segment id of unknot j (0-based)."""
        return 2 * self.n + 1 + j

    def segment_ids(self) -> List[int]:
        return list(range(1, 2 * self.n + len(self.pd.unknots) + 1))

    def is_unknot_segment(self, segment: int) -> bool:
        return segment > 2 * self.n

    def left_region(self, label: int) -> int:
        return self.face_of[(label, 1)]

    def right_region(self, label: int) -> int:
        return self.face_of[(label, -1)]

    def label_at(self, port: Port) -> int:
        k, s = port
        return self.crossings[k].labels[s]

    def leaving(self, port: Port) -> HalfEdge:
        """Half-edge that leaves the crossing through `port`."""
        label = self.label_at(port)
        return (label, 1) if self.arcs[label].tail == port else (label, -1)

    def arrival(self, he: HalfEdge) -> Port:
        arc = self.arcs[he[0]]
        return arc.head if he[1] > 0 else arc.tail


@dataclass(frozen=True)
class Flow:
    values: Mapping[int, int] = field(default_factory=dict)

    def __getitem__(self, segment: int) -> int:
        return self.values[segment]

    def items(self):
        return sorted(self.values.items())


# ---------------------------------------------------------------------------
# parsing

_PD_RE = re.compile(r"^\s*PD\s*\[(.*)\]\s*$", re.S)
_X_RE = re.compile(r"X\s*\[([^\[\]]*)\]")
_O_RE = re.compile(r"^\s*O\s*\[\s*(cw|ccw)\s*(?:,\s*(\d+)\s*)?\]\s*$", re.I)


def _parse_unknot_json(entry, errors: List[str]) -> Optional[UnknotRecord]:
    if isinstance(entry, str):
        entry = {"orientation": entry}
    if not isinstance(entry, dict):
        errors.append(f"unknot entry must be a string or object, got {entry!r}")
        return None
    orientation = str(entry.get("orientation", "")).lower()
    if orientation not in (CW, CCW):
        errors.append(f"unknot orientation must be 'cw' or 'ccw', got {entry.get('orientation')!r}")
        return None
    face = entry.get("face")
    if face is not None and (not isinstance(face, int) or face < 0):
        errors.append(f"unknot face must be a non-negative integer, got {face!r}")
        return None
    return UnknotRecord(orientation, face)


def _parse_json(text: str, errors: List[str]):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        errors.append(f"invalid JSON: {e.msg} at position {e.pos}")
        return [], [], None
    if not isinstance(data, dict):
        errors.append("JSON input must be an object")
        return [], [], None
    crossings = []
    for i, x in enumerate(data.get("crossings", [])):
        if not isinstance(x, list) or len(x) != 4 or not all(isinstance(a, int) for a in x):
            errors.append(f"crossing {i} must be a list of four integers")
            continue
        crossings.append(tuple(x))
    unknots = [u for u in (_parse_unknot_json(e, errors) for e in data.get("unknots", [])) if u]
    outer = data.get("outer_face")
    if outer is not None and (not isinstance(outer, int) or outer < 0):
        errors.append(f"outer_face must be a non-negative integer, got {outer!r}")
        outer = None
    return crossings, unknots, outer


def _parse_text(text: str, errors: List[str]):
    head, *extras = text.split(";")
    m = _PD_RE.match(head)
    if not m:
        errors.append("expected PD[X[a,b,c,d],...]")
        return [], [], None
    inner = m.group(1)
    crossings = []
    for i, body in enumerate(_X_RE.findall(inner)):
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 4 or not all(p.isdigit() for p in parts):
            errors.append(f"crossing {i} must be X[a,b,c,d] with four positive integers")
            continue
        crossings.append(tuple(int(p) for p in parts))
    leftover = _X_RE.sub("", inner).replace(",", "").strip()
    if leftover:
        errors.append(f"unexpected text inside PD[...]: {leftover[:20]!r}")
    unknots = []
    for extra in extras:
        if not extra.strip():
            continue
        om = _O_RE.match(extra)
        if not om:
            errors.append(f"unknot record must be O[cw], O[ccw] or O[cw,f], got {extra.strip()!r}")
            continue
        face = int(om.group(2)) if om.group(2) is not None else None
        unknots.append(UnknotRecord(om.group(1).lower(), face))
    return crossings, unknots, None


def normalize_labels(crossings: Sequence[Tuple[int, ...]]) -> Tuple[Tuple[int, int, int, int], ...]:
    """Relabel arcs to 1..2n preserving their sorted order."""
    ranks = {label: i + 1 for i, label in enumerate(sorted({a for x in crossings for a in x}))}
    return tuple(tuple(ranks[a] for a in x) for x in crossings)


def _multiplicity_errors(crossings) -> List[str]:
    counts: Dict[int, int] = {}
    for x in crossings:
        for a in x:
            counts[a] = counts.get(a, 0) + 1
    errors = [f"arc label {a} occurs {c} time(s), expected 2" for a, c in sorted(counts.items()) if c != 2]
    errors += [f"arc label {a} must be positive" for a in sorted(counts) if a < 1]
    return errors


def parse_pd(text: str) -> PdCode:
    """
    Parse `PD[X[a,b,c,d],...]` (optionally followed by `;O[cw]` records) or the JSON form.

    Returns:
        Validated PdCode with arc labels normalised to 1..2n

    Raises:
        PdParseError: syntax, multiplicity, orientation or planarity problems
    """
    errors: List[str] = []
    text = text.strip()
    if text.startswith("{"):
        crossings, unknots, outer = _parse_json(text, errors)
    else:
        crossings, unknots, outer = _parse_text(text, errors)
    if errors:
        raise PdParseError(errors)
    errors = _multiplicity_errors(crossings)
    if errors:
        raise PdParseError(errors)
    pd = PdCode(normalize_labels(crossings), tuple(unknots), outer)
    # orientation and planarity
    arcs = orient_arcs(pd.crossings)
    _trace_cycles(pd.crossings, arcs)
    logger.debug(f"Parsed PD code with {pd.crossing_count} crossings and {len(pd.unknots)} unknots")
    return pd


# ---------------------------------------------------------------------------
# orientation

def _endpoints(crossings) -> Dict[int, List[Port]]:
    ends: Dict[int, List[Port]] = {}
    for k, x in enumerate(crossings):
        for s, a in enumerate(x):
            ends.setdefault(a, []).append((k, s))
    return ends


def orient_arcs(crossings: Sequence[Tuple[int, int, int, int]]) -> Dict[int, Arc]:
    """
    Direct every arc along its component.

    Slot 0 is an incoming and slot 2 an outgoing end of the under-strand.  A
    component that never passes under is oriented so that the successor of its
    smallest arc is the smaller of that arc's two neighbours.
    """
    ends = _endpoints(crossings)
    arcs: Dict[int, Arc] = {}
    component = 0
    for start in sorted(ends):
        if start in arcs:
            continue
        seq: List[Tuple[int, Port, Port]] = []
        label, tail = start, ends[start][0]
        head = ends[start][1]
        while True:
            seq.append((label, tail, head))
            k, s = head
            nxt_port = (k, (s + 2) % 4)
            nxt = crossings[k][nxt_port[1]]
            if nxt == start and nxt_port == seq[0][1]:
                break
            pair = ends[nxt]
            label, tail = nxt, nxt_port
            head = pair[1] if pair[0] == nxt_port else pair[0]
            if len(seq) > 4 * len(crossings):
                raise PdParseError([f"strand through arc {start} does not close up"])
        votes = set()
        for _, t, h in seq:
            if h[1] == 0 or t[1] == 2:
                votes.add(1)
            if h[1] == 2 or t[1] == 0:
                votes.add(-1)
        if len(votes) == 2:
            raise PdParseError([f"inconsistent orientation on the component through arc {start}"])
        if votes:
            forward = 1 in votes
        elif len(seq) == 1:
            forward = seq[0][2][1] == 1
        else:
            forward = seq[1][0] <= seq[-1][0]
        for lab, t, h in seq:
            if lab in arcs:
                raise PdParseError([f"arc {lab} is traversed twice by one component"])
            arcs[lab] = Arc(lab, t, h, component) if forward else Arc(lab, h, t, component)
        component += 1
    for k, x in enumerate(crossings):
        heads = sum(1 for s in range(4) if arcs[x[s]].head == (k, s))
        if heads != 2:
            raise PdParseError([f"crossing {k} does not have two incoming strands"])
    return arcs


def crossing_sign(crossings, arcs: Mapping[int, Arc], k: int) -> int:
    """+1 iff the over-strand enters through slot 1."""
    return 1 if arcs[crossings[k][1]].head == (k, 1) else -1


# ---------------------------------------------------------------------------
# faces

def _next_half_edge(crossings, arcs, he: HalfEdge) -> HalfEdge:
    arc = arcs[he[0]]
    k, s = arc.head if he[1] > 0 else arc.tail
    port = (k, (s - 1) % 4)
    label = crossings[k][port[1]]
    return (label, 1) if arcs[label].tail == port else (label, -1)


def _trace_cycles(crossings, arcs) -> Tuple[List[Tuple[HalfEdge, ...]], Dict[HalfEdge, int]]:
    """Face cycles of the rotation system, each keeping its face on the left."""
    cycles: List[Tuple[HalfEdge, ...]] = []
    cycle_of: Dict[HalfEdge, int] = {}
    for label in sorted(arcs):
        for direction in (1, -1):
            he = (label, direction)
            if he in cycle_of:
                continue
            cycle = []
            while he not in cycle_of:
                cycle_of[he] = len(cycles)
                cycle.append(he)
                he = _next_half_edge(crossings, arcs, he)
            cycles.append(tuple(cycle))
    if crossings:
        components = _graph_components(crossings)
        euler = len(crossings) - 2 * len(crossings) + len(cycles)
        if euler != 2 * len(components):
            raise PdParseError([
                f"rotation system is not planar: V - E + F = {euler}, expected {2 * len(components)}"
            ])
    return cycles, cycle_of


def _graph_components(crossings) -> List[List[int]]:
    ends = _endpoints(crossings)
    parent = list(range(len(crossings)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for pair in ends.values():
        ra, rb = find(pair[0][0]), find(pair[1][0])
        if ra != rb:
            parent[ra] = rb
    groups: Dict[int, List[int]] = {}
    for k in range(len(crossings)):
        groups.setdefault(find(k), []).append(k)
    return sorted(groups.values())


def build_diagram(pd: PdCode, outer_face: Optional[int] = None) -> Diagram:
    """
    Orient, sign, trace faces and colour a PD code.

    Args:
        pd: validated PD code
        outer_face: region id to make unbounded; defaults to pd.outer_face,
            then to the region right of the smallest arc of each piece

    Raises:
        FaceSelectionError: the selector names a nonexistent region
    """
    crossings = pd.crossings
    arcs = orient_arcs(crossings) if crossings else {}
    signed = tuple(Crossing(k, x, crossing_sign(crossings, arcs, k)) for k, x in enumerate(crossings))
    cycles, cycle_of = _trace_cycles(crossings, arcs) if crossings else ([], {})

    components = _graph_components(crossings) if crossings else []
    outer_cycles = []
    for comp in components:
        smallest = min(crossings[k][s] for k in comp for s in range(4))
        outer_cycles.append(cycle_of[(smallest, -1)])

    selector = outer_face if outer_face is not None else pd.outer_face
    region_of_cycle = _merge_outer(cycles, outer_cycles)
    n_regions = (max(region_of_cycle) + 1) if region_of_cycle else 1
    if selector is not None:
        if selector < 0 or selector >= n_regions + len(pd.unknots):
            raise FaceSelectionError(f"outer face {selector} does not exist (diagram has "
                                     f"{n_regions + len(pd.unknots)} regions)")
        if selector >= n_regions:
            raise FaceSelectionError(f"region {selector} lies inside an unknot and cannot be outer")
        chosen = [c for c, r in enumerate(region_of_cycle) if r == selector]
        if len(chosen) == 1:
            comp_of = {k: i for i, comp in enumerate(components) for k in comp}
            owner = comp_of[arcs[cycles[chosen[0]][0][0]].tail[0]]
            outer_cycles[owner] = chosen[0]
            region_of_cycle = _merge_outer(cycles, outer_cycles)
            logger.info(f"Outer face overridden to region {selector}")

    outer = region_of_cycle[outer_cycles[0]] if outer_cycles else 0
    region_cycles: Dict[int, List[Tuple[HalfEdge, ...]]] = {}
    for c, r in enumerate(region_of_cycle):
        region_cycles.setdefault(r, []).append(cycles[c])
    base_regions = (max(region_of_cycle) + 1) if region_of_cycle else 1
    if not region_cycles:
        region_cycles[0] = []

    face_of = {he: region_of_cycle[c] for he, c in cycle_of.items()}

    # unknots: interior region ids follow the crossing regions
    hosts, interiors = [], []
    for j, u in enumerate(pd.unknots):
        interior = base_regions + j
        host = outer if u.face is None else u.face
        if host < 0 or host >= interior:
            raise FaceSelectionError(f"unknot {j + 1} placed in nonexistent region {u.face}")
        hosts.append(host)
        interiors.append(interior)

    colors = _color_regions(arcs, face_of, outer, base_regions, hosts, interiors)
    regions = []
    for r in range(base_regions + len(pd.unknots)):
        on_boundary = tuple(j for j in range(len(pd.unknots)) if hosts[j] == r or interiors[j] == r)
        regions.append(Region(r, tuple(region_cycles.get(r, ())), colors[r], r == outer, on_boundary))

    d = Diagram(
        pd=pd,
        crossings=signed,
        arcs=arcs,
        regions=tuple(regions),
        face_of=face_of,
        outer=outer,
        unknot_hosts=tuple(hosts),
        unknot_regions=tuple(interiors),
        digest=diagram_digest({**pd.to_dict(), "outer_face": selector}),
    )
    logger.debug(f"Diagram built: n_plus={d.n_plus}, n_minus={d.n_minus}, {len(regions)} regions")
    return d


def _merge_outer(cycles, outer_cycles) -> List[int]:
    """Region id per face cycle; the outer cycles of all pieces share one region."""
    outer_set = set(outer_cycles)
    region_of_cycle: List[int] = []
    outer_region = None
    next_id = 0
    for c in range(len(cycles)):
        if c in outer_set:
            if outer_region is None:
                outer_region = next_id
                next_id += 1
            region_of_cycle.append(outer_region)
        else:
            region_of_cycle.append(next_id)
            next_id += 1
    return region_of_cycle


def _color_regions(arcs, face_of, outer, base_regions, hosts, interiors) -> Dict[int, str]:
    adjacency: Dict[int, set] = {r: set() for r in range(base_regions)}
    for label in arcs:
        left, right = face_of[(label, 1)], face_of[(label, -1)]
        adjacency[left].add(right)
        adjacency[right].add(left)
    colors = {outer: WHITE}
    queue = deque([outer])
    while queue:
        r = queue.popleft()
        for other in sorted(adjacency[r]):
            want = BLACK if colors[r] == WHITE else WHITE
            if other not in colors:
                colors[other] = want
                queue.append(other)
            elif colors[other] != want:
                raise PdParseError([f"regions {r} and {other} cannot be checkerboard coloured"])
    for r in range(base_regions):
        colors.setdefault(r, WHITE)
    for host, interior in zip(hosts, interiors):
        colors[interior] = BLACK if colors[host] == WHITE else WHITE
    return colors


# ---------------------------------------------------------------------------
# flows

def canonical_flow(d: Diagram) -> Flow:
    """+1 on a segment iff the region on its left is white."""
    values = {label: (1 if d.regions[d.left_region(label)].color == WHITE else -1) for label in d.arcs}
    for j, u in enumerate(d.pd.unknots):
        # a clockwise circle has its host on the left
        left = d.unknot_hosts[j] if u.orientation == CW else d.unknot_regions[j]
        values[d.unknot_segment(j)] = 1 if d.regions[left].color == WHITE else -1
    return Flow(values)


def recoloring_delta(d: Diagram, face: int) -> List[int]:
    """Segments whose flow flips when `face` is made the outer region."""
    before = canonical_flow(d)
    after = canonical_flow(build_diagram(d.pd, outer_face=face))
    return [s for s, v in before.items() if after[s] != v]


# ---------------------------------------------------------------------------
# constructions

def mirror_pd(pd: PdCode) -> PdCode:
    """Change every crossing; the over-strand's incoming arc becomes slot 0."""
    arcs = orient_arcs(pd.crossings) if pd.crossings else {}
    mirrored = []
    for k, x in enumerate(pd.crossings):
        a, b, c, e = x
        if crossing_sign(pd.crossings, arcs, k) > 0:
            mirrored.append((b, c, e, a))
        else:
            mirrored.append((e, a, b, c))
    return PdCode(tuple(mirrored), pd.unknots, pd.outer_face)


def disjoint_union(first: PdCode, second: PdCode) -> PdCode:
    """Split union; the second code's arcs are shifted past the first's."""
    shift = first.arc_count
    crossings = first.crossings + tuple(tuple(a + shift for a in x) for x in second.crossings)
    unknots = []
    for u in first.unknots + second.unknots:
        if u.face is not None:
            logger.warning("Unknot placement dropped in disjoint union; placing it in the outer region")
        unknots.append(UnknotRecord(u.orientation))
    return PdCode(crossings, tuple(unknots))


def braid_closure_pd(word: Sequence[int], strands: int) -> PdCode:
    """
    Closure of a braid word; generator i > 0 crosses positions i and i+1 with
    a positive crossing, -i with a negative one.  Positions that no generator
    touches close up into unknots.
    """
    next_label = strands + 1
    current = list(range(1, strands + 1))
    crossings = []
    touched = set()
    for g in word:
        i = abs(g) - 1
        if not 0 <= i < strands - 1:
            raise ValueError(f"generator {g} out of range for {strands} strands")
        left_in, right_in = current[i], current[i + 1]
        left_out, right_out = next_label, next_label + 1
        next_label += 2
        if g > 0:
            crossings.append([left_in, right_in, right_out, left_out])
        else:
            crossings.append([right_in, right_out, left_out, left_in])
        current[i], current[i + 1] = left_out, right_out
        touched.update((i, i + 1))
    closing = {current[p]: p + 1 for p in range(strands) if p in touched}
    crossings = [tuple(closing.get(a, a) for a in x) for x in crossings]
    unknots = tuple(UnknotRecord(CCW) for p in range(strands) if p not in touched)
    return PdCode(normalize_labels(crossings), unknots)


def _check_matching(matching: Sequence[Tuple[int, int]], strands: int, side: str) -> List[Tuple[int, int]]:
    pairs = [tuple(sorted(p)) for p in matching]
    if sorted(p for pair in pairs for p in pair) != list(range(1, strands + 1)):
        raise ValueError(f"{side} caps must pair up positions 1..{strands} exactly once")
    for a, b in pairs:
        for c, d in pairs:
            if a < c < b < d:
                raise ValueError(f"{side} caps ({a},{b}) and ({c},{d}) cross")
    return pairs


def plat_closure_pd(word: Sequence[int], strands: int,
                    top: Optional[Sequence[Tuple[int, int]]] = None,
                    bottom: Optional[Sequence[Tuple[int, int]]] = None) -> PdCode:
    """
    Braid word closed with caps instead of returning strands.

    `top` and `bottom` pair up positions (1-based, non-crossing); the default
    joins neighbours (1,2), (3,4), ... at both ends.  Every component is
    oriented along its first traversal, so the result is a link with some
    orientation, not a chosen one.
    """
    if strands < 2 or strands % 2:
        raise ValueError(f"a plat needs an even number of strands, got {strands}")
    default = [(p, p + 1) for p in range(1, strands, 2)]
    top = _check_matching(top or default, strands, "top")
    bottom = _check_matching(bottom or default, strands, "bottom")

    # crossing corners counterclockwise: 0 bottom-left, 1 bottom-right, 2 top-right, 3 top-left
    wires: Dict[tuple, List[tuple]] = {}

    def join(a, b):
        wires.setdefault(a, []).append(b)
        wires.setdefault(b, []).append(a)

    current = [("bottom", p) for p in range(strands)]
    under = []
    for k, g in enumerate(word):
        i = abs(g) - 1
        if not 0 <= i < strands - 1:
            raise ValueError(f"generator {g} out of range for {strands} strands")
        join(current[i], (k, 0))
        join(current[i + 1], (k, 1))
        current[i], current[i + 1] = (k, 3), (k, 2)
        under.append((0, 2) if g > 0 else (1, 3))
    for p in range(strands):
        join(current[p], ("top", p))
    for side, pairs in (("bottom", bottom), ("top", top)):
        for a, b in pairs:
            join((side, a - 1), (side, b - 1))

    seen_terminals = set()

    def follow(port):
        prev, node = port, wires[port][0]
        while isinstance(node[0], str):
            seen_terminals.add(node)
            a, b = wires[node]
            prev, node = node, (b if a == prev else a)
        return node

    labels: Dict[tuple, int] = {}
    entered: Dict[int, set] = {}
    label = 0
    for k in range(len(word)):
        for corner in (0, 1):
            start = port = (k, corner)
            if start in labels:
                continue
            while True:
                entered.setdefault(port[0], set()).add(port[1])
                out = (port[0], (port[1] + 2) % 4)
                label += 1
                labels[out] = label
                port = follow(out)
                labels[port] = label
                if port == start:
                    break

    crossings = []
    for k, (a, b) in enumerate(under):
        start = a if a in entered[k] else b
        crossings.append(tuple(labels[(k, (start + j) % 4)] for j in range(4)))

    # wires that never reach a crossing close up into unknots
    loops = 0
    for node in wires:
        if isinstance(node[0], str) and node not in seen_terminals:
            loops += 1
            stack = [node]
            while stack:
                n = stack.pop()
                if n not in seen_terminals:
                    seen_terminals.add(n)
                    stack.extend(wires[n])
    unknots = tuple(UnknotRecord(CCW) for _ in range(loops))
    return PdCode(normalize_labels(crossings), unknots)


def rational_pd(terms: Sequence[int]) -> PdCode:
    """
    Two-bridge link from its Conway notation a1 a2 ... an as a 4-plat
    s2^a1 s1^-a2 s2^a3 ...; an even-length sequence is rewritten to odd
    length by splitting off a final 1.
    """
    terms = list(terms)
    if not terms or any(a < 1 for a in terms):
        raise ValueError(f"Conway notation needs positive terms, got {terms}")
    if len(terms) % 2 == 0:
        terms[-1] -= 1
        terms.append(1)
    word: List[int] = []
    for j, a in enumerate(terms):
        word += [2 if j % 2 == 0 else -1] * a
    return plat_closure_pd(word, 4)


def pretzel_pd(twists: Sequence[int]) -> PdCode:
    """Pretzel link P(p1, ..., pk): columns of |pi| half twists, handedness from the sign."""
    twists = list(twists)
    if len(twists) < 2 or 0 in twists:
        raise ValueError(f"a pretzel needs at least two non-zero columns, got {twists}")
    strands = 2 * len(twists)
    word = [(1 if p > 0 else -1) * (2 * j + 1) for j, p in enumerate(twists) for _ in range(abs(p))]
    caps = [(1, strands)] + [(2 * j, 2 * j + 1) for j in range(1, len(twists))]
    return plat_closure_pd(word, strands, top=caps, bottom=caps)

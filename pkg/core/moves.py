"""
Elementary cobordisms (birth, death, saddle) as chain maps, movie scripts and
their evaluation.

All three Morse moves keep the crossings, so source and target cubes share
vertices.  The map at vertex u is the unsigned local TQFT map times a sign
sigma_u, propagated along cube edges as sigma_v = eps_uv * eps'_uv * sigma_u
from a nominal sign at the all-0 vertex.
"""
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from core.chain_map import ChainMap
from core.cube import MERGE, SPLIT, UNZIP, Resolution, SurgeryDescriptor, Vertex, flip, vertices
from core.diagram import (CW, Diagram, FaceSelectionError, PdCode, PdParseError, UnknotRecord,
                          build_diagram, canonical_flow, orient_arcs, parse_pd)
from core.differential import AUTO, ChainComplex, surgery_terms, totalize
from core.generators import ONE
from core.linalg import SparseMatrix
from core.logger import logger
from core.models import MovieStepReport
from core.monitoring import TimerContext, increment_counter


class MovieError(ValueError):
    """A movie step does not apply to the current diagram."""


# ---------------------------------------------------------------------------
# vertex-wise assembly

LocalRule = Callable[[Vertex, Dict[int, str]], List[Tuple[Dict[int, str], int]]]


def _propagate_signs(source: ChainComplex, target: ChainComplex, nominal: int) -> Dict[Vertex, int]:
    n = source.diagram.n
    sigma = {(0,) * n: nominal}
    queue = deque([(0,) * n])
    while queue:
        u = queue.popleft()
        for i in range(n):
            if u[i]:
                continue
            v = flip(u, i)
            want = source.signs[(u, i)] * target.signs[(u, i)] * sigma[u]
            if v not in sigma:
                sigma[v] = want
                queue.append(v)
            elif sigma[v] != want:
                raise MovieError(f"vertex signs disagree at {v}; edge signs of the two cubes are not compatible")
    return sigma


def assemble(source: ChainComplex, target: ChainComplex, rule: LocalRule, nominal: int, qshift: int) -> ChainMap:
    """Chain map whose vertex-u block is sigma_u times `rule` applied to each generator."""
    sigma = _propagate_signs(source, target, nominal)
    blocks = {h: SparseMatrix(target.rank(h), source.rank(h)) for h in source.hdegs()}
    for u in vertices(source.diagram.n):
        for g in source.cube.basis[u]:
            h, col = source.position[g.key]
            for labels, coeff in rule(u, dict(g.labels)):
                key = (u, tuple(sorted(labels.items())))
                if key not in target.position:
                    raise MovieError(f"image {labels} at vertex {u} is not a generator of the target")
                _, row = target.position[key]
                blocks[h].add(row, col, sigma[u] * coeff)
    increment_counter("morse_maps")
    return ChainMap(source, target, blocks, qshift)


def _translate(dst: Resolution, labels: Mapping[int, str], seg_map: Mapping[int, int], skip=()) -> Dict[int, str]:
    return {dst.circle_of[seg_map[c]]: v for c, v in labels.items() if c not in skip}


# ---------------------------------------------------------------------------
# births and deaths

def birth_pd(pd: PdCode, face: Optional[int]) -> PdCode:
    return PdCode(pd.crossings, pd.unknots + (UnknotRecord(CW, face),), pd.outer_face)


def birth_map(c: ChainComplex, face: Optional[int] = None, policy: str = AUTO) -> Tuple[ChainComplex, ChainMap]:
    """New clockwise circle in region `face`, labelled One."""
    d = c.diagram
    if face is not None and not 0 <= face < len(d.regions):
        raise MovieError(f"birth: region {face} does not exist")
    try:
        d2 = build_diagram(birth_pd(d.pd, face))
    except FaceSelectionError as e:
        raise MovieError(f"birth: {e}") from e
    c2 = totalize(d2, policy=policy)
    new_segment = d2.unknot_segment(len(d.pd.unknots))
    seg_map = {s: s for s in d.segment_ids()}

    def rule(u, labels):
        dst = c2.cube.resolutions[u]
        out = _translate(dst, labels, seg_map)
        out[dst.circle_of[new_segment]] = ONE
        return [(out, 1)]

    return c2, assemble(c, c2, rule, 1, 1)


def _innermost(d: Diagram, j: int) -> bool:
    return all(host != d.unknot_regions[j] for host in d.unknot_hosts)


def death_pd(d: Diagram, j: int) -> PdCode:
    removed = d.unknot_regions[j]
    kept = []
    for k, u in enumerate(d.pd.unknots):
        if k == j:
            continue
        face = u.face
        if face is not None and face > removed:
            face -= 1
        kept.append(UnknotRecord(u.orientation, face))
    return PdCode(d.pd.crossings, tuple(kept), d.pd.outer_face)


def death_map(c: ChainComplex, comp: int, policy: str = AUTO) -> Tuple[ChainComplex, ChainMap]:
    """Cap off unknot `comp` (1-based): One -> 0, X -> flow * (labels without it)."""
    d = c.diagram
    j = comp - 1
    if not 0 <= j < len(d.pd.unknots):
        raise MovieError(f"death: component {comp} is not a crossingless circle")
    if not _innermost(d, j):
        raise MovieError(f"death: circle {comp} has other circles inside it")
    d2 = build_diagram(death_pd(d, j))
    c2 = totalize(d2, policy=policy)
    removed = d.unknot_segment(j)
    eps = canonical_flow(d)[removed]
    seg_map = {s: (s if s < removed else s - 1) for s in d.segment_ids() if s != removed}

    def rule(u, labels):
        if labels[removed] == ONE:
            return []
        return [(_translate(c2.cube.resolutions[u], labels, seg_map, skip=(removed,)), eps)]

    return c2, assemble(c, c2, rule, 1, 1)


# ---------------------------------------------------------------------------
# saddles

@dataclass(frozen=True)
class SaddlePlan:
    pd: PdCode
    seg_map: Dict[int, int]
    a: int
    b: int
    nominal_split_sign: int


def _common_region(d: Diagram, a: int, b: int) -> Optional[int]:
    """Region met by both arcs while traversing its boundary in the same direction."""
    for direction in (1, -1):
        if d.face_of[(a, direction)] == d.face_of[(b, direction)]:
            return d.face_of[(a, direction)]
    return None


def plan_saddle(d: Diagram, a: int, b: int) -> SaddlePlan:
    """Target PD code and segment correspondence for an oriented saddle between a and b."""
    flow = canonical_flow(d)
    arcs_n = 2 * d.n
    is_unknot = d.is_unknot_segment
    if a == b and not is_unknot(a):
        raise MovieError(f"saddle: arc {a} cannot be banded to itself")
    for s in (a, b):
        if s not in d.segment_ids():
            raise MovieError(f"saddle: no arc {s}")
    unknots = list(d.pd.unknots)
    if a == b:
        j = a - arcs_n - 1
        copy = UnknotRecord(unknots[j].orientation, unknots[j].face)
        pd = PdCode(d.pd.crossings, tuple(unknots) + (copy,), d.pd.outer_face)
        return SaddlePlan(pd, {s: s for s in d.segment_ids()}, a, d.unknot_segment(len(unknots)), flow[a])
    if is_unknot(a) and not is_unknot(b):
        a, b = b, a
    if not is_unknot(a) and not is_unknot(b):
        region = _common_region(d, a, b)
        if region is None:
            raise MovieError(f"saddle: arcs {a} and {b} do not run around a common region in the same sense")
        if any(host != d.outer for host in d.unknot_hosts):
            raise MovieError("saddle between crossing arcs needs every crossingless circle in the outer region")
        ha, hb = d.arcs[a].head, d.arcs[b].head
        rows = [list(x) for x in d.pd.crossings]
        rows[ha[0]][ha[1]] = b
        rows[hb[0]][hb[1]] = a
        crossings = tuple(tuple(x) for x in rows)
        try:
            new_arcs = orient_arcs(crossings)
        except PdParseError as e:
            raise MovieError(f"saddle on arcs {a},{b} breaks the orientation: {e}") from e
        for label in (a, b):
            if new_arcs[label].head not in (ha, hb) or new_arcs[label].tail != d.arcs[label].tail:
                raise MovieError(f"saddle on arcs {a},{b} does not preserve orientations")
        pd = PdCode(crossings, tuple(UnknotRecord(u.orientation) for u in unknots))
        return SaddlePlan(pd, {s: s for s in d.segment_ids()}, a, b, flow[a])
    if not is_unknot(a):
        j = b - arcs_n - 1
        host = d.unknot_hosts[j]
        if not _innermost(d, j):
            raise MovieError(f"saddle: circle {j + 1} has other circles inside it")
        forward_in_host = d.face_of[(a, 1)] == host
        backward_in_host = d.face_of[(a, -1)] == host
        if not (forward_in_host or backward_in_host):
            raise MovieError(f"saddle: arc {a} does not border the region of circle {j + 1}")
        if (unknots[j].orientation == CW) != forward_in_host:
            raise MovieError(f"saddle: circle {j + 1} is oriented against arc {a}")
    else:
        ja, jb = a - arcs_n - 1, b - arcs_n - 1
        if d.unknot_hosts[ja] != d.unknot_hosts[jb] or unknots[ja].orientation != unknots[jb].orientation:
            raise MovieError(f"saddle: circles {ja + 1} and {jb + 1} are not parallel in one region")
        if not _innermost(d, jb):
            raise MovieError(f"saddle: circle {jb + 1} has other circles inside it")
        if a > b:
            a, b = b, a
        j = b - arcs_n - 1
    removed_region = d.unknot_regions[j]
    kept = []
    for k, u in enumerate(unknots):
        if k == j:
            continue
        face = u.face
        if face is not None and face > removed_region:
            face -= 1
        kept.append(UnknotRecord(u.orientation, face))
    pd = PdCode(d.pd.crossings, tuple(kept), d.pd.outer_face)
    seg_map = {}
    for s in d.segment_ids():
        if s == b:
            seg_map[s] = a
        else:
            seg_map[s] = s if s < b else s - 1
    return SaddlePlan(pd, seg_map, a, b, flow[a])


def saddle_map(c: ChainComplex, a: int, b: int, policy: str = AUTO) -> Tuple[ChainComplex, ChainMap]:
    """Merge or split along a band joining a and b, vertex by vertex; q drops by 1."""
    plan = plan_saddle(c.diagram, a, b)
    try:
        d2 = build_diagram(plan.pd)
    except PdParseError as e:
        raise MovieError(f"saddle on arcs {a},{b} is not planar: {e}") from e
    c2 = totalize(d2, policy=policy)
    split_seen = []

    def rule(u, labels):
        src = c.cube.resolutions[u]
        dst = c2.cube.resolutions[u]
        ca = src.circle_of[plan.a]
        cb = src.circle_of.get(plan.b, ca)
        if ca != cb:
            target = dst.circle_of[plan.seg_map[plan.a]]
            s = SurgeryDescriptor(-1, UNZIP, MERGE, (ca, cb), (target,), 1)
        else:
            p = dst.circle_of[plan.seg_map[plan.a]]
            q = dst.circle_of[plan.seg_map.get(plan.b, plan.b)]
            s = SurgeryDescriptor(-1, UNZIP, SPLIT, (ca,), tuple(sorted((p, q))), plan.nominal_split_sign)
            split_seen.append(u)
        rest = _translate(dst, labels, plan.seg_map, skip=s.sources)
        local = {c_: labels[c_] for c_ in s.sources}
        return [({**rest, **out}, coeff) for out, coeff in surgery_terms(s, local)]

    origin = c.cube.resolutions[(0,) * c.diagram.n]
    merge_at_origin = origin.circle_of[plan.a] != origin.circle_of.get(plan.b, origin.circle_of[plan.a])
    nominal = 1 if merge_at_origin else plan.nominal_split_sign
    return c2, assemble(c, c2, rule, nominal, -1)


# ---------------------------------------------------------------------------
# movies

_STEP_RE = re.compile(r"^(r1 undo|r2 undo|birth|death|saddle|r1\+|r1-|r2|r3)(?=\s|$)(.*)$")
_PARAM_RE = re.compile(r"(\w+)=([\d,]+)")


@dataclass
class MovieStep:
    kind: str
    params: Dict[str, List[int]] = field(default_factory=dict)
    line: int = 0
    text: str = ""

    def one(self, name: str) -> int:
        values = self.params.get(name)
        if not values or len(values) != 1:
            raise MovieError(f"line {self.line}: '{self.kind}' needs {name}=<int>")
        return values[0]

    def two(self, name: str) -> Tuple[int, int]:
        values = self.params.get(name)
        if not values or len(values) != 2:
            raise MovieError(f"line {self.line}: '{self.kind}' needs {name}=<int>,<int>")
        return values[0], values[1]


@dataclass
class Movie:
    initial: PdCode
    steps: List[MovieStep] = field(default_factory=list)


_REQUIRED = {
    "birth": ("face",), "death": ("comp",), "saddle": ("arcs",), "r1+": ("arc",), "r1-": ("arc",),
    "r2": ("arcs",), "r3": ("site",), "r1 undo": ("crossing",), "r2 undo": ("crossings",),
}


def parse_movie(text: str, initial: Optional[PdCode] = None) -> Movie:
    """
    One step per line; '#' starts a comment.  A line beginning with 'PD['
    gives the starting diagram, otherwise `initial` is used.
    """
    start = initial
    steps = []
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("PD["):
            start = parse_pd(line)
            continue
        match = _STEP_RE.match(line)
        if not match:
            raise MovieError(f"line {number}: unknown step '{line}'")
        kind, rest = match.group(1), match.group(2)
        params = {k: [int(v) for v in vs.split(",") if v] for k, vs in _PARAM_RE.findall(rest)}
        missing = [p for p in _REQUIRED[kind] if p not in params and not (kind == "birth" and p == "face")]
        if missing:
            raise MovieError(f"line {number}: '{kind}' is missing {', '.join(missing)}")
        steps.append(MovieStep(kind, params, number, line))
    if start is None:
        raise MovieError("movie has no starting diagram")
    return Movie(start, steps)


@dataclass
class MovieResult:
    complexes: List[ChainComplex]
    maps: List[ChainMap]
    reports: List[MovieStepReport]

    @property
    def composite(self) -> ChainMap:
        total = ChainMap.identity(self.complexes[0])
        for m in self.maps:
            total = total.then(m)
        return total


def apply_step(c: ChainComplex, step: MovieStep, policy: str = AUTO) -> Tuple[ChainComplex, ChainMap]:
    from core import reidemeister

    if step.kind == "birth":
        face = step.params.get("face", [None])[0]
        return birth_map(c, face, policy)
    if step.kind == "death":
        return death_map(c, step.one("comp"), policy)
    if step.kind == "saddle":
        return saddle_map(c, *step.two("arcs"), policy=policy)
    return reidemeister.reidemeister_step(c, step, policy)


def evaluate_movie(m: Movie, policy: str = AUTO) -> MovieResult:
    """Compose the step maps; every step map is checked against both differentials."""
    current = totalize(build_diagram(m.initial), policy=policy)
    complexes, maps, reports = [current], [], []
    with TimerContext("movie"):
        for index, step in enumerate(m.steps, 1):
            nxt, chain_map = apply_step(current, step, policy)
            bad = chain_map.failures()
            if bad:
                raise MovieError(f"step {index} ({step.text}) is not a chain map in degrees {bad}")
            report = MovieStepReport(index=index, step=step.text, source_crossings=current.diagram.n,
                                     target_crossings=nxt.diagram.n)
            report.induced = {f"{h},{q}": data["free"] for (h, q), data in chain_map.induced().items()}
            reports.append(report)
            logger.info(f"Movie step {index}: {step.text}")
            complexes.append(nxt)
            maps.append(chain_map)
            current = nxt
    return MovieResult(complexes, maps, reports)


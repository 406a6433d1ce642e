"""
Signed standard basis at each cube vertex.

A circle labelled X stands for the signed dotted cup; which facet carries the
dot is irrelevant once the flow sign is folded in, so no dot position is kept.
"""
import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Tuple

from core.cube import Resolution, Vertex, hdeg, qshift
from core.diagram import Diagram

ONE = "1"
X = "X"
LABELS = (ONE, X)


@dataclass(frozen=True)
class Generator:
    vertex: Vertex
    labels: Tuple[Tuple[int, str], ...]
    hdeg: int
    qdeg: int

    def label(self, circle: int) -> str:
        for c, value in self.labels:
            if c == circle:
                return value
        raise KeyError(circle)

    def relabel(self, changes: Mapping[int, str]) -> Dict[int, str]:
        """Labels as a dict with `changes` applied."""
        out = dict(self.labels)
        out.update(changes)
        return out

    @property
    def key(self) -> Tuple[Vertex, Tuple[Tuple[int, str], ...]]:
        return self.vertex, self.labels

    def to_json(self) -> Dict:
        return {
            "vertex": list(self.vertex),
            "labels": {f"c{c}": value for c, value in self.labels},
            "h": self.hdeg,
            "q": self.qdeg,
        }


def label_weight(labels: Iterable[str]) -> int:
    return sum(1 if value == ONE else -1 for value in labels)


def generator_qdeg(g: Generator, d: Diagram) -> int:
    """#One - #X - qshift of the vertex."""
    return label_weight(value for _, value in g.labels) - qshift(d, g.vertex)


def make_generator(d: Diagram, vertex: Vertex, labels: Mapping[int, str]) -> Generator:
    items = tuple(sorted(labels.items()))
    return Generator(vertex, items, hdeg(d, vertex), label_weight(labels.values()) - qshift(d, vertex))


def enumerate_generators(r: Resolution, d: Diagram) -> List[Generator]:
    """All 2^k labellings of the circles of r; One before X, first circle slowest."""
    circles = r.circle_ids
    h = hdeg(d, r.vertex)
    shift = qshift(d, r.vertex)
    out = []
    for values in itertools.product(LABELS, repeat=len(circles)):
        out.append(Generator(r.vertex, tuple(zip(circles, values)), h, label_weight(values) - shift))
    return out


class BasisTable:
    """Ordered generators per vertex, with index lookup."""

    def __init__(self, d: Diagram, resolutions: Mapping[Vertex, Resolution]):
        self.diagram = d
        self._basis: Dict[Vertex, List[Generator]] = {}
        self._index: Dict[Tuple, int] = {}
        for u in sorted(resolutions):
            gens = enumerate_generators(resolutions[u], d)
            self._basis[u] = gens
            for i, g in enumerate(gens):
                self._index[g.key] = i

    def __getitem__(self, u: Vertex) -> List[Generator]:
        return self._basis[u]

    def __contains__(self, u: Vertex) -> bool:
        return u in self._basis

    def vertices(self) -> List[Vertex]:
        return list(self._basis)

    def size(self, u: Vertex) -> int:
        return len(self._basis[u])

    def index_of(self, vertex: Vertex, labels: Mapping[int, str]) -> int:
        return self._index[(vertex, tuple(sorted(labels.items())))]

    def graded_rank(self, u: Vertex) -> Dict[int, int]:
        """q-degree -> count at vertex u."""
        ranks: Dict[int, int] = {}
        for g in self._basis[u]:
            ranks[g.qdeg] = ranks.get(g.qdeg, 0) + 1
        return ranks

    def total(self) -> int:
        return sum(len(v) for v in self._basis.values())

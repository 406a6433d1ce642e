"""
Degree-preserving maps between totalized complexes and the maps they induce on homology.
"""
from typing import Dict, List, Optional, Tuple

from core.differential import ChainComplex
from core.homology import HomologyBasis, induced_matrix, torsion_images
from core.linalg import SparseMatrix


class ChainMap:
    """
    blocks[h] has rows indexed by target.generators[h] and columns by
    source.generators[h]; quantum degree moves by qshift.
    """

    def __init__(self, source: ChainComplex, target: ChainComplex,
                 blocks: Optional[Dict[int, SparseMatrix]] = None, qshift: int = 0, hshift: int = 0):
        self.source = source
        self.target = target
        self.qshift = qshift
        self.hshift = hshift
        self.blocks: Dict[int, SparseMatrix] = {}
        for h in source.hdegs():
            block = (blocks or {}).get(h)
            if block is None:
                block = SparseMatrix(target.rank(h + hshift), source.rank(h))
            self.blocks[h] = block

    @classmethod
    def identity(cls, c: ChainComplex) -> "ChainMap":
        return cls(c, c, {h: SparseMatrix.identity(c.rank(h)) for h in c.hdegs()})

    def block(self, h: int) -> SparseMatrix:
        return self.blocks.get(h, SparseMatrix(self.target.rank(h + self.hshift), self.source.rank(h)))

    def then(self, other: "ChainMap") -> "ChainMap":
        """other after self."""
        if other.source is not self.target:
            raise ValueError("chain maps are not composable")
        blocks = {h: other.block(h + self.hshift) @ self.block(h) for h in self.source.hdegs()}
        return ChainMap(self.source, other.target, blocks, self.qshift + other.qshift, self.hshift + other.hshift)

    def scale(self, factor: int) -> "ChainMap":
        return ChainMap(self.source, self.target, {h: b.scale(factor) for h, b in self.blocks.items()},
                        self.qshift, self.hshift)

    def is_zero(self) -> bool:
        return all(b.is_zero() for b in self.blocks.values())

    def failures(self) -> List[int]:
        """Degrees h where d F != F d."""
        bad = []
        for h in self.source.hdegs():
            left = self.target.differential(h + self.hshift) @ self.block(h)
            right = self.block(h + 1) @ self.source.differential(h)
            if left != right:
                bad.append(h)
        return bad

    def is_chain_map(self) -> bool:
        return not self.failures()

    def restrict(self, h: int, q: int) -> SparseMatrix:
        rows = self.target.slice(h + self.hshift, q + self.qshift)
        cols = self.source.slice(h, q)
        return self.block(h).submatrix(rows, cols)

    def equals(self, other: "ChainMap") -> bool:
        return all(self.block(h) == other.block(h) for h in self.source.hdegs())

    def induced(self) -> Dict[Tuple[int, int], Dict[str, List[List[int]]]]:
        """Per source bidegree: matrix on free parts and torsion images."""
        out = {}
        for h in self.source.hdegs():
            for q in sorted({g.qdeg for g in self.source.generators[h]}):
                src = HomologyBasis(self.source, h, q)
                if not src.free_rank and not src.torsion_orders:
                    continue
                tgt = HomologyBasis(self.target, h + self.hshift, q + self.qshift)
                local = self.restrict(h, q)
                out[(h, q)] = {
                    "free": induced_matrix(src, tgt, local),
                    "torsion": torsion_images(src, tgt, local),
                }
        return out

    def to_json(self) -> Dict:
        return {
            "qshift": self.qshift,
            "hshift": self.hshift,
            "blocks": {str(h): {"shape": list(b.shape), "triplets": [list(t) for t in b.triplets()]}
                       for h, b in sorted(self.blocks.items())},
        }

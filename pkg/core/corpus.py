"""
Bundled corpus of diagrams (data/corpus.yaml).
"""
import os
from typing import List, Optional

import yaml
from pydantic import BaseModel, Field, model_validator

from core.config import get_config
from core.diagram import PdCode, braid_closure_pd, parse_pd, pretzel_pd, rational_pd
from core.logger import logger
from core.utils import resource_path


class CorpusEntry(BaseModel):
    """
    One diagram, given by exactly one source: PD text, a braid word closed up
    over `strands`, a Conway notation for a two-bridge link, or pretzel twists.

    `expected` pins the Poincare string; `determinant` and `thin` are checked
    against the computed homology when present.
    """
    name: str = Field(..., min_length=1)
    pd: Optional[str] = None
    braid: Optional[List[int]] = None
    strands: Optional[int] = Field(default=None, ge=1)
    rational: Optional[List[int]] = None
    pretzel: Optional[List[int]] = None
    expected: Optional[str] = None
    determinant: Optional[int] = Field(default=None, ge=0)
    thin: bool = False
    link: bool = False
    ladybug: bool = False

    @model_validator(mode="after")
    def check_source(self):
        sources = [s for s in (self.pd, self.braid, self.rational, self.pretzel) if s is not None]
        if len(sources) != 1:
            raise ValueError("exactly one of 'pd', 'braid', 'rational' or 'pretzel' must be given")
        if self.braid is not None:
            if self.strands is None:
                raise ValueError("'braid' needs 'strands'")
            if any(g == 0 or abs(g) >= self.strands for g in self.braid):
                raise ValueError(f"braid generators must be nonzero and below {self.strands} in absolute value")
        if self.rational is not None and (not self.rational or min(self.rational) < 1):
            raise ValueError("'rational' needs positive Conway terms")
        if self.pretzel is not None and (len(self.pretzel) < 2 or 0 in self.pretzel):
            raise ValueError("'pretzel' needs at least two non-zero columns")
        return self

    def pd_code(self) -> PdCode:
        if self.pd is not None:
            return parse_pd(self.pd)
        if self.rational is not None:
            return rational_pd(self.rational)
        if self.pretzel is not None:
            return pretzel_pd(self.pretzel)
        return braid_closure_pd(self.braid, self.strands)


def load_corpus(path: Optional[str] = None) -> List[CorpusEntry]:
    """
    Read and validate the corpus file.

    Raises:
        OSError: the file is missing
        ValueError: the YAML does not describe a list of entries
    """
    path = resource_path(path or get_config("corpus.path", "data/corpus.yaml"))
    if not os.path.exists(path):
        raise FileNotFoundError(f"corpus file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    entries = data.get("diagrams") if isinstance(data, dict) else None
    if not isinstance(entries, list):
        raise ValueError(f"{path}: expected a 'diagrams' list")
    corpus = [CorpusEntry(**entry) for entry in entries]
    logger.info(f"Loaded {len(corpus)} corpus diagrams from {path}")
    return corpus


def find_entry(corpus: List[CorpusEntry], name: str) -> CorpusEntry:
    for entry in corpus:
        if entry.name == name:
            return entry
    raise KeyError(name)

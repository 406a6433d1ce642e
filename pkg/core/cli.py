"""
Command line front door: compute, verify, compare, movie and burnside-dump.

Exit codes: 0 success, 1 input error, 2 verification failure.
"""
import argparse
import json
import os
import sys
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from core.burnside import burnside_report, conjugate_matches, solve_diagonal_phi, SignSolveError
from core.config import get_config
from core.corpus import load_corpus
from core.cube import resolution_to_dict
from core.diagram import Diagram, PdCode, build_diagram, parse_pd
from core.differential import PLAIN, ChainComplex, totalize, verify_complex
from core.homology import (BigradedGroup, determinant, euler_characteristic, homology, is_thin,
                           laurent_string, poincare_string, to_csv)
from core.logger import logger, set_level
from core.models import CompareReport, CorpusReport, DiagramReport, RunConfig
from core.monitoring import TimerContext, get_metrics_summary
from core.moves import evaluate_movie, parse_movie
from core.settings import OUTPUT_FORMATS, VERIFY_LEVELS, load_settings

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2

Outcome = Tuple[int, str]


def _first(*values):
    for v in values:
        if v is not None:
            return v
    return None


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """CLI flag > FOAMKH_* environment > config.yaml > built-in default."""
    settings = load_settings()
    return RunConfig(
        threads=_first(args.threads, settings.threads, get_config("compute.threads"), 1),
        level=_first(args.level, settings.level, get_config("compute.level"), "full"),
        output_format=_first(args.format, settings.output_format, get_config("output.format"), "text"),
        json_indent=_first(get_config("output.json_indent"), 2),
        log_level=_first(args.log_level, settings.log_level, get_config("logging.level"), "INFO"),
        sign_policy=_first(args.sign_policy, get_config("compute.sign_policy"), "auto"),
        memoize=_first(get_config("compute.memoize"), True),
        corpus_path=_first(getattr(args, "corpus", None), settings.corpus_path, get_config("corpus.path"),
                           "data/corpus.yaml"),
        outer_face=args.outer_face,
    )


def read_pd(source: str) -> PdCode:
    """A path to a file holding a PD code, or the code itself."""
    if os.path.isfile(source):
        with open(source, "r", encoding="utf-8") as f:
            return parse_pd(f.read())
    return parse_pd(source)


def load_diagram(pd: PdCode, cfg: RunConfig) -> Diagram:
    outer = cfg.outer_face if cfg.outer_face is not None else pd.outer_face
    if cfg.outer_face is not None:
        logger.warning(f"Outer face overridden to region {cfg.outer_face}")
    return build_diagram(pd, outer)


def _complex(d: Diagram, cfg: RunConfig, policy: Optional[str] = None) -> ChainComplex:
    return totalize(d, policy=policy or cfg.sign_policy, threads=cfg.threads, memoize=cfg.memoize)


def _dumps(payload, cfg: RunConfig) -> str:
    return json.dumps(payload, indent=cfg.json_indent or None)


# ---------------------------------------------------------------------------
# compute

def _homology_table(g: BigradedGroup) -> List[str]:
    lines = []
    for (h, q), s in g.items():
        torsion = " ".join(f"Z/{t}" for t in s.torsion)
        lines.append(f"  h={h:>3} q={q:>4}  rank {s.free_rank}" + (f"  torsion {torsion}" if torsion else ""))
    return lines


def cmd_compute(cfg: RunConfig, source: str) -> Outcome:
    d = load_diagram(read_pd(source), cfg)
    with TimerContext("compute"):
        c = _complex(d, cfg)
        g = homology(c, cfg.threads)
    if cfg.output_format == "json":
        payload = {
            "digest": c.digest,
            "crossings": d.n,
            "sign_source": c.sign_source,
            "poincare": poincare_string(g),
            "euler": laurent_string(euler_characteristic(g)),
            "homology": [row.model_dump() for row in g.rows()],
        }
        return EXIT_OK, _dumps(payload, cfg)
    if cfg.output_format == "csv":
        return EXIT_OK, to_csv(g).rstrip("\n")
    return EXIT_OK, "\n".join([poincare_string(g)] + _homology_table(g))


# ---------------------------------------------------------------------------
# verify

def verify_diagram(name: str, pd: PdCode, cfg: RunConfig, expected: Optional[str] = None,
                   det: Optional[int] = None, thin: bool = False) -> DiagramReport:
    """
    C1-C5, the plain oracle and (at level full) the Burnside suite for one
    diagram, plus whichever of the Poincare string, determinant and thinness
    the caller pins.
    """
    report = DiagramReport(name=name, crossings=pd.crossing_count, poincare="", expected=expected, determinant=det)
    try:
        d = load_diagram(pd, cfg)
        c = _complex(d, cfg)
        plain = _complex(d, cfg, PLAIN)
        report.verification = verify_complex(c)
        g = homology(c, cfg.threads)
        report.poincare = poincare_string(g)
        report.matches_plain = g == homology(plain, cfg.threads)
        if expected is not None:
            report.matches_expected = report.poincare == expected
        if det is not None:
            report.matches_determinant = determinant(g) == det
        if thin:
            report.thin = is_thin(g)
        if cfg.level == "full":
            report.burnside = burnside_report(c, plain, cfg.threads)
    except RuntimeError as e:
        logger.error(f"{name}: {e}")
        report.error = f"{type(e).__name__}: {e}"
    return report


def _check_line(check) -> str:
    if check.checked == 0:
        return f"    {check.name}: vacuous"
    status = "ok" if check.passed else f"FAILED ({check.failures[0]})"
    return f"    {check.name}: {status} [{check.checked} checked]"


def render_corpus(report: CorpusReport, cfg: RunConfig) -> str:
    if cfg.output_format == "json":
        payload = report.model_dump(exclude={"metrics"})
        payload["passed"] = report.passed
        for entry, d in zip(payload["diagrams"], report.diagrams):
            entry["passed"] = d.passed
        return _dumps(payload, cfg)
    if cfg.output_format == "csv":
        lines = ["name,crossings,passed,poincare"]
        lines += [f"{d.name},{d.crossings},{d.passed},\"{d.poincare}\"" for d in report.diagrams]
        return "\n".join(lines)
    lines = []
    for d in report.diagrams:
        lines.append(f"{d.name}: {'PASS' if d.passed else 'FAIL'}  {d.poincare}")
        if d.error:
            lines.append(f"    error: {d.error}")
        if d.expected is not None and not d.matches_expected:
            lines.append(f"    expected {d.expected}")
        if d.matches_determinant is False:
            lines.append(f"    determinant differs from {d.determinant}")
        if d.thin is False:
            lines.append("    homology is not thin")
        if not d.matches_plain:
            lines.append("    homology differs from the plain complex")
        if d.verification is not None:
            lines.extend(_check_line(c) for c in d.verification.checks)
        if d.burnside is not None:
            b = d.burnside
            ladybugs = sum(1 for f in b.faces if f.ladybug)
            hexagons = "vacuous" if not b.hexagons else ("ok" if all(h.ok for h in b.hexagons) else "FAILED")
            lines.append(f"    burnside: {len(b.faces)} faces ({ladybugs} ladybug), hexagons {hexagons}, "
                         f"phi {'ok' if b.phi_error is None else b.phi_error}")
    lines.append(f"{sum(d.passed for d in report.diagrams)}/{len(report.diagrams)} diagrams passed")
    return "\n".join(lines)


def cmd_verify(cfg: RunConfig, source: Optional[str]) -> Outcome:
    if source is not None:
        entries = [(source, read_pd(source), None, None, False)]
    else:
        entries = [(e.name, e.pd_code(), e.expected, e.determinant, e.thin) for e in load_corpus(cfg.corpus_path)]
    report = CorpusReport(level=cfg.level)
    with TimerContext("verify"):
        for name, pd, expected, det, thin in entries:
            report.diagrams.append(verify_diagram(name, pd, cfg, expected, det, thin))
    report.metrics = get_metrics_summary()
    logger.info(f"Verified {len(report.diagrams)} diagram(s); passed={report.passed}")
    logger.debug(f"Metrics: {report.metrics}")
    return (EXIT_OK if report.passed else EXIT_VERIFY), render_corpus(report, cfg)


# ---------------------------------------------------------------------------
# compare

def compare_diagram(d: Diagram, cfg: RunConfig) -> CompareReport:
    """Oriented vs plain complex, and homology for every choice of outer region."""
    c = _complex(d, cfg)
    plain = _complex(d, cfg, PLAIN)
    report = CompareReport(digest=c.digest, phi_found=False, entrywise_ok=False, homology_equal=False)
    try:
        phi = solve_diagonal_phi(c, plain)
        report.phi_found = True
        report.entrywise_ok = conjugate_matches(c, plain, phi)
    except SignSolveError as e:
        report.message = str(e)
    base = homology(c, cfg.threads)
    report.homology_equal = base == homology(plain, cfg.threads)
    for region in d.regions:
        if d.unknot_regions and region.id in d.unknot_regions:
            continue
        other = build_diagram(d.pd, region.id)
        report.outer_faces_checked.append(region.id)
        if homology(_complex(other, cfg), cfg.threads) != base:
            report.outer_face_independent = False
            report.message = report.message or f"homology changes with outer region {region.id}"
    return report


def cmd_compare(cfg: RunConfig, source: str) -> Outcome:
    report = compare_diagram(load_diagram(read_pd(source), cfg), cfg)
    code = EXIT_OK if report.passed else EXIT_VERIFY
    if cfg.output_format == "json":
        payload = report.model_dump()
        payload["passed"] = report.passed
        return code, _dumps(payload, cfg)
    lines = [
        f"phi found: {report.phi_found}",
        f"entrywise: {report.entrywise_ok}",
        f"homology equal: {report.homology_equal}",
        f"outer regions checked: {report.outer_faces_checked}",
        f"outer-face independent: {report.outer_face_independent}",
    ]
    if report.message:
        lines.append(f"note: {report.message}")
    return code, "\n".join(lines)


# ---------------------------------------------------------------------------
# movie

def cmd_movie(cfg: RunConfig, script: str, start: Optional[str] = None) -> Outcome:
    with open(script, "r", encoding="utf-8") as f:
        text = f.read()
    movie = parse_movie(text, read_pd(start) if start else None)
    result = evaluate_movie(movie, cfg.sign_policy)
    composite = result.composite
    induced = {f"{h},{q}": data for (h, q), data in composite.induced().items()}
    if cfg.output_format == "json":
        payload = {
            "steps": [r.model_dump() for r in result.reports],
            "composite": {"qshift": composite.qshift, "zero": composite.is_zero(), "induced": induced,
                          "chain": composite.to_json()},
        }
        return EXIT_OK, _dumps(payload, cfg)
    lines = []
    for r in result.reports:
        lines.append(f"step {r.index}: {r.step}  ({r.source_crossings} -> {r.target_crossings} crossings)")
        for bideg, matrix in sorted(r.induced.items()):
            lines.append(f"    H[{bideg}]: {matrix}")
    lines.append(f"composite (q shift {composite.qshift}){' = 0' if composite.is_zero() else ''}:")
    for bideg, data in induced.items():
        lines.append(f"    H[{bideg}]: free {data['free']} torsion {data['torsion']}")
    return EXIT_OK, "\n".join(lines)


# ---------------------------------------------------------------------------
# burnside-dump

def _parse_vertex(bits: str, n: int) -> Tuple[int, ...]:
    if len(bits) != n or any(b not in "01" for b in bits):
        raise ValueError(f"--vertex needs {n} binary digits, got '{bits}'")
    return tuple(int(b) for b in bits)


def cmd_burnside_dump(cfg: RunConfig, source: str, vertex: Optional[str] = None) -> Outcome:
    d = load_diagram(read_pd(source), cfg)
    c = _complex(d, cfg)
    if vertex is not None:
        u = _parse_vertex(vertex, d.n)
        return EXIT_OK, _dumps(resolution_to_dict(c.cube.resolutions[u]), cfg)
    report = burnside_report(c, _complex(d, cfg, PLAIN), cfg.threads)
    payload = report.model_dump()
    payload["passed"] = report.passed
    return (EXIT_OK if report.passed else EXIT_VERIFY), _dumps(payload, cfg)


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foamkh", description="Oriented foam Khovanov homology of link diagrams")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=OUTPUT_FORMATS, default=None, help="Report format (default: text)")
    common.add_argument("--outer-face", type=int, default=None, help="Region used as the outer face")
    common.add_argument("--threads", type=int, default=None, help="Worker threads")
    common.add_argument("--level", choices=VERIFY_LEVELS, default=None, help="Verification depth")
    common.add_argument("--sign-policy", choices=["auto", "local", "anchored", "tree"], default=None,
                        help="How cube edge signs are chosen")
    common.add_argument("--log-level", default=None, help="Console log level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", parents=[common], help="Bigraded homology of a diagram")
    p.add_argument("input", help="PD code or a file holding one")

    p = sub.add_parser("verify", parents=[common], help="Certify one diagram or the bundled corpus")
    p.add_argument("input", nargs="?", default=None, help="PD code or file (default: the corpus)")
    p.add_argument("--corpus", default=None, help="Corpus YAML file")

    p = sub.add_parser("compare", parents=[common], help="Oriented vs plain complex")
    p.add_argument("input", help="PD code or a file holding one")

    p = sub.add_parser("movie", parents=[common], help="Chain maps of a movie script")
    p.add_argument("script", help="Movie script file")
    p.add_argument("--start", default=None, help="Starting PD code when the script has no PD[...] line")

    p = sub.add_parser("burnside-dump", parents=[common], help="Burnside functor data as JSON")
    p.add_argument("input", help="PD code or a file holding one")
    p.add_argument("--vertex", default=None, help="Dump the resolution at this vertex (e.g. 010)")
    return parser


HANDLERS: Dict[str, Callable[[RunConfig, argparse.Namespace], Outcome]] = {
    "compute": lambda cfg, a: cmd_compute(cfg, a.input),
    "verify": lambda cfg, a: cmd_verify(cfg, a.input),
    "compare": lambda cfg, a: cmd_compare(cfg, a.input),
    "movie": lambda cfg, a: cmd_movie(cfg, a.script, a.start),
    "burnside-dump": lambda cfg, a: cmd_burnside_dump(cfg, a.input, a.vertex),
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_run_config(args)
        set_level(cfg.log_level)
        code, output = HANDLERS[args.command](cfg, args)
    except (ValueError, OSError) as e:
        logger.error(f"{args.command}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as e:
        logger.error(f"{args.command}: {e}")
        print(f"verification error: {e}", file=sys.stderr)
        return EXIT_VERIFY
    print(output)
    return code

"""Command-line interface: analyze, fchi, plot, sweep, construct.

Every command emits deterministic output; rationals are serialized as strings.
Exit codes: 0 success, 2 input error, 3 internal cross-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .classify import ClassificationReport, FacetReport, classify_pair
from .errors import ConsistencyFailure, InputError, TorexError
from .extremal import (
    APPENDIX,
    MAIN,
    extremal_affine,
    normal_cone_family,
    szekelyhidi_constraint,
)
from .polynomial import AffineFunction
from .polytope import LabelledPolytope, parse_polytope
from .presets import Preset, hirzebruch, hirzebruch_dk, hirzebruch_qk, simplex, square
from .rational import fmt, parse_rational
from .stability import StabilityVerdict, corner_determinant, stability

SCHEMA = "torex/1"
EXIT_OK, EXIT_INPUT, EXIT_CONSISTENCY = 0, 2, 3

# cusp configurations of the Hirzebruch sweep and of the six figure panels
HIRZEBRUCH_CONFIGS = (
    ("s-0",), ("s-infinity",), ("s-0", "s-infinity"),
    ("fibre",), ("fibre", "s-0"), ("fibre", "s-infinity"),
    ("fibre", "fibre2"), ("s-0", "fibre", "fibre2"), ("s-0", "s-infinity", "fibre"),
)
FIGURE_PANELS = (
    ("a", ("s-0",)), ("a", ("s-infinity",)),
    ("b", ("fibre",)), ("b", ("s-0", "fibre")),
    ("c", ("fibre", "fibre2")), ("c", ("fibre", "fibre2", "s-0")),
)


@dataclass(frozen=True)
class RunConfig:
    command: str
    convention: str = MAIN
    grid: int = 10
    fd_step: float = 1e-3
    out: Optional[str] = None
    jobs: int = 1

    def __post_init__(self):
        if not 0 < self.fd_step <= 0.1:
            raise InputError(f"--fd-step must lie in (0, 0.1], got {self.fd_step}")
        if self.grid < 8:
            raise InputError(f"--grid must be at least 8, got {self.grid}")
        if self.jobs < 1:
            raise InputError("--jobs must be positive")

    def to_document(self) -> dict:
        return {"convention": self.convention, "grid": self.grid, "fd_step": self.fd_step}


@dataclass(frozen=True)
class Problem:
    """A polytope with facet names and the echo of how it was specified."""

    preset: Preset
    echo: dict

    @property
    def polytope(self) -> LabelledPolytope:
        return self.preset.polytope


# -- serialization ------------------------------------------------------------


def affine_doc(g: AffineFunction) -> dict:
    return {"coefficients": [fmt(c) for c in g.coefficients], "constant": fmt(g.constant)}


def verdict_doc(v: StabilityVerdict) -> dict:
    return {
        "status": v.status,
        "witness": None if v.witness is None else {"crease": affine_doc(v.witness.h)},
        "witness_value": None if v.witness_value is None else fmt(v.witness_value),
        "determinants": [
            {"facet": e, "value": fmt(d), "sign": _sign(d)} for e, d in v.determinants
        ],
        "scan_minimum": None if v.scan_minimum is None else fmt(v.scan_minimum),
        "notes": list(v.notes),
    }


def facet_doc(f: FacetReport, names: Sequence[str]) -> dict:
    return {
        "facet": f.facet,
        "name": names[f.facet],
        "condition_ii": verdict_doc(f.condition_ii),
        "condition_iii": f.condition_iii.to_document(),
        "szekelyhidi": fmt(f.szekelyhidi),
        "poincare": None if f.params is None else f.params.to_document(),
        "notes": list(f.notes),
    }


def classification_doc(rep: ClassificationReport, names: Sequence[str]) -> dict:
    return {
        "final": rep.final,
        "condition_i": verdict_doc(rep.condition_i),
        "facets": [facet_doc(f, names) for f in rep.facets],
        "metadata": dict(sorted(rep.metadata.items())),
        "inconsistencies": list(rep.inconsistencies),
    }


def vertices_doc(P: LabelledPolytope) -> list:
    return [[fmt(c) for c in v] for v in P.vertices]


def _sign(d: Fraction) -> int:
    return (d > 0) - (d < 0)


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def envelope(command: str, problem: Optional[Problem], config: RunConfig, result) -> dict:
    return {
        "schema": SCHEMA,
        "tool": {"name": "torex", "version": __version__},
        "command": command,
        "input": None if problem is None else problem.echo,
        "config": config.to_document(),
        "result": result,
    }


# -- input ------------------------------------------------------------------------


def parse_list(text: Optional[str]) -> list[str]:
    if not text:
        return []
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_rationals(text: Optional[str], flag: str) -> list[Fraction]:
    try:
        return [parse_rational(t) for t in parse_list(text)]
    except (ValueError, TorexError) as e:
        raise InputError(f"{flag}: {e}") from None


def parse_ints(text: Optional[str], flag: str) -> list[int]:
    vals = parse_rationals(text, flag)
    if any(v.denominator != 1 for v in vals):
        raise InputError(f"{flag} expects integers")
    return [int(v) for v in vals]


def _single(values: list, flag: str):
    if len(values) != 1:
        raise InputError(f"{flag} expects exactly one value here")
    return values[0]


def build_preset(args, m=None, a=None, q=None, k=None, d=None) -> Preset:
    """The preset selected by --preset, with scalar parameters."""
    if args.preset == "simplex":
        return simplex()
    if args.preset == "square":
        return square()
    if q is not None:
        return hirzebruch_qk(q, k)
    if d is not None:
        return hirzebruch_dk(d, k)
    return hirzebruch(m, a)


def _hirzebruch_family(args) -> str:
    if args.q is not None or (args.k is not None and args.d is None):
        if args.q is None or args.k is None:
            raise InputError("the (q, k) family needs both --q and --k")
        return "qk"
    if args.d is not None:
        if args.k is None:
            raise InputError("the (d, k) family needs both --d and --k")
        return "dk"
    if args.m is None or args.a is None:
        raise InputError("the hirzebruch preset needs --m and --a (or --q/--k, --d/--k)")
    return "ma"


def load_problem(args) -> Problem:
    """Polytope from --input or --preset, with cusps from --cusp applied."""
    cusps = parse_list(args.cusp)
    if args.input:
        if args.preset:
            raise InputError("give either --input or --preset, not both")
        try:
            text = Path(args.input).read_text()
        except OSError as e:
            raise InputError(f"cannot read {args.input}: {e.strerror}") from None
        P = parse_polytope(text)
        names = json.loads(text).get("names") or [str(j) for j in range(P.n_facets)]
        if len(names) != P.n_facets or not all(isinstance(n, str) for n in names):
            raise InputError("'names' must list one string per facet")
        preset = Preset(P, tuple(names))
        echo = {"source": "file", "path": str(args.input)}
    elif args.preset:
        params: dict = {}
        if args.preset != "hirzebruch":
            extra = [f"--{n}" for n in ("m", "a", "q", "k", "d") if getattr(args, n) is not None]
            if extra:
                raise InputError(f"{', '.join(extra)} not used by the {args.preset} preset")
        if args.preset == "hirzebruch":
            fam = _hirzebruch_family(args)
            if fam == "qk":
                params = {"q": _single(parse_rationals(args.q, "--q"), "--q"),
                          "k": _single(parse_rationals(args.k, "--k"), "--k")}
            elif fam == "dk":
                params = {"d": _single(parse_rationals(args.d, "--d"), "--d"),
                          "k": _single(parse_rationals(args.k, "--k"), "--k")}
            else:
                params = {"m": _single(parse_ints(args.m, "--m"), "--m"),
                          "a": _single(parse_rationals(args.a, "--a"), "--a")}
        preset = build_preset(args, **params)
        echo = {"source": "preset", "preset": args.preset,
                "params": {k: fmt(v) for k, v in sorted(params.items())}}
    else:
        raise InputError("one of --input or --preset is required")
    idx = sorted({preset.facet_index(t) for t in cusps})
    if preset.polytope.cusp_facets and cusps:
        raise InputError("--cusp conflicts with zero weights in the input file")
    P = preset.polytope.with_cusps(idx) if cusps else preset.polytope
    preset = Preset(P, preset.names, preset.params)
    echo.update({
        "polytope": P.to_document(),
        "facet_names": list(preset.names),
        "cusps": [preset.names[j] for j in P.cusp_facets],
    })
    return Problem(preset, echo)


# -- commands ---------------------------------------------------------------------


def _report_inconsistent(rep: ClassificationReport) -> bool:
    return bool(rep.inconsistencies)


def _construction_doc(rep: ClassificationReport) -> dict:
    return {
        "construction": None if rep.construction is None else rep.construction.to_document(),
        "residual": None if rep.residual is None else rep.residual.to_document(),
        "boundary": [b.to_document() for b in rep.boundary],
    }


def cmd_analyze(problem: Problem, config: RunConfig) -> tuple[dict, int]:
    P = problem.polytope
    rep = classify_pair(P, construct=True, verify=True, grid_n=config.grid, h=config.fd_step)
    result = {
        "vertices": vertices_doc(P),
        "extremal_affine": affine_doc(extremal_affine(P, config.convention)),
        "classification": classification_doc(rep, problem.preset.names),
    }
    result.update(_construction_doc(rep))
    return envelope("analyze", problem, config, result), (
        EXIT_CONSISTENCY if _report_inconsistent(rep) else EXIT_OK
    )


def cmd_construct(problem: Problem, config: RunConfig) -> tuple[dict, int]:
    from .ambitoric import construct_for

    P = problem.polytope
    sol = construct_for(P)
    if sol is None:
        raise InputError("no explicit ansatz applies to this polytope and cusp set")
    rep = ClassificationReport(stability(P), [], "")
    rep.construction = sol
    from .classify import _verify

    _verify(P, rep, config.grid, config.fd_step)
    # the cusp-class check depends on the final verdict, which construct does not compute
    rep.inconsistencies = [s for s in rep.inconsistencies if " under " not in s]
    result = _construction_doc(rep)
    result["condition_i"] = verdict_doc(rep.condition_i)
    result["inconsistencies"] = rep.inconsistencies
    return envelope("construct", problem, config, result), (
        EXIT_CONSISTENCY if rep.inconsistencies else EXIT_OK
    )


def fchi_samples(P: LabelledPolytope, facet: int, n: int) -> list[tuple[Fraction, Fraction]]:
    fam = normal_cone_family(P, facet)
    return [(fam.c_max * Fraction(j, n), fam(fam.c_max * Fraction(j, n))) for j in range(n + 1)]


def cmd_fchi(problem: Problem, config: RunConfig, facet_token: Optional[str]) -> tuple[dict, int, str]:
    P = problem.polytope
    if P.dimension != 2:
        raise InputError("fchi needs a polygon")
    if facet_token is None:
        if not P.cusp_facets:
            raise InputError("give --facet or at least one --cusp facet")
        facet = P.cusp_facets[0]
    else:
        facet = problem.preset.facet_index(facet_token)
    fam = normal_cone_family(P, facet)
    first = fam.pieces[0]
    d1 = first.deriv()
    d2 = d1.deriv()
    sz = szekelyhidi_constraint(P, facet)
    samples = fchi_samples(P, facet, config.grid)
    result = {
        "facet": facet,
        "facet_name": problem.preset.names[facet],
        "breakpoints": [fmt(b) for b in fam.breakpoints],
        "c_max": fmt(fam.c_max),
        "pieces": [[fmt(c) for c in p.coeffs] for p in fam.pieces],
        "max_degree": fam.max_degree(),
        "continuity_defects": [fmt(x) for x in fam.continuity_defects()],
        "value_at_0": fmt(first(0)),
        "derivative_at_0": fmt(d1(0)),
        "second_derivative_at_0": fmt(d2(0)),
        "szekelyhidi": fmt(sz),
        "second_derivative_equals_szekelyhidi": d2(0) == sz,
        "samples": [[fmt(c), fmt(v)] for c, v in samples],
    }
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["c", "F", "F_float"])
    for c, v in samples:
        w.writerow([fmt(c), fmt(v), repr(float(v))])
    return envelope("fchi", problem, config, result), EXIT_OK, buf.getvalue()


def _scalar_rows(problem: Problem, config: RunConfig, sol) -> list[list]:
    from .verify import scalar_curvature

    P = problem.polytope
    xs = [v[0] for v in P.vertices]
    ys = [v[1] for v in P.vertices]
    s = extremal_affine(P, MAIN)
    n = config.grid
    rows = []
    for i in range(n):
        for j in range(n):
            x = (min(xs) + (max(xs) - min(xs)) * Fraction(2 * i + 1, 2 * n),
                 min(ys) + (max(ys) - min(ys)) * Fraction(2 * j + 1, 2 * n))
            inside = P.contains(x, strict=True)
            numeric = ""
            if inside and sol is not None:
                try:
                    numeric = repr(float(scalar_curvature(sol, x, config.fd_step / 10)))
                except TorexError:
                    numeric = ""
            rows.append([i, j, fmt(x[0]), fmt(x[1]), int(inside),
                         fmt(s(*x)) if inside else "", numeric])
    return rows


def _write_csv(path: Path, header: Sequence, rows: Sequence) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def cmd_plot(problem: Problem, config: RunConfig, cusp_given: bool) -> tuple[dict, int]:
    P = problem.polytope
    if P.dimension != 2:
        raise InputError("plot needs a polygon")
    out = Path(config.out or "torex-plot")
    out.mkdir(parents=True, exist_ok=True)
    verts = P.vertices
    _write_csv(out / "outline.csv", ["vertex", "x1", "x2"],
               [[k % len(verts), fmt(verts[k % len(verts)][0]), fmt(verts[k % len(verts)][1])]
                for k in range(len(verts) + 1)])
    facet_rows = []
    for j, f in enumerate(P.facets):
        a, b = [v for v in verts if f.reference(v) == 0]
        facet_rows.append([j, problem.preset.names[j], int(f.cusp),
                           fmt(a[0]), fmt(a[1]), fmt(b[0]), fmt(b[1])])
    _write_csv(out / "facets.csv", ["facet", "name", "cusp", "x1_start", "x2_start", "x1_end", "x2_end"],
               facet_rows)
    rep = classify_pair(P, construct=True, verify=True, grid_n=config.grid, h=config.fd_step)
    _write_csv(out / "scalar.csv", ["i", "j", "x1", "x2", "inside", "s_exact", "s_numeric"],
               _scalar_rows(problem, config, rep.construction))
    prof = []
    for b in rep.boundary:
        for k, v in enumerate(b.profile):
            prof.append([b.facet, problem.preset.names[b.facet], b.classification, k, repr(v)])
    _write_csv(out / "boundary.csv", ["facet", "name", "classification", "station", "value"], prof)
    files = ["outline.csv", "facets.csv", "scalar.csv", "boundary.csv"]
    if problem.echo.get("preset") == "hirzebruch" and "m" in problem.echo["params"] and not cusp_given:
        rows = []
        base = Preset(P, problem.preset.names)
        for panel, (case, cusps) in enumerate(FIGURE_PANELS):
            Q = base.with_cusps(cusps)
            final = classify_pair(Q, construct=False).final
            for j in range(Q.n_facets):
                rows.append([panel, case, "+".join(cusps), final, j, problem.preset.names[j],
                             int(Q.facets[j].cusp)])
        _write_csv(out / "panels.csv", ["panel", "case", "cusps", "final", "facet", "name", "cusp"], rows)
        files.append("panels.csv")
    result = {"directory": str(out), "files": files, "final": rep.final,
              "inconsistencies": list(rep.inconsistencies)}
    return envelope("plot", problem, config, result), (
        EXIT_CONSISTENCY if rep.inconsistencies else EXIT_OK
    )


# sweep cells are pure functions of immutable inputs, so threads merge by index


def _sweep_ma(cell) -> dict:
    m, a, cusps = cell
    P = hirzebruch(m, a).with_cusps(cusps)
    rep = classify_pair(P, construct=False)
    return {
        "m": str(m), "a": fmt(a), "cusps": list(cusps), "final": rep.final,
        "determinant_signs": [_sign(d) for _, d in rep.condition_i.determinants],
    }


def _sweep_qk(cell) -> dict:
    q, k = cell
    pre = hirzebruch_qk(q, k)
    adj = pre.with_cusps(["l2", "l3"])
    opp = pre.with_cusps(["l2", "l4"])
    cache: dict = {}
    adj_dets = [corner_determinant(adj, e, cache)[2] for e in (1, 2)]
    opp_det = corner_determinant(opp, 1)[2]
    return {
        "q": fmt(q), "k": fmt(k),
        "adjacent": {"determinants": [fmt(d) for d in adj_dets],
                     "signs": [_sign(d) for d in adj_dets],
                     "final": classify_pair(adj, construct=False).final},
        "opposite": {"determinant": fmt(opp_det), "sign": _sign(opp_det),
                     "final": classify_pair(opp, construct=False).final},
    }


def dk_invariants(d, k, convention=MAIN):
    """K_i for single-cusp cases and K for the adjacent pair {f1, f2} of the (d, k) family."""
    pre = hirzebruch_dk(d, k)
    P = pre.polytope
    v1, v2, v3, v4 = (-d, 0), (k, 0), (0, 1), (-d, 1)
    Ks = []
    # clockwise boundary orientation v1 -> v4 -> v3 -> v2
    for i, (a, b) in enumerate(((v1, v4), (v2, v1), (v3, v2), (v4, v3))):
        B = extremal_affine(P.with_cusps([i]), convention)
        lin = AffineFunction(B.coefficients, 0)
        Ks.append(lin(*a) - lin(*b))
    A = extremal_affine(P.with_cusps([0, 1]), convention)
    K_adj = A(k, 0) - A(-d, 1 / (k + d))
    return Ks, K_adj


def _sweep_dk(cell, convention) -> dict:
    d, k = cell
    Ks, K_adj = dk_invariants(d, k, convention)
    return {
        "d": fmt(d), "k": fmt(k),
        "K": [fmt(x) for x in Ks], "K_signs": [_sign(x) for x in Ks],
        "K_adjacent": fmt(K_adj), "K_adjacent_sign": _sign(K_adj),
    }


def _sweep_cusp_sets(text: Optional[str]) -> list[tuple[str, ...]]:
    if not text:
        return list(HIRZEBRUCH_CONFIGS)
    return [tuple(parse_list(group)) for group in text.split(";") if group.strip()]


def cmd_sweep(args, config: RunConfig) -> tuple[dict, int]:
    if args.preset != "hirzebruch" or args.input:
        raise InputError("sweep runs over the hirzebruch families")
    fam = _hirzebruch_family(args)
    if fam == "ma":
        ms, as_ = parse_ints(args.m, "--m"), parse_rationals(args.a, "--a")
        sets = _sweep_cusp_sets(args.cusp)
        for s in sets:
            hirzebruch(1, 2).with_cusps(s)  # validates the facet names up front
        for m in ms:
            hirzebruch(m, as_[0] if as_ else 2)
        for a in as_:
            hirzebruch(1, a)
        cells = [(m, a, s) for m in ms for a in as_ for s in sets]
        fn = _sweep_ma
        params = {"m": [str(m) for m in ms], "a": [fmt(a) for a in as_],
                  "cusps": ["+".join(s) for s in sets]}
    else:
        first = parse_rationals(args.q if fam == "qk" else args.d, "--" + fam[0])
        ks = parse_rationals(args.k, "--k")
        for x in first:
            for k in ks:
                (hirzebruch_qk if fam == "qk" else hirzebruch_dk)(x, k)
        cells = [(x, k) for x in first for k in ks]
        if fam == "qk":
            fn = _sweep_qk
        else:
            def fn(cell):
                return _sweep_dk(cell, config.convention)
        params = {fam[0]: [fmt(x) for x in first], "k": [fmt(k) for k in ks]}
    if not cells:
        raise InputError("empty sweep")
    with ThreadPoolExecutor(max_workers=config.jobs) as pool:
        rows = list(pool.map(fn, cells))
    result = {"family": fam, "params": params, "rows": rows}
    echo = {"source": "preset", "preset": "hirzebruch", "family": fam}
    doc = envelope("sweep", None, config, result)
    doc["input"] = echo
    return doc, EXIT_OK


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="torex", description="Toric K-stability of labelled polygons with cusp facets.")
    p.add_argument("command", choices=("analyze", "fchi", "plot", "sweep", "construct"))
    p.add_argument("--input", help="polytope JSON document")
    p.add_argument("--preset", choices=("hirzebruch", "simplex", "square"))
    p.add_argument("--m", help="Hirzebruch degree (comma list for sweep)")
    p.add_argument("--a", help="Hirzebruch size parameter, rational")
    p.add_argument("--q", help="(q, k) family parameter")
    p.add_argument("--k", help="(q, k) or (d, k) family parameter")
    p.add_argument("--d", help="(d, k) family parameter")
    p.add_argument("--cusp", help="comma-separated facet names or indices; ';' separates sets in sweep")
    p.add_argument("--facet", help="facet for fchi (default: first cusp facet)")
    p.add_argument("--convention", choices=(MAIN, APPENDIX), default=MAIN)
    p.add_argument("--grid", type=int, default=10)
    p.add_argument("--fd-step", type=float, default=1e-3)
    p.add_argument("--out", help="output file (directory for plot)")
    p.add_argument("--jobs", type=int, default=1)
    return p


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        config = RunConfig(args.command, args.convention, args.grid, args.fd_step, args.out, args.jobs)
        if args.command == "sweep":
            doc, code = cmd_sweep(args, config)
            _emit(dumps(doc), config.out)
            return code
        problem = load_problem(args)
        if args.command == "analyze":
            doc, code = cmd_analyze(problem, config)
        elif args.command == "construct":
            doc, code = cmd_construct(problem, config)
        elif args.command == "fchi":
            doc, code, samples = cmd_fchi(problem, config, args.facet)
            if config.out:
                Path(config.out).with_suffix(".csv").write_text(samples)
        else:
            doc, code = cmd_plot(problem, config, bool(args.cusp))
            Path(config.out or "torex-plot", "report.json").write_text(dumps(doc))
            return code
        _emit(dumps(doc), config.out)
        return code
    except ConsistencyFailure as e:
        print(f"torex: consistency failure: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except TorexError as e:
        print(f"torex: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())

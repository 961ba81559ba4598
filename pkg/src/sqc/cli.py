"""Command-line front end: ``sqc analyze``, ``sqc gen`` and ``sqc project``.

Problems are JSON documents::

    {"n": 3, "matrix": [[...], ...], "cone": {"type": "lorentz"}, "options": {"seed": 42}}

Exit codes of ``analyze``: 0 certified quasi-convex, 1 certified not, 2
unknown, 10 and above for errors.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, field, fields

import numpy as np

from .analysis import AnalysisOptions, Verdict, analyze
from .cones import ConeSpec, moreau_decompose
from .errors import InvalidInputError, ParseError, SolverFailure, SQCError
from .linalg import as_symmetric, asymmetry, householder
from .oracle import geodesic_quasiconvexity_test, pairwise_test, sublevel_convexity_test
from .serialize import dumps

EXIT_CODES = {Verdict.CERTIFIED_QUASICONVEX: 0, Verdict.CERTIFIED_NOT: 1, Verdict.UNKNOWN: 2}
EXIT_USAGE, EXIT_INPUT, EXIT_SOLVER, EXIT_INTERNAL = 10, 11, 12, 13
ASYMMETRY_WARN = 1e-9
MODES = ("analyze", "oracle", "both")


@dataclass(frozen=True, eq=False)
class ProblemInput:
    matrix: np.ndarray
    cone: ConeSpec
    options: AnalysisOptions = field(default_factory=AnalysisOptions)
    metadata: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _option_fields():
    return {f.name for f in fields(AnalysisOptions)}


def _finite_matrix(raw, n):
    if not isinstance(raw, list) or not all(isinstance(r, list) for r in raw):
        raise ParseError("'matrix' must be a list of rows")
    if len(raw) != n or any(len(r) != n for r in raw):
        shape = f"{len(raw)}x{max((len(r) for r in raw), default=0)}"
        raise ParseError(f"'matrix' must be {n}x{n}, got {shape}")
    for i, row in enumerate(raw):
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"matrix entry [{i}][{j}] is not a number: {v!r}")
            if not math.isfinite(v):
                raise ParseError(f"matrix entry [{i}][{j}] is not finite: {v!r}")
    return np.array(raw, dtype=float)


def problem_from_dict(doc: dict) -> ProblemInput:
    """Validate a decoded problem document and fill defaults."""
    if not isinstance(doc, dict):
        raise ParseError("problem must be a JSON object")
    for key in ("matrix", "cone"):
        if key not in doc:
            raise ParseError(f"missing field {key!r}")
    raw = doc["matrix"]
    n = doc.get("n", len(raw) if isinstance(raw, list) else None)
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ParseError("'n' must be an integer >= 2")
    a = _finite_matrix(raw, n)
    meta = dict(doc.get("metadata", {}))
    skew = asymmetry(a)
    if skew > ASYMMETRY_WARN:
        msg = f"matrix asymmetry {skew:.3g} exceeds {ASYMMETRY_WARN:g}; using (A + A^T) / 2"
        warnings.warn(msg, stacklevel=2)
        meta["warnings"] = list(meta.get("warnings", [])) + [msg]
    if not isinstance(doc["cone"], dict):
        raise ParseError("'cone' must be an object")
    try:
        cone = ConeSpec.from_dict(doc["cone"], n)
    except InvalidInputError as exc:
        raise ParseError(f"cone: {exc}") from None
    opts = doc.get("options", {}) or {}
    if not isinstance(opts, dict):
        raise ParseError("'options' must be an object")
    unknown = set(opts) - _option_fields()
    if unknown:
        raise ParseError(f"unknown options: {sorted(unknown)}")
    try:
        options = AnalysisOptions(**opts)
    except (InvalidInputError, TypeError) as exc:
        raise ParseError(f"options: {exc}") from None
    return ProblemInput(as_symmetric(a), cone, options, meta)


def parse_problem(source) -> ProblemInput:
    """Read a problem from a path, ``"-"`` (standard input) or a text stream."""
    if isinstance(source, io.TextIOBase) or hasattr(source, "read"):
        text, name = source.read(), getattr(source, "name", "<stream>")
    elif source == "-":
        text, name = sys.stdin.read(), "<stdin>"
    else:
        try:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from None
        name = str(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        line = text.splitlines()[exc.lineno - 1] if text.splitlines() else ""
        raise ParseError(f"{name}:{exc.lineno}:{exc.colno}: {exc.msg}\n  {line}") from None
    return problem_from_dict(doc)


def problem_to_dict(problem: ProblemInput) -> dict:
    out = {"n": problem.n, "matrix": problem.matrix.tolist(), "cone": problem.cone.to_dict(),
           "options": problem.options.to_dict()}
    if problem.metadata:
        out["metadata"] = problem.metadata
    return out


def emit_problem(problem: ProblemInput) -> str:
    return dumps(problem_to_dict(problem))


# ---------------------------------------------------------------------------
# running


def _oracle_only(problem: ProblemInput) -> dict:
    a, K, o = problem.matrix, problem.cone, problem.options
    seed = o.seed
    res = {
        "geodesic": geodesic_quasiconvexity_test(a, K, o.oracle_samples, seed=seed, tol=o.tol),
        "pairwise": pairwise_test(a, K, o.oracle_samples, seed=seed + 1, tol=o.tol),
        "sublevel": sublevel_convexity_test(a, K, o.oracle_levels, o.oracle_pairs, seed=seed + 2, tol=o.tol),
    }
    return res


def run(problem: ProblemInput, mode: str = "both") -> tuple[int, dict]:
    """Analyze ``problem`` and return ``(exit_code, report)``.

    ``analyze`` consults the oracles only when no condition is decisive,
    ``both`` always cross-validates with them, ``oracle`` skips the
    conditions.
    """
    if mode not in MODES:
        raise InvalidInputError(f"mode must be one of {MODES}")
    report = {"mode": mode}
    if mode == "oracle":
        res = _oracle_only(problem)
        hit = next((k for k, v in res.items() if v.violated), None)
        verdict = Verdict.CERTIFIED_NOT if hit else Verdict.UNKNOWN
        report.update(verdict=verdict.value, basis=f"ORACLE_{hit.upper()}" if hit else None,
                      oracle={k: v.to_dict() for k, v in res.items()})
    else:
        opts = problem.options
        if mode == "both" and not opts.cross_validate:
            opts = AnalysisOptions(**(opts.to_dict() | {"cross_validate": True}))
        rep = analyze(problem.matrix, problem.cone, opts)
        verdict = rep.verdict
        report.update(verdict=verdict.value, basis=rep.basis, analysis=rep.to_dict())
        report["summary"] = rep.summary()
    if "expected_verdict" in problem.metadata:
        report["expected_verdict"] = problem.metadata["expected_verdict"]
    report["exit_code"] = EXIT_CODES[verdict]
    report["input"] = problem_to_dict(problem)
    return EXIT_CODES[verdict], report


# ---------------------------------------------------------------------------
# example generators

GENERATORS = ("countergg-orthant", "countergg-lorentz", "alpha-eta-lorentz", "householder",
              "two-eig-lorentz-pos", "two-eig-lorentz-neg")


def _from_eigen(lam, vectors) -> np.ndarray:
    V = np.asarray(vectors, dtype=float)
    return (V.T * np.asarray(lam, dtype=float)) @ V


def _cone_symmetry(K: ConeSpec, rng) -> np.ndarray:
    """Random orthogonal map preserving ``K``."""
    n = K.n
    if K.kind == "orthant":
        return np.eye(n)[rng.permutation(n)]
    q, r = np.linalg.qr(rng.standard_normal((n - 1, n - 1)))
    R = np.eye(n)
    R[1:, 1:] = q * np.sign(np.diag(r))
    return R


def generate_example(name: str, n: int, seed: int | None = None) -> ProblemInput:
    """A problem whose verdict is known, with ``expected_verdict`` in the metadata.

    With a seed the instance is transformed by a random symmetry of the cone,
    which leaves the verdict unchanged.
    """
    if name not in GENERATORS:
        raise InvalidInputError(f"unknown example {name!r}; choose from {', '.join(GENERATORS)}")
    if n < (2 if name == "householder" else 3):
        raise InvalidInputError(f"{name} needs a larger dimension")
    I = np.eye(n)
    expected = Verdict.CERTIFIED_QUASICONVEX
    spread = [0.0] + [1.6] * (n - 2) + [2.0]
    if name == "countergg-orthant":
        K = ConeSpec.orthant(n)
        V = I.copy()
        V[0] = (I[0] + I[-1]) / math.sqrt(2.0)
        V[-1] = (I[0] - I[-1]) / math.sqrt(2.0)
        A = _from_eigen(spread, V)
    elif name == "countergg-lorentz":
        K = ConeSpec.lorentz(n)
        A = np.diag(spread)
    elif name == "alpha-eta-lorentz":
        K = ConeSpec.lorentz(n)
        A = np.diag([0.0] + [1.0] * (n - 2) + [1.4])
    elif name == "householder":
        K = ConeSpec.orthant(n)
        A = householder(np.ones(n))
    elif name == "two-eig-lorentz-pos":
        K = ConeSpec.lorentz(n)
        A = I - np.outer(I[0], I[0])
    else:
        K = ConeSpec.lorentz(n)
        A = I - np.outer(I[1], I[1])
        expected = Verdict.CERTIFIED_NOT
    if seed is not None:
        R = _cone_symmetry(K, np.random.default_rng(seed))
        A = R @ A @ R.T
    meta = {"example": name, "expected_verdict": expected.value}
    if seed is not None:
        meta["generator_seed"] = seed
    return ProblemInput(as_symmetric(A), K, AnalysisOptions(), meta)


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sqc", description="Spherical quasi-convexity of quadratic forms on cone caps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="analyze a problem file")
    a.add_argument("--input", required=True, help="problem JSON file, '-' for standard input")
    a.add_argument("--mode", choices=MODES, default="both")
    a.add_argument("--seed", type=int)
    a.add_argument("--tol", type=float)
    a.add_argument("--samples", type=int, help="oracle geodesic samples")
    a.add_argument("--report", help="write the JSON report here")
    a.add_argument("--json", action="store_true", help="print the JSON report instead of the summary")
    a.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")

    g = sub.add_parser("gen", help="emit an example problem")
    g.add_argument("--name", required=True, choices=GENERATORS)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--output", help="write here instead of standard output")

    pr = sub.add_parser("project", help="Moreau decomposition of a vector")
    pr.add_argument("--cone", choices=("lorentz", "orthant"), default="lorentz")
    pr.add_argument("--vector", required=True, help="comma-separated entries")
    return p


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _cmd_analyze(args) -> int:
    problem = parse_problem(args.input)
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.tol is not None:
        over["tol"] = args.tol
    if args.samples is not None:
        over["oracle_samples"] = args.samples
    if args.timings:
        over["include_timings"] = True
    if over:
        problem = ProblemInput(problem.matrix, problem.cone,
                               AnalysisOptions(**(problem.options.to_dict() | over)), problem.metadata)
    code, report = run(problem, args.mode)
    text = dumps(report)
    if args.report:
        _write(args.report, text)
    if args.json:
        _write(None, text)
    else:
        print(report.get("summary", f"verdict: {report['verdict']}"))
    return code


def _cmd_gen(args) -> int:
    _write(args.output, emit_problem(generate_example(args.name, args.n, args.seed)))
    return 0


def _cmd_project(args) -> int:
    try:
        x = np.array([float(s) for s in args.vector.split(",")])
    except ValueError:
        raise InvalidInputError(f"cannot parse vector {args.vector!r}") from None
    if not np.all(np.isfinite(x)):
        raise InvalidInputError("vector entries must be finite")
    K = getattr(ConeSpec, args.cone)(x.size)
    _write(None, dumps(moreau_decompose(K, x).to_dict()))
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"analyze": _cmd_analyze, "gen": _cmd_gen, "project": _cmd_project}[args.command]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
            return handler(args)
    except (ParseError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SQCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

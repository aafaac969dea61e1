"""Command-line entry point: ``betti``.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure (open or
non-orientable input, degenerate geometry), 3 oracle mismatch, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .complex_core import SimplicialComplex, boundary_matrix, double_cover, validate_closed_manifold
from .dec_geometry import GeometryError, build_hodge_system
from .formats import ParseError, load_complex, write_triplets
from .generators import generate
from .hodge_engine import BettiReport, betti_via_cohomology, betti_via_homology_oracle
from .rank_tools import StochasticRankConfig

__all__ = ["RunConfig", "RunResult", "run", "emit_report", "main", "EXIT_OK", "EXIT_USAGE",
           "EXIT_VALIDATION", "EXIT_MISMATCH", "EXIT_IO"]

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_MISMATCH, EXIT_IO = 0, 1, 2, 3, 4
ORACLE_LIMIT = 5000
CSV_FIELDS = ("degree", "betti", "normalized", "method", "seed")


class UsageError(ValueError):
    pass


class ValidationError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything a run needs.  ``source`` is a generator spec when
    ``generated`` is true, otherwise a path to a ``.json`` or ``.off`` file.
    ``degrees=None`` means every degree; ``verify_oracle=None`` means on below
    :data:`ORACLE_LIMIT` top simplexes."""

    source: str
    generated: bool = False
    degrees: list | None = None
    mode: str = "uniform"
    gamma: int | None = None
    method: str = "exact_rank"
    epsilon: float = 0.05
    probes: int | None = None
    cheb_degree: int | None = None
    gap: float = 1e-3
    seed: int = 0
    verify_oracle: bool | None = None
    double_cover: bool = False
    rank_threshold: float = 1e-8
    dump_dir: str | None = None

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise UsageError("epsilon must lie in (0, 1)")
        if self.mode not in ("uniform", "geometric"):
            raise UsageError(f"unknown mode {self.mode!r}")
        if self.method not in ("exact_rank", "stochastic"):
            raise UsageError(f"unknown method {self.method!r}")


@dataclass
class RunResult:
    complex: SimplicialComplex
    reports: list
    oracle: list | None = None
    mismatches: list = field(default_factory=list)
    wall_time_ms: float | None = None

    @property
    def exit_code(self) -> int:
        return EXIT_MISMATCH if self.mismatches else EXIT_OK


def _load(cfg: RunConfig) -> SimplicialComplex:
    K = generate(cfg.source) if cfg.generated else load_complex(cfg.source)
    report = validate_closed_manifold(K)
    if not report.ok:
        if not cfg.double_cover:
            shown = ", ".join(f"{tuple(int(v) for v in f)} (in {c} top simplexes)" for f, c in report.violations[:20])
            more = len(report.violations) - 20
            tail = f" and {more} more" if more > 0 else ""
            raise ValidationError(
                f"input is not a closed manifold: {len(report.violations)} facets violate the two-cofaces rule: "
                f"{shown}{tail}; rerun with --double-cover for a manifold with boundary"
            )
        try:
            K = double_cover(K)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc
    if not K.orientable:
        raise ValidationError("input is not orientable")
    return K


def _dump(K: SimplicialComplex, degrees, systems: dict, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for r in range(1, K.dim + 1):
        write_triplets(boundary_matrix(K, r), out / f"B{r}.txt")
    for r in degrees:
        H = systems[r]
        for name in ("A", "C", "P", "K", "D", "Q"):
            M = getattr(H, name)
            if M is not None:
                write_triplets(M, out / f"{name}_r{r}.txt")


def run(cfg: RunConfig) -> RunResult:
    """Load, validate, compute one report per degree and optionally verify."""
    start = time.perf_counter()
    K = _load(cfg)
    degrees = list(range(K.dim + 1)) if cfg.degrees is None else list(cfg.degrees)
    for r in degrees:
        if not 0 <= r <= K.dim:
            raise UsageError(f"degree {r} out of range 0..{K.dim}")
    stochastic = StochasticRankConfig(cfg.gap, cfg.probes, cfg.cheb_degree, cfg.epsilon, cfg.seed)
    systems = {r: build_hodge_system(K, r, cfg.mode) for r in degrees}
    reports = [
        betti_via_cohomology(K, r, gamma=cfg.gamma, method=cfg.method, seed=cfg.seed, mode=cfg.mode,
                             rank_threshold=cfg.rank_threshold, stochastic=stochastic, system=systems[r])
        for r in degrees
    ]
    if cfg.dump_dir:
        _dump(K, degrees, systems, Path(cfg.dump_dir))
    verify = cfg.verify_oracle if cfg.verify_oracle is not None else K.size(K.dim) < ORACLE_LIMIT
    oracle, mismatches = None, []
    if verify:
        oracle = [betti_via_homology_oracle(K, r) for r in degrees]
        mismatches = [(o.degree, rep.betti, o.betti) for rep, o in zip(reports, oracle) if rep.betti != o.betti]
    return RunResult(K, reports, oracle, mismatches, (time.perf_counter() - start) * 1e3)


def _sci(x) -> float | None:
    return None if x is None or not np.isfinite(x) else float(f"{x:.3e}")


def _report_dict(rep: BettiReport) -> dict:
    return {
        "degree": rep.degree,
        "betti": rep.betti,
        "normalized": rep.normalized,
        "method": rep.method,
        "gamma": rep.gamma,
        "seed": rep.seed,
        "residual": _sci(rep.residual),
        "tolerances": {k: rep.tolerances[k] for k in sorted(rep.tolerances)},
        "warnings": list(rep.warnings),
    }


def report_payload(result: RunResult, cfg: RunConfig, timing: bool = False) -> dict:
    """Report as an ordered dict; identical inputs give identical payloads."""
    reps = result.reports
    payload = {
        "source": cfg.source,
        "sizes": list(result.complex.sizes),
        "mode": cfg.mode,
        "method": cfg.method,
        "seed": cfg.seed,
        "degrees": [r.degree for r in reps],
        "betti": [r.betti for r in reps],
        "normalized": [r.normalized for r in reps],
        "residuals": [_sci(r.residual) for r in reps],
        "gamma": [r.gamma for r in reps],
        "oracle": None if result.oracle is None else [o.betti for o in result.oracle],
        "mismatches": [list(m) for m in result.mismatches],
        "reports": [_report_dict(r) for r in reps],
    }
    if timing:
        payload["wall_time_ms"] = round(result.wall_time_ms, 3)
    return payload


def emit_report(payload: dict, path=None, fmt: str = "json") -> None:
    """Write ``payload`` as JSON or CSV to ``path`` (stdout when ``None``)."""
    if fmt == "json":
        text = json.dumps(payload, indent=2) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for rep in payload["reports"]:
            writer.writerow([repr(rep[k]) if isinstance(rep[k], float) else rep[k] for k in CSV_FIELDS])
        text = buf.getvalue()
    else:
        raise UsageError(f"unknown format {fmt!r}")
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _degrees(text: str) -> list:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad degree list {text!r}") from None


def _source_args(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--generate", metavar="SPEC",
                     help="torus:M,N | sphere:icosa | sphere:tetra | genus:G[,S] | three_torus:K")
    src.add_argument("--input", metavar="PATH", help="complex as .json or .off")
    p.add_argument("--double-cover", action="store_true", help="double a manifold with boundary along it")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="betti", description="Betti numbers of triangulated closed manifolds via Hodge decomposition.")
    _source_args(p)
    p.add_argument("--degree", type=_degrees, default=None, help="comma-separated degrees (default: all)")
    p.add_argument("--mode", choices=("uniform", "geometric"), default="uniform")
    p.add_argument("--gamma", type=int, default=None, help="side of the harmonic sub-block")
    p.add_argument("--method", choices=("exact_rank", "stochastic"), default="exact_rank")
    p.add_argument("--epsilon", type=float, default=0.05, help="stochastic accuracy target")
    p.add_argument("--probes", type=int, default=None)
    p.add_argument("--cheb-degree", type=int, default=None)
    p.add_argument("--gap", type=float, default=1e-3, help="spectral gap assumed by the step filter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rank-threshold", type=float, default=1e-8)
    p.add_argument("--output", metavar="PATH", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--verify-oracle", dest="verify_oracle", action="store_true", default=None)
    p.add_argument("--no-verify-oracle", dest="verify_oracle", action="store_false")
    p.add_argument("--dump-matrices", metavar="DIR", default=None, help="write sparse triplet dumps")
    p.add_argument("--timing", action="store_true", help="add wall_time_ms (breaks byte-identical reruns)")
    return p


def build_trace_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="betti qsvt-trace", description="Block-encoding trace of P A^+ C for one degree.")
    _source_args(p)
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--mode", choices=("uniform", "geometric"), default="uniform")
    p.add_argument("--eps", type=float, default=1e-7)
    return p


def _trace_main(argv) -> int:
    from .qsvt_sim import cohomology_chain

    args = build_trace_parser().parse_args(argv)
    cfg = RunConfig(source=args.generate or args.input, generated=args.generate is not None,
                    double_cover=args.double_cover, mode=args.mode)
    K = _load(cfg)
    if not 0 <= args.degree < K.dim:
        raise UsageError(f"degree must lie in 0..{K.dim - 1} for a coexact block")
    H = build_hodge_system(K, args.degree, args.mode)
    if H.A.shape[0] > 400:
        raise UsageError(f"dense simulation of a {H.A.shape[0]}-dimensional system is too large")
    final, trace, rel = cohomology_chain(H, eps=args.eps)
    print(f"{'step':<12} {'alpha':>12} {'error':>10} {'block':>9} {'ancilla':>7}")
    for label, e in trace:
        shape = "x".join(map(str, e.block_shape))
        print(f"{label:<12} {e.alpha:12.6g} {e.error:10.2e} {shape:>9} {e.ancilla_dim:7d}")
    meta = H.scale_metadata()
    print(f"N = {meta['N']:.6g}  alpha = {final.alpha:.6g}  relative error = {rel:.2e}")
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        if argv and argv[0] == "qsvt-trace":
            return _trace_main(argv[1:])
        args = build_parser().parse_args(argv)
        cfg = RunConfig(
            source=args.generate or args.input, generated=args.generate is not None, degrees=args.degree,
            mode=args.mode, gamma=args.gamma, method=args.method, epsilon=args.epsilon, probes=args.probes,
            cheb_degree=args.cheb_degree, gap=args.gap, seed=args.seed, verify_oracle=args.verify_oracle,
            double_cover=args.double_cover, rank_threshold=args.rank_threshold, dump_dir=args.dump_matrices,
        )
        result = run(cfg)
        emit_report(report_payload(result, cfg, args.timing), args.output, args.format)
    except UsageError as exc:
        print(f"betti: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"betti: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, GeometryError) as exc:
        print(f"betti: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"betti: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # generator specs and parameter checks deeper in the library
        print(f"betti: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for degree, got, expected in result.mismatches:
        print(f"betti: degree {degree}: cohomology gave {got}, homology oracle gives {expected}", file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``cometquiver <subcommand> ...``.

Every subcommand prints one JSON document (or writes it to ``--out``) stamped
with the seed, library versions and the quiver hash.  Exit codes: 0 success,
2 invalid input, 3 no convergence or failed verification.
"""

from __future__ import annotations

import argparse
import logging
import re
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .errors import CometError, NotConverged
from .moment import hyperpolygon_residual
from .quiver import (
    CometQuiver,
    complete_comet,
    count_gt_hamiltonians,
    dim_hyperpolygon_space,
    dim_polygon_space,
    flag_dim,
    minimal_comet,
    quiver_from_dict,
    wildify,
)

log = logging.getLogger("cometquiver")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_FAILED = 3

VERIFY_TOL = 1e-10
JITTER = 1e-3
_SHORTHAND = re.compile(r"^(complete|minimal):(\d+),(\d+)(?:,(\d+))?$")


@dataclass
class RunConfig:
    command: str
    source: str
    alpha: tuple | None = None
    seed: int = 0
    tolerance: float = 1e-11
    starts: int = 8
    max_iterations: int = 500
    out: str | None = None
    plot: str | None = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.source:
            raise CometError("input path must be nonempty")
        if self.out is not None and not self.out:
            raise CometError("--out must be nonempty")

    def solve_options(self):
        from .solver import SolveOptions

        return SolveOptions(
            max_iterations=self.max_iterations,
            tolerance=self.tolerance,
            starts=self.starts,
            seed=self.seed,
        )


class _UsageError(CometError):
    pass


def parse_alpha(text: str) -> tuple:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad level vector {text!r}") from exc


def parse_punctures(text: str) -> tuple:
    try:
        return tuple(complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad puncture list {text!r}") from exc


def load_quiver(source: str) -> CometQuiver:
    """A quiver JSON file, a solution file, or shorthand like ``complete:3,4,1``."""
    m = _SHORTHAND.match(source)
    if m and not Path(source).exists():
        kind, r, n, g = m.group(1), int(m.group(2)), int(m.group(3)), int(m.group(4) or 0)
        return (complete_comet if kind == "complete" else minimal_comet)(r, n, g)
    doc = _read(source)
    if "quiver" in doc:
        doc = doc["quiver"]
    return quiver_from_dict(doc)


def _read(path: str) -> dict:
    try:
        return io.read_json(path)
    except FileNotFoundError as exc:
        raise _UsageError(f"no such file: {path}") from exc
    except ValueError as exc:
        raise _UsageError(f"{path} is not valid JSON: {exc}") from exc


def _need_alpha(cfg: RunConfig, q: CometQuiver) -> np.ndarray:
    if cfg.alpha is None:
        raise _UsageError("--alpha is required for this subcommand")
    return np.asarray(cfg.alpha, dtype=float)


def _plot_dir(cfg: RunConfig) -> Path | None:
    if cfg.plot is None:
        return None
    d = Path(cfg.plot)
    d.mkdir(parents=True, exist_ok=True)
    return d


# ---------------------------------------------------------------------------
# subcommands


def formula_dims(q: CometQuiver) -> dict:
    out = {
        "flag_dims": [flag_dim(a) for a in q.arms],
        "dim_P": dim_polygon_space(q),
        "dim_X": dim_hyperpolygon_space(q),
    }
    try:
        out["gt_count"] = count_gt_hamiltonians(q)
    except CometError:
        out["gt_count"] = None
    return out


def _solve_regular(cfg: RunConfig, q, alpha):
    """Solve and take a dimension report; retry once with jittered alpha if singular."""
    from .solver import dimension_report, solve

    result = solve(q, alpha, cfg.solve_options())
    dims = dimension_report(q, result.representation, result.alpha)
    jittered = False
    if dims.singular:
        rng = np.random.default_rng(cfg.seed)
        alpha2 = alpha * (1.0 + JITTER * rng.uniform(-1.0, 1.0, size=alpha.shape))
        log.info("singular point; retrying with jittered level %s", alpha2)
        result = solve(q, alpha2, cfg.solve_options())
        dims = dimension_report(q, result.representation, result.alpha)
        jittered = True
    return result, dims, jittered


def cmd_dims(cfg: RunConfig) -> tuple[dict, int]:
    q = load_quiver(cfg.source)
    out = {"quiver": q.to_dict(), **formula_dims(q)}
    if cfg.alpha is not None:
        result, dims, jittered = _solve_regular(cfg, q, _need_alpha(cfg, q))
        out["numerical"] = dims.to_dict()
        out["alpha"] = list(result.alpha)
        out["jittered"] = jittered
        out["residual"] = result.residual
        plots = _plot_dir(cfg)
        if plots is not None:
            from .plotting import plot_spectrum
            from .solver import constraint_jacobian

            s = np.linalg.svd(constraint_jacobian(q, result.representation, result.alpha), compute_uv=False)
            out["figures"] = [str(plot_spectrum(s, plots / "constraint_spectrum.png", dims.constraint_rank))]
    return out, EXIT_OK


def _figures(q, rep, plots: Path) -> list:
    from .geometry import higgs_polygon_sides, polygon_sides
    from .plotting import plot_bundle_polygon, plot_higgs_polygon

    files = [str(plot_bundle_polygon(polygon_sides(q, rep), plots / "bundle_polygon.png"))]
    if any(np.any(m != 0) for arm in rep.y for e in arm for m in e) or any(np.any(b != 0) for b in rep.b):
        files.append(str(plot_higgs_polygon(higgs_polygon_sides(q, rep), plots / "higgs_polygon.png", q.n)))
    return files


def _solve_common(cfg: RunConfig, polygon: bool) -> tuple[dict, int]:
    from .solver import solve, solve_polygon

    q = load_quiver(cfg.source)
    alpha = _need_alpha(cfg, q)
    fn = solve_polygon if polygon else solve
    result = fn(q, alpha, cfg.solve_options())
    meta = {
        "start": result.start,
        "iterations": result.iterations,
        "start_residuals": result.start_residuals,
        "mode": "polygon" if polygon else "hyperpolygon",
    }
    doc = io.solution_document(q, result.representation, result.alpha, result.report, meta)
    if polygon:
        from .geometry import polygon_sides

        fig = polygon_sides(q, result.representation)
        doc["polygon"] = {"side_lengths": list(fig.lengths), "closure_defect": fig.closure_defect}
    plots = _plot_dir(cfg)
    if plots is not None:
        doc["figures"] = _figures(q, result.representation, plots)
    return doc, EXIT_OK


def cmd_solve(cfg):
    return _solve_common(cfg, polygon=False)


def cmd_polygon(cfg):
    return _solve_common(cfg, polygon=True)


def cmd_verify(cfg: RunConfig) -> tuple[dict, int]:
    # certification reads the file and re-evaluates the equations; no solver involved
    doc = _read(cfg.source)
    q, rep, alpha = io.load_solution(doc)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report = hyperpolygon_residual(q, rep, alpha)
    tol = cfg.options.get("verify_tol", VERIFY_TOL)
    ok = report.aggregate < tol
    out = {"quiver": q.to_dict(), "passed": ok, "tolerance": tol, "residual": report.to_dict()}
    return out, EXIT_OK if ok else EXIT_FAILED


def cmd_higgs(cfg: RunConfig) -> tuple[dict, int]:
    from .geometry import higgs_data, residue_sum_check

    q, rep, _ = io.load_solution(_read(cfg.source))
    punctures = cfg.options.get("punctures") or tuple(complex(i) for i in range(q.n))
    data = higgs_data(q, rep, punctures)
    out = {
        "quiver": q.to_dict(),
        **data.to_dict(),
        "arm_lengths": [arm.length for arm in q.arms],
        "residue_sum_defect": residue_sum_check(q, rep),
    }
    plots = _plot_dir(cfg)
    if plots is not None:
        out["figures"] = _figures(q, rep, plots)
    return out, EXIT_OK


def cmd_gt(cfg: RunConfig) -> tuple[dict, int]:
    from .integrable import commutation_matrix, gt_hamiltonians, hamiltonian_values, independence_details

    q, rep, _ = io.load_solution(_read(cfg.source))
    policy = cfg.options.get("policy", "tally_greedy")
    hset = gt_hamiltonians(q, policy, rep)
    comm = commutation_matrix(hset, q, rep)
    ind = independence_details(hset, q, rep)
    out = {
        "quiver": q.to_dict(),
        "policy": policy,
        "hamiltonians": [d.to_dict() for d in hset],
        "values": [[v.real, v.imag] for v in hamiltonian_values(hset, q, rep)],
        "commutation": comm.to_dict(),
        "independence_rank": ind.rank,
        "independence_gap": ind.gap,
        "tally": count_gt_hamiltonians(q),
    }
    return out, EXIT_OK


def cmd_brane(cfg: RunConfig) -> tuple[dict, int]:
    from .branes import involution_type_report

    q = load_quiver(cfg.source)
    report = involution_type_report(q, cfg.options.get("samples", 100), cfg.seed)
    return {"quiver": q.to_dict(), **report.to_dict()}, EXIT_OK


def cmd_wildify(cfg: RunConfig) -> tuple[dict, int]:
    from .moment import wild_specialization_check

    source = _read(cfg.source) if Path(cfg.source).exists() else None
    if source is not None and "representation" in source:
        q, rep, alpha = io.load_solution(source)
        wq = wildify(q)
        report = wild_specialization_check(q, rep, alpha)
        out = {"quiver": wq.to_dict(), "merged_alpha": float(np.sum(alpha)), "residual": report.to_dict()}
        return out, EXIT_OK if report.aggregate < VERIFY_TOL else EXIT_FAILED
    q = load_quiver(cfg.source)
    return {"quiver": wildify(q).to_dict()}, EXIT_OK


COMMANDS = {
    "dims": (cmd_dims, "formula dimensions; with --alpha also the numerical count"),
    "solve": (cmd_solve, "solve the hyperpolygon equations"),
    "polygon": (cmd_polygon, "solve on the polygon locus (y = b = 0)"),
    "verify": (cmd_verify, "re-check a solution file"),
    "higgs": (cmd_higgs, "residues and Higgs field data of a solution"),
    "gt": (cmd_gt, "Gelfand-Tsetlin Hamiltonians at a solution"),
    "brane": (cmd_brane, "classify the sign involution against I, J, K"),
    "wildify": (cmd_wildify, "merge identical arms into one wild arm"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cometquiver", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("source", help="quiver JSON, solution JSON, or shorthand like complete:3,4,1")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        if name in ("dims", "solve", "polygon"):
            p.add_argument("--alpha", type=parse_alpha, help="comma-separated level vector")
            p.add_argument("--tol", type=float, default=1e-11)
            p.add_argument("--starts", type=int, default=8)
            p.add_argument("--max-iter", type=int, default=500)
        if name in ("dims", "solve", "polygon", "higgs"):
            p.add_argument("--plot", metavar="DIR", help="also render figures into DIR")
        if name == "verify":
            p.add_argument("--tol", type=float, default=VERIFY_TOL)
        if name == "higgs":
            p.add_argument("--punctures", type=parse_punctures, help="comma-separated complex points")
        if name == "gt":
            p.add_argument("--policy", choices=("tally_greedy", "corollary"), default="tally_greedy")
        if name == "brane":
            p.add_argument("--samples", type=int, default=100)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {}
    for key in ("punctures", "policy", "samples"):
        if getattr(args, key, None) is not None:
            options[key] = getattr(args, key)
    if args.command == "verify":
        options["verify_tol"] = args.tol
    return RunConfig(
        command=args.command,
        source=args.source,
        alpha=getattr(args, "alpha", None),
        seed=args.seed,
        tolerance=args.tol if args.command in ("dims", "solve", "polygon") else 1e-11,
        starts=getattr(args, "starts", 8),
        max_iterations=getattr(args, "max_iter", 500),
        out=args.out,
        plot=getattr(args, "plot", None),
        options=options,
    )


def _emit(cfg: RunConfig, doc: dict) -> None:
    text = io.dumps(doc)
    if cfg.out:
        Path(cfg.out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _stamp_quiver(doc: dict):
    try:
        return quiver_from_dict(doc["quiver"]) if "quiver" in doc else None
    except CometError:
        return None


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = config_from_args(args)
        doc, code = COMMANDS[cfg.command][0](cfg)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.result is not None:
            _emit(cfg, {"error": str(exc), "residual": exc.result.report.to_dict(), "stamp": io.stamp(None, cfg.seed)})
        return EXIT_FAILED
    except (CometError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    doc["stamp"] = io.stamp(_stamp_quiver(doc), cfg.seed)
    _emit(cfg, doc)
    if code != EXIT_OK:
        print(f"error: {cfg.command} failed", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

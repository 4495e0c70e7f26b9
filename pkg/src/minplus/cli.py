"""Batch command-line front end.

Subcommands: spd, regress, factor, baseline, residual-curve, assign.
Every run writes its data files plus a `<command>_report.json` echoing the
command, seed, and parameters; identical commands with identical seeds
reproduce identical data files byte for byte (the report differs only in
its wall_time_s field).

Exit codes: 0 success, 2 usage, 3 parse or data error, 4 numerical domain
error (negative cycle, infinite entries in a finite objective).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .baselines import nnmf, svd, svd_truncate
from .core import (
    INF,
    TropicalMatrix,
    kleene_star,
    read_matrix_csv,
    write_matrix_csv,
)
from .errors import DomainError, MinPlusError, ParseError, ShapeError
from .factorization import (
    NonsymFactorConfig,
    SymFactorConfig,
    actual_waypoint_search,
    nonsym_factorize,
    sym_factorize,
)
from .graphs import (
    Graph,
    graph_to_adjacency,
    load_edge_list,
    load_gml_subset,
    shortest_path_matrix,
)
from .regression import RegressionConfig, chebyshev_regression, newton_directed_line_search

USAGE_EXIT = 2
DATA_EXIT = 3
NUMERIC_EXIT = 4


class UsageError(Exception):
    """Flag combination that argparse alone cannot reject."""


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _infer_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    suffix = Path(path).suffix.lower()
    if suffix == ".gml":
        return "gml"
    if suffix == ".csv":
        return "matrix-csv"
    return "edgelist"


def _load_input(args) -> tuple[Graph | None, TropicalMatrix | None]:
    """Returns (graph, None) for graph formats, (None, matrix) for CSV."""
    fmt = _infer_format(args.input, args.format)
    text = Path(args.input).read_text()
    if fmt == "edgelist":
        return load_edge_list(text, directed=getattr(args, "directed", False)), None
    if fmt == "gml":
        return load_gml_subset(text), None
    return None, read_matrix_csv(text)


def _apply_cap(matrix: TropicalMatrix, cap: float | None) -> TropicalMatrix:
    if cap is None:
        return matrix
    data = matrix.data.copy()
    data[np.isinf(data)] = cap
    return TropicalMatrix(data)


def _distance_input(args) -> tuple[TropicalMatrix, tuple[str, ...]]:
    """Distance matrix for factorization-style commands plus node labels.

    Graph inputs are expanded to their shortest-path matrix; matrix CSV
    inputs are taken as-is. --cap replaces inf entries afterwards.
    """
    graph, matrix = _load_input(args)
    if graph is not None:
        matrix = shortest_path_matrix(graph)
        labels = graph.node_labels
    else:
        labels = tuple(str(i + 1) for i in range(matrix.rows))
    return _apply_cap(matrix, getattr(args, "cap", None)), labels


def _write(path: Path, text: str) -> str:
    path.write_text(text)
    return str(path)


def _read_vector_csv(path: str, what: str) -> np.ndarray:
    matrix = read_matrix_csv(Path(path).read_text())
    data = matrix.data
    if data.shape[0] == 0:
        raise ShapeError(f"{what} file is empty")
    if data.shape[0] != 1 and data.shape[1] != 1:
        raise ShapeError(f"{what} must be a single row or column, got {data.shape}")
    return data.ravel()


def _cmd_spd(args, out_dir: Path):
    graph, matrix = _load_input(args)
    if graph is not None:
        result = shortest_path_matrix(graph)
        n = graph.n_nodes
    else:
        result = kleene_star(matrix)
        n = matrix.rows
    out_path = _write(out_dir / args.out, write_matrix_csv(result))
    return [out_path], {"nodes": n}


def _cmd_regress(args, out_dir: Path):
    a = read_matrix_csv(Path(args.matrix).read_text())
    y = _read_vector_csv(args.rhs, "rhs")
    if args.norm == "inf":
        outcome = chebyshev_regression(a, y)
    else:
        x0 = None if args.x0 == "auto" else _read_vector_csv(args.x0, "x0")
        cfg = RegressionConfig(max_iter=args.max_iter, tol=args.tol)
        outcome = newton_directed_line_search(a, y, x0=x0, cfg=cfg)
    record = {
        "solution": [float(v) for v in outcome.solution],
        "residual_norm": float(outcome.residual_norm),
        "norm_kind": outcome.norm_kind,
        "iterations": outcome.iterations,
        "converged": outcome.converged,
        "residual_trace": [float(v) for v in outcome.residual_trace],
    }
    out_path = _write(out_dir / args.out, json.dumps(record, indent=2) + "\n")
    return [out_path], {"residual_norm": record["residual_norm"]}


def _factor_record(mode, rank, pair, labels, waypoints=None):
    record = {
        "mode": mode,
        "rank": rank,
        "residual": float(pair.residual),
        "restarts_used": pair.restarts_used,
        "labels": list(labels),
        "left": [[float(v) for v in row] for row in pair.left.data],
        "right": [[float(v) for v in row] for row in pair.right.data],
        "residual_trace": [float(v) for v in pair.iteration_trace],
    }
    if waypoints is not None:
        record["waypoints"] = [int(w) + 1 for w in waypoints]  # 1-based positions
    return record


def _cmd_factor(args, out_dir: Path):
    matrix, labels = _distance_input(args)
    n = matrix.rows
    if args.rank > max(min(matrix.shape), 1):
        raise UsageError(f"--rank {args.rank} exceeds the input size {min(matrix.shape)}")
    waypoints = None
    if args.mode == "sym":
        cfg = SymFactorConfig(
            rank=args.rank,
            jacobi_steps=args.t,
            shoot=args.mu,
            max_iter=args.max_iter,
            restarts=args.restarts,
            seed=args.seed,
        )
        pair = sym_factorize(matrix, cfg)
    elif args.mode == "general":
        cfg = NonsymFactorConfig(
            max_iter=args.max_iter,
            restarts=args.restarts,
            seed=args.seed,
            gauss_seidel=args.gauss_seidel,
        )
        pair = nonsym_factorize(matrix, args.rank, cfg)
    else:  # actual
        waypoints, pair = actual_waypoint_search(matrix, args.rank, budget=args.budget, seed=args.seed)
    record = _factor_record(args.mode, args.rank, pair, labels, waypoints)
    stem = Path(args.out).stem
    outputs = [
        _write(out_dir / args.out, json.dumps(record, indent=2) + "\n"),
        _write(out_dir / f"{stem}_left.csv", write_matrix_csv(pair.left)),
        _write(out_dir / f"{stem}_right.csv", write_matrix_csv(pair.right)),
    ]
    extras = {"residual": record["residual"], "restarts_used": pair.restarts_used}
    if waypoints is not None:
        extras["waypoints"] = record["waypoints"]
    if n:
        extras["nodes"] = n
    return outputs, extras


def _baseline_matrix(args) -> np.ndarray:
    """svd runs on the (capped) distance matrix, nnmf on raw adjacency."""
    graph, matrix = _load_input(args)
    if graph is not None:
        if args.method == "nnmf":
            return graph_to_adjacency(graph)
        return _apply_cap(shortest_path_matrix(graph), args.cap).data
    return _apply_cap(matrix, args.cap).data


def _cmd_baseline(args, out_dir: Path):
    data = _baseline_matrix(args)
    if args.rank > max(min(data.shape), 1):
        raise UsageError(f"--rank {args.rank} exceeds the input size {min(data.shape)}")
    if args.method == "svd":
        if not np.isfinite(data).all():
            raise DomainError("svd needs a finite matrix; use --cap for infinite entries")
        approx, rel = svd_truncate(data, args.rank)
        out_path = _write(out_dir / args.out, write_matrix_csv(TropicalMatrix(approx)))
        return [out_path], {"relative_residual": rel}
    result = nnmf(data, args.rank, iters=args.iters, seed=args.seed)
    norm = float(np.linalg.norm(data))
    final = result.residual_trace[-1]
    stem = Path(args.out).stem
    outputs = [
        _write(out_dir / f"{stem}_w.csv", write_matrix_csv(TropicalMatrix(result.W))),
        _write(out_dir / f"{stem}_h.csv", write_matrix_csv(TropicalMatrix(result.H))),
        _write(
            out_dir / f"{stem}_trace.csv",
            "".join(f"{v:.17g}\n" for v in result.residual_trace),
        ),
    ]
    return outputs, {
        "residual": final,
        "relative_residual": final / norm if norm > 0 else 0.0,
    }


def _pad_rank_init(prev_left: np.ndarray) -> np.ndarray:
    """Extend a rank-(m-1) factor with one never-selected column.

    The constant exceeds every existing entry, so the padded column never
    attains a pairwise min and the padded product (hence residual) matches
    the previous rank exactly. This seeds the next rank at the previous
    best, making the sweep non-increasing.
    """
    big = float(prev_left.max()) + 1.0
    return np.hstack([prev_left, np.full((prev_left.shape[0], 1), big)])


def _cmd_residual_curve(args, out_dir: Path):
    if args.method == "nnmf":
        graph, matrix = _load_input(args)
        data = graph_to_adjacency(graph) if graph is not None else _apply_cap(matrix, args.cap).data
        if (data < 0).any():
            raise DomainError("nnmf needs non-negative input")
        matrix_for_rank = data
    else:
        matrix_for_rank, _ = _distance_input(args)
        data = matrix_for_rank.data
    if not np.isfinite(data).all():
        raise DomainError("residual curves need a finite matrix; use --cap for infinite entries")
    max_rank = min(data.shape)
    if args.max_rank is not None:
        max_rank = min(max_rank, args.max_rank)
    norm = float(np.linalg.norm(data))

    def relative(value: float) -> float:
        return value / norm if norm > 0 else 0.0

    rows = []
    if args.method == "svd":
        tail_sq = np.cumsum(svd(data).singular_values[::-1] ** 2)[::-1]
        for m in range(1, max_rank + 1):
            tail = float(np.sqrt(tail_sq[m])) if m < len(tail_sq) else 0.0
            rows.append((m, relative(tail)))
    elif args.method == "nnmf":
        for m in range(1, max_rank + 1):
            result = nnmf(data, m, iters=args.iters, seed=args.seed)
            rows.append((m, relative(result.residual_trace[-1])))
    elif args.method == "minplus-general":
        for m in range(1, max_rank + 1):
            cfg = NonsymFactorConfig(max_iter=args.max_iter, restarts=args.restarts, seed=args.seed)
            pair = nonsym_factorize(matrix_for_rank, m, cfg)
            rows.append((m, relative(pair.residual)))
    else:  # minplus-sym
        prev_left = None
        for m in range(1, max_rank + 1):
            extra = (_pad_rank_init(prev_left),) if prev_left is not None else ()
            cfg = SymFactorConfig(
                rank=m,
                jacobi_steps=args.t,
                shoot=args.mu,
                max_iter=args.max_iter,
                restarts=args.restarts,
                seed=args.seed,
            )
            pair = sym_factorize(matrix_for_rank, cfg, extra_inits=extra)
            prev_left = pair.left.data
            rows.append((m, relative(pair.residual)))
    body = "rank,relative_residual\n" + "".join(f"{m},{v:.17g}\n" for m, v in rows)
    out_path = _write(out_dir / args.out, body)
    return [out_path], {"ranks": len(rows), "final_relative_residual": rows[-1][1] if rows else None}


def _cmd_assign(args, out_dir: Path):
    record = json.loads(Path(args.factors).read_text())
    left = np.asarray(record["left"], dtype=float)
    if left.ndim != 2 or left.shape[0] == 0:
        raise ShapeError("factor file holds no left factor rows")
    labels = record.get("labels") or [str(i + 1) for i in range(left.shape[0])]
    assigned = left.argmin(axis=1) + 1  # smallest index wins ties, 1-based
    nonpositive = int(np.sum(left <= 0.0))
    lines = ["node,assigned," + ",".join(f"recip_{k + 1}" for k in range(left.shape[1]))]
    for label, row, choice in zip(labels, left, assigned):
        recips = [1.0 / v if v > 0.0 else INF for v in row]
        lines.append(
            f"{label},{choice}," + ",".join(format(v, ".17g") for v in recips)
        )
    out_path = _write(out_dir / args.out, "\n".join(lines) + "\n")
    return [out_path], {"nonpositive_entries": nonpositive, "sentinel": "inf"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minplus",
        description="Tropical linear algebra toolkit: shortest paths, min-plus "
        "regression, low-rank factorizations, and classical baselines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    common.add_argument("--out-dir", default=".", help="directory for output files")

    graph_input = argparse.ArgumentParser(add_help=False)
    graph_input.add_argument("--input", required=True, help="edge list, GML, or matrix CSV file")
    graph_input.add_argument(
        "--format",
        choices=["edgelist", "gml", "matrix-csv"],
        default=None,
        help="input format (default: inferred from the file suffix)",
    )
    graph_input.add_argument(
        "--directed", action="store_true", help="treat edge-list input as directed"
    )

    cap = argparse.ArgumentParser(add_help=False)
    cap.add_argument(
        "--cap",
        type=float,
        default=None,
        help="replace infinite entries with this value before optimizing",
    )

    p = sub.add_parser("spd", parents=[common, graph_input], help="all-pairs shortest-path matrix")
    p.add_argument("--out", default="spd.csv")
    p.set_defaults(func=_cmd_spd)

    p = sub.add_parser("regress", parents=[common], help="min-plus linear regression")
    p.add_argument("--matrix", required=True, help="design matrix CSV")
    p.add_argument("--rhs", required=True, help="target vector CSV (row or column)")
    p.add_argument("--norm", choices=["inf", "2"], default="inf")
    p.add_argument("--x0", default="auto", help="'auto' or a start vector CSV (2-norm only)")
    p.add_argument("--max-iter", type=_positive_int, default=500)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", default="regress.json")
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser(
        "factor", parents=[common, graph_input, cap], help="min-plus low-rank factorization"
    )
    p.add_argument("--rank", type=_positive_int, required=True)
    p.add_argument("--mode", choices=["sym", "general", "actual"], default="sym")
    p.add_argument("--t", type=_positive_int, default=5, help="Jacobi sweeps per step (sym)")
    p.add_argument("--mu", type=float, default=0.5, help="undershooting weight (sym)")
    p.add_argument("--restarts", type=_positive_int, default=100)
    p.add_argument("--max-iter", type=_positive_int, default=100)
    p.add_argument("--budget", type=_positive_int, default=10000, help="subset budget (actual)")
    p.add_argument("--gauss-seidel", action="store_true", help="row sweeps use the fresh B (general)")
    p.add_argument("--out", default="factors.json")
    p.set_defaults(func=_cmd_factor)

    p = sub.add_parser(
        "baseline", parents=[common, graph_input, cap], help="classical baselines (svd, nnmf)"
    )
    p.add_argument("--method", choices=["svd", "nnmf"], required=True)
    p.add_argument("--rank", type=_positive_int, required=True)
    p.add_argument("--iters", type=_positive_int, default=2000, help="nnmf iterations")
    p.add_argument("--out", default="baseline.csv")
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser(
        "residual-curve",
        parents=[common, graph_input, cap],
        help="relative residual for every rank",
    )
    p.add_argument(
        "--method",
        choices=["minplus-sym", "minplus-general", "svd", "nnmf"],
        required=True,
    )
    p.add_argument("--t", type=_positive_int, default=5)
    p.add_argument("--mu", type=float, default=0.5)
    p.add_argument("--restarts", type=_positive_int, default=10)
    p.add_argument("--max-iter", type=_positive_int, default=100)
    p.add_argument("--iters", type=_positive_int, default=500, help="nnmf iterations per rank")
    p.add_argument("--max-rank", type=_positive_int, default=None)
    p.add_argument("--out", default="curve.csv")
    p.set_defaults(func=_cmd_residual_curve)

    p = sub.add_parser("assign", parents=[common], help="nearest waypoint per node")
    p.add_argument("--factors", required=True, help="factors.json from the factor command")
    p.add_argument("--out", default="assign.csv")
    p.set_defaults(func=_cmd_assign)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        code = exc.code if isinstance(exc.code, int) else USAGE_EXIT
        return code
    out_dir = Path(args.out_dir)
    started = time.perf_counter()
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs, extras = args.func(args, out_dir)
    except UsageError as exc:
        print(f"minplus: usage error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (ParseError, ShapeError, json.JSONDecodeError, KeyError) as exc:
        print(f"minplus: data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except OSError as exc:
        print(f"minplus: cannot read or write: {exc}", file=sys.stderr)
        return DATA_EXIT
    except DomainError as exc:  # NegativeCycleError and friends included
        print(f"minplus: numerical error: {exc}", file=sys.stderr)
        return NUMERIC_EXIT
    except (ValueError, MinPlusError) as exc:
        print(f"minplus: error: {exc}", file=sys.stderr)
        return NUMERIC_EXIT
    wall = time.perf_counter() - started
    parameters = {
        k: v for k, v in vars(args).items() if k not in ("func", "command") and not callable(v)
    }
    report = {
        "command": argv,
        "seed": getattr(args, "seed", None),
        "parameters": parameters,
        "residuals": extras,
        "wall_time_s": wall,
        "outputs": outputs,
    }
    report_path = out_dir / f"{args.command.replace('-', '_')}_report.json"
    report_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

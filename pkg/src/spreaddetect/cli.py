"""Command-line interface.

Subcommands: detect, test, simulate, bench, preprocess, mg. JSON outputs
carry schema_version 1 and validate against the schemas shipped under
spreaddetect/schemas/. Exit codes: 0 success, 1 internal error, 2 usage or
input validation error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as dt
import json
import os
import sys

import numpy as np

from . import __version__, detect, graph, preprocess, simulate

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Shared I/O helpers
# ---------------------------------------------------------------------------

def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def load_data_matrix(path) -> np.ndarray:
    """Read a data CSV: rows are coordinates, columns are time points.

    A header row and/or a leading label column are detected by non-numeric
    cells and skipped.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError(f"{path}: empty data file")
    if any(not _is_number(cell) for cell in rows[0]):
        rows = rows[1:]
        if not rows:
            raise ValueError(f"{path}: no data rows below the header")
    if not _is_number(rows[0][0]):
        rows = [row[1:] for row in rows]
    try:
        x = np.array([[float(cell) for cell in row] for row in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric cell in data region: {exc}") from exc
    if x.ndim != 2 or x.shape[1] < 2:
        raise ValueError(f"{path}: need a p x n matrix with n >= 2, got shape {x.shape}")
    return x


def save_data_matrix(path, x: np.ndarray) -> None:
    np.savetxt(path, np.asarray(x), delimiter=",", fmt="%.12g")


def _emit_json(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_rate_grid(spec: str) -> tuple[float, ...]:
    """Parse start:stop:step into an inclusive grid of q values."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError(f"--rate-grid must look like start:stop:step, got {spec!r}")
    start, stop, step = (float(s) for s in parts)
    if step <= 0 or start <= 0 or stop > 1 or start > stop:
        raise ValueError(f"--rate-grid values out of range in {spec!r}")
    count = int(round((stop - start) / step)) + 1
    grid = tuple(round(start + i * step, 10) for i in range(count))
    return tuple(q for q in grid if q <= stop + 1e-9)


def parse_model(token: str) -> tuple[str, float | None]:
    """Parse a --model token: 'det' or 'stoch:<q>'."""
    if token == "det":
        return "deterministic", None
    if token.startswith("stoch:"):
        q = float(token.split(":", 1)[1])
        if not 0.0 < q <= 1.0:
            raise ValueError(f"--model stochastic rate must be in (0, 1], got {q}")
        return "stochastic", q
    raise ValueError(f"--model must be 'det' or 'stoch:<q>', got {token!r}")


def resolve_threads(value: int | None) -> int:
    """--threads flag, then SPREADDETECT_THREADS, then available parallelism."""
    if value is not None:
        if value < 1:
            raise ValueError(f"--threads must be >= 1, got {value}")
        return value
    env = os.environ.get("SPREADDETECT_THREADS")
    if env:
        threads = int(env)
        if threads < 1:
            raise ValueError(f"SPREADDETECT_THREADS must be >= 1, got {env}")
        return threads
    return os.cpu_count() or 1


def _load_graph_for(x: np.ndarray, spec: str) -> graph.NetworkGraph:
    g = graph.from_spec(spec)
    if g.p != x.shape[0]:
        raise ValueError(f"--graph has p={g.p} nodes but --data has {x.shape[0]} rows")
    return g


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_detect(args) -> int:
    x = load_data_matrix(args.data)
    g = _load_graph_for(x, args.graph)
    if args.rate_grid is not None:
        if args.stat == "linear":
            raise ValueError("--rate-grid applies to the quadratic statistic; drop --stat linear")
        result = detect.estimate_with_rate_search(x, g, parse_rate_grid(args.rate_grid))
    elif args.stat == "linear":
        result = detect.estimate(x, g, kind="linear")
    else:
        result = detect.estimate(x, g, kind="quadratic")
    if args.emit_stat_matrix:
        t_mat = detect.cusum_transform(x)
        dmat = graph.all_pairs_distances(g)
        if args.stat == "linear":
            stat = detect.linear_stat_matrix(t_mat, dmat)
        else:
            lags = dmat if result.q_hat in (None, 1.0) else detect.scaled_distance(dmat, result.q_hat)
            stat = detect.quadratic_stat_matrix(t_mat, lags)
        detect.write_stat_matrix(args.emit_stat_matrix, stat)
    _emit_json(
        {
            "schema_version": SCHEMA_VERSION,
            "j_hat": result.j_hat,
            "z_hat": result.z_hat,
            "stat_value": result.stat_value,
            "q_hat": result.q_hat,
        },
        args.output,
    )
    return 0


def cmd_test(args) -> int:
    x = load_data_matrix(args.data)
    g = _load_graph_for(x, args.graph)
    if args.delta is not None:
        lam = detect.test_threshold(x.shape[0], x.shape[1], args.delta)
    else:
        lam = args.lam
    t_mat = detect.cusum_transform(x)
    max_stat = float(detect.quadratic_stat_matrix(t_mat, graph.all_pairs_distances(g)).max())
    _emit_json(
        {
            "schema_version": SCHEMA_VERSION,
            "lambda": lam,
            "max_stat": max_stat,
            "reject": bool(max_stat >= lam),
        },
        args.output,
    )
    return 0


def cmd_simulate(args) -> int:
    g = graph.from_spec(args.graph)
    model, q = parse_model(args.model)
    spec = simulate.SpreadSpec.uniform(
        p=g.p,
        z_star=args.z_star,
        j_star=args.j_star,
        n=args.n,
        signal=args.signal,
        mu0=args.mu0,
        model=model,
        q=q,
    )
    rng = np.random.default_rng(args.seed)
    schedule = simulate.spread_schedule(g, spec, rng)
    x = simulate.generate_data(g, spec, rng, noise_sd=args.noise_sd, schedule=schedule)
    save_data_matrix(args.output, x)
    truth_path = args.truth or args.output + ".truth.json"
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "n": args.n,
                "p": g.p,
                "z_star": args.z_star,
                "j_star": args.j_star,
                "signal": args.signal,
                "model": args.model,
                "noise_sd": args.noise_sd,
                "seed": args.seed,
                "graph": args.graph,
                "spread_time": [None if not np.isfinite(s) else float(s) for s in schedule],
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    return 0


def _bench_config(args) -> simulate.BenchConfig:
    if args.table1_row:
        parts = [s.strip() for s in args.table1_row.split(",")]
        if len(parts) != 4:
            raise ValueError(f"--table1-row must be 'n,p,z_star,signal', got {args.table1_row!r}")
        n, p, z_star = (int(s) for s in parts[:3])
        signal = float(parts[3])
        j_star = p // 2
        model, q = "deterministic", None
        methods = tuple(args.methods.split(",")) if args.methods else ("SD", "coordwise")
        graph_spec = args.graph
    else:
        missing = [
            name
            for name, val in (
                ("--n", args.n),
                ("--p", args.p),
                ("--z-star", args.z_star),
                ("--j-star", args.j_star),
                ("--signal", args.signal),
            )
            if val is None
        ]
        if missing:
            raise ValueError(f"bench needs {', '.join(missing)} (or --table1-row)")
        n, p, z_star, j_star, signal = args.n, args.p, args.z_star, args.j_star, args.signal
        model, q = parse_model(args.model)
        methods = tuple(args.methods.split(",")) if args.methods else ("SD", "coordwise")
        graph_spec = args.graph
    return simulate.BenchConfig(
        n=n,
        p=p,
        z_star=z_star,
        j_star=j_star,
        signal=signal,
        model=model,
        q=q,
        graph=graph_spec,
        methods=methods,
        q_grid=parse_rate_grid(args.rate_grid),
        noise_sd=args.noise_sd,
    )


def cmd_bench(args) -> int:
    config = _bench_config(args)
    rows = simulate.monte_carlo(
        config, reps=args.reps, seed=args.seed, n_jobs=resolve_threads(args.threads)
    )
    simulate.write_benchmark_csv(args.output, rows)
    return 0


def cmd_mg(args) -> int:
    if not 0.0 < args.c1 < 1.0:
        raise ValueError(f"--c1 must be in the open interval (0, 1), got {args.c1}")
    g = graph.from_spec(args.graph)
    dmat = graph.all_pairs_distances(g)
    if args.minimize_over_source:
        m = graph.min_identifiability_number(dmat, args.c1, args.n)
    else:
        if args.z_star is None or args.j_star is None:
            raise ValueError("mg needs --z-star and --j-star (or --minimize-over-source)")
        m = graph.identifiability_number(dmat, args.c1, args.z_star, args.j_star, args.n)
    _emit_json(
        {
            "schema_version": SCHEMA_VERSION,
            "C1": args.c1,
            "m": m,
            "m_over_p": m / g.p,
            "graph": args.graph,
            "n": args.n,
            "z_star": args.z_star,
            "j_star": args.j_star,
        },
        args.output,
    )
    return 0


def cmd_preprocess(args) -> int:
    series = preprocess.read_weekly_csv(args.data)
    train_end = dt.date.fromisoformat(args.train_end)
    date_grids = {tuple(s.dates) for s in series}
    if len(date_grids) != 1:
        raise ValueError("--data units must share an identical weekly date grid")
    g = graph.from_spec(args.graph) if args.graph else None
    if g is not None and g.p != len(series):
        raise ValueError(f"--graph has p={g.p} nodes but --data has {len(series)} units")

    rows = []
    sidecar_units = []
    for s in series:
        baseline = preprocess.fit_seasonal(s.window(train_end), bandwidth=args.bandwidth)
        rows.append(preprocess.detrend_standardize(s, baseline))
        sidecar_units.append(
            {
                "unit": s.unit_id,
                "mean": baseline.mean,
                "sd": baseline.sd,
                "daily_fit": [float(v) for v in baseline.daily_fit],
            }
        )
    matrix = np.vstack(rows)

    dates = series[0].dates
    with open(args.output, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["unit"] + [d.isoformat() for d in dates])
        for s, row in zip(series, matrix):
            writer.writerow([s.unit_id] + [f"{v:.12g}" for v in row])

    sidecar_path = args.sidecar or args.output + ".sidecar.json"
    with open(sidecar_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "schema_version": SCHEMA_VERSION,
                "bandwidth": args.bandwidth,
                "train_end": args.train_end,
                "units": sidecar_units,
            },
            fh,
            indent=2,
        )
        fh.write("\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spreaddetect",
        description="Locate the source node and start time of a change spreading across a network.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_detect = sub.add_parser("detect", help="estimate the source node and change time")
    p_detect.add_argument("--data", required=True, help="data CSV (rows=nodes, columns=time)")
    p_detect.add_argument("--graph", required=True, help="graph spec, e.g. cycle:200 or file:edges.txt")
    p_detect.add_argument("--stat", choices=["quad", "linear"], default="quad")
    p_detect.add_argument("--rate-grid", help="search transmission rates, e.g. 0.1:0.9:0.1")
    p_detect.add_argument("--emit-stat-matrix", metavar="PATH", help="also write the statistic matrix CSV")
    p_detect.add_argument("--output", "-o", help="write the result JSON here instead of stdout")
    p_detect.set_defaults(func=cmd_detect)

    p_test = sub.add_parser("test", help="test whether any change is present")
    p_test.add_argument("--data", required=True)
    p_test.add_argument("--graph", required=True)
    group = p_test.add_mutually_exclusive_group(required=True)
    group.add_argument("--delta", type=float, help="false-alarm level in (0, 1)")
    group.add_argument("--lambda", dest="lam", type=float, help="explicit rejection threshold")
    p_test.add_argument("--output", "-o")
    p_test.set_defaults(func=cmd_test)

    p_sim = sub.add_parser("simulate", help="generate a data matrix under a spreading change")
    p_sim.add_argument("--graph", required=True)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--z-star", type=int, required=True)
    p_sim.add_argument("--j-star", type=int, required=True)
    p_sim.add_argument("--signal", type=float, required=True)
    p_sim.add_argument("--mu0", type=float, default=0.0)
    p_sim.add_argument("--model", default="det", help="det or stoch:<q>")
    p_sim.add_argument("--noise-sd", type=float, default=1.0)
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--output", "-o", required=True, help="data CSV path")
    p_sim.add_argument("--truth", help="ground-truth JSON path (default: <output>.truth.json)")
    p_sim.set_defaults(func=cmd_simulate)

    p_bench = sub.add_parser("bench", help="Monte Carlo accuracy benchmark")
    p_bench.add_argument("--table1-row", help="shorthand 'n,p,z_star,signal' (cycle graph, source p/2)")
    p_bench.add_argument("--n", type=int)
    p_bench.add_argument("--p", type=int)
    p_bench.add_argument("--z-star", type=int)
    p_bench.add_argument("--j-star", type=int)
    p_bench.add_argument("--signal", type=float)
    p_bench.add_argument("--graph", help="graph spec (default cycle:<p>)")
    p_bench.add_argument("--model", default="det")
    p_bench.add_argument("--methods", help="comma list from SD,rSD,coordwise (default SD,coordwise)")
    p_bench.add_argument("--rate-grid", default="0.1:0.9:0.1")
    p_bench.add_argument("--noise-sd", type=float, default=1.0)
    p_bench.add_argument("--reps", type=int, default=100)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--threads", type=int, help="worker count (default: SPREADDETECT_THREADS or all cores)")
    p_bench.add_argument("--output", "-o", required=True, help="benchmark CSV path")
    p_bench.set_defaults(func=cmd_bench)

    p_mg = sub.add_parser("mg", help="identifiability count of a graph")
    p_mg.add_argument("--graph", required=True)
    p_mg.add_argument("--c1", type=float, required=True, help="displacement fraction in (0, 1)")
    p_mg.add_argument("--n", type=int, required=True)
    p_mg.add_argument("--z-star", type=int)
    p_mg.add_argument("--j-star", type=int)
    p_mg.add_argument("--minimize-over-source", action="store_true",
                      help="also minimize over true (time, source) pairs")
    p_mg.add_argument("--output", "-o")
    p_mg.set_defaults(func=cmd_mg)

    p_prep = sub.add_parser("preprocess", help="seasonal detrending of weekly count series")
    p_prep.add_argument("--data", required=True, help="CSV with columns unit,date,count")
    p_prep.add_argument("--train-end", required=True, help="last training date, ISO format")
    p_prep.add_argument("--bandwidth", type=float, default=preprocess.DEFAULT_BANDWIDTH)
    p_prep.add_argument("--graph", help="optional graph spec to validate the unit count")
    p_prep.add_argument("--output", "-o", required=True, help="standardized matrix CSV path")
    p_prep.add_argument("--sidecar", help="baseline JSON path (default: <output>.sidecar.json)")
    p_prep.set_defaults(func=cmd_preprocess)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"spreaddetect {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal failure
        print(f"spreaddetect {args.command}: internal error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line front end: datasets -> embeddings -> distances -> kernels -> checks.

Subcommands:
  gram        Gram/distance matrices for a TU dataset (one kernel per lambda)
  check       spectral definiteness checks on a stored matrix artifact
  robustness  relative-distance-vs-noise experiment on random graphs
  bench       exact-vs-Sinkhorn timing table on random embeddings

Exit codes: 0 success/pass, 1 check failure, 2 usage or data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .embedding import CATEGORICAL, CONTINUOUS, wl_refine_categorical
from .graphs import (
    Dataset,
    Graph,
    GraphValidationError,
    degree_as_attribute,
    degree_as_label,
    erdos_renyi,
    permute,
    perturb_edges,
)
from .embedding import propagate_continuous
from .ground_distance import euclidean_matrix, hamming_matrix
from .io import DatasetFormatError, MatrixArtifact, parse_tu, read_matrix, write_matrix
from .kernels import (
    KernelConfig,
    KernelConfigError,
    StageTimings,
    _assemble_gwd,
    cnd_check,
    psd_check,
    wwl_kernel,
)
from .ot import (
    EXACT,
    SINKHORN,
    SINKHORN_MAX_ITER,
    SINKHORN_TOL,
    OtgError,
    wasserstein_exact,
    wasserstein_sinkhorn,
)

USAGE_ERROR = 2
CHECK_FAILED = 1


@dataclass
class RunManifest:
    """What ran and how long each stage took; written next to every output."""

    command: str
    dataset: str | None
    config: dict
    seed: int | None
    out_dir: str
    timings: dict = field(default_factory=dict)
    version: str = __version__

    def write(self, out_dir: Path) -> None:
        payload = {
            "command": self.command,
            "dataset": self.dataset,
            "config": self.config,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "timings": self.timings,
            "version": self.version,
        }
        with open(out_dir / "manifest.json", "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")


def _default_threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("WWL_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _artifact_stem(name: str, h: int, solver: str, gamma) -> str:
    stem = f"{name}_gwd_h{h}"
    if solver == SINKHORN:
        stem += f"_gamma{gamma:g}"
    return stem


def cmd_gram(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset = parse_tu(args.data, args.name or Path(args.data).name)
    if args.degree_features:
        dataset = Dataset([degree_as_attribute(g) for g in dataset.graphs],
                          dataset.graph_labels, dataset.name)
    config = KernelConfig(
        scheme=args.scheme,
        h=args.iterations,
        solver=args.solver,
        gamma=args.gamma,
        lambdas=tuple(args.lambdas or [1.0]),
        standardize=args.standardize,
        sinkhorn_tol=args.sinkhorn_tol,
        sinkhorn_max_iter=args.sinkhorn_max_iter,
    )
    threads = _default_threads(args)
    artifacts, timings = _assemble_gwd(dataset, config, threads, all_h=args.all_h)
    written = []
    for artifact in artifacts:
        stem = _artifact_stem(dataset.name, artifact.h, config.solver, config.gamma)
        write_matrix(artifact, out_dir / f"{stem}.txt")
        written.append(f"{stem}.txt")
        for lam in config.lambdas:
            kernel = wwl_kernel(artifact, lam)
            kname = f"{stem.replace('_gwd_', '_wwl_')}_lam{lam:g}.txt"
            write_matrix(kernel, out_dir / kname)
            written.append(kname)
    manifest = RunManifest(
        command="gram",
        dataset=f"{args.data} ({dataset.name})",
        config={
            "scheme": config.scheme, "h": config.h, "all_h": args.all_h,
            "solver": config.solver, "gamma": config.gamma,
            "lambdas": list(config.lambdas), "standardize": config.standardize,
            "degree_features": args.degree_features,
            "sinkhorn_tol": config.sinkhorn_tol,
            "sinkhorn_max_iter": config.sinkhorn_max_iter,
            "threads": threads,
        },
        seed=args.seed,
        out_dir=str(out_dir),
        timings=timings.as_dict(),
    )
    manifest.write(out_dir)
    for name in written:
        print(name)
    print(f"wrote {len(written)} artifacts to {out_dir} "
          f"(total {timings.total:.2f}s)")
    return 0


def cmd_check(args) -> int:
    artifact = read_matrix(args.matrix)
    if args.mode == "psd":
        report = psd_check(artifact)
    else:
        report = cnd_check(artifact)
    status = "pass" if report.passed else "FAIL"
    print(f"{args.mode} check: {status}  lambda_min={report.lambda_min:.6e}  "
          f"lambda_max={report.lambda_max:.6e}  tol={report.tol:g}")
    if report.passed or args.report_only:
        return 0
    return CHECK_FAILED


def _relative_distance_pair(dataset: Dataset, scheme: str, h: int) -> float:
    """rel = D(G0, G1) / D(G0, G2) under the requested scheme."""
    if scheme == CONTINUOUS:
        emb = [propagate_continuous(g, h) for g in dataset.graphs]
        m01 = euclidean_matrix(emb[0], emb[1])
        m02 = euclidean_matrix(emb[0], emb[2])
    else:
        emb = wl_refine_categorical(dataset, h)
        m01 = hamming_matrix(emb[0], emb[1])
        m02 = hamming_matrix(emb[0], emb[2])
    d01 = wasserstein_exact(m01, return_plan=False).distance
    d02 = wasserstein_exact(m02, return_plan=False).distance
    if d02 == 0.0:
        return np.nan
    return d01 / d02


def cmd_robustness(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    noise_grid = [float(x) for x in args.noise.split(",")]
    if any(not 0.0 <= x <= 1.0 for x in noise_grid):
        raise GraphValidationError(f"noise grid outside [0, 1]: {noise_grid}")
    start = time.perf_counter()
    rows = []
    resamples = 0
    for noise_idx, noise in enumerate(noise_grid):
        wwl_rels = []
        wl_rels = []
        for trial in range(args.trials):
            attempt = 0
            while True:
                ss = np.random.SeedSequence([args.seed, noise_idx, trial, attempt])
                s_g, s_g2, s_perm, s_perturb = (int(x) for x in ss.generate_state(4))
                g = erdos_renyi(args.nodes, args.edge_prob, s_g)
                g_indep = erdos_renyi(args.nodes, args.edge_prob, s_g2)
                perm = np.random.default_rng(s_perm).permutation(args.nodes)
                g_var = perturb_edges(permute(g, perm), noise, s_perturb)

                cont = Dataset([degree_as_attribute(x) for x in (g, g_var, g_indep)],
                               [0, 0, 0], "robustness")
                cat = Dataset([degree_as_label(x) for x in (g, g_var, g_indep)],
                              [0, 0, 0], "robustness")
                rel_wwl = _relative_distance_pair(cont, CONTINUOUS, args.wl_iterations)
                rel_wl = _relative_distance_pair(cat, CATEGORICAL, args.wl_iterations)
                if np.isnan(rel_wwl) or np.isnan(rel_wl):
                    resamples += 1
                    attempt += 1
                    continue
                break
            wwl_rels.append(rel_wwl)
            wl_rels.append(rel_wl)
        rows.append((noise,
                     float(np.mean(wwl_rels)), float(np.std(wwl_rels)),
                     float(np.mean(wl_rels)), float(np.std(wl_rels))))
    table = out_dir / "robustness.tsv"
    with open(table, "w") as fh:
        fh.write("noise\twwl_mean\twwl_sd\twl_mean\twl_sd\ttrials\n")
        for noise, wm, ws, lm, ls in rows:
            fh.write(f"{noise:g}\t{wm:.10g}\t{ws:.10g}\t{lm:.10g}\t{ls:.10g}\t{args.trials}\n")
    manifest = RunManifest(
        command="robustness",
        dataset=None,
        config={
            "nodes": args.nodes, "edge_prob": args.edge_prob,
            "noise_grid": noise_grid, "trials": args.trials,
            "wl_iterations": args.wl_iterations,
            "wwl_features": "degree-as-attribute (continuous scheme)",
            "wl_baseline": "degree-as-label Hamming GWD",
            "resamples": resamples,
        },
        seed=args.seed,
        out_dir=str(out_dir),
        timings={"total": time.perf_counter() - start},
    )
    manifest.write(out_dir)
    print(f"wrote {table}")
    return 0


def cmd_bench(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    avg_list = [int(x) for x in args.avg_nodes.split(",")]
    threads = _default_threads(args)
    rng = np.random.default_rng(args.seed)
    start = time.perf_counter()
    rows = []
    for avg in avg_list:
        counts = np.maximum(
            2, np.round(rng.normal(avg, avg / 10.0, size=args.graphs)).astype(int))
        embeddings = [rng.normal(size=(c, args.dim)) for c in counts]
        sq_norms = [(e * e).sum(axis=1) for e in embeddings]

        def solve_pair(pair):
            # per-pair timings summed across workers: fair exact-vs-sinkhorn
            # comparison regardless of thread count
            i, j = pair
            t0 = time.perf_counter()
            sq = (sq_norms[i][:, None] + sq_norms[j][None, :]
                  - 2.0 * (embeddings[i] @ embeddings[j].T))
            cost = np.sqrt(np.maximum(sq, 0.0))
            t1 = time.perf_counter()
            wasserstein_exact(cost, return_plan=False)
            t2 = time.perf_counter()
            wasserstein_sinkhorn(cost, args.gamma, args.sinkhorn_tol,
                                 args.sinkhorn_max_iter, return_plan=False)
            t3 = time.perf_counter()
            return t1 - t0, t2 - t1, t3 - t2

        pairs = [(i, j) for i in range(args.graphs) for j in range(i + 1, args.graphs)]
        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=threads) as pool:
                timed = list(pool.map(solve_pair, pairs))
        else:
            timed = [solve_pair(p) for p in pairs]
        dist_time = sum(t[0] for t in timed)
        exact_time = sum(t[1] for t in timed)
        sinkhorn_time = sum(t[2] for t in timed)
        rows.append((avg, float(counts.mean()), dist_time,
                     exact_time, dist_time + exact_time,
                     sinkhorn_time, dist_time + sinkhorn_time))
    table = out_dir / "bench.tsv"
    with open(table, "w") as fh:
        fh.write("avg_nodes\tmean_nodes\tdistance_time\texact_ot_time\t"
                 "exact_total_time\tsinkhorn_ot_time\tsinkhorn_total_time\n")
        for row in rows:
            fh.write("\t".join(f"{x:.6g}" for x in row) + "\n")
    manifest = RunManifest(
        command="bench",
        dataset=None,
        config={
            "graphs": args.graphs, "avg_nodes": avg_list, "dim": args.dim,
            "gamma": args.gamma, "sinkhorn_tol": args.sinkhorn_tol,
            "sinkhorn_max_iter": args.sinkhorn_max_iter,
        },
        seed=args.seed,
        out_dir=str(out_dir),
        timings={"total": time.perf_counter() - start},
    )
    manifest.write(out_dir)
    print(f"wrote {table}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wwlkit",
        description="Wasserstein Weisfeiler-Lehman graph kernels",
    )
    parser.add_argument("--version", action="version", version=f"wwlkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gram = sub.add_parser("gram", help="compute distance + kernel matrices for a dataset")
    gram.add_argument("--data", required=True, help="TU dataset directory")
    gram.add_argument("--name", default=None, help="dataset prefix (default: directory name)")
    gram.add_argument("--scheme", choices=[CATEGORICAL, CONTINUOUS], required=True)
    gram.add_argument("-H", "--iterations", type=int, default=4, dest="iterations",
                      help="number of refinement/propagation iterations")
    gram.add_argument("--all-h", action="store_true",
                      help="write one distance artifact per h in 0..H")
    gram.add_argument("--lambda", dest="lambdas", type=float, action="append",
                      help="kernel scale; repeatable, one kernel artifact per value")
    gram.add_argument("--solver", choices=[EXACT, SINKHORN], default=EXACT)
    gram.add_argument("--gamma", type=float, default=None, help="sinkhorn regularization")
    gram.add_argument("--sinkhorn-tol", type=float, default=SINKHORN_TOL)
    gram.add_argument("--sinkhorn-max-iter", type=int, default=SINKHORN_MAX_ITER)
    gram.add_argument("--standardize", action="store_true",
                      help="standardize attributes over the pooled dataset before embedding")
    gram.add_argument("--degree-features", action="store_true",
                      help="use node degrees as attributes (for unattributed datasets)")
    gram.add_argument("--seed", type=int, default=None)
    gram.add_argument("--threads", type=int, default=None)
    gram.add_argument("--out", required=True)
    gram.set_defaults(func=cmd_gram)

    check = sub.add_parser("check", help="spectral definiteness check of a matrix artifact")
    check.add_argument("--matrix", required=True)
    check.add_argument("--mode", choices=["psd", "cnd"], required=True)
    check.add_argument("--report-only", action="store_true",
                       help="always exit 0, reporting the spectrum only")
    check.set_defaults(func=cmd_check)

    rob = sub.add_parser("robustness", help="relative distance vs edge-removal noise")
    rob.add_argument("--n", dest="nodes", type=int, default=30)
    rob.add_argument("--p", dest="edge_prob", type=float, default=0.2)
    rob.add_argument("--noise", default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")
    rob.add_argument("--trials", type=int, default=50)
    rob.add_argument("--wl-iterations", type=int, default=2)
    rob.add_argument("--seed", type=int, default=0)
    rob.add_argument("--threads", type=int, default=None)
    rob.add_argument("--out", required=True)
    rob.set_defaults(func=cmd_robustness)

    bench = sub.add_parser("bench", help="exact vs sinkhorn runtime on random embeddings")
    bench.add_argument("--graphs", type=int, default=100)
    bench.add_argument("--avg-nodes", default="50,100,200")
    bench.add_argument("--dim", type=int, default=10)
    bench.add_argument("--gamma", type=float, default=1.0)
    bench.add_argument("--sinkhorn-tol", type=float, default=SINKHORN_TOL)
    bench.add_argument("--sinkhorn-max-iter", type=int, default=SINKHORN_MAX_ITER)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--threads", type=int, default=None)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (GraphValidationError, DatasetFormatError, KernelConfigError, OtgError,
            OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: rank, compare, verify, and gen subcommands."""

from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from .decomposition import ldu_factors, stochastic_complement, verify_coupled_stationarity
from .graph import (
    PageRankParams,
    build_hyperlink_matrix,
    load_weight_vector,
    parse_edge_list,
    uniform_vector,
)
from .lumping import detect_dangling, full_operator, permute_blocks, power_method, solve_lumped
from .transforms import (
    DENSE_LIMIT_DEFAULT,
    TransformKind,
    build_dense_google,
    build_dense_lumped,
    build_transform,
    check_lumpable,
    check_spectrum_identity,
    similarity_transform,
    stationary_dense,
    verify_transform_condition,
)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NOT_CONVERGED = 2
EXIT_DENSE_LIMIT = 3

_BUILTIN_KINDS = (TransformKind.AVERAGING, TransformKind.SPARSE_ELIM,
                  TransformKind.JORDAN_DIFF)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lumprank",
        description="PageRank that lumps all dangling nodes into one state, "
                    "plus dense verification of the underlying matrix identities.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add_solver_args(p):
        p.add_argument("graph_path", help="edge-list file ('src dst' per line, '#' comments)")
        p.add_argument("--alpha", type=float, default=0.85, help="damping factor in (0,1)")
        p.add_argument("--v", dest="v_spec", default="uniform", metavar="SPEC",
                       help="personalization vector: 'uniform' or a file of n floats")
        p.add_argument("--w", dest="w_spec", default="uniform", metavar="SPEC",
                       help="dangling-node vector: 'uniform' or a file of n floats")
        p.add_argument("--tol", type=float, default=1e-10, help="1-norm stopping tolerance")
        p.add_argument("--max-iter", type=int, default=1000)

    p_rank = sub.add_parser("rank", help="rank nodes via the lumped solver (TSV on stdout)")
    add_solver_args(p_rank)
    p_rank.add_argument("--top", type=int, default=None, help="print only the best N rows")

    p_cmp = sub.add_parser("compare", help="lumped vs full power method, timings and 1-norm gap")
    add_solver_args(p_cmp)

    p_ver = sub.add_parser("verify", help="dense identity checks on a small graph")
    add_solver_args(p_ver)
    p_ver.add_argument("--dense-limit", type=int, default=DENSE_LIMIT_DEFAULT)
    p_ver.add_argument("--seed", type=int, default=0, help="seed for sampled check points")
    p_ver.add_argument("--negative-control", action="store_true",
                       help="also run deliberately corrupted checks (they must FAIL)")

    p_gen = sub.add_parser("gen", help="emit a random edge list on stdout")
    p_gen.add_argument("--nodes", type=int, required=True)
    p_gen.add_argument("--dangling-frac", type=float, required=True,
                       help="fraction of nodes that emit no edges, in [0,1]")
    p_gen.add_argument("--avg-degree", type=int, default=4,
                       help="out-degree is uniform on [1, 2*avg-1]")
    p_gen.add_argument("--seed", type=int, default=0)
    return ap


def _load_graph(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def _load_weight(spec: str, n: int) -> np.ndarray:
    if spec == "uniform":
        return load_weight_vector("uniform", n)
    with open(spec, "r", encoding="utf-8") as fh:
        return load_weight_vector(fh.read(), n)


def _load_params(cfg, n: int) -> PageRankParams:
    return PageRankParams(
        alpha=cfg.alpha,
        v=_load_weight(cfg.v_spec, n),
        w=_load_weight(cfg.w_spec, n),
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )


def cmd_rank(cfg) -> int:
    g = _load_graph(cfg.graph_path)
    params = _load_params(cfg, g.n)
    rep = solve_lumped(g, params)
    print(f"# n={rep.n} k={rep.k} dangling={rep.n - rep.k} alpha={params.alpha:g} "
          f"iters={rep.iterations} residual={rep.residual:.6e}")
    # sort on the printed 12-digit value so ties mean ties in the output
    printed = np.array([float(f"{s:.12g}") for s in rep.pagerank])
    order = np.lexsort((g.labels, -printed))  # score desc, ties by label asc
    limit = rep.n if cfg.top is None else min(cfg.top, rep.n)
    for rank, i in enumerate(order[:limit], start=1):
        print(f"{g.labels[i]}\t{rep.pagerank[i]:.12g}\t{rank}")
    return EXIT_OK if rep.converged else EXIT_NOT_CONVERGED


def cmd_compare(cfg) -> int:
    g = _load_graph(cfg.graph_path)
    params = _load_params(cfg, g.n)
    H = build_hyperlink_matrix(g)
    p = detect_dangling(H)
    n, k = g.n, p.k
    print(f"# n={n} k={k} dangling={n - k} alpha={params.alpha:g} tol={params.tol:g}")
    if k == n:
        print("no dangling nodes; lumped path = full path")

    t0 = time.perf_counter()
    rep = solve_lumped(g, params)
    lumped_time = time.perf_counter() - t0

    op = full_operator(H, params)
    t0 = time.perf_counter()
    pi_full, full_iters, _, full_conv = power_method(op, uniform_vector(n),
                                                     params.tol, params.max_iter)
    full_time = time.perf_counter() - t0

    lumped_per = f"{lumped_time / rep.iterations:.3e}s" if rep.iterations else "n/a (closed form)"
    full_per = f"{full_time / full_iters:.3e}s" if full_iters else "n/a"
    diff = float(np.abs(rep.pagerank - pi_full).sum())
    print(f"lumped: iters={rep.iterations} time={lumped_time:.6f}s per_iter={lumped_per}")
    print(f"full:   iters={full_iters} time={full_time:.6f}s per_iter={full_per}")
    print(f"l1_diff={diff:.6e}")
    return EXIT_OK if (rep.converged and full_conv) else EXIT_NOT_CONVERGED


def cmd_verify(cfg) -> int:
    g = _load_graph(cfg.graph_path)
    if g.n > cfg.dense_limit:
        print(f"lumprank: n={g.n} exceeds dense limit {cfg.dense_limit}",
              file=sys.stderr)
        return EXIT_DENSE_LIMIT
    params = _load_params(cfg, g.n)
    H = build_hyperlink_matrix(g)
    p = detect_dangling(H)
    n, k = g.n, p.k
    m = n - k
    Gt = build_dense_google(g, params, p, dense_limit=cfg.dense_limit)

    failures = 0

    def emit(name: str, passed: bool, dev: float, note: str = ""):
        nonlocal failures
        if not passed:
            failures += 1
        suffix = f"  ({note})" if note else ""
        print(f"{'PASS' if passed else 'FAIL'} {name} max_dev={dev:.3e}{suffix}")

    def skip(name: str, why: str):
        print(f"SKIP {name}  ({why})")

    print(f"# n={n} k={k} dangling={m} alpha={params.alpha:g} seed={cfg.seed}")

    G1_direct = None
    if m == 0:
        for kind in _BUILTIN_KINDS:
            skip(f"transform_condition[{kind.value}]", "no dangling nodes; nothing to lump")
        skip("spectrum_identity", "no dangling nodes")
    else:
        b = permute_blocks(H, p, params)
        G1_direct = build_dense_lumped(b)
        for kind in _BUILTIN_KINDS:
            L = build_transform(kind, m)
            rep = verify_transform_condition(L, tol=1e-12)
            emit(f"transform_condition[{kind.value}]", rep.passed,
                 rep.max_abs_deviation, rep.detail if not rep.passed else "")
            full, G1, _ = similarity_transform(Gt, L, k)
            bottom = full[k + 1:, :]
            dev_tri = float(np.abs(bottom).max()) if bottom.size else 0.0
            note = "degenerate order-1 transform" if m == 1 else ""
            emit(f"block_triangular[{kind.value}]", dev_tri <= 1e-11, dev_tri, note)
            dev_g1 = float(np.abs(G1 - G1_direct).max())
            emit(f"lumped_block_formula[{kind.value}]", dev_g1 <= 1e-12, dev_g1)
        rep = check_spectrum_identity(Gt, G1_direct, k, tol=1e-8, seed=cfg.seed)
        emit("spectrum_identity", rep.passed, rep.max_abs_deviation, rep.detail)

    if 1 <= k <= n - 1:
        rep = check_lumpable(Gt, [k], tol=1e-10, blocks=[(1, 0)])
        emit("lumpable_dangling_to_nondangling", rep.passed, rep.max_abs_deviation)

        f = ldu_factors(Gt, k)
        recon = f.Lfac @ f.Dfac @ f.Ufac - (np.eye(n) - Gt)
        dev_ldu = float(np.abs(recon).max())
        emit("ldu_reconstruction", dev_ldu <= 1e-12 * n, dev_ldu)

        S = stochastic_complement(Gt, k)
        dev_rows = max(float(np.abs(S.sum(axis=1) - 1.0).max()),
                       float(max(-S.min(), 0.0)))
        emit("stochastic_complement_rows", dev_rows <= 1e-10, dev_rows)

        pi_t = stationary_dense(Gt)
        rep = verify_coupled_stationarity(pi_t, Gt, k, tol=1e-8)
        emit("coupled_stationarity", rep.passed, rep.max_abs_deviation, rep.detail)
    else:
        skip("lumpable_dangling_to_nondangling", "partition has an empty block")
        skip("decomposition_checks", "split needs both nondangling and dangling nodes")
        pi_t = None

    if cfg.negative_control:
        if G1_direct is not None:
            bad = G1_direct.copy()
            bad[0, 0] += 0.1
            rep = check_spectrum_identity(Gt, bad, k, tol=1e-8, seed=cfg.seed)
            emit("negative_control[corrupted_lumped_block]", rep.passed,
                 rep.max_abs_deviation, "expected FAIL")
        if 1 <= k <= n - 1 and pi_t is not None:
            bad_pi = pi_t.copy()
            bad_pi[0] += 1e-3
            bad_pi /= bad_pi.sum()
            rep = verify_coupled_stationarity(bad_pi, Gt, k, tol=1e-6)
            emit("negative_control[perturbed_stationary]", rep.passed,
                 rep.max_abs_deviation, "expected FAIL")

    return EXIT_OK if failures == 0 else 1


def generate_edge_list(nodes: int, dangling_frac: float, avg_degree: int,
                       seed: int) -> str:
    """Random edge-list text; the first ceil((1-frac)*nodes) ids emit edges.

    Each emitting node draws its out-degree uniformly from [1, 2*avg_degree-1]
    and its targets uniformly over all node ids.  Deterministic per seed.
    """
    if nodes < 1:
        raise ValueError(f"node count must be positive, got {nodes}")
    if not 0.0 <= dangling_frac <= 1.0:
        raise ValueError(f"dangling fraction must lie in [0, 1], got {dangling_frac}")
    if avg_degree < 1:
        raise ValueError(f"average degree must be at least 1, got {avg_degree}")
    rng = np.random.default_rng(seed)
    nondangling = math.ceil((1.0 - dangling_frac) * nodes)
    lines = []
    for src in range(nondangling):
        degree = int(rng.integers(1, 2 * avg_degree))
        for dst in rng.integers(0, nodes, size=degree):
            lines.append(f"{src} {dst}")
    return "\n".join(lines) + ("\n" if lines else "")


def cmd_gen(cfg) -> int:
    sys.stdout.write(generate_edge_list(cfg.nodes, cfg.dangling_frac,
                                        cfg.avg_degree, cfg.seed))
    return EXIT_OK


def main(argv=None) -> int:
    cfg = build_parser().parse_args(argv)
    handlers = {"rank": cmd_rank, "compare": cmd_compare,
                "verify": cmd_verify, "gen": cmd_gen}
    try:
        return handlers[cfg.command](cfg)
    except (OSError, ValueError) as exc:
        print(f"lumprank: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

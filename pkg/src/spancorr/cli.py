"""Command-line entry point: ``spancorr <group> <command> [options]``.

Exit codes: 0 success, 1 a checked identity or acceptance criterion failed,
2 usage error, 3 a resource cap was hit.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Sequence

from . import mst, polytope, pwit, report, ust, verify
from .checks import IdentityViolation
from .graphs import GraphError, RetryCapExceeded, parse_graph_spec
from .spectral import LaplacianSystem, edge_probability_ust, pair_probability_ust, transfer_current

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ----------------------------------------------------------------- handlers


def _graph(args):
    return parse_graph_spec(args.graph)


def cmd_ust_moments(args) -> dict:
    G = _graph(args)
    rep = ust.exact_mean_sq_degree(G)
    out = rep.as_dict()
    out["per_vertex_min"] = float(rep.per_vertex.min())
    out["per_vertex_max"] = float(rep.per_vertex.max())
    out["below_six"] = rep.mean_sq_degree < 6
    if rep.upper_bound_value is not None:
        out["below_bound"] = rep.mean_sq_degree <= rep.upper_bound_value
    if G.m == G.n * (G.n - 1) // 2 and G.n >= 4:
        out["closed_form"] = ust.kn_ust_moments(G.n).mean_sq_degree
    return out


def cmd_ust_pair(args) -> dict:
    G = _graph(args)
    sys_ = LaplacianSystem(G)
    e, f = args.e, args.f
    pe, pf = edge_probability_ust(sys_, e), edge_probability_ust(sys_, f)
    pp = pair_probability_ust(sys_, e, f)
    return {"graph": G.name, "pair": [e, f], "p_e": pe, "p_f": pf, "p_pair": pp,
            "margin": pp - pe * pf, "transfer_current": {"ef": transfer_current(sys_, e, f),
                                                         "fe": transfer_current(sys_, f, e)}}


def cmd_ust_identity(args) -> dict:
    G = _graph(args)
    r = ust.second_moment_identity_check(G)
    out = {"graph": G.name, "exact": {"adjacent": r.adjacent, "nonadjacent": r.nonadjacent,
                                      "sum_sq_degree": r.sum_sq_degree}}
    if args.samples:
        trees = ust.sample_ust_batch(G, args.samples, args.seed)
        r2 = ust.second_moment_identity_check(G, trees=trees.tolist())
        out["sampled"] = {"adjacent": r2.adjacent, "nonadjacent": r2.nonadjacent,
                          "sum_sq_degree": r2.sum_sq_degree, "n_samples": args.samples}
    if not r.ok():
        raise IdentityViolation(f"pair-sum identity residuals too large: {r}")
    return out


def cmd_ust_mc(args) -> dict:
    G = _graph(args)
    r = ust.mc_mean_sq_degree(G, args.samples, args.seed, args.threads)
    return {"graph": G.name, "mean_sq_degree": r.as_dict()}


def cmd_mst_exact(args) -> dict:
    G = _graph(args)
    pairs = [tuple(args.pair)] if args.pair else None
    res = mst.exact_ordering_oracle(G, pairs, method=args.method, threads=args.threads)
    out = res.as_dict()
    out["verdicts"] = {}
    for (e, f), p in res.pairs.items():
        margin = p - res.p_edge[e] * res.p_edge[f]
        out["verdicts"][f"{e},{f}"] = {"margin": margin, "p_nc": margin <= 0}
    if mst._is_complete_host(G) and G.n >= 4:
        out["complete_host_identities"] = mst.complete_host_identities(res)
    return out


def cmd_mst_mc(args) -> dict:
    G = _graph(args)
    pairs = [tuple(args.pair)] if args.pair else None
    r = mst.mc_mst_moments(G, args.samples, args.seed, args.threads, pairs=pairs)
    out = r.as_dict()
    for rec in out["pairs"].values():
        lo, hi = rec["ci"]
        rec["verdict"] = ("consistent with p-NC" if hi <= 0 else
                          "consistent with positive correlation" if lo > 0 else "inconclusive")
    return out


def cmd_mst_lps(args) -> dict:
    c = mst.lps_certificate(method=args.method, threads=args.threads)
    return {"graph": "lps", "pair": [c.e, c.f], "p_pair": c.p_pair, "p_e": c.p_e, "p_f": c.p_f,
            "margin": c.margin, "exact": True, "orderings": 3628800,
            "verdict": "p-NC VIOLATED" if c.positively_correlated else "p-NC holds"}


def cmd_mst_trend(args) -> list[dict]:
    return mst.mst_trend(args.n, args.samples, args.seed, args.threads)


def cmd_mst_ratio_scan(args) -> list[dict]:
    from .graphs import complete_graph, cycle_graph, lps_gadget

    graphs = [complete_graph(4), complete_graph(5), cycle_graph(6), lps_gadget()[0]]
    if args.graph:
        graphs = [parse_graph_spec(g) for g in args.graph]
    return mst.pair_ratio_scan(graphs)


def cmd_pwit_moment(args) -> dict:
    return pwit.pwit_moment(args.samples, args.seed, args.threads)


def cmd_pwit_theta(args) -> dict:
    lam = args.lam
    t, q = pwit.theta_q(lam)
    out = {"lambda": lam, "theta": t, "q": q, "supercritical": lam > 1}
    if lam > 1:
        out.update(theta_prime=pwit.theta_prime(lam), alpha=pwit.alpha_closed(lam),
                   alpha_quadrature=pwit.alpha_fn(lam), beta=pwit.beta_fn(lam),
                   residual=pwit.theta_residual(lam))
    return out


def cmd_pwit_beta(args) -> dict:
    return pwit.pgw_beta_check(args.lam, args.samples, args.seed, args.threads)


def cmd_sharpness_sweep(args) -> list[dict]:
    if args.dmin < 5 or args.dmin % 2 == 0:
        raise UsageError("--dmin must be odd and >= 5")
    rows = []
    for r in ust.sharpness_sweep(range(args.dmin, args.dmax + 1, 2)):
        rows.append({"d": r.d, "q": r.q, "n": r.n, "mean_sq_degree": r.mean_sq_degree,
                     "gap_to_6": r.gap, "upper_bound": r.upper_bound,
                     "block_mean_sq_degree": r.block_mean_sq_degree})
    return rows


def cmd_polytope_alpha(args) -> dict:
    G = _graph(args)
    c = polytope.alpha_membership_check(G)
    return {"graph": c.graph, "n": c.n, "d": c.d, "min_alpha": c.min_alpha,
            "alpha_membership": c.alpha.as_dict(), "resistance_membership": c.resistance.as_dict(),
            "alpha_total": c.alpha_total, "alpha_total_closed": c.alpha_total_closed, "passed": c.passed}


def cmd_verify_all(args) -> dict:
    kw = {}
    if args.quick:
        kw = dict(pwit_samples=10**6, k5_samples=10**5, pgw_samples=10**5, forest_audits=1000)
    echo = (lambda line: print(line, file=sys.stderr)) if args.format != "text" else print
    res = verify.run_all(seed=args.seed, threads=args.threads, echo=echo, **kw)
    out = {"criteria": [r.as_dict() for r in res], "all_passed": all(r.passed for r in res)}
    if not out["all_passed"]:
        args._failed = True
    return out


# ------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=report.default_seed(),
                        help=f"master seed (default from ${report.SEED_ENV}, else 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="spancorr", description="Spanning-tree edge correlation experiments.")
    groups = p.add_subparsers(dest="group", required=True)

    def leaf(sub, name, fn, help_):
        q = sub.add_parser(name, parents=[common], help=help_)
        q.set_defaults(fn=fn)
        return q

    g = groups.add_parser("ust", help="uniform spanning tree analytics").add_subparsers(dest="cmd", required=True)
    q = leaf(g, "moments", cmd_ust_moments, "exact degree second moment and bound")
    q.add_argument("--graph", required=True)
    q = leaf(g, "pair", cmd_ust_pair, "pair probability from transfer currents")
    q.add_argument("--graph", required=True)
    q.add_argument("--e", type=int, required=True)
    q.add_argument("--f", type=int, required=True)
    q = leaf(g, "identity-check", cmd_ust_identity, "pair-sum identity residuals")
    q.add_argument("--graph", required=True)
    q.add_argument("--samples", type=int, default=0, help="also check on this many sampled trees")
    q = leaf(g, "mc", cmd_ust_mc, "Monte Carlo degree second moment")
    q.add_argument("--graph", required=True)
    q.add_argument("--samples", type=int, default=10**5)

    g = groups.add_parser("mst", help="minimum spanning trees under random weights").add_subparsers(
        dest="cmd", required=True)
    q = leaf(g, "exact", cmd_mst_exact, "exact ordering oracle (m <= 12)")
    q.add_argument("--graph", required=True)
    q.add_argument("--pair", type=int, nargs=2, metavar=("E", "F"))
    q.add_argument("--method", choices=("forest-dp", "permutations"), default="forest-dp")
    q = leaf(g, "mc", cmd_mst_mc, "Monte Carlo estimators and p-NC verdicts")
    q.add_argument("--graph", required=True)
    q.add_argument("--samples", type=int, default=10**5)
    q.add_argument("--pair", type=int, nargs=2, metavar=("E", "F"))
    q = leaf(g, "lps", cmd_mst_lps, "the two-bundle counterexample")
    q.add_argument("--method", choices=("forest-dp", "permutations"), default="permutations")
    q = leaf(g, "trend", cmd_mst_trend, "exploratory: mean squared degree on K_n against n")
    q.add_argument("--n", type=int, nargs="+", default=[10, 20, 50, 100, 200])
    q.add_argument("--samples", type=int, default=10**4)
    q = leaf(g, "ratio-scan", cmd_mst_ratio_scan, "exploratory: largest pair correlation ratio")
    q.add_argument("--graph", action="append")

    g = groups.add_parser("pwit", help="the infinite-tree limit").add_subparsers(dest="cmd", required=True)
    q = leaf(g, "moment", cmd_pwit_moment, "root-degree second moment, three ways")
    q.add_argument("--samples", type=int, default=10**6)
    q = leaf(g, "theta", cmd_pwit_theta, "theta, q, theta', alpha and beta at one lambda")
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q = leaf(g, "beta", cmd_pwit_beta, "simulated E[1/|PGW|] against the closed form")
    q.add_argument("--lambda", dest="lam", type=float, required=True)
    q.add_argument("--samples", type=int, default=10**5)

    g = groups.add_parser("sharpness", help="the sharpness family").add_subparsers(dest="cmd", required=True)
    q = leaf(g, "sweep", cmd_sharpness_sweep, "exact second moment per odd d")
    q.add_argument("--dmin", type=int, default=5)
    q.add_argument("--dmax", type=int, default=41)

    g = groups.add_parser("polytope", help="forest polytope checks").add_subparsers(dest="cmd", required=True)
    q = leaf(g, "alpha-check", cmd_polytope_alpha, "membership of the alpha vector")
    q.add_argument("--graph", required=True)

    g = groups.add_parser("verify", help="acceptance suite").add_subparsers(dest="cmd", required=True)
    q = leaf(g, "all", cmd_verify_all, "run every acceptance criterion")
    q.add_argument("--quick", action="store_true", help="smaller Monte Carlo sizes")
    return p


# ------------------------------------------------------------------- output


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("fn", "verbose", "threads") and
            not k.startswith("_")}


def render(args, result: Any, argv: Sequence[str]) -> str:
    head = report.provenance(["spancorr", *argv], _config(args), args.seed)
    if args.format == "json":
        return report.dumps({"provenance": head, "result": result})
    if args.format == "csv":
        rows = result if isinstance(result, list) else [
            {"key": k, "value": v} for k, v in _flatten(report.plain(result))]
        return "# " + " ".join(f"{k}={v}" for k, v in head.items() if k != "command") + "\n" + \
            report.csv_text(rows)
    return "\n".join(report.text_lines({"provenance": head, "result": result})) + "\n"


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), obj


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = args.fn(args)
    except (mst.OracleCapExceeded, RetryCapExceeded, pwit.PondOverflowError) as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (IdentityViolation, AssertionError) as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, GraphError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    sys.stdout.write(render(args, result, argv))
    return EXIT_FAIL if getattr(args, "_failed", False) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

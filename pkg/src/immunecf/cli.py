"""Command-line surface for batch experiments and the HTTP service.

Exit codes: 0 success, 1 usage error, 2 data error. Every randomized
command takes --seed and is byte-deterministic given one.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from . import evaluation
from .affinity import AffinityMeasure, agreement_strength, concordance_ratio, \
    ignored_fraction_stats, kendall_tau, weighted_kappa
from .data import (RatingsStore, SyntheticConfig, export_movies_csv, export_ratings_csv,
                   generate_synthetic, load_store, parse_eachmovie_votes, parse_movies_csv,
                   parse_ratings_csv, save_store)
from .errors import ImmuneCFError, UndefinedRatio
from .estimator import ImmuneRecommender
from .network import AisParams, parse_ais_config

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be a positive integer")
    return value


def _seed(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer seed") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return value


def _load_store_arg(path) -> RatingsStore:
    if not os.path.exists(path):
        raise ImmuneCFError(f"store file not found: {path}")
    return load_store(path)


def _ais_params(args, seed=None) -> AisParams:
    if getattr(args, "config", None):
        with open(args.config, "r", encoding="utf-8") as fh:
            params = parse_ais_config(fh.read())
    else:
        params = AisParams()
    if seed is not None:
        params = params.with_seed(seed)
    return params


def _measure(name, min_common=2) -> AffinityMeasure:
    return AffinityMeasure(kind=name, min_common=min_common)


def build_parser() -> _Parser:
    parser = _Parser(prog="immunecf",
                     description="Immune-network collaborative filtering toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[], help="read a ratings file into a store",
                       description="Parse ratings into the single-file store container.")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=["csv", "eachmovie"], default="csv")
    p.add_argument("--scale", choices=["raw5", "unit"], default="unit",
                   help="vote scale for csv input (eachmovie is always raw5)")
    p.add_argument("--movies", help="optional movie metadata CSV (movie_id,title)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("export", help="write a store back out as CSV")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True, help="ratings CSV path")
    p.add_argument("--movies-out", help="optional metadata CSV path")

    p = sub.add_parser("synth", help="generate a clustered synthetic store")
    p.add_argument("--clusters", type=_positive_int, required=True)
    p.add_argument("--users", type=_positive_int, required=True, help="users per cluster")
    p.add_argument("--movies", type=_positive_int, required=True)
    p.add_argument("--votes", type=_positive_int, required=True, help="votes per user")
    p.add_argument("--noise", type=int, default=0, help="max category perturbation 0..5")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("affinity", help="affinity between two people, with diagnostics")
    p.add_argument("--store", required=True)
    p.add_argument("--a", required=True, metavar="PERSON")
    p.add_argument("--b", required=True, metavar="PERSON")
    p.add_argument("--measure", choices=["kappa", "tau"], default="kappa")
    p.add_argument("--min-common", type=_positive_int, default=2)

    p = sub.add_parser("stats", help="dataset statistics")
    stats_sub = p.add_subparsers(dest="stat", required=True)
    q = stats_sub.add_parser("ignored", help="tau ignored-pair fractions over sampled person pairs")
    q.add_argument("--store", required=True)
    q.add_argument("--pairs", type=_positive_int, required=True)
    q.add_argument("--min-common", type=_positive_int, default=2)
    q.add_argument("--seed", type=_seed, default=0)
    q.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("recommend", help="train a network for a user and print top-N movies")
    p.add_argument("--store", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--measure", choices=["kappa", "tau"], default="kappa")
    p.add_argument("--top", type=_positive_int, required=True)
    p.add_argument("--include-seen", action="store_true",
                   help="also rank movies the user has already voted")
    p.add_argument("--config", help="AIS parameter file (flat key = value)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--trace", metavar="CSV",
                   help="debug: dump step,person_id,concentration per step")

    p = sub.add_parser("evaluate", help="hidden-vote prediction accuracy experiment")
    p.add_argument("--store", required=True)
    p.add_argument("--users", type=_positive_int, required=True)
    p.add_argument("--hides", type=_positive_int, required=True)
    p.add_argument("--min-votes", type=_positive_int, default=21)
    p.add_argument("--measure", choices=["kappa", "tau"], default="kappa")
    p.add_argument("--config", help="AIS parameter file (flat key = value)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("compare", help="select a neighborhood under one measure, score under the other")
    p.add_argument("--store", required=True)
    p.add_argument("--user", required=True)
    p.add_argument("--select", choices=["kappa", "tau"], required=True)
    p.add_argument("--compare", choices=["kappa", "tau"], required=True)
    p.add_argument("--config", help="AIS parameter file (flat key = value)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")

    p = sub.add_parser("serve", help="run the HTTP session API")
    p.add_argument("--store", required=True)
    p.add_argument("--addr", default="127.0.0.1:8765", metavar="HOST:PORT")
    p.add_argument("--config", help="AIS parameter file (flat key = value)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--session-ttl", type=float, default=3600.0,
                   help="idle session expiry, seconds")
    return parser


def _cmd_ingest(args):
    with open(args.input, "rb") as fh:
        if args.format == "eachmovie":
            store = parse_eachmovie_votes(fh)
        else:
            store = parse_ratings_csv(fh, args.scale)
    if args.movies:
        with open(args.movies, "rb") as fh:
            store.movies = parse_movies_csv(fh)
        store.validate_references()
    save_store(store, args.out)
    print(f"ingested {sum(len(p) for p in store.profiles.values())} votes, "
          f"{len(store.profiles)} people -> {args.out}")
    return 0


def _cmd_export(args):
    store = _load_store_arg(args.store)
    export_ratings_csv(store, args.out)
    if args.movies_out:
        export_movies_csv(store, args.movies_out)
    print(f"exported {len(store.profiles)} people -> {args.out}")
    return 0


def _cmd_synth(args):
    config = SyntheticConfig(cluster_count=args.clusters, users_per_cluster=args.users,
                             movies=args.movies, votes_per_user=args.votes,
                             noise_categories=args.noise, seed=args.seed)
    store = generate_synthetic(config)
    save_store(store, args.out)
    print(f"generated {len(store.profiles)} people over {args.movies} movies -> {args.out}")
    return 0


def _cmd_affinity(args):
    store = _load_store_arg(args.store)
    for pid in (args.a, args.b):
        if pid not in store.profiles:
            raise ImmuneCFError(f"unknown person {pid!r}")
    a, b = store.profiles[args.a], store.profiles[args.b]
    if args.measure == "kappa":
        r = weighted_kappa(a, b, args.min_common)
        print(f"kappa {r.kappa:.4f}")
        print(f"n_common={r.n_common} weight_sum={r.weight_sum:.4f}")
        print(f"agreement: {agreement_strength(r.kappa, 'kappa')}")
        print("f-matrix (rows = first person's category 1..6):")
        for row in r.f_matrix:
            print("  " + " ".join(f"{int(c)}" for c in row))
    else:
        r = kendall_tau(a, b, args.min_common)
        print(f"tau {r.tau:.4f}")
        print(f"C={r.concordant} D={r.discordant} ignored={r.ignored} "
              f"s={r.s} n_common={r.n_common}")
        print(f"agreement: {agreement_strength(r.tau, 'tau')}")
        try:
            print(f"concordant/discordant ratio: {concordance_ratio(r.tau):.4f}")
        except UndefinedRatio:
            print("concordant/discordant ratio: undefined (all concordant)")
    return 0


def _cmd_stats_ignored(args):
    store = _load_store_arg(args.store)
    stats = ignored_fraction_stats(store, args.pairs, args.min_common, args.seed)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            stats.write_csv(fh)
        print(f"mean ignored fraction: {stats.mean:.4f} ({args.pairs} pairs) -> {args.out}")
    else:
        stats.write_csv(sys.stdout)
    return 0


def _estimator(args, measure_name, seed) -> ImmuneRecommender:
    params = _ais_params(args, seed=seed)
    est = ImmuneRecommender(measure=measure_name)
    est.set_params(**{k: getattr(params, k) for k in (
        "pool_size", "k1", "k2", "k3", "dt", "antigen_concentration", "x_init",
        "x_death", "x_max", "max_steps", "stable_window", "stable_tol", "seed")})
    return est


def _cmd_recommend(args):
    store = _load_store_arg(args.store)
    if args.user not in store.profiles:
        raise ImmuneCFError(f"unknown person {args.user!r}")
    est = _estimator(args, args.measure, args.seed)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            est.fit(store, args.user, trace=fh)
    else:
        est.fit(store, args.user)
    print(f"pool={len(est.pool_ids_)} steps={est.n_steps_} stop={est.stop_reason_}",
          file=sys.stderr)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["movie_id", "score", "rounded", "support", "title"])
    for p in est.recommend(n=args.top, exclude_seen=not args.include_seen):
        writer.writerow([p.movie_id, repr(p.score), repr(p.rounded.value), p.support,
                         store.movies.get(p.movie_id, "")])
    return 0


def _cmd_evaluate(args):
    store = _load_store_arg(args.store)
    config = evaluation.EvalConfig(
        user_count=args.users, min_votes=args.min_votes, hides_per_user=args.hides,
        measure=_measure(args.measure), ais=_ais_params(args), seed=args.seed)
    report = evaluation.evaluate(store, config)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "per_user.csv"), "w", encoding="utf-8", newline="") as fh:
        report.write_per_user_csv(fh)
    with open(os.path.join(args.out, "histogram.csv"), "w", encoding="utf-8", newline="") as fh:
        report.write_histogram_csv(fh)
    text = evaluation.summarize(report)
    with open(os.path.join(args.out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    print(text)
    return 0


def _cmd_compare(args):
    store = _load_store_arg(args.store)
    if args.user not in store.profiles:
        raise ImmuneCFError(f"unknown person {args.user!r}")
    rows = evaluation.cross_affinity_experiment(
        store, store.profiles[args.user],
        select_measure=_measure(args.select), compare_measure=_measure(args.compare),
        ais=_ais_params(args, seed=args.seed))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            evaluation.write_cross_affinity_csv(rows, fh)
        print(f"{len(rows)} antibodies -> {args.out}")
    else:
        evaluation.write_cross_affinity_csv(rows, sys.stdout)
    return 0


def _cmd_serve(args):
    from .server import run_server

    store = _load_store_arg(args.store)
    host, _, port_text = args.addr.rpartition(":")
    if not host or not port_text.isdigit():
        raise ImmuneCFError(f"bad --addr {args.addr!r}, expected HOST:PORT")
    run_server(store, host, int(port_text), ais=_ais_params(args),
               seed=args.seed, session_ttl=args.session_ttl)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "export": _cmd_export,
    "synth": _cmd_synth,
    "affinity": _cmd_affinity,
    "recommend": _cmd_recommend,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "serve": _cmd_serve,
}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        if args.command == "stats":
            return _cmd_stats_ignored(args)
        return _COMMANDS[args.command](args)
    except ImmuneCFError as exc:
        print(f"immunecf: error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except (OSError, ValueError) as exc:
        print(f"immunecf: error: {exc}", file=sys.stderr)
        return DATA_ERROR


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()

"""Command-line interface.

Subcommands:

  symmetry   sticky symmetry group, symmetry number and counting number
  color      restrict a saved report to a color partition (no new searches)
  survey     exhaustive six-sphere survey over deleted-bond contact graphs
  path       single path search (between two embeddings, or the 2D toy region)

Exit codes: 0 success, 2 input/IO problems, 3 sphere overlap, 4 rank-deficient
contact gradients, 5 infeasible endpoint, 6 color/radii conflict, 1 anything
else.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from typing import Optional

import numpy as np

from . import builders
from .errors import (
    ColorRadiiConflictError,
    ConstructionFailedError,
    InfeasibleEndpointError,
    OverlapError,
    RankDeficientError,
    StickySymError,
)
from .enumeration import save_survey, survey, write_survey_csv
from .geometry import Cluster, Partition, detect_contacts, load_cluster
from .groups import format_pi
from .manifold import MODES, PathConfig, dump_path_csv, find_path, sample_configuration
from .symmetry import (
    colored_symmetry,
    load_report,
    report_to_json,
    save_report,
    sticky_symmetry_group,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IO = 2
EXIT_OVERLAP = 3
EXIT_RANK = 4
EXIT_INFEASIBLE = 5
EXIT_COLORS = 6


def _add_path_params(parser: argparse.ArgumentParser, nmax_default: int = 100_000,
                     retries_default: int = 3):
    parser.add_argument("--tol", type=float, default=0.1,
                        help="descent step bound and arrival radius")
    parser.add_argument("--sigma", type=float, default=0.1,
                        help="random tangent step scale")
    parser.add_argument("--beta", type=float, default=-0.1,
                        help="sampling-mode bias (negative repels from target)")
    parser.add_argument("--nr", type=int, default=20,
                        help="random steps per switch away from descent")
    parser.add_argument("--nmax", type=int, default=nmax_default,
                        help="candidate budget per search attempt")
    parser.add_argument("--toln", type=float, default=1e-3,
                        help="stall threshold on the projected descent direction")
    parser.add_argument("--tolq", type=float, default=1e-10,
                        help="equality residual tolerance")
    parser.add_argument("--mode", choices=MODES, default="gaussian",
                        help="random step flavor")
    parser.add_argument("--seed", type=int, default=0, help="run seed")
    parser.add_argument("--retries", type=int, default=retries_default,
                        help="independently seeded attempts per search")


def _config_from(args, **overrides) -> PathConfig:
    kw = dict(
        tol=args.tol, sigma=args.sigma, beta=args.beta, n_random=args.nr,
        n_max=args.nmax, tol_stall=args.toln, tol_q=args.tolq,
        mode=args.mode, retries=args.retries, seed=args.seed,
    )
    kw.update(overrides)
    return PathConfig(**kw)


def _load_input_cluster(args) -> tuple[Cluster, Optional[list[int]]]:
    if getattr(args, "builtin", None):
        return builders.builtin_cluster(args.builtin), None
    if getattr(args, "input", None):
        return load_cluster(args.input)
    raise ValueError("provide --input FILE or --builtin NAME")


def _parse_colors(text: str, n: int) -> Partition:
    labels = [int(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    if len(labels) != n:
        raise ValueError(f"expected {n} color labels, got {len(labels)}")
    return Partition.from_labels(labels)


def _emit(doc: dict, output: Optional[str]):
    if output:
        with open(output, "w") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")


def cmd_symmetry(args) -> int:
    cluster, file_colors = _load_input_cluster(args)
    config = _config_from(args)
    if args.sample_steps > 0:
        adjacency = detect_contacts(cluster)
        from .geometry import build_constraint_system

        cs = build_constraint_system(adjacency, cluster.radii, fix_com=True)
        flat = sample_configuration(
            cs, cluster.centered().flat(), args.sample_steps, config.sigma,
            seed=config.seed,
        )
        cluster = Cluster(flat.reshape(-1, 3), cluster.radii)
    report = sticky_symmetry_group(
        cluster,
        config,
        include_inversions=not args.no_inversions,
        jobs=args.jobs,
        fix_com=args.fix_com,
    )
    colors_text = args.colors
    if colors_text is None and file_colors is not None:
        colors_text = ",".join(str(c) for c in file_colors)
    if colors_text:
        report = colored_symmetry(
            report, _parse_colors(colors_text, cluster.n_spheres)
        )
    _emit(report_to_json(report), args.output)
    print(
        f"sigma = {report.symmetry_number}  n = {report.counting_number}  "
        f"|point| = {report.point_group.order}  "
        f"closure-inferred = {report.closure_inferred_count}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_color(args) -> int:
    report = load_report(args.report)
    restricted = colored_symmetry(
        report, _parse_colors(args.colors, report.n_spheres)
    )
    _emit(report_to_json(restricted), args.output)
    print(
        f"sigma = {restricted.symmetry_number}  n = {restricted.counting_number}  "
        f"path searches run = {restricted.path_searches_run}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_survey(args) -> int:
    config = _config_from(args)
    result = survey(config, max_d=args.max_d, seed=args.seed, jobs=args.jobs)
    if args.output:
        save_survey(args.output, result)
    if args.csv:
        write_survey_csv(args.csv, result)
    counts = result.counts_per_d()
    print("d  clusters  sigma values")
    for d, count in counts.items():
        print(f"{d}  {count:8d}  {result.sigma_values(d)}")
    if not args.output and not args.csv:
        print("(use --output/--csv to save the full survey)", file=sys.stderr)
    return EXIT_OK


def cmd_path(args) -> int:
    record = args.csv is not None
    if args.builtin == "toy2d" or (args.builtin is None and args.input is None):
        cs = builders.toy_region()
        x0, x1 = builders.toy_region_endpoints()
        if args.start:
            x0 = np.array([float(v) for v in args.start.split(",")])
        if args.target_point:
            x1 = np.array([float(v) for v in args.target_point.split(",")])
    else:
        cluster, _ = _load_input_cluster(args)
        cluster = cluster.centered()
        adjacency = detect_contacts(cluster)
        from .geometry import build_constraint_system
        from .groups import parse_pi
        from .geometry import apply_pi

        cs = build_constraint_system(adjacency, cluster.radii, fix_com=args.fix_com)
        x0 = cluster.flat()
        if args.op:
            op = parse_pi(args.op, cluster.n_spheres)
            x1 = apply_pi(cluster, op).flat()
        elif args.target:
            target_cluster, _ = load_cluster(args.target)
            target_cluster = target_cluster.centered()
            if not np.array_equal(detect_contacts(target_cluster), adjacency):
                raise ValueError("target cluster has a different contact graph")
            x1 = target_cluster.flat()
        else:
            raise ValueError("provide --op CYCLES or --target FILE for cluster paths")
    config = _config_from(args)
    result = find_path(cs, x0, x1, config, record_trace=record)
    if args.csv:
        dump_path_csv(args.csv, result)
    doc = {
        "found": result.found,
        "n_points": result.n_points,
        "n_generated": result.n_generated,
        "n_descent": result.n_descent,
        "n_random": result.n_random,
        "n_boundary": result.n_boundary,
        "n_projection": result.n_projection,
        "n_reverse": result.n_reverse,
        "n_metropolis": result.n_metropolis,
        "attempts": result.attempts,
        "found_attempt": result.found_attempt,
        "max_step": result.max_step,
        "seed": result.seed,
        "config": asdict(config),
    }
    _emit(doc, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stickysym",
        description="Sticky symmetry groups of hard-sphere clusters",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sym = sub.add_parser("symmetry", help="full sticky-symmetry analysis")
    p_sym.add_argument("--input", help="cluster JSON file")
    p_sym.add_argument(
        "--builtin",
        help="builtin cluster: loop:N, chain:N, octahedron, polytetrahedron",
    )
    p_sym.add_argument("--output", "-o", help="report JSON path (default stdout)")
    p_sym.add_argument("--colors", help="comma-separated color labels")
    p_sym.add_argument("--no-inversions", action="store_true",
                       help="permutations only, no reflected targets")
    p_sym.add_argument("--fix-com", action=argparse.BooleanOptionalAction,
                       default=True, help="pin the center of mass")
    p_sym.add_argument("--jobs", type=int, default=1,
                       help="parallel path searches")
    p_sym.add_argument("--sample-steps", type=int, default=0,
                       help="pre-diffuse the embedding this many steps")
    _add_path_params(p_sym)
    p_sym.set_defaults(func=cmd_symmetry)

    p_col = sub.add_parser("color", help="restrict a saved report to colors")
    p_col.add_argument("--report", required=True, help="report JSON file")
    p_col.add_argument("--colors", required=True,
                       help="comma-separated color labels")
    p_col.add_argument("--output", "-o", help="output JSON path (default stdout)")
    p_col.set_defaults(func=cmd_color)

    p_sur = sub.add_parser("survey", help="exhaustive six-sphere survey")
    p_sur.add_argument("--max-d", type=int, default=7,
                       help="largest number of deleted bonds")
    p_sur.add_argument("--jobs", type=int, default=1,
                       help="parallel survey entries")
    p_sur.add_argument("--output", "-o", help="survey JSON path")
    p_sur.add_argument("--csv", help="per-entry CSV path")
    _add_path_params(p_sur, nmax_default=20_000, retries_default=2)
    p_sur.set_defaults(func=cmd_survey)

    p_path = sub.add_parser("path", help="single path search")
    p_path.add_argument("--builtin", help="toy2d, loop:N, chain:N, ...")
    p_path.add_argument("--input", help="cluster JSON file")
    p_path.add_argument("--op", help="target: image under this operation, "
                        "e.g. '(123456)' or '(12)(34)*'")
    p_path.add_argument("--target", help="target cluster JSON (same contacts)")
    p_path.add_argument("--from", dest="start",
                        help="toy2d start point 'x,y'")
    p_path.add_argument("--to", dest="target_point",
                        help="toy2d target point 'x,y'")
    p_path.add_argument("--csv", help="dump the trace (with rejections) as CSV")
    p_path.add_argument("--output", "-o", help="result JSON path (default stdout)")
    p_path.add_argument("--fix-com", action=argparse.BooleanOptionalAction,
                        default=True, help="pin the center of mass")
    _add_path_params(p_path)
    p_path.set_defaults(func=cmd_path)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OverlapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OVERLAP
    except RankDeficientError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANK
    except InfeasibleEndpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ColorRadiiConflictError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COLORS
    except (OSError, json.JSONDecodeError, ValueError, KeyError,
            ConstructionFailedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except StickySymError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

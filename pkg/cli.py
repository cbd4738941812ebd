"""Command-line front end.

Subcommands:
  generate    -> sample a DRGG and write its graph file (optionally an edge list too)
  stats       -> empirical statistics of a graph file or edge list
  theory      -> closed-form predictions for (n, alpha, d)
  fit         -> fit beta / alpha / z to a graph file or edge list
  experiment  -> repeated trials from a JSON config, summary and series CSVs
  compare     -> generate + stats + theory, deviation report

Exit codes:
  0 success; 2 usage (bad flags, missing or malformed input); 3 infeasible model or
  formula outside its domain; 4 insufficient data or undefined statistic.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

load_dotenv(Path(__file__).resolve().parent / '.env')

from errors import DrggError, EXIT_CODES, InvalidInputError
from experiment import compare, load_config, run_experiment
from fit import FitMethod, fit_model
from generator import DiGraph, ModelParams, RadiusMode, generate
from graphstats import PathMode, compute_stats, degree_histograms, largest_component
from parsers.edge_list import EdgeListFormat, LabeledEdgeList, read_edge_list, write_edge_list
from parsers.graph_file import read_graph, write_graph
from reports import dumps_report, write_report
from theory import theory_report
from utils import settings

logger = logging.getLogger(__name__)


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else settings.log_level(),
        format='%(asctime)s %(levelname)s:%(name)s:%(message)s',
        force=True,
    )


def _emit(report, out: Optional[str]) -> None:
    if out:
        write_report(report, out)
    else:
        sys.stdout.write(dumps_report(report))


def _add_model_flags(parser: argparse.ArgumentParser, with_seed: bool = True) -> None:
    parser.add_argument('--n', type=int, required=True, help='number of vertices')
    parser.add_argument('--alpha', type=float, required=True, help='Pareto exponent of the radius law')
    parser.add_argument('--dim', type=int, required=True, help='torus dimension d')
    if with_seed:
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--fixed-radius', action='store_true', help='every radius equals r0 (RGG limit)')


def _add_input_flags(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--graph', help='graph file written by generate')
    source.add_argument('--edges', help='edge list, one "source<sep>target" per line')
    parser.add_argument('--format', choices=[f.value for f in EdgeListFormat], default='tsv')
    parser.add_argument('--reverse', action='store_true', help='read edge lists as target -> source')


def _params(args) -> ModelParams:
    return ModelParams(
        n=args.n,
        alpha=args.alpha,
        d=args.dim,
        seed=args.seed,
        radius_mode=RadiusMode.fixed_r0 if args.fixed_radius else RadiusMode.pareto,
    )


def _load_input(args) -> DiGraph:
    """DiGraph from --graph or --edges; ingested edge lists keep only the largest component."""
    if args.graph:
        _, g = read_graph(args.graph)
        return g
    g = read_edge_list(args.edges, args.format, reverse=args.reverse).to_digraph()
    if getattr(args, 'whole', False):
        return g
    return largest_component(g)


def cmd_generate(args) -> int:
    params = _params(args)
    pts, g = generate(params, workers=args.workers)
    write_graph(pts, None if args.no_edges else g, args.out)
    if args.edges_out:
        write_edge_list(LabeledEdgeList.from_digraph(g), args.edges_out, args.edges_format)
    return EXIT_CODES['ok']


def cmd_stats(args) -> int:
    g = _load_input(args)
    report = compute_stats(
        g,
        path_mode=PathMode.undirected_projection if args.undirected else PathMode.directed,
        path_samples=args.sample_paths,
        exact_threshold=args.exact_threshold,
        hubs_k=args.hubs,
        seed=args.seed,
    )
    _emit(report, args.out)
    return EXIT_CODES['ok']


def cmd_theory(args) -> int:
    _emit(theory_report(args.n, args.alpha, args.dim, max_path_k=args.max_path_k), args.out)
    return EXIT_CODES['ok']


def cmd_fit(args) -> int:
    g = _load_input(args)
    in_hist, out_hist = degree_histograms(g)
    result = fit_model(in_hist, out_hist, g.n, d=args.dim, method=FitMethod(args.method), strict=not args.lenient)
    _emit(result, args.out)
    return EXIT_CODES['ok']


def cmd_experiment(args) -> int:
    config = load_config(args.config)
    updates = {}
    if args.summary:
        updates['summary_csv'] = args.summary
    if args.series:
        updates['series_csv'] = args.series
    if updates:
        config = config.model_copy(update=updates)
    if not config.summary_csv and not config.series_csv:
        raise InvalidInputError('experiment needs summary_csv or series_csv (config or --summary/--series)')
    run_experiment(config, workers=args.workers)
    return EXIT_CODES['ok']


def cmd_compare(args) -> int:
    _emit(compare(_params(args), workers=args.workers), args.out)
    return EXIT_CODES['ok']


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='drgg', description='Directed random geometric graphs on the unit torus.')
    parser.add_argument('--verbose', action='store_true', help='debug logging')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', help='sample a DRGG and write its graph file')
    _add_model_flags(p)
    p.add_argument('--out', required=True, help='graph file path (JSON)')
    p.add_argument('--no-edges', action='store_true', help='omit the edges section')
    p.add_argument('--edges-out', help='also export an edge list')
    p.add_argument('--edges-format', choices=[f.value for f in EdgeListFormat], default='tsv')
    p.add_argument('--workers', type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser('stats', help='empirical statistics')
    _add_input_flags(p)
    p.add_argument('--undirected', action='store_true', help='path statistics on the undirected projection')
    p.add_argument('--sample-paths', type=int, default=None, metavar='K', help='BFS from K sampled sources')
    p.add_argument('--exact-threshold', type=int, default=None)
    p.add_argument('--hubs', type=int, default=None, metavar='K')
    p.add_argument('--whole', action='store_true', help='keep every component of an edge list')
    p.add_argument('--seed', type=int, default=0, help='source sampling seed')
    p.add_argument('--out')
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser('theory', help='closed-form predictions')
    _add_model_flags(p, with_seed=False)
    p.add_argument('--max-path-k', type=int, default=10)
    p.add_argument('--out')
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser('fit', help='fit beta, alpha and z to degree data')
    _add_input_flags(p)
    p.add_argument('--dim', type=int, required=True)
    p.add_argument('--method', choices=[m.value for m in FitMethod], default=FitMethod.mle_tail.value)
    p.add_argument('--lenient', action='store_true', help='report a fit even when the tail is not power-law')
    p.add_argument('--whole', action='store_true', help='keep every component of an edge list')
    p.add_argument('--out')
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser('experiment', help='repeated trials from a JSON config')
    p.add_argument('--config', required=True)
    p.add_argument('--summary', help='summary CSV path (overrides the config)')
    p.add_argument('--series', help='plot series CSV path (overrides the config)')
    p.add_argument('--workers', type=int, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser('compare', help='generate, measure and compare with theory')
    _add_model_flags(p)
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--out')
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except DrggError as exc:
        logger.error('%s: %s', args.command, exc)
        sys.stderr.write(f'error: {exc}\n')
        return exc.exit_code
    except (OSError, ValidationError) as exc:
        logger.error('%s: %s', args.command, exc)
        sys.stderr.write(f'error: {exc}\n')
        return EXIT_CODES['usage']


if __name__ == '__main__':
    sys.exit(main())

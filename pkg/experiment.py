"""Simulation harness: repeated trials per (n, alpha, d), summary tables and plot series.

Trial i of a configuration uses seed ``seed_base + i``; trials may run on a thread pool
but are aggregated in trial order, so the same config always yields the same files.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from errors import DrggError, GraphFileParseError, InsufficientDataError, InvalidInputError, UndefinedStatisticError
from fit import fit_powerlaw_tail
from generator import ModelParams, RadiusMode, generate
from graphstats import (
    PathMode,
    clustering_in,
    degree_histograms,
    count_triangles,
    reciprocity,
    shortest_path_stats,
    triangle_ratio,
    undirected_clustering,
)
from theory import (
    clustering_expected,
    edge_prob_exact,
    expected_type1_bounds,
    indegree_exponent,
    indegree_pdf_approx,
    indegree_pmf_exact,
    indegree_saddle_window,
    outdegree_pmf,
    reciprocity_exact,
)
from utils import settings

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

STATISTICS = (
    'clustering_undirected',
    'diameter',
    'avg_path_length',
    'edge_count',
    'reciprocity',
    'triangle_ratio',
    'clustering_in_excl',
)
# statistic -> theory column it is compared against
THEORY_COLUMNS = {
    'edge_count': 'expected_edges',
    'reciprocity': 'reciprocity_exact',
    'clustering_in_excl': 'clustering_expected',
}


class RunSpec(BaseModel):
    n: int = Field(ge=2)
    alpha: float
    d: int = Field(ge=1)


class ExperimentConfig(BaseModel):
    """Trial protocol; mirrors the JSON config file accepted by ``cli experiment``."""

    runs: List[RunSpec] = Field(min_length=1)
    trials: int = Field(default=1, ge=1)
    seed_base: int = Field(default=0, ge=0)
    path_mode: PathMode = PathMode.undirected_projection
    exact_path_threshold: int = Field(default_factory=settings.exact_path_threshold, ge=1)
    path_samples: Optional[int] = Field(default=None, ge=1)
    radius_mode: RadiusMode = RadiusMode.pareto
    summary_csv: Optional[str] = None
    series_csv: Optional[str] = None


def load_config(path: PathLike) -> ExperimentConfig:
    text = Path(path).read_text(encoding='utf-8')
    try:
        return ExperimentConfig.model_validate_json(text)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise GraphFileParseError(first['msg'], field='.'.join(str(p) for p in first['loc'])) from exc


@dataclass(frozen=True)
class TrialResult:
    seed: int
    values: Dict[str, float]
    in_pmf: np.ndarray
    out_pmf: np.ndarray


def run_trial(spec: RunSpec, seed: int, config: ExperimentConfig) -> TrialResult:
    params = ModelParams(n=spec.n, alpha=spec.alpha, d=spec.d, seed=seed, radius_mode=config.radius_mode)
    _, g = generate(params, workers=1)
    in_hist, out_hist = degree_histograms(g)
    excl, _, _ = clustering_in(g)
    undirected, _, _ = undirected_clustering(g)
    try:
        paths = shortest_path_stats(
            g, config.path_mode, sample_size=config.path_samples,
            exact_threshold=config.exact_path_threshold, seed=seed,
        )
        diameter, avg_path = float(paths.diameter), paths.avg_path_length
    except UndefinedStatisticError as exc:
        logger.warning('experiment.run_trial: n=%d seed=%d path statistics left empty: %s', spec.n, seed, exc)
        diameter, avg_path = math.nan, math.nan
    values = {
        'clustering_undirected': undirected,
        'diameter': diameter,
        'avg_path_length': avg_path,
        'edge_count': float(g.edge_count),
        'reciprocity': reciprocity(g) if g.edge_count else math.nan,
        'triangle_ratio': triangle_ratio(count_triangles(g).type1_labeled, g.n),
        'clustering_in_excl': excl if excl is not None else math.nan,
    }
    return TrialResult(seed=seed, values=values, in_pmf=in_hist.pmf(g.n), out_pmf=out_hist.pmf(g.n))


def _theory_values(spec: RunSpec, config: ExperimentConfig) -> Dict[str, float]:
    if config.radius_mode == RadiusMode.fixed_r0:
        return {}
    return {
        'expected_edges': spec.n * (spec.n - 1) * edge_prob_exact(spec.n, spec.alpha, spec.d),
        'reciprocity_exact': reciprocity_exact(spec.n, spec.alpha, spec.d),
        'clustering_expected': clustering_expected(spec.alpha, spec.d),
    }


def _fmt(value: Optional[float]) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ''
    return repr(float(value))


def summary_header() -> List[str]:
    header = ['n', 'alpha', 'd', 'trials', 'seed_first', 'seed_last']
    for name in STATISTICS:
        header += [f'{name}_mean', f'{name}_2sigma']
    for name, theory_name in THEORY_COLUMNS.items():
        header += [theory_name, f'{name}_dev_pct']
    return header


def summarize(spec: RunSpec, trials: Sequence[TrialResult], theory: Dict[str, float]) -> List[str]:
    """One summary row: mean and 2 sigma per statistic (sigma empty for a single trial)."""
    row = [str(spec.n), repr(float(spec.alpha)), str(spec.d), str(len(trials)),
           str(trials[0].seed), str(trials[-1].seed)]
    means: Dict[str, float] = {}
    for name in STATISTICS:
        data = np.array([t.values[name] for t in trials], dtype=np.float64)
        data = data[~np.isnan(data)]
        mean = float(data.mean()) if data.size else math.nan
        means[name] = mean
        two_sigma = 2.0 * float(data.std(ddof=1)) if data.size > 1 else None
        row += [_fmt(mean), _fmt(two_sigma)]
    for name, theory_name in THEORY_COLUMNS.items():
        predicted = theory.get(theory_name)
        dev = None
        if predicted and not math.isnan(means[name]):
            dev = 100.0 * (means[name] - predicted) / predicted
        row += [_fmt(predicted), _fmt(dev)]
    return row


def series_rows(spec: RunSpec, trials: Sequence[TrialResult], config: ExperimentConfig) -> List[List[str]]:
    """Plot-ready (series, n, alpha, d, x, y, sigma) rows for degree distributions."""
    rows: List[List[str]] = []
    head = [str(spec.n), repr(float(spec.alpha)), str(spec.d)]
    for series, attr in (('indegree_empirical', 'in_pmf'), ('outdegree_empirical', 'out_pmf')):
        stack = np.vstack([getattr(t, attr) for t in trials])
        observed = np.flatnonzero(stack.sum(axis=0) > 0)
        mean = stack.mean(axis=0)
        sigma = stack.std(axis=0, ddof=1) if len(trials) > 1 else None
        for k in observed:
            rows.append([series, *head, str(int(k)), _fmt(mean[k]), _fmt(sigma[k]) if sigma is not None else ''])
    if config.radius_mode == RadiusMode.fixed_r0:
        return rows
    top = int(max(np.flatnonzero(np.vstack([t.in_pmf for t in trials]).sum(axis=0) > 0).max(), 1))
    exact = indegree_pmf_exact(spec.n, spec.alpha, spec.d)
    for k in range(top + 1):
        rows.append(['indegree_exact', *head, str(k), _fmt(exact[k]), ''])
    try:
        k_lo, k_hi = indegree_saddle_window(spec.n, spec.alpha, spec.d)
        for k in range(k_lo, min(k_hi, top) + 1):
            rows.append(['indegree_approx', *head, str(k), _fmt(indegree_pdf_approx(spec.n, spec.alpha, spec.d, k)), ''])
    except DrggError as exc:
        logger.warning('experiment.series_rows: no approximation series: %s', exc)
    out_top = int(np.flatnonzero(np.vstack([t.out_pmf for t in trials]).sum(axis=0) > 0).max())
    binom = outdegree_pmf(spec.n, spec.alpha, spec.d, np.arange(out_top + 1))
    for k in range(out_top + 1):
        rows.append(['outdegree_binomial', *head, str(k), _fmt(binom[k]), ''])
    return rows


def _write_csv(path: PathLike, header: List[str], rows: List[List[str]]) -> None:
    with Path(path).open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(header)
        writer.writerows(rows)


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> Tuple[List[List[str]], List[List[str]]]:
    """Run every feasible configuration; return (summary rows, series rows) and write the CSVs."""
    workers = workers or settings.workers()
    summary: List[List[str]] = []
    series: List[List[str]] = []
    for spec in config.runs:
        try:
            ModelParams(n=spec.n, alpha=spec.alpha, d=spec.d, seed=config.seed_base, radius_mode=config.radius_mode)
        except DrggError as exc:
            logger.warning('experiment.run_experiment: skipping n=%d alpha=%s d=%d: %s', spec.n, spec.alpha, spec.d, exc)
            continue
        seeds = [config.seed_base + i for i in range(config.trials)]
        logger.info('experiment.run_experiment: n=%d alpha=%s d=%d trials=%d', spec.n, spec.alpha, spec.d, config.trials)
        if workers > 1 and len(seeds) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                trials = list(pool.map(lambda s: run_trial(spec, s, config), seeds))
        else:
            trials = [run_trial(spec, s, config) for s in seeds]
        trials.sort(key=lambda t: t.seed)
        summary.append(summarize(spec, trials, _theory_values(spec, config)))
        series.extend(series_rows(spec, trials, config))
    if not summary:
        raise InvalidInputError('no feasible configuration in the experiment')
    if config.summary_csv:
        _write_csv(config.summary_csv, summary_header(), summary)
    if config.series_csv:
        _write_csv(config.series_csv, ['series', 'n', 'alpha', 'd', 'x', 'y', 'sigma'], series)
    return summary, series


# ---------------------------------------------------------------- compare


class ComparisonRow(BaseModel):
    name: str
    empirical: Optional[float] = None
    predicted: Optional[float] = None
    lower: Optional[float] = None
    upper: Optional[float] = None
    deviation_pct: Optional[float] = None


class ComparisonReport(BaseModel):
    n: int
    alpha: float
    d: int
    seed: int
    rows: List[ComparisonRow]


def _row(name: str, empirical: Optional[float], predicted: Optional[float], **bounds) -> ComparisonRow:
    dev = None
    if empirical is not None and predicted:
        dev = 100.0 * (empirical - predicted) / predicted
    return ComparisonRow(name=name, empirical=empirical, predicted=predicted, deviation_pct=dev, **bounds)


def compare(params: ModelParams, workers: Optional[int] = None) -> ComparisonReport:
    """Generate one graph and set its statistics against the closed-form predictions."""
    _, g = generate(params, workers=workers)
    n, alpha, d = params.n, params.alpha, params.d
    z = edge_prob_exact(n, alpha, d)
    in_hist, out_hist = degree_histograms(g)
    excl, _, _ = clustering_in(g)
    try:
        gamma: Optional[float] = fit_powerlaw_tail(in_hist).gamma_hat
    except InsufficientDataError as exc:
        logger.warning('experiment.compare: no tail fit: %s', exc)
        gamma = None
    lower, upper = expected_type1_bounds(n, alpha, d)
    rows = [
        _row('edge_count', float(g.edge_count), n * (n - 1) * z),
        _row('mean_outdegree', out_hist.mean(), (n - 1) * z),
        _row('reciprocity', reciprocity(g) if g.edge_count else None, reciprocity_exact(n, alpha, d)),
        _row('clustering_in_excl', excl, clustering_expected(alpha, d)),
        _row('indegree_exponent', gamma, indegree_exponent(alpha, d)),
        _row('type1_triangles', float(count_triangles(g).type1_labeled), None, lower=lower, upper=upper),
    ]
    return ComparisonReport(n=n, alpha=alpha, d=d, seed=params.seed, rows=rows)

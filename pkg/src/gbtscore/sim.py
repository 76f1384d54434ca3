"""Generative pipeline and the three reconstruction experiments.

The pipeline draws a random comparison graph, i.i.d. Gaussian ground-truth
scores, and one tilted comparison per edge, then measures how well the
estimator recovers the truth via the normalized squared error
``||theta_hat - theta_true||^2 / ||theta_true||^2``, averaged over seeds.

Experiments:

* sparsity: reconstruction error versus the edge probability of the graph;
* discretization: error of K-level comparison models fit to continuous
  uniform data, versus the matching continuous model;
* regularization: error versus the inverse prior variance, including the
  unregularized point (run on the giant connected component, where the
  maximum-likelihood scores are well defined).

Defaults are desk scale (50 alternatives, seeds 1..10); pass a larger
``n_alternatives`` for full-size runs. Identical configs produce
bit-identical results: every seed owns a fresh generator and the draw order
is fixed (graph, truth, comparisons).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .comparisons import AlternativeSet, ComparisonMatrix
from .errors import ParameterError, SolverError
from .rootlaws import RootLaw
from .solver import (PriorConfig, ScoreVector, SolverOptions,
                     connected_components, map_estimate)

__all__ = [
    "default_alternatives",
    "erdos_renyi_graph",
    "sample_ground_truth",
    "synthesize_comparisons",
    "norm_error",
    "restrict_matrix",
    "ExperimentConfig",
    "SweepPoint",
    "ExperimentResult",
    "run_experiment_sparsity",
    "run_experiment_discretization",
    "run_experiment_regularization",
]


def default_alternatives(n: int) -> AlternativeSet:
    """Zero-padded synthetic ids so lexicographic and index order agree."""
    width = max(4, len(str(n - 1)))
    return AlternativeSet.from_ids(f"a{i:0{width}d}" for i in range(n))


def erdos_renyi_graph(n: int, edge_prob: float, rng) -> list[tuple[int, int]]:
    """Each unordered pair is kept independently with probability edge_prob.

    Consumes one uniform per candidate pair regardless of edge_prob, so runs
    with the same seed share randomness across sweep values.
    """
    if n < 2:
        raise ParameterError("need at least two alternatives")
    if not 0.0 <= edge_prob <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {edge_prob!r}")
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < edge_prob
    return list(zip(iu[keep].tolist(), ju[keep].tolist()))


def sample_ground_truth(n, sigma_dagger_sq: float, rng) -> ScoreVector:
    """i.i.d. centered Gaussian scores with the given variance."""
    if not sigma_dagger_sq > 0:
        raise ParameterError(f"ground-truth variance must be positive, got {sigma_dagger_sq!r}")
    alts = n if isinstance(n, AlternativeSet) else default_alternatives(int(n))
    values = rng.normal(0.0, math.sqrt(sigma_dagger_sq), size=len(alts))
    return ScoreVector(alts, values)


def synthesize_comparisons(law: RootLaw, truth: ScoreVector,
                           pairs, rng) -> ComparisonMatrix:
    """One conditionally independent tilted draw per pair at theta_i - theta_j."""
    alts = truth.alternatives
    index_pairs = [(int(i), int(j)) for i, j in pairs]
    if any(i == j or not (0 <= i < len(alts) and 0 <= j < len(alts)) for i, j in index_pairs):
        raise ParameterError("pair indices out of range")
    if not index_pairs:
        return ComparisonMatrix(alts, [], law=law)
    i = np.array([p[0] for p in index_pairs])
    j = np.array([p[1] for p in index_pairs])
    tilt = truth.values[i] - truth.values[j]
    draws = law.sample_comparison(tilt, rng)
    ids = alts.ids
    return ComparisonMatrix(
        alts, [(ids[a], ids[b], float(r)) for a, b, r in zip(i, j, draws)], law=law)


def norm_error(estimate, truth) -> float:
    """||estimate - truth||^2 / ||truth||^2 (undefined for zero truth)."""
    est = estimate.values if isinstance(estimate, ScoreVector) else np.asarray(estimate, float)
    tru = truth.values if isinstance(truth, ScoreVector) else np.asarray(truth, float)
    if est.shape != tru.shape:
        raise ParameterError(f"shape mismatch: {est.shape} vs {tru.shape}")
    denom = float(tru @ tru)
    if denom == 0.0:
        raise ParameterError("norm error is undefined for a zero ground truth")
    diff = est - tru
    return float(diff @ diff) / denom


def restrict_matrix(matrix: ComparisonMatrix, indices) -> tuple[ComparisonMatrix, np.ndarray]:
    """Sub-matrix over the given alternative indices, plus the index array."""
    idx = np.array(sorted(int(i) for i in indices))
    ids = [matrix.alternatives.ids[i] for i in idx]
    keep = set(idx.tolist())
    sub = AlternativeSet.from_ids(ids)
    entries = [(a, b, v) for a, b, v in matrix.iter_entries()
               if matrix.alternatives.index_of(a) in keep
               and matrix.alternatives.index_of(b) in keep]
    return ComparisonMatrix(sub, entries, law=matrix.law), idx


# ------------------------------------------------------------------ experiments

@dataclass(frozen=True)
class ExperimentConfig:
    n_alternatives: int = 50
    edge_prob: float = 0.2
    sigma_dagger_sq: float = 1.0
    gen_law: RootLaw = RootLaw.uniform()
    fit_laws: tuple[RootLaw, ...] = ()
    prior: PriorConfig = PriorConfig(1.0)
    seeds: tuple[int, ...] = tuple(range(1, 11))
    edge_prob_grid: tuple[float, ...] = (0.05, 0.1, 0.2, 0.4, 0.8)
    inv_sigma_sq_grid: tuple[float, ...] = (0.0, 0.125, 0.25, 0.5, 1.0, 2.0, 4.0)
    solver: SolverOptions = SolverOptions()

    def __post_init__(self):
        if self.n_alternatives < 2:
            raise ParameterError("need at least two alternatives")
        if not self.seeds:
            raise ParameterError("need at least one seed")


@dataclass(frozen=True)
class SweepPoint:
    param: str
    seeds: tuple[int, ...]
    values: tuple[float, ...]
    mean: float
    std: float

    @classmethod
    def from_values(cls, param: str, seeds, values) -> "SweepPoint":
        arr = np.asarray(values, dtype=float)
        std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
        return cls(param, tuple(seeds), tuple(float(v) for v in arr),
                   float(np.mean(arr)), std)


@dataclass(frozen=True)
class ExperimentResult:
    name: str
    config: ExperimentConfig
    points: tuple[SweepPoint, ...]
    notes: tuple[str, ...] = ()
    failures: tuple[str, ...] = ()

    def point(self, param: str) -> SweepPoint:
        for p in self.points:
            if p.param == param:
                return p
        raise KeyError(param)

    def per_seed_rows(self):
        for p in self.points:
            for seed, value in zip(p.seeds, p.values):
                yield p.param, seed, value

    def summary_rows(self):
        for p in self.points:
            yield p.param, p.mean, p.std

    def write_csv(self, out_dir) -> list[str]:
        import csv
        from pathlib import Path
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        per_seed = out / f"{self.name}_per_seed.csv"
        summary = out / f"{self.name}_summary.csv"
        with open(per_seed, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "seed", "norm_error"])
            for param, seed, value in self.per_seed_rows():
                w.writerow([param, seed, repr(value)])
        with open(summary, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["param", "mean", "std"])
            for param, mean, std in self.summary_rows():
                w.writerow([param, repr(mean), repr(std)])
        return [str(per_seed), str(summary)]


def _fmt(x: float) -> str:
    return repr(float(x))


def _dataset(config: ExperimentConfig, seed: int, edge_prob: float):
    rng = np.random.default_rng(seed)
    pairs = erdos_renyi_graph(config.n_alternatives, edge_prob, rng)
    truth = sample_ground_truth(config.n_alternatives, config.sigma_dagger_sq, rng)
    matrix = synthesize_comparisons(config.gen_law, truth, pairs, rng)
    return truth, matrix


def _estimate(law, prior, matrix, options):
    if matrix.num_pairs == 0:
        # with no comparisons the regularized optimum is exactly zero
        return ScoreVector.zeros(matrix.alternatives)
    vec, _ = map_estimate(law, prior, matrix, options)
    return vec


def _map_seeds(fn, seeds, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, seeds))
    return [fn(s) for s in seeds]


def _merge(per_seed_results):
    """Deterministic merge of per-seed (values, failures, notes) triples."""
    rows = [r[0] for r in per_seed_results]
    failures = tuple(msg for r in per_seed_results for msg in r[1])
    notes = tuple(msg for r in per_seed_results for msg in r[2])
    return rows, failures, notes


def run_experiment_sparsity(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Error versus graph density; fit model = generating model."""

    def one_seed(seed):
        out, fails = [], []
        for pc in config.edge_prob_grid:
            truth, matrix = _dataset(config, seed, pc)
            try:
                est = _estimate(config.gen_law, config.prior, matrix, config.solver)
                out.append(norm_error(est, truth))
            except SolverError as exc:
                fails.append(f"pc={_fmt(pc)} seed={seed}: {exc}")
                out.append(math.nan)
        return out, fails, []

    rows, failures, _ = _merge(_map_seeds(one_seed, config.seeds, threads))
    points = [SweepPoint.from_values(_fmt(pc), config.seeds,
                                     [row[k] for row in rows])
              for k, pc in enumerate(config.edge_prob_grid)]
    return ExperimentResult("sparsity", config, tuple(points), failures=failures)


def _default_fit_laws() -> tuple[RootLaw, ...]:
    return tuple(RootLaw.knary(k) for k in (2, 3, 5, 9, 21)) + (RootLaw.uniform(),)


def _fit_label(law: RootLaw) -> str:
    return str(law.k) if law.family.value == "knary" else law.family.value


def run_experiment_discretization(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """K-level fits against the continuous fit on shared uniform data."""
    fit_laws = config.fit_laws or _default_fit_laws()

    def one_seed(seed):
        truth, matrix = _dataset(config, seed, config.edge_prob)
        out, fails = [], []
        for law in fit_laws:
            try:
                est = _estimate(law, config.prior, matrix, config.solver)
                out.append(norm_error(est, truth))
            except SolverError as exc:
                fails.append(f"fit={_fit_label(law)} seed={seed}: {exc}")
                out.append(math.nan)
        return out, fails, []

    rows, failures, _ = _merge(_map_seeds(one_seed, config.seeds, threads))
    points = [SweepPoint.from_values(_fit_label(law), config.seeds,
                                     [row[k] for row in rows])
              for k, law in enumerate(fit_laws)]
    return ExperimentResult("discretization", config, tuple(points), failures=failures)


def run_experiment_regularization(config: ExperimentConfig, threads: int = 1) -> ExperimentResult:
    """Error versus inverse prior variance, 0 meaning no regularization.

    The unregularized point needs a connected graph, so it is evaluated on
    the giant component (noted in the result when that is a strict subset).
    """

    def one_seed(seed):
        truth, matrix = _dataset(config, seed, config.edge_prob)
        comps = connected_components(matrix)
        out, fails, notes = [], [], []
        for inv in config.inv_sigma_sq_grid:
            if inv > 0:
                prior = PriorConfig(1.0 / inv)
                sub_matrix, idx = matrix, None
            else:
                prior = PriorConfig(math.inf)
                if len(comps) > 1:
                    sub_matrix, idx = restrict_matrix(matrix, comps[0])
                    notes.append(
                        f"seed={seed}: unregularized point restricted to the giant "
                        f"component ({len(comps[0])}/{len(matrix.alternatives)} alternatives)")
                else:
                    sub_matrix, idx = matrix, None
            try:
                est = _estimate(config.gen_law, prior, sub_matrix, config.solver)
                tru = truth.values if idx is None else truth.values[idx]
                out.append(norm_error(est.values, tru))
            except SolverError as exc:
                fails.append(f"inv_sigma_sq={_fmt(inv)} seed={seed}: {exc}")
                out.append(math.nan)
        return out, fails, notes

    rows, failures, notes = _merge(_map_seeds(one_seed, config.seeds, threads))
    points = [SweepPoint.from_values(_fmt(inv), config.seeds,
                                     [row[k] for row in rows])
              for k, inv in enumerate(config.inv_sigma_sq_grid)]
    return ExperimentResult("regularization", config, tuple(points),
                            notes=notes, failures=failures)

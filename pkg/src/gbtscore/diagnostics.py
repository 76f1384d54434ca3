"""Executable diagnostics for the estimator's structural guarantees.

Three facts about the score estimator are checked empirically here:

* monotonicity: raising any single comparison strictly raises the winner's
  score and strictly lowers the loser's;
* resilience: for bounded comparison models, one elementary edit moves the
  full score vector by at most ``4 sqrt(2) r_max sigma^2`` in l2 norm, and
  k edits by at most k times that (models with unbounded comparisons have no
  such constant, which the Gaussian scaling probe demonstrates);
* the neutral comparison: adding a new comparison with value
  ``Phi'(theta_a - theta_b)`` leaves the scores unchanged, larger values
  raise the winner, smaller ones lower it.

Strictness below numerical resolution cannot be decided, so monotone checks
are certified only when the observed margin exceeds ten times the combined
certified solver error of the two solves; smaller margins are reported as
inconclusive rather than failed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .comparisons import ComparisonEdit, ComparisonMatrix, EditKind
from .errors import EditError, ParameterError
from .rootlaws import RootLaw
from .solver import PriorConfig, SolverOptions, map_estimate

__all__ = [
    "MonotoneStepResult",
    "check_monotone_step",
    "monotonicity_sweep",
    "ProbeRecord",
    "ResilienceProbeConfig",
    "ResilienceProbe",
    "measure_resilience",
    "write_probe_csv",
    "neutral_comparison",
    "conditional_moments",
]

RESILIENCE_COEFFICIENT = 4.0 * math.sqrt(2.0)


def resilience_bound(law: RootLaw, prior: PriorConfig) -> float:
    """4 sqrt(2) r_max sigma^2, or +inf when the comparison domain is unbounded."""
    if not law.is_bounded or not prior.is_regularized:
        return math.inf
    return RESILIENCE_COEFFICIENT * law.r_max * prior.sigma_sq


def conditional_moments(law: RootLaw, theta_ab: float) -> tuple[float, float]:
    """Mean and variance of a comparison at score difference theta_ab."""
    return law.cumulant_prime(theta_ab), law.cumulant_double_prime(theta_ab)


# ------------------------------------------------------------------ monotonicity

@dataclass(frozen=True)
class MonotoneStepResult:
    pair: tuple[str, str]
    delta: float
    margin: float          # change of the raised side's score
    margin_other: float    # change of the opposite side's score (negated expectation)
    certified_error: float  # summed certified error of both solves
    strictly_increased: bool
    conclusive: bool

    @property
    def passed(self) -> bool:
        return self.strictly_increased and self.conclusive


def _admissible_step(law: RootLaw, value: float, delta: float) -> None:
    if not delta > 0:
        raise EditError(f"step must be positive, got {delta!r}")
    target = value + delta
    if law.support_kind == "discrete":
        pts = law.support_points()
        above = pts[pts > value + 1e-12]
        if above.size == 0:
            raise EditError(f"value {value!r} has no next support point")
        if abs(target - above[0]) > 1e-9:
            raise EditError(
                f"discrete step from {value!r} must reach the next support point "
                f"{above[0]!r}, got {target!r}")
    elif law.is_bounded and target > law.r_max:
        raise EditError(f"step leaves the support: {value!r} + {delta!r} > {law.r_max}")


def check_monotone_step(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix,
                        pair: tuple[str, str], delta: float,
                        options: SolverOptions | None = None,
                        _base=None) -> MonotoneStepResult:
    """Raise r_ab by delta, re-solve, and report how theta_a moved.

    For discrete models delta must step exactly to the next support point.
    """
    a, b = pair
    value = matrix.value(a, b)  # raises if the pair is absent
    _admissible_step(law, value, delta)
    if _base is None:
        base_vec, base_rep = map_estimate(law, prior, matrix, options)
    else:
        base_vec, base_rep = _base
    bumped = matrix.apply_edit(ComparisonEdit(EditKind.CHANGE, (a, b), value + delta))
    new_vec, new_rep = map_estimate(law, prior, bumped, options)
    err = base_rep.certified_error + new_rep.certified_error
    if not math.isfinite(err):
        err = 0.0  # unregularized solves carry no certified bound
    margin = new_vec.value_of(a) - base_vec.value_of(a)
    margin_other = new_vec.value_of(b) - base_vec.value_of(b)
    return MonotoneStepResult(
        pair=(a, b), delta=delta, margin=margin, margin_other=margin_other,
        certified_error=err,
        strictly_increased=margin > 10.0 * err,
        conclusive=abs(margin) > 10.0 * err)


def monotonicity_sweep(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix,
                       options: SolverOptions | None = None,
                       continuous_step: float = 0.25) -> list[MonotoneStepResult]:
    """Probe every admissible single-pair increase of the matrix.

    The base problem is solved once and shared. Entries already at the top
    of a discrete grid, or within 1e-6 of a bounded supremum, admit no
    increase and are skipped.
    """
    base = map_estimate(law, prior, matrix, options)
    results = []
    pts = law.support_points() if law.support_kind == "discrete" else None
    for a, b, value in matrix.iter_entries():
        if pts is not None:
            above = pts[pts > value + 1e-12]
            if above.size == 0:
                continue
            delta = float(above[0] - value)
        elif law.is_bounded:
            room = law.r_max - value
            if room < 1e-6:
                continue
            delta = min(continuous_step, 0.5 * room)
        else:
            delta = continuous_step
        results.append(check_monotone_step(law, prior, matrix, (a, b), delta,
                                           options, _base=base))
    return results


# ------------------------------------------------------------------ resilience

@dataclass(frozen=True)
class ProbeRecord:
    edit_kind: str
    pair: str
    delta_distance: int
    l2_change: float
    ratio: float
    bound: float


@dataclass(frozen=True)
class ResilienceProbeConfig:
    """Randomized probing plan for the resilience bound.

    ``edits_per_probe`` > 1 exercises the multi-edit bound; when
    ``scaling_factors`` is set the probes are global rescalings R -> lam R
    instead of random edits (the stress case for linear estimators).
    """

    n_alternatives: int = 10
    edge_prob: float = 0.6
    n_probes: int = 200
    edits_per_probe: int = 1
    n_bases: int = 10
    seed: int = 0
    scaling_factors: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.n_alternatives < 3:
            raise ParameterError("resilience probes need at least 3 alternatives")
        if not 0.0 < self.edge_prob <= 1.0:
            raise ParameterError("edge_prob must lie in (0, 1]")
        if self.n_probes < 1 or self.edits_per_probe < 1 or self.n_bases < 1:
            raise ParameterError("probe counts must be positive")


@dataclass
class ResilienceProbe:
    base: ComparisonMatrix
    edits: list[list[ComparisonEdit]]
    records: list[ProbeRecord] = field(default_factory=list)
    observed_ratio: float = 0.0
    bound: float = math.inf


def _random_value(law: RootLaw, rng) -> float:
    pts = law.support_points()
    if pts is not None:
        return float(pts[rng.integers(pts.size)])
    if law.is_bounded:
        return float(rng.uniform(-1.0, 1.0))
    # unbounded continuous support: draw from the untilted law itself
    return float(law.sample_comparison(0.0, rng))


def _random_edit(law: RootLaw, matrix: ComparisonMatrix, rng) -> ComparisonEdit:
    ids = matrix.alternatives.ids
    present = [(ids[i], ids[j]) for (i, j) in sorted(matrix.pair_keys())]
    absent = [(ids[i], ids[j]) for i in range(len(ids)) for j in range(i + 1, len(ids))
              if not matrix.has_pair(ids[i], ids[j])]
    kinds = [EditKind.CHANGE]
    if absent:
        kinds.append(EditKind.ADD)
    if len(present) > 1:
        kinds.append(EditKind.REMOVE)
    kind = kinds[rng.integers(len(kinds))]
    if kind == EditKind.ADD:
        pair = absent[rng.integers(len(absent))]
        return ComparisonEdit(EditKind.ADD, pair, _random_value(law, rng))
    pair = present[rng.integers(len(present))]
    if kind == EditKind.REMOVE:
        return ComparisonEdit(EditKind.REMOVE, pair)
    old = matrix.value(*pair)
    while True:
        value = _random_value(law, rng)
        if value != old:
            return ComparisonEdit(EditKind.CHANGE, pair, value)


def _random_base(law: RootLaw, config: ResilienceProbeConfig, rng) -> ComparisonMatrix:
    from .sim import default_alternatives, erdos_renyi_graph, synthesize_comparisons
    from .solver import ScoreVector

    alts = default_alternatives(config.n_alternatives)
    while True:
        pairs = erdos_renyi_graph(config.n_alternatives, config.edge_prob, rng)
        if pairs:
            break
    truth = ScoreVector(alts, rng.normal(size=config.n_alternatives))
    return synthesize_comparisons(law, truth, pairs, rng)


def measure_resilience(law: RootLaw, prior: PriorConfig,
                       config: ResilienceProbeConfig,
                       options: SolverOptions | None = None,
                       base: ComparisonMatrix | None = None) -> ResilienceProbe:
    """Solve base/edited pairs and report max ||dTheta||_2 / edit distance.

    Probes edit randomly generated bases, or the supplied ``base`` dataset.
    Solver failures propagate. For bounded models the observed ratio is
    expected to stay strictly under the bound; callers decide whether to
    treat an excess as fatal.
    """
    rng = np.random.default_rng(config.seed)
    bound = resilience_bound(law, prior)
    fixed_base = base is not None
    if base is None:
        base = _random_base(law, config, rng)
    probe = ResilienceProbe(base=base, edits=[], bound=bound)

    if config.scaling_factors:
        base_vec, _ = map_estimate(law, prior, base, options)
        for lam in config.scaling_factors:
            scaled = base.with_entries(
                [(a, b, lam * v) for a, b, v in base.iter_entries()])
            edits = [ComparisonEdit(EditKind.CHANGE, (a, b), lam * v)
                     for a, b, v in base.iter_entries() if lam * v != v]
            dist = base.edit_distance(scaled)
            if dist == 0:
                continue
            scaled_vec, _ = map_estimate(law, prior, scaled, options)
            change = float(np.linalg.norm(scaled_vec.values - base_vec.values))
            ratio = change / dist
            probe.edits.append(edits)
            probe.records.append(ProbeRecord("scale", "*", dist, change, ratio, bound))
            probe.observed_ratio = max(probe.observed_ratio, ratio)
        return probe

    per_base = max(1, config.n_probes // config.n_bases)
    done = 0
    base_vec, _ = map_estimate(law, prior, base, options)
    while done < config.n_probes:
        edited = base
        edits: list[ComparisonEdit] = []
        for _ in range(config.edits_per_probe):
            e = _random_edit(law, edited, rng)
            edits.append(e)
            edited = edited.apply_edit(e)
        dist = base.edit_distance(edited)
        if dist == 0:
            continue
        edited_vec, _ = map_estimate(law, prior, edited, options)
        change = float(np.linalg.norm(edited_vec.values - base_vec.values))
        ratio = change / dist
        kind = "+".join(e.kind.value for e in edits)
        pair = ";".join(f"{p[0]}|{p[1]}" for p in (e.pair for e in edits))
        probe.edits.append(edits)
        probe.records.append(ProbeRecord(kind, pair, dist, change, ratio, bound))
        probe.observed_ratio = max(probe.observed_ratio, ratio)
        done += 1
        if not fixed_base and done % per_base == 0 and done < config.n_probes:
            base = _random_base(law, config, rng)
            base_vec, _ = map_estimate(law, prior, base, options)
    return probe


def write_probe_csv(probe: ResilienceProbe, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["edit_kind", "pair", "delta_distance", "l2_change", "ratio", "bound"])
        for rec in probe.records:
            writer.writerow([rec.edit_kind, rec.pair, rec.delta_distance,
                             repr(rec.l2_change), repr(rec.ratio), repr(rec.bound)])


# ------------------------------------------------------------------ new comparisons

def neutral_comparison(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix,
                       pair: tuple[str, str],
                       options: SolverOptions | None = None) -> float:
    """The unique value whose addition as r_ab leaves the scores unchanged.

    Equals Phi' of the solved score difference. Any larger added value
    strictly raises a's score, any smaller one strictly lowers it. For
    discrete models the value need not be an attainable comparison.
    """
    a, b = pair
    if matrix.has_pair(a, b):
        raise EditError(f"pair ({a!r}, {b!r}) is already compared")
    solved, _ = map_estimate(law, prior, matrix, options)
    return float(law.cumulant_prime(solved.difference(a, b)))

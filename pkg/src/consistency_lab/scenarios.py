"""Pre-built experiments tying distances, partition tests, schedules and sampling.

Each builder returns a :class:`Scenario` that serializes to the JSON schema the
command-line front end consumes; :func:`run_scenario` executes every metric the
scenario's content supports and returns deterministic tables keyed by metric
name. Replications are allocated disjoint RNG stream ranges in a fixed
construction order, so a seed pins every output byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import erfc, sqrt
from typing import Optional, Sequence

import numpy as np

from .distances import (
    density_total_variation,
    hull_variation,
    ks_distance,
)
from .errors import (
    ConstructionError,
    DegenerateScenarioError,
    ResourceLimitError,
    ValidationError,
)
from .measures import (
    DensitySpec,
    FiniteMeasure,
    Partition,
    discretize,
)
from .partition_tests import (
    UnionTest,
    build_frequency_test,
    error_exponent,
    exact_error,
    separation,
)
from .scheduler import TestFamily, TestFamilyMember, TestSchedule, interleave
from .simulation import (
    GaussianSequenceModel,
    PoissonModel,
    RngSpec,
    discernibility_paths,
    estimate_error,
    poisson_atom_tail_bound,
)

#: Sample sizes at which certified exponents are verified by exact enumeration.
ONSET_GRID = (8, 16, 32, 64, 128, 256)

#: Exponent assigned to pairs with disjoint supports (their true errors are 0).
PERFECT_EXPONENT_CAP = 25.0


def _phi(z: float) -> float:
    """Standard normal distribution function."""
    return 0.5 * erfc(-z / sqrt(2.0))


@dataclass(frozen=True)
class SimParams:
    """Simulation budget attached to a scenario."""

    replications: int = 2000
    n_grid: tuple = ()
    k_grid: tuple = ()
    epsilon_list: tuple = ()


@dataclass
class Scenario:
    """A named experiment: model sets plus the knobs needed to run them."""

    name: str
    model_type: str  # finite | density | poisson | gaussian_sequence
    hypothesis: list
    alternative: list
    partition: Optional[Partition] = None
    schedule: Optional[dict] = None  # {"exponents": [...], "onsets": [...]}
    sim: SimParams = field(default_factory=SimParams)
    model_options: dict = field(default_factory=dict)

    # -- JSON round trip ---------------------------------------------------------
    def to_json_dict(self) -> dict:
        model = {"type": self.model_type}
        model.update(self.model_options)
        out = {
            "name": self.name,
            "model": model,
            "hypothesis": [_model_to_json(m) for m in self.hypothesis],
            "alternative": [_model_to_json(m) for m in self.alternative],
            "sim": {
                "replications": self.sim.replications,
                "n_grid": list(self.sim.n_grid),
                "k_grid": list(self.sim.k_grid),
                "epsilon_list": list(self.sim.epsilon_list),
            },
        }
        if self.partition is not None:
            cells = (
                [list(c) for c in self.partition.cells]
                if self.partition.kind == "intervals"
                else [list(g) for g in self.partition.cells]
            )
            out["partition"] = {"cells": cells}
        if self.schedule is not None:
            out["schedule"] = {
                "exponents": list(self.schedule.get("exponents", [])),
                "onsets": list(self.schedule.get("onsets", [])),
            }
        return out


def _model_to_json(model) -> dict:
    if isinstance(model, FiniteMeasure):
        return {"weights": [float(w) for w in model.weights]}
    if isinstance(model, DensitySpec):
        out = {"kind": model.kind}
        if model.kind == "one_plus_sine":
            out["frequency"] = model.frequency
        elif model.kind == "cesaro_mixture":
            out["order"] = model.order
        elif model.kind == "pu_family":
            out["u"] = model.u
        return out
    if isinstance(model, PoissonModel):
        return {"mass": model.mass, "shape": [float(w) for w in model.shape.weights]}
    if isinstance(model, GaussianSequenceModel):
        return {"signal": [float(s) for s in model.signal]}
    if isinstance(model, np.ndarray):
        return {"signal": [float(s) for s in model]}
    raise ValidationError(f"cannot serialize model of type {type(model).__name__}")


def _model_from_json(obj: dict, model_type: str):
    if not isinstance(obj, dict):
        raise ValidationError(f"model entries must be objects, got {type(obj).__name__}")
    try:
        if model_type == "finite":
            return FiniteMeasure(obj["weights"])
        if model_type == "density":
            kind = obj["kind"]
            if kind == "uniform":
                return DensitySpec.uniform()
            if kind == "one_plus_sine":
                return DensitySpec.one_plus_sine(int(obj["frequency"]))
            if kind == "cesaro_mixture":
                return DensitySpec.cesaro_mixture(int(obj["order"]))
            if kind == "pu_family":
                return DensitySpec.pu_family(float(obj["u"]))
            raise ValidationError(f"unknown density kind {kind!r}")
        if model_type == "poisson":
            return PoissonModel(mass=float(obj["mass"]), shape=FiniteMeasure(obj["shape"]))
        if model_type == "gaussian_sequence":
            # Noise level comes from the epsilon sweep, placeholder here.
            return np.asarray(obj["signal"], dtype=float)
    except KeyError as missing:
        raise ValidationError(f"model entry lacks required key {missing}") from None
    raise ValidationError(f"unknown model type {model_type!r}")


def scenario_from_dict(data: dict) -> Scenario:
    """Parse a scenario from its JSON object form, validating the schema."""
    if not isinstance(data, dict):
        raise ValidationError("scenario file must contain a JSON object")
    for key in ("name", "model", "hypothesis", "alternative"):
        if key not in data:
            raise ValidationError(f"scenario lacks required key {key!r}")
    model = data["model"]
    if not isinstance(model, dict) or "type" not in model:
        raise ValidationError("scenario 'model' must be an object with a 'type'")
    model_type = model["type"]
    if model_type not in ("finite", "density", "poisson", "gaussian_sequence"):
        raise ValidationError(f"unknown model type {model_type!r}")
    options = {k: v for k, v in model.items() if k != "type"}
    hypothesis = [_model_from_json(m, model_type) for m in data["hypothesis"]]
    alternative = [_model_from_json(m, model_type) for m in data["alternative"]]
    partition = None
    if "partition" in data:
        cells = data["partition"]["cells"]
        if model_type == "finite":
            partition = Partition.atoms(cells)
        else:
            partition = Partition("intervals", cells)
    schedule = None
    if "schedule" in data:
        schedule = {
            "exponents": [float(c) for c in data["schedule"].get("exponents", [])],
            "onsets": [int(v) for v in data["schedule"].get("onsets", [])],
        }
    sim_obj = data.get("sim", {})
    sim = SimParams(
        replications=int(sim_obj.get("replications", 2000)),
        n_grid=tuple(int(v) for v in sim_obj.get("n_grid", ())),
        k_grid=tuple(int(v) for v in sim_obj.get("k_grid", ())),
        epsilon_list=tuple(float(v) for v in sim_obj.get("epsilon_list", ())),
    )
    return Scenario(
        name=str(data["name"]),
        model_type=model_type,
        hypothesis=hypothesis,
        alternative=alternative,
        partition=partition,
        schedule=schedule,
        sim=sim,
        model_options=options,
    )


# -- named builders ---------------------------------------------------------------


def scenario_sine_indistinguishable(
    i_max: int, grid_size: int = 64, partition: Optional[Partition] = None
) -> Scenario:
    """Uniform hypothesis against the oscillating family of increasing frequency.

    High frequencies wash out on any fixed partition, so the per-frequency
    separation margins shrink while every single frequency stays testable.
    """
    if i_max < 1:
        raise ValidationError("i_max must be >= 1")
    partition = partition or Partition.half_split()
    return Scenario(
        name=f"sine-indistinguishable-i{i_max}",
        model_type="density",
        hypothesis=[DensitySpec.uniform()],
        alternative=[DensitySpec.one_plus_sine(i) for i in range(1, i_max + 1)],
        partition=partition,
        sim=SimParams(replications=2000),
        model_options={"grid_size": int(grid_size)},
    )


def scenario_mazur_mixture(m_max: int, grid_size: int = 64) -> Scenario:
    """Running averages of the oscillating family collapsing onto uniform.

    Convex averaging drives the total variation to zero, so the attainable
    error floor for the averaged families climbs to one.
    """
    if m_max < 1:
        raise ValidationError("m_max must be >= 1")
    return Scenario(
        name=f"mazur-mixture-m{m_max}",
        model_type="density",
        hypothesis=[DensitySpec.uniform()],
        alternative=[DensitySpec.one_plus_sine(i) for i in range(1, m_max + 1)],
        sim=SimParams(replications=2000),
        model_options={"grid_size": int(grid_size), "cesaro_scan": int(m_max)},
    )


def scenario_kolmogorov_family(u_list: Sequence[float], n_grid: Sequence[int]) -> Scenario:
    """Piecewise-constant tilts of the uniform density, indexed by tilt size."""
    for u in u_list:
        if not (0.0 <= u < 1.0):
            raise ValidationError(f"u={u} outside [0, 1)")
    return Scenario(
        name="kolmogorov-family",
        model_type="density",
        hypothesis=[DensitySpec.uniform()],
        alternative=[DensitySpec.pu_family(u) for u in u_list],
        partition=Partition.half_split(),
        sim=SimParams(replications=4000, n_grid=tuple(int(n) for n in n_grid)),
        model_options={"grid_size": 64},
    )


def scenario_signal_detection(
    theta0: Sequence[Sequence[float]],
    theta1: Sequence[Sequence[float]],
    dimension: int,
    epsilon_list: Sequence[float],
) -> Scenario:
    """Finite signal sets in white noise, tested with linear statistics."""
    s0 = [np.asarray(s, dtype=float) for s in theta0]
    s1 = [np.asarray(s, dtype=float) for s in theta1]
    if len(s0) == 0 or len(s1) == 0:
        raise ValidationError("signal sets must be nonempty")
    for s in s0 + s1:
        if s.shape != (dimension,):
            raise ValidationError(f"every signal must have dimension {dimension}")
    margin = min(float(np.abs(a - b).max()) for a in s0 for b in s1)
    if margin <= 0.0:
        raise ConstructionError("signal sets are not separated (zero sup-norm margin)")
    if any(eps <= 0 for eps in epsilon_list):
        raise ValidationError("noise levels must be positive")
    return Scenario(
        name="signal-detection",
        model_type="gaussian_sequence",
        hypothesis=list(s0),
        alternative=list(s1),
        sim=SimParams(replications=100000, epsilon_list=tuple(float(e) for e in epsilon_list)),
    )


def scenario_nested_alternatives(
    pieces: Sequence,
    hypothesis: Optional[Sequence[FiniteMeasure]] = None,
    n_max: int = 2048,
    k_grid: Sequence[int] = (),
    replications: int = 1000,
) -> Scenario:
    """Nested unions of alternative pieces scheduled into one discernible sequence.

    ``pieces`` holds ``FiniteMeasure`` entries or ``(FiniteMeasure, exponent)``
    pairs; a missing exponent is derived as half the worst-pair Chernoff
    information of the piece against the hypothesis (the half absorbs the union
    bound over pieces and finite-sample prefactors). Onsets are verified by
    exact enumeration on a fixed sample-size grid.
    """
    if len(pieces) == 0:
        raise ValidationError("at least one alternative piece required")
    hypothesis = list(hypothesis) if hypothesis else [FiniteMeasure([0.5, 0.5])]
    measures = []
    exponents: list[Optional[float]] = []
    for piece in pieces:
        if isinstance(piece, tuple):
            measure, exponent = piece
            exponents.append(float(exponent))
        else:
            measure, exponent = piece, None
            exponents.append(None)
        if not isinstance(measure, FiniteMeasure):
            raise ValidationError("each piece must be a FiniteMeasure")
        measures.append(measure)
    if not k_grid:
        k_grid = tuple(range(0, n_max + 1, max(1, n_max // 32)))
    scenario = Scenario(
        name=f"nested-alternatives-{len(measures)}pieces",
        model_type="finite",
        hypothesis=hypothesis,
        alternative=measures,
        sim=SimParams(
            replications=replications,
            n_grid=(int(n_max),),
            k_grid=tuple(int(k) for k in k_grid),
        ),
    )
    family, derived_exponents, onsets = build_nested_family(
        hypothesis, measures, exponents
    )
    scenario.schedule = {"exponents": derived_exponents, "onsets": onsets}
    return scenario


def scenario_poisson(
    h0: PoissonModel, h1: PoissonModel, n_grid: Sequence[int]
) -> Scenario:
    """Two-stage testing of a mean measure: atom count, then atom frequencies."""
    same_mass = abs(h0.mass - h1.mass) <= 1e-12
    same_shape = np.allclose(h0.shape.weights, h1.shape.weights, atol=1e-12)
    if same_mass and same_shape:
        raise DegenerateScenarioError("hypothesis and alternative mean measures coincide")
    return Scenario(
        name="poisson-mean-measure",
        model_type="poisson",
        hypothesis=[h0],
        alternative=[h1],
        sim=SimParams(replications=4000, n_grid=tuple(int(n) for n in n_grid)),
    )


# -- test construction helpers ---------------------------------------------------------


@dataclass(frozen=True)
class LinearFunctionalTest:
    """Thresholded linear statistic separating one pair of signals.

    Rejects when ``f . (y - s0)`` exceeds half the squared functional norm,
    the midpoint between the statistic's means under the two signals.
    """

    functional: np.ndarray
    base: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.functional, dtype=float)
        b = np.asarray(self.base, dtype=float)
        if float(f @ f) <= 0.0:
            raise ConstructionError("separating functional is zero")
        f.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "functional", f)
        object.__setattr__(self, "base", b)

    @property
    def threshold(self) -> float:
        return 0.5 * float(self.functional @ self.functional)

    def rejects(self, y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        stats = (y - self.base) @ self.functional
        return (stats > self.threshold).astype(float)

    def error_sum_analytic(self, noise: float) -> float:
        """Exact type I + type II error at a given noise level."""
        norm = math.sqrt(float(self.functional @ self.functional))
        return 2.0 * _phi(-norm / (2.0 * noise))


class PoissonTwoStageTest:
    """Reject on an extreme atom count, otherwise on the atom frequencies.

    The count stage rejects when the atom count deviates from its expectation
    by more than ``n * deviation_rate``; the optional frequency stage applies a
    nearest-set rule to the empirical atom distribution.
    """

    consumes = "poisson"

    def __init__(self, n: int, mass0: float, deviation_rate: float, frequency_test=None):
        if deviation_rate <= 0.0:
            raise ValidationError("deviation rate must be positive")
        self.n = int(n)
        self.mass0 = float(mass0)
        self.deviation_rate = float(deviation_rate)
        self.frequency_test = frequency_test

    def rejects(self, batch) -> np.ndarray:
        counts, totals = batch
        totals = np.asarray(totals, dtype=float)
        count_reject = np.abs(totals - self.n * self.mass0) > self.n * self.deviation_rate
        if self.frequency_test is None:
            return count_reject.astype(float)
        freq_reject = self.frequency_test.rejects(counts) > 0.5
        # Empty processes carry no frequency information: accept there.
        freq_reject &= np.asarray(totals) > 0
        return (count_reject | freq_reject).astype(float)


def poisson_count_threshold(mass0: float, n: int, target: float) -> tuple[float, float]:
    """Smallest deviation rate whose tail bound meets ``target``.

    Scans a fixed grid of rates below the total mass; when even the largest
    rate misses the target, returns it anyway (the most conservative choice)
    together with its bound.
    """
    rates = mass0 * np.arange(1, 1000) / 1000.0
    chosen = rates[-1]
    bound = poisson_atom_tail_bound(mass0, n, float(rates[-1]))
    for rate in rates:
        value = poisson_atom_tail_bound(mass0, n, float(rate))
        if value <= target:
            chosen, bound = float(rate), value
            break
    return float(chosen), float(bound)


def build_nested_family(
    hypothesis: Sequence[FiniteMeasure],
    pieces: Sequence[FiniteMeasure],
    exponents: Optional[Sequence[Optional[float]]] = None,
    onsets: Optional[Sequence[int]] = None,
) -> tuple[TestFamily, list[float], list[int]]:
    """Certified test family for the nested unions of alternative pieces.

    Member ``i`` tests the hypothesis against pieces ``1..i`` with a union of
    nearest-set frequency tests. Its exponent is half the smallest piece
    exponent among the covered pieces; its onset is the first grid sample size
    at which exact enumeration confirms all covered error probabilities sit
    below the certified bound. Raises ``ConstructionError`` (naming the piece)
    on a zero separation margin or an unverifiable bound.
    """
    if len(pieces) == 0:
        raise ValidationError("at least one piece required")
    alphabet = hypothesis[0].alphabet_size
    identity = Partition.identity(alphabet)
    piece_tests = []
    piece_exponents = []
    supplied = list(exponents) if exponents is not None else [None] * len(pieces)
    for index, piece in enumerate(pieces, start=1):
        report = separation(hypothesis, [piece], identity)
        if report.margin <= 0.0:
            raise ConstructionError(f"piece {index} has zero separation margin")
        piece_tests.append(build_frequency_test(report, 1))
        if supplied[index - 1] is not None:
            piece_exponents.append(float(supplied[index - 1]))
        else:
            exponent = error_exponent(hypothesis, [piece])
            value = min(exponent.value, PERFECT_EXPONENT_CAP)
            piece_exponents.append(0.5 * value)

    members = []
    family_exponents = []
    family_onsets = []
    hyp_vectors = np.stack([m.weights for m in hypothesis])
    for i in range(1, len(pieces) + 1):
        test = piece_tests[0] if i == 1 else UnionTest(piece_tests[:i])
        c_i = min(piece_exponents[:i])
        if onsets is not None:
            onset = int(onsets[i - 1])
        else:
            onset = _verify_onset(test, hypothesis, pieces[:i], c_i, index=i)
        members.append(
            TestFamilyMember(build=ConstantTestBuilder(test), exponent=c_i, onset=onset)
        )
        family_exponents.append(c_i)
        family_onsets.append(onset)
    return TestFamily(tuple(members)), family_exponents, family_onsets


class ConstantTestBuilder:
    """Test constructor that ignores the sample size; picklable for worker pools."""

    __slots__ = ("test",)

    def __init__(self, test):
        self.test = test

    def __call__(self, n: int):
        return self.test


def _verify_onset(test, hypothesis, covered_pieces, exponent, index):
    for n in ONSET_GRID:
        bound = math.exp(-exponent * n)
        try:
            alpha = max(exact_error(test, p, n)[0] for p in hypothesis)
            beta = max(exact_error(test, q, n)[1] for q in covered_pieces)
        except ResourceLimitError:
            raise ConstructionError(
                f"family member {index}: exact verification exceeds enumeration budget"
            ) from None
        if alpha <= bound and beta <= bound:
            return n
    raise ConstructionError(
        f"family member {index}: certified exponent {exponent:.4g} not confirmed "
        f"on the verification grid {ONSET_GRID}"
    )


def nested_schedule(scenario: Scenario, n_max: Optional[int] = None) -> TestSchedule:
    """Interleaved schedule for a nested-alternatives scenario."""
    if scenario.model_type != "finite":
        raise ValidationError("schedules require finite-alphabet scenarios")
    stored = scenario.schedule or {}
    exponents = stored.get("exponents") or None
    onsets = stored.get("onsets") or None
    family, _, _ = build_nested_family(
        scenario.hypothesis, scenario.alternative, exponents, onsets
    )
    if n_max is None:
        n_max = max(scenario.sim.n_grid) if scenario.sim.n_grid else 1024
    hyp_key = np.stack([m.weights for m in scenario.hypothesis])
    return interleave(family, n_max, hypothesis_key=hyp_key)


# -- execution ---------------------------------------------------------------------


@dataclass
class Table:
    columns: list
    rows: list


@dataclass
class ScenarioRun:
    tables: dict
    reports: dict  # JSON-ready side reports (hull mixtures, schedules)


class _StreamAllocator:
    """Hands each simulation task a disjoint RNG stream range, in code order."""

    def __init__(self, seed: int):
        self.base = RngSpec(seed, 0)
        self.next_task = 0

    def take(self) -> RngSpec:
        spec = self.base.task(self.next_task)
        self.next_task += 1
        return spec


def _grid_margin(scenario: Scenario, alt) -> float:
    """Separation margin recomputed on the discretized path, when grid aligns."""
    grid_size = int(scenario.model_options.get("grid_size", 0))
    if grid_size < 2 or scenario.partition is None:
        return math.nan
    groups = []
    for lo, hi in scenario.partition.cells:
        lo_idx, hi_idx = lo * grid_size, hi * grid_size
        if abs(lo_idx - round(lo_idx)) > 1e-9 or abs(hi_idx - round(hi_idx)) > 1e-9:
            return math.nan
        groups.append(list(range(int(round(lo_idx)), int(round(hi_idx)))))
    atom_partition = Partition.atoms(groups, alphabet_size=grid_size)
    h = [discretize(m, grid_size) for m in scenario.hypothesis]
    report = separation(h, [discretize(alt, grid_size)], atom_partition)
    return report.margin


def run_scenario(
    scenario: Scenario,
    seed: int,
    replications: Optional[int] = None,
    workers: int = 1,
    n_max: Optional[int] = None,
) -> ScenarioRun:
    """Execute every metric the scenario supports; deterministic per seed."""
    reps = replications if replications is not None else scenario.sim.replications
    if reps < 100:
        raise ValidationError("replications must be >= 100")
    streams = _StreamAllocator(seed)
    tables: dict[str, Table] = {}
    reports: dict[str, dict] = {}

    if scenario.model_type in ("finite", "density") and scenario.partition is not None:
        tables["separation"] = _separation_table(scenario)
    if scenario.model_type == "density":
        tables["ks"] = _ks_table(scenario)
        if scenario.model_options.get("grid_size"):
            hull_table, hull_report = _hull_metrics(scenario)
            tables["hull"] = hull_table
            reports["hull"] = hull_report
        if scenario.model_options.get("cesaro_scan"):
            tables["cesaro"] = _cesaro_table(scenario)
        if scenario.partition is not None and scenario.sim.n_grid:
            tables["errors"] = _error_curve_table(scenario, reps, streams, workers)
    if scenario.model_type == "finite":
        if scenario.schedule is not None and scenario.sim.n_grid:
            schedule = nested_schedule(scenario, n_max=n_max)
            reports["schedule"] = schedule.to_json_dict()
            tables["discernibility"] = _discernibility_table(
                scenario, schedule, reps, streams, workers
            )
    if scenario.model_type == "gaussian_sequence":
        tables["epsilon_sweep"] = _epsilon_table(scenario, reps, streams, workers)
        tables["projection"] = _projection_table(scenario)
    if scenario.model_type == "poisson":
        tables["poisson_errors"] = _poisson_table(scenario, reps, streams, workers)

    if not tables:
        raise ValidationError(
            f"scenario {scenario.name!r} supports no metrics (missing partition/grids?)"
        )
    return ScenarioRun(tables=tables, reports=reports)


def _separation_table(scenario: Scenario) -> Table:
    rows = []
    for idx, alt in enumerate(scenario.alternative, start=1):
        report = separation(scenario.hypothesis, [alt], scenario.partition)
        label = alt.label() if isinstance(alt, DensitySpec) else f"alternative_{idx}"
        grid_margin = (
            _grid_margin(scenario, alt) if isinstance(alt, DensitySpec) else math.nan
        )
        rows.append((idx, label, report.margin, grid_margin))
    return Table(columns=["index", "model", "margin", "margin_grid"], rows=rows)


def _ks_table(scenario: Scenario) -> Table:
    base = scenario.hypothesis[0]
    rows = []
    for idx, alt in enumerate(scenario.alternative, start=1):
        rows.append((idx, alt.label(), ks_distance(alt, base)))
    return Table(columns=["index", "model", "ks_distance"], rows=rows)


def _hull_metrics(scenario: Scenario):
    grid_size = int(scenario.model_options["grid_size"])
    h = [discretize(m, grid_size) for m in scenario.hypothesis]
    a = [discretize(m, grid_size) for m in scenario.alternative]
    hull = hull_variation(h, a)
    table = Table(
        columns=["grid_size", "hull_value", "kraft_bound", "lp_iterations"],
        rows=[(grid_size, hull.value, 1.0 - hull.value, hull.iterations)],
    )
    report = {
        "grid_size": grid_size,
        "value": hull.value,
        "kraft_bound": 1.0 - hull.value,
        "mixture_p": [float(x) for x in hull.mixture_p],
        "mixture_q": [float(x) for x in hull.mixture_q],
        "lp_iterations": hull.iterations,
    }
    return table, report


def _cesaro_table(scenario: Scenario) -> Table:
    m_max = int(scenario.model_options["cesaro_scan"])
    grid_size = int(scenario.model_options.get("grid_size", 64))
    uniform = DensitySpec.uniform()
    disc_uniform = [discretize(uniform, grid_size)]
    rows = []
    for m in range(1, m_max + 1):
        tv = density_total_variation(DensitySpec.cesaro_mixture(m), uniform)
        prefix = [
            discretize(DensitySpec.one_plus_sine(i), grid_size) for i in range(1, m + 1)
        ]
        hull = hull_variation(disc_uniform, prefix)
        rows.append((m, tv, 1.0 - tv, hull.value, 1.0 - hull.value))
    return Table(
        columns=["m", "tv_mixture", "kraft_mixture", "hull_value", "kraft_hull"],
        rows=rows,
    )


def _error_curve_table(scenario, reps, streams, workers) -> Table:
    rows = []
    for idx, alt in enumerate(scenario.alternative, start=1):
        label = alt.label() if isinstance(alt, DensitySpec) else f"alternative_{idx}"
        report = separation(scenario.hypothesis, [alt], scenario.partition)
        if report.margin <= 0.0:
            for n in scenario.sim.n_grid:
                rows.append((idx, label, n) + (math.nan,) * 6)
            continue
        test = build_frequency_test(report, 1)
        hyp_cells = [FiniteMeasure(v) for v in report.hypothesis_vectors]
        alt_cells = FiniteMeasure(report.alternative_vectors[0])
        for n in scenario.sim.n_grid:
            try:
                alpha_exact = max(exact_error(test, h, n)[0] for h in hyp_cells)
                beta_exact = exact_error(test, alt_cells, n)[1]
            except ResourceLimitError:
                alpha_exact = beta_exact = math.nan
            alpha_mc = estimate_error(
                test, scenario.hypothesis[0], n, reps, streams.take(),
                count="reject", workers=workers,
            )
            beta_mc = estimate_error(
                test, alt, n, reps, streams.take(), count="accept", workers=workers
            )
            rows.append(
                (
                    idx,
                    label,
                    n,
                    alpha_exact,
                    beta_exact,
                    (alpha_exact + beta_exact)
                    if not math.isnan(alpha_exact)
                    else math.nan,
                    alpha_mc.estimate,
                    beta_mc.estimate,
                    alpha_mc.half_width_95 + beta_mc.half_width_95,
                )
            )
    return Table(
        columns=[
            "index",
            "model",
            "n",
            "alpha_exact",
            "beta_exact",
            "total_exact",
            "alpha_mc",
            "beta_mc",
            "total_half_width",
        ],
        rows=rows,
    )


def _epsilon_table(scenario, reps, streams, workers) -> Table:
    pairs = [
        (np.asarray(s0, dtype=float), np.asarray(s1, dtype=float))
        for s0 in scenario.hypothesis
        for s1 in scenario.alternative
    ]
    rows = []
    for eps in scenario.sim.epsilon_list:
        worst_analytic = 0.0
        worst_total = -1.0
        worst = None
        for s0, s1 in pairs:
            test = LinearFunctionalTest(functional=s1 - s0, base=s0)
            worst_analytic = max(worst_analytic, test.error_sum_analytic(eps))
            alpha = estimate_error(
                test, GaussianSequenceModel(s0, eps), 1, reps, streams.take(),
                count="reject", workers=workers,
            )
            beta = estimate_error(
                test, GaussianSequenceModel(s1, eps), 1, reps, streams.take(),
                count="accept", workers=workers,
            )
            total = alpha.estimate + beta.estimate
            if total > worst_total:
                worst_total = total
                worst = (alpha, beta)
        rows.append(
            (
                eps,
                worst_analytic,
                worst[0].estimate,
                worst[1].estimate,
                worst_total,
                worst[0].half_width_95 + worst[1].half_width_95,
            )
        )
    return Table(
        columns=[
            "epsilon",
            "total_analytic",
            "alpha_mc",
            "beta_mc",
            "total_mc",
            "total_half_width",
        ],
        rows=rows,
    )


def _projection_table(scenario) -> Table:
    s0s = [np.asarray(s, dtype=float) for s in scenario.hypothesis]
    s1s = [np.asarray(s, dtype=float) for s in scenario.alternative]
    dimension = s0s[0].size
    full = min(float(np.abs(a - b).max()) for a in s0s for b in s1s)
    rows = []
    for m in range(1, dimension + 1):
        projected = min(float(np.abs(a[:m] - b[:m]).max()) for a in s0s for b in s1s)
        rows.append((m, projected, full, projected / full if full > 0 else math.nan))
    return Table(columns=["m", "margin_projected", "margin_full", "ratio"], rows=rows)


def _discernibility_table(scenario, schedule, reps, streams, workers) -> Table:
    k_grid = scenario.sim.k_grid or tuple(range(0, schedule.n_max + 1, 64))
    n_max = schedule.n_max
    curves = []
    labels = []
    hyp = scenario.hypothesis[0]
    curves.append(
        discernibility_paths(
            schedule, hyp, n_max, k_grid, reps, streams.take(),
            role="hypothesis", workers=workers, model_label="hypothesis",
        )
    )
    labels.append("hypothesis")
    for idx, piece in enumerate(scenario.alternative, start=1):
        curves.append(
            discernibility_paths(
                schedule, piece, n_max, k_grid, reps, streams.take(),
                role="alternative", workers=workers, model_label=f"piece_{idx}",
            )
        )
        labels.append(f"piece_{idx}")
    rows = []
    for j, k in enumerate(k_grid):
        tail = min(1.0, schedule.certified_tail(int(k)))
        rows.append((int(k), tail) + tuple(float(c.error_fraction[j]) for c in curves))
    return Table(
        columns=["k", "certified_tail_clamped"] + [f"err_after_k_{l}" for l in labels],
        rows=rows,
    )


def _poisson_table(scenario, reps, streams, workers) -> Table:
    h0: PoissonModel = scenario.hypothesis[0]
    h1: PoissonModel = scenario.alternative[0]
    shapes_differ = not np.allclose(h0.shape.weights, h1.shape.weights, atol=1e-12)
    freq_test = None
    if shapes_differ:
        identity = Partition.identity(h0.shape.alphabet_size)
        report = separation([h0.shape], [h1.shape], identity)
        freq_test = build_frequency_test(report, 1)
    rows = []
    for n in scenario.sim.n_grid:
        rate, bound = poisson_count_threshold(h0.mass, n, target=1.0 / (n * n))
        test = PoissonTwoStageTest(
            n=n, mass0=h0.mass, deviation_rate=rate, frequency_test=freq_test
        )
        alpha = estimate_error(
            test, h0, n, reps, streams.take(), count="reject", workers=workers
        )
        beta = estimate_error(
            test, h1, n, reps, streams.take(), count="accept", workers=workers
        )
        rows.append(
            (
                n,
                rate,
                min(1.0, bound),
                alpha.estimate,
                alpha.half_width_95,
                beta.estimate,
                beta.half_width_95,
            )
        )
    return Table(
        columns=[
            "n",
            "deviation_rate",
            "count_stage_bound",
            "alpha_mc",
            "alpha_half_width",
            "beta_mc",
            "beta_half_width",
        ],
        rows=rows,
    )

"""Seeded sampling and Monte Carlo estimation for every model class.

Reproducibility contract: all randomness flows through counter-based Philox
generators keyed by ``(seed, stream)``. Replications are split into
fixed-size blocks, block ``b`` of a task owning stream ``s`` draws from
``(seed, s + b)``, and aggregation walks blocks in index order, so results are
bit-identical for a given seed regardless of the worker count.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ResourceLimitError, ValidationError
from .measures import DensitySpec, FiniteMeasure, Partition

#: Replications per RNG block in i.i.d. error estimation.
ERROR_BLOCK = 8192
#: Sample paths per RNG block in discernibility runs.
PATH_BLOCK = 250
#: Stream stride reserved for one simulation task (blocks fit underneath).
TASK_STRIDE = 1 << 20


@dataclass(frozen=True)
class RngSpec:
    """Deterministic generator address: a 64-bit seed plus a stream id."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed, self.stream], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def block(self, index: int) -> "RngSpec":
        return RngSpec(self.seed, self.stream + index)

    def task(self, index: int) -> "RngSpec":
        """Disjoint stream range for the ``index``-th simulation task of a run."""
        return RngSpec(self.seed, self.stream + index * TASK_STRIDE)


@dataclass(frozen=True)
class SimulationReport:
    """Monte Carlo probability estimate with its confidence interval."""

    estimate: float
    replications: int
    half_width_95: float
    ci_low: float
    ci_high: float
    ci_method: str
    model_label: str
    test_label: str
    seed: int
    stream: int


@dataclass(frozen=True)
class PoissonModel:
    """Mean measure split into total mass and normalized shape."""

    mass: float
    shape: FiniteMeasure

    def __post_init__(self):
        if not (math.isfinite(self.mass) and self.mass > 0.0):
            raise ValidationError("total mass must be positive and finite")
        if not isinstance(self.shape, FiniteMeasure):
            raise ValidationError("shape must be a FiniteMeasure")

    def label(self) -> str:
        return f"poisson(mass={self.mass:g})"


@dataclass(frozen=True)
class GaussianSequenceModel:
    """Coordinatewise signal-plus-noise observations ``y_j = s_j + eps * xi_j``."""

    signal: np.ndarray
    noise: float

    def __post_init__(self):
        s = np.asarray(self.signal, dtype=float)
        if s.ndim != 1 or s.size < 1 or not np.all(np.isfinite(s)):
            raise ValidationError("signal must be a finite 1-D vector")
        if not (math.isfinite(self.noise) and self.noise > 0.0):
            raise ValidationError("noise level must be positive and finite")
        s.setflags(write=False)
        object.__setattr__(self, "signal", s)

    @property
    def dimension(self) -> int:
        return self.signal.size


# -- raw samplers -----------------------------------------------------------------


def _finite_atoms(measure: FiniteMeasure, uniforms: np.ndarray) -> np.ndarray:
    cum = np.cumsum(measure.weights)
    cum[-1] = 1.0
    return np.searchsorted(cum, uniforms, side="right").astype(np.int64)


def sample_iid(model, n: int, rng: RngSpec) -> np.ndarray:
    """Draw ``n`` independent observations from a finite measure or density.

    Finite alphabets use inverse-CDF lookup on the cumulative weights;
    densities invert their closed-form distribution functions.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    gen = rng.generator()
    u = gen.random(n)
    if isinstance(model, FiniteMeasure):
        return _finite_atoms(model, u)
    if isinstance(model, DensitySpec):
        return model.quantile(u)
    raise ValidationError(f"cannot sample from {type(model).__name__}")


def sample_poisson_process(model: PoissonModel, n: int, rng: RngSpec) -> np.ndarray:
    """Atoms of one superposed process: a Poisson count of i.i.d. shape draws."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    mean_atoms = n * model.mass
    if mean_atoms > 1e9:
        raise ResourceLimitError(f"expected atom count {mean_atoms:.3e} exceeds 1e9")
    gen = rng.generator()
    count = int(gen.poisson(mean_atoms))
    return _finite_atoms(model.shape, gen.random(count))


def poisson_atom_tail_bound(lam: float, n: int, x: float) -> float:
    """Two-sided exponential bound on ``P(|N - n*lam| > n*x)`` for the atom count.

    Valid for ``0 < x < lam``; at ``x >= lam`` the lower-tail term is
    undefined.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValidationError("lam must be positive and finite")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not (0.0 < x < lam):
        raise ValidationError("x must satisfy 0 < x < lam")
    upper = math.exp(-n * (lam + x) * math.log1p(x / lam) + n * x)
    lower = math.exp(-n * (lam - x) * math.log(1.0 - x / lam) - n * x)
    return upper + lower


def sample_gaussian_sequence(model: GaussianSequenceModel, rng: RngSpec) -> np.ndarray:
    """One observation vector of the signal corrupted by white noise."""
    gen = rng.generator()
    return model.signal + model.noise * gen.standard_normal(model.dimension)


# -- Monte Carlo error estimation ----------------------------------------------------


def wilson_interval(estimate: float, replications: int, z: float = 1.959963984540054):
    """Wilson score interval; stable near 0 and 1."""
    z2 = z * z
    denom = 1.0 + z2 / replications
    center = (estimate + z2 / (2.0 * replications)) / denom
    half = (
        z
        * math.sqrt(estimate * (1.0 - estimate) / replications + z2 / (4.0 * replications**2))
        / denom
    )
    return max(0.0, center - half), min(1.0, center + half)


def _cell_lookup(test, model):
    """How to turn raw draws into the count vectors a frequency test consumes."""
    partition = getattr(test, "partition", None)
    if isinstance(model, DensitySpec):
        if partition is None or partition.kind != "intervals":
            raise ValidationError("density sampling needs a test built on an interval partition")
        return np.array([hi for _, hi in partition.cells])
    if partition is not None and partition.kind == "atoms":
        atom_to_cell = np.zeros(partition.alphabet_size, dtype=np.int64)
        for cell, group in enumerate(partition.cells):
            for atom in group:
                atom_to_cell[atom] = cell
        return atom_to_cell
    return None


def _counts_from_atoms(atoms: np.ndarray, k: int) -> np.ndarray:
    counts = np.zeros((atoms.shape[0], k), dtype=np.int64)
    for j in range(k):
        counts[:, j] = (atoms == j).sum(axis=1)
    return counts


def _simulate_error_block(args) -> float:
    test, model, n, count_kind, size, rng = args
    gen = rng.generator()
    if isinstance(model, GaussianSequenceModel):
        y = model.signal + model.noise * gen.standard_normal((size, model.dimension))
        reject = test.rejects(y)
    elif isinstance(model, PoissonModel):
        counts_per_rep = gen.poisson(n * model.mass, size=size)
        atoms = _finite_atoms(model.shape, gen.random(int(counts_per_rep.sum())))
        k = model.shape.alphabet_size
        counts = np.zeros((size, k), dtype=np.int64)
        rows = np.repeat(np.arange(size), counts_per_rep)
        np.add.at(counts, (rows, atoms), 1)
        if getattr(test, "consumes", None) == "poisson":
            reject = test.rejects((counts, counts_per_rep))
        else:
            reject = test.rejects(counts)
    else:
        lookup = _cell_lookup(test, model)
        if isinstance(model, DensitySpec):
            draws = model.quantile(gen.random((size, n)))
            cells = np.searchsorted(lookup, draws, side="left")
            k = lookup.size
        else:
            cells = _finite_atoms(model, gen.random((size, n)))
            k = model.alphabet_size
            if lookup is not None:
                cells = lookup[cells]
                k = int(lookup.max()) + 1
        reject = test.rejects(_counts_from_atoms(cells, k))
    if count_kind == "accept":
        reject = 1.0 - np.asarray(reject, dtype=float)
    return float(np.asarray(reject, dtype=float).sum())


def _block_sizes(total: int, block: int):
    full, rest = divmod(total, block)
    sizes = [block] * full
    if rest:
        sizes.append(rest)
    return sizes


def _map_blocks(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def estimate_error(
    test,
    model,
    n: int,
    replications: int,
    rng: RngSpec,
    count: str = "reject",
    workers: int = 1,
    model_label: str = "",
    test_label: str = "",
) -> SimulationReport:
    """Monte Carlo estimate of a test's rejection (or acceptance) probability.

    ``count="reject"`` estimates the type I error under a hypothesis model;
    ``count="accept"`` the type II error under an alternative model. Blocks of
    replications own disjoint RNG streams and are reduced in index order, so
    the result depends only on ``rng`` and the arguments.
    """
    if replications < 100:
        raise ValidationError("replications must be >= 100")
    if count not in ("reject", "accept"):
        raise ValidationError("count must be 'reject' or 'accept'")
    sizes = _block_sizes(replications, ERROR_BLOCK)
    tasks = [
        (test, model, n, count, size, rng.block(b)) for b, size in enumerate(sizes)
    ]
    totals = _map_blocks(_simulate_error_block, tasks, workers)
    estimate = float(sum(totals)) / replications
    half_width = 1.959963984540054 * math.sqrt(
        max(estimate * (1.0 - estimate), 0.0) / replications
    )
    if estimate < 5.0 / replications:
        ci_low, ci_high = wilson_interval(estimate, replications)
        method = "wilson"
    else:
        ci_low = max(0.0, estimate - half_width)
        ci_high = min(1.0, estimate + half_width)
        method = "normal"
    return SimulationReport(
        estimate=estimate,
        replications=replications,
        half_width_95=half_width,
        ci_low=ci_low,
        ci_high=ci_high,
        ci_method=method,
        model_label=model_label,
        test_label=test_label,
        seed=rng.seed,
        stream=rng.stream,
    )


# -- discernibility along growing sample paths ----------------------------------------


@dataclass(frozen=True)
class DiscernibilityCurve:
    """Fraction of sample paths with at least one error past each index."""

    k_grid: Tuple[int, ...]
    error_fraction: np.ndarray
    replications: int
    role: str
    model_label: str


def _simulate_path_block(args) -> np.ndarray:
    schedule, model, partition, n_max, k_grid, role, size, rng = args
    gen = rng.generator()
    if isinstance(model, FiniteMeasure):
        cells = _finite_atoms(model, gen.random((size, n_max)))
        k = model.alphabet_size
        if partition is not None and partition.kind == "atoms":
            lookup = np.zeros(partition.alphabet_size, dtype=np.int64)
            for cell, group in enumerate(partition.cells):
                for atom in group:
                    lookup[atom] = cell
            cells = lookup[cells]
            k = partition.k
    elif isinstance(model, DensitySpec):
        if partition is None or partition.kind != "intervals":
            raise ValidationError("density paths need an interval partition")
        his = np.array([hi for _, hi in partition.cells])
        cells = np.searchsorted(his, model.quantile(gen.random((size, n_max))), side="left")
        k = partition.k
    else:
        raise ValidationError(f"cannot grow sample paths from {type(model).__name__}")

    counts = np.zeros((size, k), dtype=np.int64)
    rows = np.arange(size)
    last_error = np.zeros(size, dtype=np.int64)
    for n in range(1, n_max + 1):
        counts[rows, cells[:, n - 1]] += 1
        rejected = np.asarray(schedule.test_at(n).rejects(counts)) > 0.5
        errors = rejected if role == "hypothesis" else ~rejected
        last_error[errors] = n
    return np.array([(last_error > k).sum() for k in k_grid], dtype=np.int64)


def discernibility_paths(
    schedule,
    model,
    n_max: int,
    k_grid: Sequence[int],
    replications: int,
    rng: RngSpec,
    role: str = "hypothesis",
    partition: Optional[Partition] = None,
    workers: int = 1,
    model_label: str = "",
) -> DiscernibilityCurve:
    """Error-after-k curve of a schedule along incrementally grown sample paths.

    Each path draws one nested sample ``X_1..X_{n_max}``; the scheduled test is
    re-evaluated on every prefix, and an error is a rejection under a
    hypothesis model (``role="hypothesis"``) or an acceptance under an
    alternative model (``role="alternative"``). The curve at ``k`` is the
    fraction of paths erring at some ``n`` in ``(k, n_max]``, which is
    non-increasing in ``k`` by construction.
    """
    if role not in ("hypothesis", "alternative"):
        raise ValidationError("role must be 'hypothesis' or 'alternative'")
    if n_max < 1 or n_max > schedule.n_max:
        raise ValidationError(f"n_max must be in [1, {schedule.n_max}]")
    if replications < 1:
        raise ValidationError("replications must be >= 1")
    ks = tuple(int(k) for k in k_grid)
    if any(k < 0 or k > n_max for k in ks) or list(ks) != sorted(ks):
        raise ValidationError("k_grid must be sorted integers within [0, n_max]")
    sizes = _block_sizes(replications, PATH_BLOCK)
    tasks = [
        (schedule, model, partition, n_max, ks, role, size, rng.block(b))
        for b, size in enumerate(sizes)
    ]
    counts = _map_blocks(_simulate_path_block, tasks, workers)
    total = np.sum(counts, axis=0)
    return DiscernibilityCurve(
        k_grid=ks,
        error_fraction=total / replications,
        replications=replications,
        role=role,
        model_label=model_label,
    )

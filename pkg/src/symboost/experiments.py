"""Scenario runners that regenerate the fidelity datasets, plus fitting helpers.

A scenario expands into independent cells ``(config, sigma, N, delta_L,
realization)``. Every cell derives its noise seed from ``(master_seed, N)``
alone, so the result of a cell does not depend on which worker ran it or in
which order, and the same realization index reuses the same standard normal
draws across the sigma grid (common random numbers). Cells are mapped over a
process pool in a fixed order and merged in that order.
"""

from __future__ import annotations

import enum
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import analytic
from .analytic import AdderNoiseVector, DegenerateInputError, fit_through_origin
from .circuits import CircuitContext, adder_fidelity_sim, modadd_fidelity_sim, shor_run
from .noise import Category, ErrorModel, NoiseSpec

WORKERS_ENV = "SYMBOOST_WORKERS"
DEFAULT_SIGMAS = (0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.2, 0.3)
EXTRA_QUBIT_SIGMAS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)
ALL_CONFIGS = tuple((m, c) for m in ErrorModel for c in
                    (Category.TYPED_ASYMMETRIC, Category.NON_TYPED, Category.TYPED_SYMMETRIC))
# Shor runs above this many qubits need ``allow_large``
LARGE_QUBITS = 18


class ScenarioKind(str, enum.Enum):
    SIGMA_SWEEP_SHOR = "shor-sweep"
    SEMIPRIME_SWEEP_MODADD = "modadd-sweep"
    R_LOCALIZATION = "r-localize"
    EXTRA_QUBIT_SWEEP = "extra-qubits"
    RATIO_STUDY = "ratio-study"


@dataclass(frozen=True)
class Scenario:
    kind: ScenarioKind
    Ns: tuple = (15,)
    base: int = 2
    delta_Ls: tuple = (0,)
    sigmas: tuple = DEFAULT_SIGMAS
    configs: tuple = ALL_CONFIGS
    realizations: int = 1
    master_seed: int = 0
    min_per_band: int = 0
    allow_large: bool = False
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", ScenarioKind(self.kind))
        object.__setattr__(self, "configs", tuple((ErrorModel(m), Category(c)) for m, c in self.configs))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        if not self.sigmas:
            raise ValueError("sigma grid is empty")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("sigma values must be >= 0")
        if any(b <= a for a, b in zip(self.sigmas, self.sigmas[1:])):
            raise ValueError(f"sigma grid must be strictly increasing: {self.sigmas}")
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if any(d < 0 for d in self.delta_Ls):
            raise ValueError("delta_L values must be >= 0")
        if not self.configs:
            raise ValueError("no (model, category) configurations given")
        if not self.name:
            object.__setattr__(self, "name", self.kind.value)


@dataclass(frozen=True)
class FidelityRecord:
    scenario: str
    model: str
    category: str
    N: int
    base: int
    L: int
    delta_L: int
    sigma: float
    realization: int
    fidelity: float
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity {self.fidelity} outside [0, 1]")

    def noise_spec(self, master_seed: int) -> NoiseSpec:
        return NoiseSpec(self.model, self.category, self.sigma, cell_seed(master_seed, self.N),
                         self.realization)


def cell_seed(master_seed: int, N: int) -> int:
    """Noise seed of every cell that works on modulus ``N``."""
    return int(np.random.SeedSequence([int(master_seed), int(N)]).generate_state(1, np.uint64)[0])


def default_workers() -> int:
    value = os.environ.get(WORKERS_ENV)
    if value is None:
        return 1
    try:
        n = int(value)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be an integer, got {value!r}") from None
    if n < 1:
        raise ValueError(f"{WORKERS_ENV} must be >= 1")
    return n


def _map(fn, cells, workers):
    workers = default_workers() if workers is None else workers
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(cells) // (4 * workers))
        return list(pool.map(fn, cells, chunksize=chunk))


# --- semiprimes ------------------------------------------------------------

def _primes_below(n: int) -> np.ndarray:
    sieve = np.ones(n, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n - 1) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.flatnonzero(sieve)


def enumerate_odd_semiprimes(limit: int) -> list[int]:
    """All ``N = p q < limit`` with ``p < q`` odd primes, ascending."""
    if limit < 15:
        raise ValueError("limit must be >= 15")
    primes = [int(p) for p in _primes_below(limit // 3 + 1) if p > 2]
    out = []
    for i, p in enumerate(primes):
        if p * p >= limit:
            break
        for q in primes[i + 1:]:
            if p * q >= limit:
                break
            out.append(p * q)
    return sorted(out)


# --- fitting ---------------------------------------------------------------

def fit_gamma(points, min_fidelity: float = 0.5) -> tuple[float, float]:
    """Fit ``F = exp(-gamma sigma^2)`` through the origin on points with ``F >= min_fidelity``.

    Returns ``(gamma, residual sum of squares)``.
    """
    points = [(float(s), float(F)) for s, F in points]
    if len(points) < 3:
        raise DegenerateInputError("need at least 3 (sigma, F) points")
    if any(not 0.0 < F <= 1.0 for _, F in points):
        raise ValueError("mean fidelities must lie in (0, 1]")
    kept = [(s, F) for s, F in points if F >= min_fidelity and s > 0]
    if not kept:
        raise DegenerateInputError(f"no points with sigma > 0 and F >= {min_fidelity}")
    gamma, _, rss = fit_through_origin([s * s for s, _ in kept], [-math.log(F) for _, F in kept])
    return gamma, rss


def sigma_at_fidelity(points, target: float = 0.5) -> float:
    """Sigma where the mean fidelity curve crosses ``target``.

    Interpolates ``ln(-ln F)`` linearly in ``ln sigma`` between the bracketing points.
    """
    pts = sorted((float(s), float(F)) for s, F in points if s > 0 and 0 < F < 1)
    for (s0, f0), (s1, f1) in zip(pts, pts[1:]):
        if f0 >= target >= f1:
            y0, y1 = math.log(-math.log(f0)), math.log(-math.log(f1))
            y = math.log(-math.log(target))
            t = 0.0 if y1 == y0 else (y - y0) / (y1 - y0)
            return math.exp(math.log(s0) + t * (math.log(s1) - math.log(s0)))
    raise DegenerateInputError(f"fidelity curve does not cross {target}")


def fit_line(x, y) -> tuple[float, float]:
    """Ordinary least-squares ``(slope, intercept)``."""
    slope, intercept = np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)
    return float(slope), float(intercept)


# --- summaries -------------------------------------------------------------

@dataclass(frozen=True)
class Summary:
    model: str
    category: str
    N: int
    L: int
    delta_L: int
    sigma: float
    mean: float
    se: float
    count: int


def summarize(records) -> list[Summary]:
    """Mean and standard error per (model, category, N, L, delta_L, sigma), in first-seen order."""
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.model, r.category, r.N, r.L, r.delta_L, r.sigma), []).append(r.fidelity)
    out = []
    for key, values in groups.items():
        v = np.asarray(values)
        se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        out.append(Summary(*key, mean=float(v.mean()), se=se, count=int(v.size)))
    return out


def gamma_table(records, min_fidelity: float = 0.5) -> list[tuple]:
    """``(model, category, N, delta_L, gamma, rss)`` per configuration; gamma is None if unfittable."""
    curves: dict[tuple, list] = {}
    for s in summarize(records):
        curves.setdefault((s.model, s.category, s.N, s.delta_L), []).append((s.sigma, s.mean))
    rows = []
    for key, pts in curves.items():
        try:
            gamma, rss = fit_gamma(pts, min_fidelity)
        except (DegenerateInputError, ValueError):
            gamma, rss = None, None
        rows.append((*key, gamma, rss))
    return rows


@dataclass(frozen=True)
class Band:
    j: int
    x: float
    mean: float
    low: float
    high: float
    count: int


def band_averages(records, j_range=range(3, 13)) -> list[Band]:
    """Averages of per-N means over the octaves ``2^j < N < 2^(j+1)``, plotted at ``2^(j+1/2)``."""
    per_n: dict[int, list[float]] = {}
    for r in records:
        per_n.setdefault(r.N, []).append(r.fidelity)
    means = {N: float(np.mean(v)) for N, v in per_n.items()}
    bands = []
    for j in j_range:
        vals = [F for N, F in sorted(means.items()) if 2**j < N < 2 ** (j + 1)]
        if vals:
            bands.append(Band(j, 2 ** (j + 0.5), float(np.mean(vals)), min(vals), max(vals), len(vals)))
    return bands


# --- Shor sigma sweep ------------------------------------------------------

def estimate_memory_bytes(n_qubits: int) -> int:
    """Working set of one Shor cell: noisy state, cached reference and a scratch copy."""
    return 3 * 16 * (1 << n_qubits)


def _shor_cell(cell):
    name, model, category, N, base, delta_L, sigma, realization, seed = cell
    spec = NoiseSpec(model, category, sigma, seed, realization)
    t0 = time.perf_counter()
    F = 1.0 if sigma == 0 else shor_run(N, base, delta_L, spec).fidelity
    return FidelityRecord(name, model.value, category.value, N, base, N.bit_length(), delta_L,
                          sigma, realization, F, time.perf_counter() - t0)


def run_sigma_sweep_shor(scenario: Scenario, workers: int | None = None) -> list[FidelityRecord]:
    for N in scenario.Ns:
        for d in scenario.delta_Ls:
            n = CircuitContext(N, scenario.base, d).n_qubits
            if n > LARGE_QUBITS and not scenario.allow_large:
                raise ValueError(
                    f"N={N}, delta_L={d} needs {n} qubits (~{estimate_memory_bytes(n) / 2**20:.0f} MiB); "
                    "set allow_large to run it")
    cells = [(scenario.name, m, c, N, scenario.base, d, sigma, r, cell_seed(scenario.master_seed, N))
             for N in scenario.Ns for d in scenario.delta_Ls for m, c in scenario.configs
             for sigma in scenario.sigmas for r in range(scenario.realizations)]
    return _map(_shor_cell, cells, workers)


# --- modulo-addition sweeps ------------------------------------------------

def _modadd_cell(cell):
    name, model, category, N, delta_L, sigma, realization, seed = cell
    spec = NoiseSpec(model, category, sigma, seed, realization)
    t0 = time.perf_counter()
    F = modadd_fidelity_sim(0, 0, N, delta_L, spec)
    return FidelityRecord(name, model.value, category.value, N, 0, N.bit_length(), delta_L,
                          sigma, realization, F, time.perf_counter() - t0)


def realizations_per_n(Ns, realizations: int, min_per_band: int) -> dict[int, int]:
    """Ensemble mode: enough realizations per N that every octave holds ``min_per_band`` samples."""
    counts: dict[int, int] = {}
    for N in Ns:
        j = N.bit_length() - 1
        counts[j] = counts.get(j, 0) + 1
    return {N: max(realizations, math.ceil(min_per_band / counts[N.bit_length() - 1])) for N in Ns}


def run_semiprime_sweep(scenario: Scenario, workers: int | None = None) -> list[FidelityRecord]:
    """Modulo-addition fidelity at ``s = a = 0`` for every N and sigma in the scenario."""
    reps = realizations_per_n(scenario.Ns, scenario.realizations, scenario.min_per_band)
    cells = [(scenario.name, m, c, N, d, sigma, r, cell_seed(scenario.master_seed, N))
             for m, c in scenario.configs for d in scenario.delta_Ls for sigma in scenario.sigmas
             for N in scenario.Ns for r in range(reps[N])]
    return _map(_modadd_cell, cells, workers)


def semiprime_scenario(limit: int = 2**13, lower: int = 8, **kw) -> Scenario:
    kw.setdefault("sigmas", (0.2,))
    kw.setdefault("configs", ((ErrorModel.RELATIVE, Category.TYPED_SYMMETRIC),
                              (ErrorModel.ABSOLUTE, Category.TYPED_SYMMETRIC)))
    Ns = tuple(N for N in enumerate_odd_semiprimes(limit) if N > lower)
    return Scenario(ScenarioKind.SEMIPRIME_SWEEP_MODADD, Ns=Ns, **kw)


def run_extra_qubit_sweep(scenario: Scenario, workers: int | None = None) -> list[FidelityRecord]:
    """Modulo-addition fidelity of ``N`` with ``delta_L`` spare register qubits."""
    return run_semiprime_sweep(scenario, workers)


def crude_overlay(N: int, delta_Ls, sigma: float, model=ErrorModel.RELATIVE, samples: int = 64,
                  master_seed: int = 0) -> list[tuple[int, float]]:
    """``(delta_L, F_s.s.)`` from the delta-peak model.

    The adder fidelity is the simulated mean at the minimal register size;
    extra register qubits leave R unchanged at the ideal output, so only
    ``x0 = N / 2^(L_min + delta_L)`` moves with ``delta_L``.
    """
    L = N.bit_length()
    rng = np.random.default_rng(master_seed)
    fs = []
    for r in range(samples):
        s, a = (int(v) for v in rng.integers(0, 2**L, 2))
        spec = NoiseSpec(model, Category.TYPED_SYMMETRIC, sigma, cell_seed(master_seed, N), r)
        fs.append(adder_fidelity_sim(s, a, L, spec))
    f_adder = float(np.mean(fs))
    return [(d, analytic.crude_extra_boost(f_adder, N, L, d)) for d in delta_Ls]


# --- localization of R -----------------------------------------------------

@dataclass(frozen=True)
class ProfileRecord:
    kind: str
    L: int
    sigma: float
    realization: int
    offset: int
    value: float


def r_profile(L: int, noise: AdderNoiseVector) -> tuple[np.ndarray, np.ndarray]:
    """Window-normalized ``|R(l)|^2`` for ``s = a = 0`` and ``N = 2^L - 1`` on ``|l - l_ideal| < 2^(L-1)``.

    Returns ``(offsets, weights)``.
    """
    N = 2**L - 1
    ideal = (-N) % 2 ** (L + 1)
    half = 2 ** (L - 1)
    offsets = np.arange(-half + 1, half)
    weights = np.array([abs(analytic.r_sum(0, 0, (ideal + int(d)) % 2 ** (L + 1), noise, minus=N)) ** 2
                        for d in offsets])
    return offsets, weights / weights.sum()


def discrete_p_remain(offsets, weights, L: int) -> float:
    """Window sum of ``cos^2(pi d / 2^L) |R|^2``, the finite-L counterpart of P_remain."""
    return float(np.sum(np.cos(np.pi * offsets / 2**L) ** 2 * weights))


def _r_cell(cell):
    L, sigma, realization, seed = cell
    spec = NoiseSpec(ErrorModel.RELATIVE, Category.TYPED_SYMMETRIC, sigma, seed, realization)
    offsets, w = r_profile(L, AdderNoiseVector.from_spec(spec, L))
    return offsets, w


def run_r_localization(scenario: Scenario, workers: int | None = None,
                       profile_L: int = 4, profile_sigma: float = 0.2,
                       cumulative_Ls=range(4, 11), cumulative_sigma: float = 0.01) -> list[ProfileRecord]:
    """|R|^2 profiles, cumulative curves and the convergence of the finite-L P_remain.

    Record kinds: ``profile`` (weight at each offset), ``cumulative`` (window
    mass within ``|d| <= offset``), ``p_remain`` (offset 0) and ``increment``
    (|P_L+1 - P_L|, stored at L).
    """
    seed = scenario.master_seed
    R = scenario.realizations
    cells = [(profile_L, profile_sigma, r, seed) for r in range(R)]
    cells += [(L, cumulative_sigma, r, seed) for L in cumulative_Ls for r in range(R)]
    results = _map(_r_cell, cells, workers)
    out = []
    for r, (offsets, w) in enumerate(results[:R]):
        out += [ProfileRecord("profile", profile_L, profile_sigma, r, int(d), float(v))
                for d, v in zip(offsets, w)]
    p_by_L: dict[int, list[float]] = {}
    for (L, sigma, r, _), (offsets, w) in zip(cells[R:], results[R:]):
        mags = np.abs(offsets)
        for d in range(int(mags.max()) + 1):
            out.append(ProfileRecord("cumulative", L, sigma, r, d, float(w[mags <= d].sum())))
        p = discrete_p_remain(offsets, w, L)
        p_by_L.setdefault(L, []).append(p)
        out.append(ProfileRecord("p_remain", L, sigma, r, 0, p))
    Ls = sorted(p_by_L)
    for L0, L1 in zip(Ls, Ls[1:]):
        for r in range(R):
            out.append(ProfileRecord("increment", L0, cumulative_sigma, r, 0,
                                     abs(p_by_L[L1][r] - p_by_L[L0][r])))
    return out


def increment_decay_slope(records) -> float:
    """Slope of ``ln(mean increment)`` against L; negative for exponential convergence."""
    inc: dict[int, list[float]] = {}
    for r in records:
        if r.kind == "increment":
            inc.setdefault(r.L, []).append(r.value)
    Ls = sorted(inc)
    if len(Ls) < 2:
        raise DegenerateInputError("need increments for at least two L")
    return fit_line(Ls, [math.log(np.mean(inc[L])) for L in Ls])[0]


# --- adder-level studies ---------------------------------------------------

def mean_adder_fidelity(L: int, spec: NoiseSpec, samples: int, seed: int = 0) -> float:
    """Mean adder fidelity over random ``(s, a)``; realization ``r`` serves sample ``r``."""
    rng = np.random.default_rng([seed, L])
    total = 0.0
    for r in range(samples):
        s, a = (int(v) for v in rng.integers(0, 2**L, 2))
        total += adder_fidelity_sim(s, a, L, spec.with_realization(r))
    return total / samples


def calibrate_eta(sigma: float, model=ErrorModel.RELATIVE, category=Category.TYPED_SYMMETRIC,
                  Ls=range(4, 11), samples: int = 200, master_seed: int = 7) -> tuple[float, float]:
    """``(eta, r_squared)`` from simulated mean adder fidelities over ``Ls``."""
    spec = NoiseSpec(model, category, sigma, master_seed)
    means = [(L, mean_adder_fidelity(L, spec, samples, master_seed)) for L in Ls]
    return analytic.fit_eta(means, return_r2=True)


def run_ratio_study(scenario: Scenario, L: int = 14, n_draws: int = 1000) -> list[dict]:
    """Extremes of the symmetric/non-typed adder infidelity ratio for each model and sigma."""
    rows = []
    for model in dict.fromkeys(m for m, _ in scenario.configs):
        for sigma in scenario.sigmas:
            if sigma == 0:
                continue
            lo, hi = analytic.ratio_extrema(L, sigma, model, n_draws=n_draws, seed=scenario.master_seed)
            rows.append({"model": model.value, "L": L, "sigma": sigma, "min": lo, "max": hi})
    return rows


def replay(record: FidelityRecord, master_seed: int) -> float:
    """Recompute one record's fidelity from its identifying fields."""
    spec = record.noise_spec(master_seed)
    if record.base:
        return 1.0 if record.sigma == 0 else shor_run(record.N, record.base, record.delta_L, spec).fidelity
    return modadd_fidelity_sim(0, 0, record.N, record.delta_L, spec)

"""End-to-end pipelines and the Monte Carlo benchmark harness.

Three methods are compared on every scene:

* ``MUSIC-CSR``      plain-residue pruning, then collaborative sparse
                     regression on the kept columns;
* ``RMUSIC-CSR``     robust-residue pruning, then the same regression;
* ``RMUSIC-DANSER``  robust pruning, regression as initializer, then
                     the dictionary-adjusted nonconvex solver.

A benchmark sweeps one axis (mismatch level, noise level, material
count, or kept-column count), runs seeded trials at every point, and
aggregates per method.  Trial t always uses seed ``base_seed + t``, so
the same scenes pair up across sweep points and across methods, and a
re-run with the same configuration reproduces the summary bit for bit.
"""

import concurrent.futures
import math
import os
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import danser as danser_mod
from .csr import CsrParams, csr_solve
from .danser import ACTIVITY_RATIO, DanserParams
from .errors import InputDataError, NumericalError
from .metrics import TrialOutcome, aggregate, detection, sre_db
from .mio import read_dictionary, write_json
from .pruning import RobustnessBudget, prune
from .simulate import SceneSpec, generate
from .subspace import estimate_subspace

METHODS = ("MUSIC-CSR", "RMUSIC-CSR", "RMUSIC-DANSER")
SWEEP_AXES = ("dmer_db", "snr_db", "materials", "keep")
WORKERS_ENV = "HSUNMIX_WORKERS"

# Noisy scenes get heavier sparsity weights.
_LOW_SNR_DB = 25.0
_LAM_DANSER = (0.5, 1.0)   # (clean, noisy)
_LAM_CSR = (0.1, 0.5)

_CSV_HEADER = (
    "sweep,value,method,trials,failures,detection_rate,"
    "detection_halfwidth,mean_sre_db,sre_halfwidth,"
    "mean_active_count,active_halfwidth"
)


@dataclass
class ExperimentConfig:
    """Benchmark settings; every field maps to one flat config key."""

    dictionary: str
    sweep: str = "dmer_db"
    values: tuple = (15.0, 20.0, 25.0, 30.0, 35.0, 40.0)
    trials: int = 50
    base_seed: int = 0
    materials: int = 8
    pixels: int = 5000
    dmer_db: float = 20.0
    snr_db: float = 35.0
    keep: int = 40
    alpha: float = 0.85
    order: int = None          # subspace order; defaults to materials
    lambda_danser: float = None  # None picks by noise level
    lambda_csr: float = None
    p: float = 0.5
    mu: float = 1e5
    tau: float = 1e-6
    danser_tol: float = 1e-5
    danser_max_iter: int = 5000
    csr_rho: float = 1.0
    csr_tol: float = 1e-5
    csr_max_iter: int = 2000

    def __post_init__(self):
        if self.sweep not in SWEEP_AXES:
            raise ValueError(
                f"sweep must be one of {SWEEP_AXES}; got {self.sweep!r}"
            )
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("values must be non-empty")
        if self.sweep in ("materials", "keep"):
            for v in values:
                if v != int(v) or v < 1:
                    raise ValueError(f"{self.sweep} sweep needs positive integers")
        self.values = values
        for name in ("trials", "base_seed", "materials", "pixels", "keep"):
            setattr(self, name, int(getattr(self, name)))
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.order is not None:
            self.order = int(self.order)
        if not 0.0 <= float(self.alpha) <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")


_BOOL_KEYS = ()
_INT_KEYS = (
    "trials", "base_seed", "materials", "pixels", "keep", "order",
    "danser_max_iter", "csr_max_iter",
)
_FLOAT_KEYS = (
    "dmer_db", "snr_db", "alpha", "lambda_danser", "lambda_csr", "p",
    "mu", "tau", "danser_tol", "csr_tol", "csr_rho",
)
_ALIASES = {"n": "materials", "lambda": "lambda_danser"}


def parse_config_text(text, source="<config>"):
    """Parse flat ``key = value`` lines (# starts a comment) into a
    mapping of raw strings."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputDataError(
                f"{source}, line {lineno}: expected 'key = value'"
            )
        key, value = line.split("=", 1)
        mapping[key.strip().lower()] = value.strip()
    return mapping


def config_from_mapping(mapping):
    """Build an ExperimentConfig from raw string values."""
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, value in mapping.items():
        key = _ALIASES.get(key, key)
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        if key == "values":
            kwargs[key] = tuple(float(v) for v in value.split(","))
        elif key in _INT_KEYS:
            kwargs[key] = int(value)
        elif key in _FLOAT_KEYS:
            kwargs[key] = float(value)
        else:
            kwargs[key] = value
    if "dictionary" not in kwargs:
        raise ValueError("config must set dictionary = <csv path>")
    return ExperimentConfig(**kwargs)


def load_config(path, overrides=None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputDataError(f"{path}: {exc}") from exc
    mapping = parse_config_text(text, source=str(path))
    for item in overrides or ():
        if "=" not in item:
            raise ValueError(f"override {item!r} must look like key=value")
        key, value = item.split("=", 1)
        mapping[key.strip().lower()] = value.strip()
    return config_from_mapping(mapping)


def effective_lambdas(config, snr_db):
    """Sparsity weights for a sweep point, honoring explicit settings."""
    noisy = math.isfinite(snr_db) and snr_db <= _LOW_SNR_DB
    lam_d = config.lambda_danser
    lam_c = config.lambda_csr
    if lam_d is None:
        lam_d = _LAM_DANSER[1] if noisy else _LAM_DANSER[0]
    if lam_c is None:
        lam_c = _LAM_CSR[1] if noisy else _LAM_CSR[0]
    return float(lam_d), float(lam_c)


def _point_params(config, value):
    """Scene/pruning parameters at one sweep point."""
    point = {
        "materials": config.materials,
        "dmer_db": config.dmer_db,
        "snr_db": config.snr_db,
        "keep": config.keep,
    }
    if config.sweep in ("materials", "keep"):
        point[config.sweep] = int(value)
    else:
        point[config.sweep] = float(value)
    return point


def _active_count(C):
    norms = np.linalg.norm(C, axis=1)
    top = norms.max() if norms.size else 0.0
    return int(np.count_nonzero(norms > ACTIVITY_RATIO * top))


def _embed(C_small, selected, size):
    full = np.zeros((size, C_small.shape[1]))
    full[selected] = C_small
    return full


def run_trial(library, config, value, seed):
    """All three methods on one scene; returns {method: TrialOutcome},
    mapping a method to None when its solver failed numerically."""
    point = _point_params(config, value)
    spec = SceneSpec(
        materials=point["materials"],
        pixels=config.pixels,
        dmer_db=point["dmer_db"],
        snr_db=point["snr_db"],
        seed=seed,
    )
    scene = generate(library, spec)
    K = scene.dictionary.size
    L = scene.Y.shape[1]
    keep = point["keep"]
    if keep > K:
        raise ValueError(f"keep={keep} exceeds library size {K}")
    order = config.order if config.order is not None else spec.materials
    lam_d, lam_c = effective_lambdas(config, point["snr_db"])
    csr_params = CsrParams(
        lam=lam_c, rho=config.csr_rho, tol=config.csr_tol,
        max_iter=config.csr_max_iter,
    )

    subspace = estimate_subspace(scene.Y, order)
    outcomes = {}

    def csr_branch(budget, label):
        t0 = time.perf_counter()
        pruned = prune(scene.dictionary, subspace, budget, keep=keep)
        result = csr_solve(scene.Y, pruned.pruned, csr_params)
        elapsed = time.perf_counter() - t0
        C_full = _embed(result.C, pruned.selected, K)
        outcomes[label] = TrialOutcome(
            sre_db=sre_db(scene.C, C_full),
            detected=detection(scene.truth_indices, pruned.selected),
            active_count=_active_count(result.C),
            runtime_s=elapsed,
        )
        return pruned, result, elapsed

    try:
        csr_branch(RobustnessBudget(0.0), "MUSIC-CSR")
    except NumericalError:
        outcomes["MUSIC-CSR"] = None

    try:
        budget = RobustnessBudget.from_alpha(config.alpha, scene.dictionary)
        pruned, init, t_init = csr_branch(budget, "RMUSIC-CSR")
    except NumericalError:
        outcomes["RMUSIC-CSR"] = None
        outcomes["RMUSIC-DANSER"] = None
        return outcomes

    try:
        t0 = time.perf_counter()
        params = DanserParams(
            lam=lam_d, p=config.p, mu=config.mu, tau=config.tau,
            epsilon=budget.epsilon, tol=config.danser_tol,
            max_iter=config.danser_max_iter,
        )
        result = danser_mod.solve(scene.Y, pruned.pruned, init.C, params)
        elapsed = t_init + (time.perf_counter() - t0)
        C_full = _embed(result.C, pruned.selected, K)
        outcomes["RMUSIC-DANSER"] = TrialOutcome(
            sre_db=sre_db(scene.C, C_full),
            detected=detection(scene.truth_indices, pruned.selected),
            active_count=int(result.active_rows.size),
            runtime_s=elapsed,
        )
    except NumericalError:
        outcomes["RMUSIC-DANSER"] = None
    return outcomes


def _trial_job(args):
    library, config, vi, value, ti, seed = args
    return vi, ti, run_trial(library, config, value, seed)


def resolve_workers(explicit=None):
    """Worker count: explicit argument, else the HSUNMIX_WORKERS
    environment variable, else 1."""
    if explicit is not None:
        n = int(explicit)
    else:
        raw = os.environ.get(WORKERS_ENV, "").strip()
        n = int(raw) if raw else 1
    if n < 1:
        raise ValueError("worker count must be >= 1")
    return n


def _fmt(value):
    return "%.17g" % float(value)


def summary_rows(config, results):
    """Aggregate trial results into CSV rows (list of strings, no
    header), one row per sweep value per method."""
    rows = []
    for vi, value in enumerate(config.values):
        for method in METHODS:
            outcomes = [
                results[(vi, ti)][method]
                for ti in range(config.trials)
            ]
            good = [o for o in outcomes if o is not None]
            failures = len(outcomes) - len(good)
            if good:
                s = aggregate(good)
                stats = (
                    s.detection_rate, s.detection_halfwidth, s.mean_sre_db,
                    s.sre_halfwidth, s.mean_active_count, s.active_halfwidth,
                )
            else:
                stats = (math.nan,) * 6
            rows.append(
                ",".join(
                    [config.sweep, _fmt(value), method,
                     str(len(good)), str(failures)]
                    + [_fmt(x) for x in stats]
                )
            )
    return rows


def run_benchmark(config, output_dir, workers=None):
    """Execute the full sweep and write ``summary.csv`` and
    ``run.json`` into the output directory.  Returns the summary rows."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    library = read_dictionary(config.dictionary)
    if config.keep > library.size:
        raise ValueError("keep exceeds the library size")
    workers = resolve_workers(workers)

    jobs = [
        (library, config, vi, value, ti, config.base_seed + ti)
        for vi, value in enumerate(config.values)
        for ti in range(config.trials)
    ]
    t0 = time.perf_counter()
    results = {}
    if workers == 1:
        for job in jobs:
            vi, ti, outcome = _trial_job(job)
            results[(vi, ti)] = outcome
    else:
        with concurrent.futures.ProcessPoolExecutor(workers) as pool:
            for vi, ti, outcome in pool.map(_trial_job, jobs, chunksize=1):
                results[(vi, ti)] = outcome
    wall = time.perf_counter() - t0

    rows = summary_rows(config, results)
    summary_path = output_dir / "summary.csv"
    summary_path.write_text("\n".join([_CSV_HEADER] + rows) + "\n")

    runtimes = {}
    for vi, value in enumerate(config.values):
        for method in METHODS:
            good = [
                results[(vi, ti)][method].runtime_s
                for ti in range(config.trials)
                if results[(vi, ti)][method] is not None
            ]
            key = f"{config.sweep}={value:g}/{method}"
            runtimes[key] = float(np.mean(good)) if good else math.nan
    meta = {
        "config": {
            f.name: (list(config.values) if f.name == "values"
                     else getattr(config, f.name))
            for f in fields(config)
        },
        "workers": workers,
        "wall_time_s": wall,
        "mean_runtime_s": runtimes,
    }
    write_json(output_dir / "run.json", meta)
    return rows

"""Monte-Carlo harness: system configuration, design runs, coherence
distributions, NMSE sweeps, and reproducible CSV/JSON artifacts.

Determinism contract: every random quantity is drawn from a generator seeded
with a spawn key [master_seed, cell_index, trial_index] (permutation draws
use [master_seed, m_x, draw_index]). Work is split into fixed-size trial
chunks that are reassembled by index, so results are byte-identical for any
worker count. CSV floats are written with 17 significant digits and LF line
endings; wall-clock time appears only in the manifest.
"""

import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np
import yaml

from .channel import build_dictionary, generate_channel
from .codebook import (
    BeamCodebook,
    DesignResult,
    PilotCodebook,
    _single_threaded_blas,
    combiner_codebook,
    partition_codebook,
    pilot_codebook,
    random_permutation_design,
    select_pilots_and_order,
)
from .estimator import OmpConfig, nmse, omp, reconstruct
from .sensing import build_system, measure

_TRIAL_CHUNK = 50
_DRAW_CHUNK = 500

_KINDS = ("proposed", "random_permutation", "random_config")
_SWEEP_KINDS = ("proposed", "random_config")
_AXES = ("snr", "m_x", "n_p")

NMSE_COLUMNS = (
    "axis", "value", "codebook", "m", "nmse", "nmse_db", "stderr", "trials", "seed",
)
DIST_COLUMNS = ("m_x", "kind", "draw", "mu")
TABLE1_COLUMNS = ("m_x", "proposed", "permutation_mean", "draws", "seed")

REPRODUCE_TARGETS = ("table1", "fig2", "fig3", "fig4", "fig5")


class ConfigError(ValueError):
    """A configuration value is invalid or inconsistent."""


def _round_half_up(x):
    return int(math.floor(x + 0.5))


@dataclass
class SystemConfig:
    """System geometry and Monte-Carlo settings.

    Grid sizes default to round-half-up(grid_multiplier * array size). The
    noise variance is fixed at 1, so SNR in dB maps to pilot power
    rho = 10^(snr_db/10).
    """

    n_t: int = 64
    n_r: int = 16
    l_t: int = 8
    l_r: int = 4
    grid_multiplier: float = 1.5
    g_t: int = None
    g_r: int = None
    m_x: int = 4
    n_p: int = 4
    snr_db: tuple = (-15.0, -10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    trials: int = 500
    master_seed: int = 12345
    b_ps: int = 6
    codebook_kind: str = "proposed"
    gain_variance: float = 1.0

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise ConfigError(f"array sizes must be positive, got {self.n_t}/{self.n_r}")
        if self.l_t < 1 or self.n_t % self.l_t != 0:
            raise ConfigError(f"l_t={self.l_t} must divide n_t={self.n_t}")
        if self.l_r < 1 or self.n_r % self.l_r != 0:
            raise ConfigError(f"l_r={self.l_r} must divide n_r={self.n_r}")
        if self.grid_multiplier < 1.0:
            raise ConfigError(f"grid_multiplier must be >= 1, got {self.grid_multiplier}")
        if self.g_t is None:
            self.g_t = _round_half_up(self.grid_multiplier * self.n_t)
        if self.g_r is None:
            self.g_r = _round_half_up(self.grid_multiplier * self.n_r)
        if self.g_t < self.n_t or self.g_r < self.n_r:
            raise ConfigError("grid sizes must be at least the array sizes")
        if not 1 <= self.m_x <= self.l_t:
            raise ConfigError(f"m_x={self.m_x} must be in 1..{self.l_t}")
        if self.n_p < 1:
            raise ConfigError(f"n_p must be positive, got {self.n_p}")
        if isinstance(self.snr_db, (int, float)):
            self.snr_db = (float(self.snr_db),)
        else:
            self.snr_db = tuple(float(v) for v in self.snr_db)
        if not self.snr_db:
            raise ConfigError("snr_db must not be empty")
        if self.trials < 1:
            raise ConfigError(f"trials must be positive, got {self.trials}")
        if self.b_ps < 1:
            raise ConfigError(f"b_ps must be positive, got {self.b_ps}")
        if self.codebook_kind not in _KINDS:
            raise ConfigError(
                f"codebook_kind must be one of {_KINDS}, got {self.codebook_kind!r}"
            )
        if self.gain_variance <= 0:
            raise ConfigError(f"gain_variance must be positive, got {self.gain_variance}")


_CONFIG_FIELDS = {f.name for f in fields(SystemConfig)}


def config_from_dict(data):
    unknown = sorted(set(data) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    return SystemConfig(**data)


def config_from_yaml(path):
    """Load a SystemConfig from a YAML file of field-name keys."""
    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    if not isinstance(data, dict):
        raise ConfigError("config file must be a mapping of field names to values")
    return config_from_dict(data)


def config_hash(config):
    blob = json.dumps(asdict(config), sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def resolve_workers(workers=None):
    """Worker count: explicit argument, else cpu count capped by the
    LOWCOH_MAX_WORKERS environment variable."""
    if workers is not None:
        return max(1, int(workers))
    avail = os.cpu_count() or 1
    cap = os.environ.get("LOWCOH_MAX_WORKERS")
    if cap is not None:
        return max(1, min(avail, int(cap)))
    return avail


_design_cache = {}


def _proposed_design(n_t, l_t, m_x, workers=None):
    key = (n_t, l_t, m_x)
    if key not in _design_cache:
        _design_cache[key] = select_pilots_and_order(n_t, l_t, m_x, workers=workers)
    return _design_cache[key]


def run_design(config, workers=None):
    """Design the codebook for config and return (DesignResult, report dict).

    The report is the JSON design artifact: ordering, pilot columns, and the
    achieved coherence.
    """
    t0 = time.monotonic()
    if config.codebook_kind == "random_config":
        raise ConfigError("random_config has no standalone design; run an NMSE sweep")
    if config.codebook_kind == "random_permutation":
        proposed = _proposed_design(config.n_t, config.l_t, config.m_x, workers)
        rng = np.random.default_rng([config.master_seed, config.m_x, 0])
        design = random_permutation_design(
            config.n_t, config.l_t, config.m_x, rng, pilot=proposed.pilot
        )
    else:
        design = _proposed_design(config.n_t, config.l_t, config.m_x, workers)
    report = {
        "n_t": config.n_t,
        "l_t": config.l_t,
        "m_x": config.m_x,
        "codebook_kind": config.codebook_kind,
        "ordering": [int(i) for i in design.precoder.ordering],
        "pilot_columns": [int(i) for i in design.pilot.selected],
        "coherence": float(design.coherence),
        "master_seed": config.master_seed,
        "wall_seconds": time.monotonic() - t0,
    }
    return design, report


def _permutation_chunk(args):
    n_t, l_t, m_x, selected, master_seed, start, stop = args
    pilot = pilot_codebook(l_t, selected)
    out = np.empty(stop - start)
    for d in range(start, stop):
        rng = np.random.default_rng([master_seed, m_x, d])
        out[d - start] = random_permutation_design(
            n_t, l_t, m_x, rng, pilot=pilot
        ).coherence
    return start, out


def run_coherence_distribution(config, draws=20000, workers=None):
    """Coherence of `draws` random permutations against the proposed design.

    Draw d uses the generator keyed [master_seed, m_x, d] and the proposed
    design's pilot subset, so the distribution isolates the column ordering.
    """
    if draws < 1:
        raise ConfigError(f"draws must be positive, got {draws}")
    proposed = _proposed_design(config.n_t, config.l_t, config.m_x, workers)
    tasks = [
        (
            config.n_t,
            config.l_t,
            config.m_x,
            proposed.pilot.selected,
            config.master_seed,
            start,
            min(start + _DRAW_CHUNK, draws),
        )
        for start in range(0, draws, _DRAW_CHUNK)
    ]
    nworkers = resolve_workers(workers)
    if nworkers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(
            max_workers=nworkers, initializer=_single_threaded_blas
        ) as pool:
            parts = list(pool.map(_permutation_chunk, tasks))
    else:
        parts = [_permutation_chunk(t) for t in tasks]
    samples = np.concatenate([p[1] for p in sorted(parts, key=lambda p: p[0])])
    return {
        "m_x": config.m_x,
        "draws": draws,
        "seed": config.master_seed,
        "proposed": float(proposed.coherence),
        "samples": samples,
        "mean": float(samples.mean()),
        "min": float(samples.min()),
        "max": float(samples.max()),
    }


def _random_unit_matrix(n, bits, rng):
    levels = 1 << bits
    k = rng.integers(0, levels, size=(n, n))
    return np.exp(2j * np.pi * k / levels)


def _random_configuration(params, rng):
    """Per-trial baseline: random b_ps-bit phase-shifter matrices for the
    precoder and combiner, random unit-modulus pilots, identity baseband.
    Draw order: precoder, combiner, pilots."""
    f = _random_unit_matrix(params["n_t"], params["b_ps"], rng)
    w = _random_unit_matrix(params["n_r"], params["b_ps"], rng)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(params["l_t"], params["m_x"]))
    vectors = np.exp(1j * phases)
    pilot = PilotCodebook(
        l_t=params["l_t"],
        selected=None,
        vectors=vectors,
        gram=np.conj(vectors) @ vectors.T,
    )
    design = DesignResult(
        pilot=pilot,
        precoder=BeamCodebook(n=params["n_t"], l=params["l_t"], ordering=None, matrix=f),
        coherence=float("nan"),
        s=None,
    )
    combiner = BeamCodebook(
        n=params["n_r"], l=params["l_r"], ordering=None, matrix=w
    )
    return design, combiner


# Per-process memo of cell setup (dictionaries and, for static codebooks, the
# assembled system); tasks of the same cell reuse it within a worker.
_setup_cache = {}


def _cell_setup(params_items, kind, payload):
    key = (params_items, kind, payload)
    if key not in _setup_cache:
        params = dict(params_items)
        at = build_dictionary(params["n_t"], params["g_t"])
        ar = build_dictionary(params["n_r"], params["g_r"])
        system = None
        if kind == "proposed":
            ordering, selected = payload
            design = DesignResult(
                pilot=pilot_codebook(params["l_t"], selected),
                precoder=partition_codebook(params["n_t"], params["l_t"], ordering),
                coherence=float("nan"),
                s=None,
            )
            combiner = combiner_codebook(params["n_r"], params["l_r"])
            system = build_system(design, combiner, at, ar)
        _setup_cache[key] = (at, ar, system)
    return _setup_cache[key]


def _sweep_cell_chunk(args):
    """One chunk of trials of one sweep cell. Trial t draws everything from
    the generator keyed [master_seed, cell_index, t]; for the random baseline
    the configuration is drawn before the channel and the noise after it."""
    params_items, kind, cell_index, start, stop, payload = args
    params = dict(params_items)
    at, ar, system = _cell_setup(params_items, kind, payload)
    rho = 10.0 ** (params["snr_db"] / 10.0)
    sigma2 = 1.0
    omp_config = OmpConfig(k=params["n_p"])
    errors = np.empty(stop - start)
    for t in range(start, stop):
        rng = np.random.default_rng([params["master_seed"], cell_index, t])
        if kind == "random_config":
            design, combiner = _random_configuration(params, rng)
            system = build_system(design, combiner, at, ar)
        channel = generate_channel(
            params["n_t"], params["n_r"], params["n_p"], rng, params["gain_variance"]
        )
        meas = measure(system, channel, rho, sigma2, rng)
        estimate = omp(system.equivalent, meas.y, omp_config)
        h_hat = reconstruct(estimate.h, at, ar, rho)
        errors[t - start] = nmse(channel.h, h_hat)
    return cell_index, start, errors


def _cell_params(config, sweep_axis, value):
    params = {
        "n_t": config.n_t,
        "n_r": config.n_r,
        "l_t": config.l_t,
        "l_r": config.l_r,
        "g_t": config.g_t,
        "g_r": config.g_r,
        "m_x": config.m_x,
        "n_p": config.n_p,
        "b_ps": config.b_ps,
        "gain_variance": config.gain_variance,
        "master_seed": config.master_seed,
        "snr_db": config.snr_db[0],
    }
    if sweep_axis == "snr":
        params["snr_db"] = float(value)
    elif sweep_axis == "m_x":
        params["m_x"] = int(value)
    elif sweep_axis == "n_p":
        params["n_p"] = int(value)
    return params


def run_nmse_sweep(config, sweep_axis, workers=None, kinds=_SWEEP_KINDS, axis_values=None):
    """Mean NMSE per (axis value, codebook kind) cell.

    Axis defaults: snr sweeps config.snr_db; m_x sweeps 1..l_t; n_p sweeps
    1..6. Non-snr sweeps require a single-element snr_db. Cells are numbered
    kind-major in enumeration order and that number keys the trial RNG, so
    the output is reproducible and independent of worker count.
    """
    if sweep_axis not in _AXES:
        raise ConfigError(f"sweep_axis must be one of {_AXES}, got {sweep_axis!r}")
    for kind in kinds:
        if kind not in _SWEEP_KINDS:
            raise ConfigError(f"NMSE sweeps support kinds {_SWEEP_KINDS}, got {kind!r}")
    if axis_values is None:
        if sweep_axis == "snr":
            axis_values = config.snr_db
        elif sweep_axis == "m_x":
            axis_values = tuple(range(1, config.l_t + 1))
        else:
            axis_values = (1, 2, 3, 4, 5, 6)
    if sweep_axis != "snr" and len(config.snr_db) != 1:
        raise ConfigError(
            f"sweeping {sweep_axis} needs a single snr_db value, got {config.snr_db}"
        )
    cells = [(kind, value) for kind in kinds for value in axis_values]
    tasks = []
    for cell_index, (kind, value) in enumerate(cells):
        params_items = tuple(sorted(_cell_params(config, sweep_axis, value).items()))
        payload = None
        if kind == "proposed":
            m_x_value = int(value) if sweep_axis == "m_x" else config.m_x
            design = _proposed_design(config.n_t, config.l_t, m_x_value, workers)
            payload = (design.precoder.ordering, design.pilot.selected)
        for start in range(0, config.trials, _TRIAL_CHUNK):
            stop = min(start + _TRIAL_CHUNK, config.trials)
            tasks.append((params_items, kind, cell_index, start, stop, payload))
    nworkers = resolve_workers(workers)
    if nworkers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(
            max_workers=nworkers, initializer=_single_threaded_blas
        ) as pool:
            parts = list(pool.map(_sweep_cell_chunk, tasks))
    else:
        parts = [_sweep_cell_chunk(t) for t in tasks]
    per_cell = {i: [] for i in range(len(cells))}
    for cell_index, start, errors in parts:
        per_cell[cell_index].append((start, errors))
    rows = []
    for cell_index, (kind, value) in enumerate(cells):
        chunks = sorted(per_cell[cell_index], key=lambda p: p[0])
        errors = np.concatenate([e for _, e in chunks])
        mean = float(errors.mean())
        stderr = (
            float(errors.std(ddof=1) / np.sqrt(len(errors))) if len(errors) > 1 else 0.0
        )
        params = _cell_params(config, sweep_axis, value)
        m = (config.n_t // config.l_t) * params["m_x"] * (config.n_r // config.l_r)
        rows.append(
            {
                "axis": sweep_axis,
                "value": float(value),
                "codebook": kind,
                "m": m,
                "nmse": mean,
                "nmse_db": 10.0 * math.log10(max(mean, 1e-300)),
                "stderr": stderr,
                "trials": config.trials,
                "seed": config.master_seed,
            }
        )
    return rows


def _fmt(value):
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def rows_to_csv(rows, columns):
    """Serialize dict rows to CSV text: fixed column order, 17 significant
    digits for floats, LF endings."""
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    return "\n".join(lines) + "\n"


def distribution_rows(dist):
    """Flatten a run_coherence_distribution result into CSV-ready rows:
    one row per sample plus proposed/mean/min/max marker rows (draw -1)."""
    rows = [
        {"m_x": dist["m_x"], "kind": "sample", "draw": d, "mu": float(mu)}
        for d, mu in enumerate(dist["samples"])
    ]
    for kind in ("proposed", "mean", "min", "max"):
        rows.append({"m_x": dist["m_x"], "kind": kind, "draw": -1, "mu": dist[kind]})
    return rows


def _feasible_mx(values, l_t):
    """Drop reproduction panels whose m_x exceeds l_t (small geometries)."""
    kept = tuple(m for m in values if m <= l_t)
    if not kept:
        raise ConfigError(f"l_t={l_t} is too small for any of the panels {values}")
    return kept


def _package_version():
    try:
        from importlib.metadata import version

        return version("lowcoh")
    except Exception:
        return "unknown"


def reproduce(target, config, workers=None, draws=20000):
    """Produce the artifact files for one reproduction target.

    Returns {filename: text}. Each target yields one CSV, the design JSON
    artifacts it relies on, and a manifest carrying the config, its sha256,
    and wall time (kept out of the CSVs so they stay byte-identical).
    """
    t0 = time.monotonic()
    if target not in REPRODUCE_TARGETS:
        raise ConfigError(
            f"unknown reproduce target {target!r}; expected one of {REPRODUCE_TARGETS}"
        )
    files = {}
    design_mx = ()
    if target == "table1":
        rows = []
        for m_x in range(1, config.l_t + 1):
            cfg = replace(config, m_x=m_x)
            design = _proposed_design(cfg.n_t, cfg.l_t, m_x, workers)
            dist = run_coherence_distribution(cfg, draws=draws, workers=workers)
            rows.append(
                {
                    "m_x": m_x,
                    "proposed": float(design.coherence),
                    "permutation_mean": dist["mean"],
                    "draws": draws,
                    "seed": config.master_seed,
                }
            )
        files["table1.csv"] = rows_to_csv(rows, TABLE1_COLUMNS)
        design_mx = tuple(range(1, config.l_t + 1))
    elif target == "fig2":
        design_mx = _feasible_mx((2, 7), config.l_t)
        rows = []
        for m_x in design_mx:
            cfg = replace(config, m_x=m_x)
            dist = run_coherence_distribution(cfg, draws=draws, workers=workers)
            rows.extend(distribution_rows(dist))
        files["fig2.csv"] = rows_to_csv(rows, DIST_COLUMNS)
    elif target == "fig3":
        design_mx = _feasible_mx((2, 4, 8), config.l_t)
        rows = []
        for m_x in design_mx:
            cfg = replace(config, m_x=m_x)
            rows.extend(run_nmse_sweep(cfg, "snr", workers=workers))
        files["fig3.csv"] = rows_to_csv(rows, NMSE_COLUMNS)
    elif target == "fig4":
        cfg = replace(config, snr_db=(15.0,))
        files["fig4.csv"] = rows_to_csv(run_nmse_sweep(cfg, "m_x", workers=workers), NMSE_COLUMNS)
        design_mx = tuple(range(1, config.l_t + 1))
    elif target == "fig5":
        cfg = replace(config, snr_db=(15.0,), m_x=4)
        files["fig5.csv"] = rows_to_csv(run_nmse_sweep(cfg, "n_p", workers=workers), NMSE_COLUMNS)
        design_mx = (4,)
    for m_x in design_mx:
        _, report = run_design(replace(config, m_x=m_x, codebook_kind="proposed"), workers)
        report.pop("wall_seconds")
        files[f"design_mx{m_x}.json"] = json.dumps(report, indent=2, sort_keys=True) + "\n"
    manifest = {
        "target": target,
        "config": asdict(config),
        "config_sha256": config_hash(config),
        "package_version": _package_version(),
        "wall_seconds": time.monotonic() - t0,
        "files": sorted(files),
    }
    files["manifest.json"] = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    return files


def write_files(files, out_dir):
    """Write reproduce() artifacts under out_dir with LF endings."""
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        path = os.path.join(out_dir, name)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    return sorted(files)

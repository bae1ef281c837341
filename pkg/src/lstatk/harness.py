"""Config-driven size and power experiments with CSV output.

Replications are the unit of parallelism: every replication derives
its own random streams from (master seed, experiment tag, cell, rep),
so results are bit-identical for any worker count.  Rejection counts
are integers and merge deterministically.
"""

from __future__ import annotations

import json
import math
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from multiprocessing import get_context
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from ._rng import substream
from .adaptive import bounded_component_pvalues, cauchy_combine, dyadic_grid
from .calibrate import BootstrapConfig, Smoothing, wild_bootstrap
from .competitors import com_test, max_test_from_stat
from .randgen import CoefficientSpec, CovarianceSpec, InnovationDistribution, factorize, simulate
from .reports import Method, TestReport
from .statcore import order_evidence, residualize, score_stats

__all__ = [
    "ExperimentSpec",
    "ResultRow",
    "ConfigError",
    "SizeGateError",
    "DESIGNS",
    "evaluate_methods",
    "run_size_experiment",
    "run_power_experiment",
    "emit_csv",
    "parse_csv",
    "run_manifest",
    "write_manifest",
]

# Design labels of the three innovation laws used in the studies.
DESIGNS = {
    "i": InnovationDistribution.STANDARD_NORMAL,
    "ii": InnovationDistribution.CENTERED_EXPONENTIAL,
    "iii": InnovationDistribution.SCALED_MIXTURE_NORMAL,
}

CSV_HEADER = "n,p,design,method,s,rejection_rate,mc_se,replications,B,wall_time_s"

# Replications per worker task; fixed so the task layout (and thus the
# result) never depends on the worker count.
_REP_CHUNK = 25

_BOOT_METHODS = frozenset({Method.CC, Method.SUM, Method.COM, Method.MAX_BOOT})

# Nearest doubles inside the open unit interval, for nudging p-values
# that rounded to an endpoint before Cauchy combination.
_OPEN_UNIT_LO = float(np.nextafter(0.0, 1.0))
_OPEN_UNIT_HI = float(np.nextafter(1.0, 0.0))


class ConfigError(ValueError):
    """Experiment specification failed validation."""


class SizeGateError(RuntimeError):
    """Empirical size grossly exceeds the nominal level."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Full description of one size or power study.

    ``s_list`` empty means a size study (all signal coefficients
    zero); non-empty lists sweep the signal cardinality with the
    squared signal norm held at ``signal_norm_sq``.
    """

    n_list: tuple[int, ...]
    p_list: tuple[int, ...]
    q: int = 5
    design_list: tuple[str, ...] = ("i",)
    rho: float = 0.7
    alpha: float = 0.05
    replications: int = 500
    B: int = 200
    s_list: tuple[int, ...] = ()
    signal_norm_sq: float = 0.8
    methods: tuple[Method, ...] = (
        Method.CC,
        Method.MAX,
        Method.MAX_BOOT,
        Method.SUM,
        Method.COM,
    )
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "n_list", tuple(int(v) for v in self.n_list))
        object.__setattr__(self, "p_list", tuple(int(v) for v in self.p_list))
        object.__setattr__(self, "design_list", tuple(self.design_list))
        object.__setattr__(self, "s_list", tuple(int(v) for v in self.s_list))
        object.__setattr__(
            self, "methods", tuple(Method(m) if not isinstance(m, Method) else m for m in self.methods)
        )
        if not self.n_list:
            raise ConfigError("n_list: must be non-empty")
        if not self.p_list:
            raise ConfigError("p_list: must be non-empty")
        if self.replications < 1:
            raise ConfigError(f"replications: must be >= 1, got {self.replications}")
        if self.B < 1:
            raise ConfigError(f"B: must be >= 1, got {self.B}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha: must lie in (0, 1), got {self.alpha}")
        if self.q < 0:
            raise ConfigError(f"q: must be >= 0, got {self.q}")
        if self.q >= min(self.n_list):
            raise ConfigError(
                f"q: must be smaller than min(n_list) = {min(self.n_list)}, got {self.q}"
            )
        for i, p in enumerate(self.p_list):
            if p <= self.q:
                raise ConfigError(f"p_list[{i}]: must exceed q = {self.q}, got {p}")
        for i, d in enumerate(self.design_list):
            if d not in DESIGNS:
                raise ConfigError(
                    f"design_list[{i}]: unknown design {d!r}, expected one of "
                    f"{sorted(DESIGNS)}"
                )
        for i, s in enumerate(self.s_list):
            if s < 1:
                raise ConfigError(f"s_list[{i}]: must be >= 1, got {s}")
            if s > min(self.p_list) - self.q:
                raise ConfigError(
                    f"s_list[{i}]: s = {s} exceeds min(p_list) - q = "
                    f"{min(self.p_list) - self.q}"
                )
        if self.s_list and self.signal_norm_sq <= 0:
            raise ConfigError(
                f"signal_norm_sq: must be > 0 for a power study, got {self.signal_norm_sq}"
            )
        if not self.methods:
            raise ConfigError("methods: must be non-empty")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError(
                f"methods: duplicate entries in {tuple(m.value for m in self.methods)}"
            )
        if not -1.0 < self.rho < 1.0:
            raise ConfigError(f"rho: must lie in (-1, 1), got {self.rho}")
        if self.workers < 1:
            raise ConfigError(f"workers: must be >= 1, got {self.workers}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed: must be >= 0, got {self.master_seed}")


@dataclass(frozen=True)
class ResultRow:
    """One aggregated cell of an experiment.

    ``s`` is None for size studies.  ``wall_time_seconds`` is a fixed
    0.0 placeholder in the deterministic row schema; measured wall
    time lives in the run manifest instead.
    """

    n: int
    p: int
    design: str
    method: Method
    s: int | None
    rejection_rate: float
    mc_standard_error: float
    replications: int
    B: int
    wall_time_seconds: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.rejection_rate <= 1.0:
            raise ValueError(
                f"rejection_rate: must lie in [0, 1], got {self.rejection_rate}"
            )


def evaluate_methods(
    rd,
    y: np.ndarray,
    x_a: np.ndarray,
    methods: Sequence[Method],
    alpha: float,
    config: BootstrapConfig,
    rng: np.random.Generator,
) -> dict[Method, TestReport]:
    """Run the requested methods on one dataset.

    All bootstrap-calibrated components (CC, SUM, MAX_BOOT, and the
    SUM half of COM) share a single unified bootstrap pass, so their
    p-values come from the same sign draws.
    """
    methods = tuple(methods)
    need = set(methods)
    m = rd.m
    reports: dict[Method, TestReport] = {}

    # The closed-form component is always computed through the direct
    # score route, so its p-value does not depend on which other
    # methods happen to be co-requested.
    p_max = None
    if Method.MAX in need or Method.COM in need:
        oe = order_evidence(score_stats(rd, y).W)
        stat_max, p_max = max_test_from_stat(float(oe.sorted_W[0]), m)
        if Method.MAX in need:
            reports[Method.MAX] = TestReport.from_p(
                Method.MAX, stat_max, p_max, alpha, meta={"calibration": "closed_form"}
            )

    if need & _BOOT_METHODS:
        ks: set[int] = set()
        cc_ks: tuple[int, ...] = ()
        if Method.CC in need:
            cc_ks = dyadic_grid(m).ks
            ks.update(cc_ks)
        if Method.SUM in need or Method.COM in need:
            ks.add(m)
        if Method.MAX_BOOT in need:
            ks.add(1)
        grid = sorted(ks)
        result = wild_bootstrap(rd, y, x_a, grid, config, rng)
        pos = {k: g for g, k in enumerate(result.grid)}
        if Method.CC in need:
            combo = cauchy_combine(
                bounded_component_pvalues(
                    [float(result.p_values[pos[k]]) for k in cc_ks], config.B
                ),
                labels=[f"k={k}" for k in cc_ks],
            )
            reports[Method.CC] = TestReport.from_p(
                Method.CC,
                combo.t_c,
                combo.p_c,
                alpha,
                meta={"B": config.B, "grid": cc_ks, "smoothing": config.smoothing.value},
            )
        if Method.MAX_BOOT in need:
            reports[Method.MAX_BOOT] = TestReport.from_p(
                Method.MAX_BOOT,
                float(result.l_obs[pos[1]]),
                float(result.p_values[pos[1]]),
                alpha,
                meta={"B": config.B},
            )
        if Method.SUM in need or Method.COM in need:
            p_sum = float(result.p_values[pos[m]])
            if Method.SUM in need:
                reports[Method.SUM] = TestReport.from_p(
                    Method.SUM,
                    float(result.l_obs[pos[m]]),
                    p_sum,
                    alpha,
                    meta={"B": config.B, "standin": True},
                )
            if Method.COM in need:
                # The combination demands p strictly inside (0, 1): the
                # bootstrap half can sit exactly at 1 (top add-one cell)
                # and the closed-form half can round to an endpoint at
                # extreme statistics.
                p_max_open = min(max(p_max, _OPEN_UNIT_LO), _OPEN_UNIT_HI)
                p_sum_open = float(bounded_component_pvalues([p_sum], config.B)[0])
                reports[Method.COM] = com_test(p_max_open, p_sum_open, alpha)
    return reports


def _rep_stream_path(kind: str, n: int, p: int, design: str, s: int | None, rep: int):
    s_part = 0 if s is None else int(s)
    return (kind, n, p, design, s_part, rep)


def _chunk_counts(
    spec: ExperimentSpec,
    kind: str,
    n: int,
    p: int,
    design: str,
    s: int | None,
    rep_start: int,
    rep_count: int,
) -> np.ndarray:
    """Rejection counts per method over one block of replications."""
    cov = CovarianceSpec.ar1(spec.rho, p)
    factor = factorize(cov)
    dist = DESIGNS[design]
    coef = CoefficientSpec(
        q=spec.q,
        s=0 if s is None else s,
        signal_norm_sq=0.0 if s is None else spec.signal_norm_sq,
        noise_sigma=1.0,
    )
    config = BootstrapConfig(B=spec.B, smoothing=Smoothing.ADD_ONE)
    counts = np.zeros(len(spec.methods), dtype=np.int64)
    with threadpool_limits(limits=1):
        for rep in range(rep_start, rep_start + rep_count):
            path = _rep_stream_path(kind, n, p, design, s, rep)
            data_rng = substream(spec.master_seed, *path, "data")
            boot_rng = substream(spec.master_seed, *path, "boot")
            ds = simulate(n, cov, dist, coef, data_rng, factor=factor)
            rd = residualize(ds.X[:, : spec.q], ds.X[:, spec.q :])
            reports = evaluate_methods(
                rd, ds.Y, ds.X[:, : spec.q], spec.methods, spec.alpha, config, boot_rng
            )
            for j, method in enumerate(spec.methods):
                counts[j] += bool(reports[method].reject)
    return counts


def _run_chunk_task(payload) -> tuple[int, np.ndarray]:
    index, spec, kind, cell, rep_start, rep_count = payload
    n, p, design, s = cell
    return index, _chunk_counts(spec, kind, n, p, design, s, rep_start, rep_count)


def _run_experiment(spec: ExperimentSpec, kind: str, s_values) -> list[ResultRow]:
    cells = [
        (n, p, design, s)
        for n in spec.n_list
        for p in spec.p_list
        for design in spec.design_list
        for s in s_values
    ]
    tasks = []
    for c, cell in enumerate(cells):
        for rep_start in range(0, spec.replications, _REP_CHUNK):
            rep_count = min(_REP_CHUNK, spec.replications - rep_start)
            tasks.append(
                (len(tasks), spec, kind, cell, rep_start, rep_count)
            )

    cell_counts = {cell: np.zeros(len(spec.methods), dtype=np.int64) for cell in cells}
    task_cell = {t[0]: t[3] for t in tasks}
    if spec.workers <= 1:
        results = map(_run_chunk_task, tasks)
    else:
        pool = ProcessPoolExecutor(
            max_workers=spec.workers, mp_context=get_context("spawn")
        )
        try:
            results = list(pool.map(_run_chunk_task, tasks, chunksize=1))
        finally:
            pool.shutdown()
    for index, counts in results:
        cell_counts[task_cell[index]] += counts

    rows = []
    for cell in cells:
        n, p, design, s = cell
        for j, method in enumerate(spec.methods):
            rate = cell_counts[cell][j] / spec.replications
            se = math.sqrt(rate * (1.0 - rate) / spec.replications)
            rows.append(
                ResultRow(
                    n=n,
                    p=p,
                    design=design,
                    method=method,
                    s=s,
                    rejection_rate=float(rate),
                    mc_standard_error=se,
                    replications=spec.replications,
                    B=spec.B,
                )
            )
    # Canonical order: identical to the CSV emitted from these rows.
    rows.sort(key=_row_sort_key)
    return rows


def run_size_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Empirical size of every requested method over the cell grid.

    Requires ``s_list`` empty.  Raises ``SizeGateError`` if any cell's
    size exceeds twice the nominal level by more than three Monte
    Carlo standard errors, which indicates an implementation
    regression rather than sampling noise.
    """
    if spec.s_list:
        raise ConfigError("s_list: must be empty for a size study")
    rows = _run_experiment(spec, "size", [None])
    _size_gate(rows, spec.alpha)
    return rows


def run_power_experiment(spec: ExperimentSpec) -> list[ResultRow]:
    """Empirical power over the cell grid and the s sweep."""
    if not spec.s_list:
        raise ConfigError("s_list: must be non-empty for a power study")
    return _run_experiment(spec, "power", list(spec.s_list))


def _size_gate(rows: Iterable[ResultRow], alpha: float) -> None:
    for row in rows:
        bound = 2.0 * alpha + 3.0 * row.mc_standard_error
        if row.rejection_rate > bound:
            raise SizeGateError(
                f"size {row.rejection_rate:.4f} for {row.method.value} at "
                f"(n={row.n}, p={row.p}, design={row.design}) exceeds "
                f"{bound:.4f} = 2*alpha + 3*SE"
            )


def _row_sort_key(row: ResultRow):
    return (
        row.n,
        row.p,
        row.design,
        row.method.value,
        -1 if row.s is None else row.s,
    )


def emit_csv(rows: Sequence[ResultRow], path) -> Path:
    """Write rows as UTF-8, LF-terminated CSV with 6-decimal rates.

    Rows are sorted by all key columns, so equal inputs give
    byte-identical files.
    """
    rows = list(rows)
    if not rows:
        raise ValueError("rows must be non-empty")
    path = Path(path)
    lines = [CSV_HEADER]
    for row in sorted(rows, key=_row_sort_key):
        s_cell = "" if row.s is None else str(row.s)
        lines.append(
            f"{row.n},{row.p},{row.design},{row.method.value},{s_cell},"
            f"{row.rejection_rate:.6f},{row.mc_standard_error:.6f},"
            f"{row.replications},{row.B},{row.wall_time_seconds:.6f}"
        )
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed writing results CSV to {path}: {exc}") from exc
    return path


def parse_csv(path) -> list[ResultRow]:
    """Parse a results CSV produced by ``emit_csv``."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"{path}: missing or unexpected header")
    rows = []
    for line in lines[1:]:
        cell = line.split(",")
        if len(cell) != 10:
            raise ValueError(f"{path}: malformed row {line!r}")
        rows.append(
            ResultRow(
                n=int(cell[0]),
                p=int(cell[1]),
                design=cell[2],
                method=Method(cell[3]),
                s=None if cell[4] == "" else int(cell[4]),
                rejection_rate=float(cell[5]),
                mc_standard_error=float(cell[6]),
                replications=int(cell[7]),
                B=int(cell[8]),
                wall_time_seconds=float(cell[9]),
            )
        )
    return rows


def run_manifest(spec: ExperimentSpec, wall_time_s: float, csv_path) -> dict:
    """Assemble the JSON manifest written alongside a results CSV."""
    import numpy
    import scipy

    try:
        from importlib.metadata import version

        package_version = version("artifact")
    except Exception:
        package_version = "unknown"
    payload = asdict(spec)
    payload["methods"] = [m.value for m in spec.methods]
    return {
        "experiment": payload,
        "master_seed": spec.master_seed,
        "results_csv": Path(csv_path).name,
        "versions": {
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "package": package_version,
        },
        "wall_time_s": wall_time_s,
    }


def write_manifest(manifest: dict, csv_path) -> Path:
    """Write the manifest next to its CSV and return the path."""
    csv_path = Path(csv_path)
    out = csv_path.with_suffix(".manifest.json")
    with open(out, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return out


def spec_field_names() -> tuple[str, ...]:
    """Names of all ExperimentSpec fields (for config validation)."""
    return tuple(f.name for f in fields(ExperimentSpec))

"""Monte Carlo experiment harness: declarative specs, seeded trials, CSV out.

A spec is a flat key=value text file (dotted section keys, ``#`` comments,
comma-separated lists). Every trial derives its own seed from the master
seed and the trial index, generates one channel realization, computes the
fully digital target once, and runs every requested algorithm against it,
so all algorithms within a trial are paired. Output is a CSV with a fixed
column order plus a JSON sidecar holding the spec and any solver errors.
"""

import csv
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .channels import ArrayGeometry, ChannelParams, generate_channels
from .core import (HybridConfig, approximation_residual,
                   combiner_targets, fully_digital_beamformer,
                   group_connected_solve, hardware_bill, spectral_efficiency)
from .dps import (MappingSets, dps_full_solve, dps_partial_solve,
                  dynamic_mapping_greedy, dynamic_mapping_kmeans)
from .fps import FpsProblem, fps_altmin, fps_bank_default
from .sps import (AltMinOptions, OmpCodebook, mo_altmin, omp_hybrid,
                  pe_relaxation, sps_partial_altmin)

__all__ = [
    "CSV_COLUMNS",
    "ExperimentSpec",
    "ExperimentResult",
    "ResultRow",
    "parse_spec_file",
    "parse_spec_text",
    "run",
    "sweep",
    "compare",
    "write_results",
    "read_results",
    "ALGORITHMS",
]

CSV_COLUMNS = ("algorithm", "structure", "sweep", "snr_db", "trial",
               "se_bps_hz", "residual", "iters", "ms",
               "phase_shifters", "switches")

SWEEP_VARIABLES = ("n_rf", "n_c", "eta", "snr")


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    structure: str
    sweep: str
    snr_db: float
    trial: str
    se_bps_hz: float
    residual: float
    iters: float
    ms: float
    phase_shifters: int
    switches: int

    def emit(self) -> List[str]:
        return [self.algorithm, self.structure, self.sweep,
                repr(self.snr_db), self.trial, repr(self.se_bps_hz),
                repr(self.residual), repr(self.iters), repr(self.ms),
                str(self.phase_shifters), str(self.switches)]

    @classmethod
    def parse(cls, record: Sequence[str]) -> "ResultRow":
        return cls(algorithm=record[0], structure=record[1], sweep=record[2],
                   snr_db=float(record[3]), trial=record[4],
                   se_bps_hz=float(record[5]), residual=float(record[6]),
                   iters=float(record[7]), ms=float(record[8]),
                   phase_shifters=int(record[9]), switches=int(record[10]))


# A full experiment result is the ordered row list (trial rows first,
# aggregate mean/stderr rows appended).
ExperimentResult = List[ResultRow]


@dataclass
class ExperimentSpec:
    config: HybridConfig
    channel: ChannelParams
    algorithms: List[str]
    snr_grid: List[float]
    trials: int = 10
    master_seed: int = 0
    sweep_variable: Optional[str] = None
    sweep_values: Optional[List[float]] = None
    output: str = "results.csv"
    algorithm_options: Dict[str, dict] = field(default_factory=dict)
    timing: bool = False
    threads: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for name in self.algorithms:
            if name not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}; known: "
                                 + ", ".join(sorted(ALGORITHMS)))
        if not self.snr_grid:
            raise ValueError("snr grid must be nonempty")
        if self.sweep_variable is not None:
            if self.sweep_variable not in SWEEP_VARIABLES:
                raise ValueError(f"unknown sweep variable "
                                 f"{self.sweep_variable!r}")
            if not self.sweep_values:
                raise ValueError("sweep values must be a nonempty list")
            for value in self.sweep_values:
                # Raises if either side's config is structurally invalid.
                self.config_for(value).receiver_view()
        else:
            self.config.receiver_view()

    def config_for(self, sweep_value=None) -> HybridConfig:
        """Config with the sweep variable substituted."""
        cfg = self.config
        if self.sweep_variable is None or sweep_value is None \
                or self.sweep_variable == "snr":
            return cfg
        kwargs = dict(
            n_t=cfg.n_t, n_r=cfg.n_r, k_users=cfg.k_users,
            subcarriers=cfg.subcarriers, n_s=cfg.n_s, n_rf_t=cfg.n_rf_t,
            n_rf_r=cfg.n_rf_r, mapping=cfg.mapping, eta=cfg.eta,
            implementation=cfg.implementation, n_c=cfg.n_c)
        if self.sweep_variable == "n_rf":
            kwargs["n_rf_t"] = int(sweep_value)
            kwargs["n_rf_r"] = int(sweep_value)
        elif self.sweep_variable == "n_c":
            kwargs["n_c"] = int(sweep_value)
        elif self.sweep_variable == "eta":
            kwargs["eta"] = int(sweep_value)
            kwargs["mapping"] = "fully" if int(sweep_value) == 1 else "group"
        return HybridConfig(**kwargs)


def _parse_value(token: str):
    token = token.strip()
    if "," in token:
        return [_parse_value(t) for t in token.split(",") if t.strip()]
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def parse_spec_text(text: str) -> ExperimentSpec:
    pairs: Dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"spec line {lineno}: expected 'key = value'")
        key, value = line.split("=", 1)
        pairs[key.strip()] = _parse_value(value)

    def take(key, default=None, required=False):
        if key in pairs:
            return pairs.pop(key)
        if required:
            raise ValueError(f"spec is missing required key {key!r}")
        return default

    def as_list(value):
        if value is None:
            return None
        return value if isinstance(value, list) else [value]

    config = HybridConfig(
        n_t=take("system.n_t", required=True),
        n_r=take("system.n_r", required=True),
        k_users=take("system.k_users", 1),
        subcarriers=take("system.subcarriers", 1),
        n_s=take("system.n_s", 1),
        n_rf_t=take("system.n_rf_t", required=True),
        n_rf_r=take("system.n_rf_r", required=True),
        mapping=take("system.mapping", "fully"),
        eta=take("system.eta", 1),
        implementation=take("system.implementation", "sps"),
        n_c=take("system.n_c", 10),
    )
    channel = ChannelParams(
        n_clusters=take("channel.n_clusters", 5),
        n_rays=take("channel.n_rays", 10),
        angle_spread_deg=take("channel.angle_spread_deg", 10.0),
        subcarriers=config.subcarriers,
        delay_taps=take("channel.delay_taps", 1),
        seed=0,
    )
    algorithms = [str(a) for a in as_list(take("algorithms", required=True))]
    snr_grid = [float(v) for v in
                as_list(take("snr_db", list(range(-15, 20, 5))))]
    sweep_variable = take("sweep.variable")
    sweep_values = as_list(take("sweep.values"))
    spec = ExperimentSpec(
        config=config,
        channel=channel,
        algorithms=algorithms,
        snr_grid=snr_grid,
        trials=int(take("trials", 10)),
        master_seed=int(take("seed", 0)),
        sweep_variable=sweep_variable,
        sweep_values=sweep_values,
        output=str(take("output.path", "results.csv")),
    )
    for key, value in pairs.items():
        if key.startswith("alg."):
            _, name, option = key.split(".", 2)
            spec.algorithm_options.setdefault(name, {})[option] = value
        else:
            raise ValueError(f"unknown spec key {key!r}")
    return spec


def parse_spec_file(path) -> ExperimentSpec:
    return parse_spec_text(Path(path).read_text())


# ---------------------------------------------------------------------------
# Algorithm registry
# ---------------------------------------------------------------------------

_OPTION_FIELDS = ("max_outer", "tol", "cg_steps", "armijo_c",
                  "backtrack_ratio", "max_backtracks")


def _make_options(options: dict, seed: int) -> AltMinOptions:
    kwargs = {k: options[k] for k in _OPTION_FIELDS if k in options}
    return AltMinOptions(seed=seed, **kwargs)


def _grouped(config: HybridConfig, solver: Callable) -> Callable:
    """Wrap a fully-connected solver through the group dispatcher."""
    def run_solver(f_opt, cfg, channels, side, options, seed):
        def inner(sub, n_rf, g):
            return solver(sub, n_rf, cfg, channels, side, options, seed + g)
        return group_connected_solve(f_opt, cfg, inner)
    return run_solver


def _alg_fully_digital(f_opt, config, channels, side, options, seed):
    return f_opt


def _mo_inner(sub, n_rf, config, channels, side, options, seed):
    return mo_altmin(sub, n_rf, _make_options(options, seed))


def _pe_inner(sub, n_rf, config, channels, side, options, seed):
    return pe_relaxation(sub, n_rf)


def _dps_inner(sub, n_rf, config, channels, side, options, seed):
    return dps_full_solve(sub, n_rf)


def _omp_inner_factory(rows=None):
    def inner(sub, n_rf, config, channels, side, options, seed):
        codebook = OmpCodebook.from_channels(
            channels, side=side,
            oversampled_grid=int(options.get("oversampled_grid", 0)))
        cand = codebook.candidates
        if rows is not None:
            cand = cand[rows]
            cand = cand / np.linalg.norm(cand, axis=0, keepdims=True)
            codebook = OmpCodebook(cand)
        return omp_hybrid(sub, codebook, n_rf)
    return inner


def _alg_omp(f_opt, config, channels, side, options, seed):
    if config.groups == 1:
        return _omp_inner_factory()(f_opt, config.n_rf_t, config, channels,
                                    side, options, seed)
    from .core import partition_indices
    row_groups = partition_indices(config.n_t, config.groups)

    def inner(sub, n_rf, g):
        return _omp_inner_factory(row_groups[g])(
            sub, n_rf, config, channels, side, options, seed + g)
    return group_connected_solve(f_opt, config, inner)


def _mappable(solver_inner):
    def run_solver(f_opt, config, channels, side, options, seed):
        if config.groups == 1:
            return solver_inner(f_opt, config.n_rf_t, config, channels, side,
                                options, seed)

        def inner(sub, n_rf, g):
            return solver_inner(sub, n_rf, config, channels, side, options,
                                seed + g)
        return group_connected_solve(f_opt, config, inner)
    return run_solver


def _alg_sps_partial(f_opt, config, channels, side, options, seed):
    return sps_partial_altmin(f_opt, config.n_rf_t,
                              _make_options(options, seed))


def _alg_dps_partial(f_opt, config, channels, side, options, seed):
    return dps_partial_solve(f_opt, MappingSets.contiguous(config.n_t,
                                                           config.n_rf_t))


def _alg_dps_greedy(f_opt, config, channels, side, options, seed):
    mapping = dynamic_mapping_greedy(f_opt, config.n_rf_t)
    return dps_partial_solve(f_opt, mapping)


def _alg_dps_kmeans(f_opt, config, channels, side, options, seed):
    mapping = dynamic_mapping_kmeans(f_opt, config.n_rf_t)
    return dps_partial_solve(f_opt, mapping)


def _alg_fps(f_opt, config, channels, side, options, seed):
    bank = fps_bank_default(int(options.get("n_c", config.n_c)))
    problem = FpsProblem(f_opt, bank, config.n_rf_t, config.groups)
    return fps_altmin(problem, _make_options(options, seed))


def _structure_for(name: str, config: HybridConfig) -> str:
    if name == "fully_digital":
        return "digital"
    native_partial = {"sps_partial": "sps", "dps_partial": "dps",
                      "dps_dynamic_greedy": "dps", "dps_dynamic_kmeans": "dps"}
    if name in native_partial:
        return f"{native_partial[name]}-partially"
    impl = {"omp": "sps", "mo_altmin": "sps", "pe_relaxation": "sps",
            "dps_full": "dps", "fps_altmin": "fps"}[name]
    mapping = config.mapping
    if mapping == "group":
        return f"{impl}-group{config.eta}"
    return f"{impl}-{mapping}"


def _bill_for(name: str, config: HybridConfig) -> Tuple[int, int]:
    if name == "fully_digital":
        return 0, 0
    native_partial = {"sps_partial": "sps", "dps_partial": "dps",
                      "dps_dynamic_greedy": "dps", "dps_dynamic_kmeans": "dps"}
    impl = native_partial.get(name)
    mapping = "partially"
    if impl is None:
        impl = {"omp": "sps", "mo_altmin": "sps", "pe_relaxation": "sps",
                "dps_full": "dps", "fps_altmin": "fps"}[name]
        mapping = config.mapping
    cfg = HybridConfig(
        n_t=config.n_t, n_r=config.n_r, k_users=config.k_users,
        subcarriers=config.subcarriers, n_s=config.n_s,
        n_rf_t=config.n_rf_t, n_rf_r=config.n_rf_r, mapping=mapping,
        eta=config.eta, implementation=impl, n_c=config.n_c)
    bill = hardware_bill(cfg)
    return bill.phase_shifters, bill.switches


ALGORITHMS: Dict[str, Callable] = {
    "fully_digital": _alg_fully_digital,
    "omp": _alg_omp,
    "mo_altmin": _mappable(_mo_inner),
    "pe_relaxation": _mappable(_pe_inner),
    "dps_full": _mappable(_dps_inner),
    "sps_partial": _alg_sps_partial,
    "dps_partial": _alg_dps_partial,
    "dps_dynamic_greedy": _alg_dps_greedy,
    "dps_dynamic_kmeans": _alg_dps_kmeans,
    "fps_altmin": _alg_fps,
}


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def _seed_for(*path: int) -> int:
    return int(np.random.SeedSequence(list(path)).generate_state(1)[0])


def _solve_and_evaluate(spec: ExperimentSpec, config: HybridConfig,
                        channels, f_opt, name: str, trial: int,
                        sweep_label: str, errors: List[dict]) -> List[ResultRow]:
    # Solver seeds deliberately exclude the sweep point so paired sweeps
    # differ only in the swept variable.
    options = spec.algorithm_options.get(name, {})
    alg_index = spec.algorithms.index(name)
    ps, sw = _bill_for(name, config)
    structure = _structure_for(name, config)
    started = time.perf_counter() if spec.timing else 0.0
    try:
        tx = ALGORITHMS[name](
            f_opt, config, channels, "tx", options,
            _seed_for(spec.master_seed, trial, alg_index, 0))
        if name == "fully_digital":
            combiners = combiner_targets(channels, f_opt, config)
            residual, iters = 0.0, 0.0
        else:
            rx_view = config.receiver_view()
            combiners = []
            for k, w_opt in enumerate(combiner_targets(channels, tx.product,
                                                       config)):
                combiners.append(ALGORITHMS[name](
                    w_opt, rx_view, channels, "rx", options,
                    _seed_for(spec.master_seed, trial, alg_index, 1 + k)))
            residual = approximation_residual(f_opt, tx)
            iters = float(tx.info.get("iterations", 0))
        elapsed = (time.perf_counter() - started) * 1e3 if spec.timing else 0.0
        rows = []
        for snr in spec.snr_grid:
            se = spectral_efficiency(channels, tx, combiners, snr, config)
            rows.append(ResultRow(
                algorithm=name, structure=structure, sweep=sweep_label,
                snr_db=float(snr), trial=str(trial), se_bps_hz=se,
                residual=residual, iters=iters, ms=elapsed,
                phase_shifters=ps, switches=sw))
        return rows
    except Exception as exc:  # recorded, run continues
        errors.append({"trial": trial, "algorithm": name,
                       "sweep": sweep_label, "error": str(exc)})
        return [ResultRow(algorithm=name, structure=structure,
                          sweep=sweep_label, snr_db=float(snr),
                          trial=str(trial), se_bps_hz=float("nan"),
                          residual=float("nan"), iters=0.0, ms=0.0,
                          phase_shifters=ps, switches=sw)
                for snr in spec.snr_grid]


def _run_trial(spec: ExperimentSpec, trial: int,
               sweep_points: List[Tuple[str, Optional[float]]],
               errors: List[dict]) -> List[ResultRow]:
    chan_params = ChannelParams(
        n_clusters=spec.channel.n_clusters,
        n_rays=spec.channel.n_rays,
        angle_spread_deg=spec.channel.angle_spread_deg,
        subcarriers=spec.channel.subcarriers,
        delay_taps=spec.channel.delay_taps,
        seed=_seed_for(spec.master_seed, trial))
    tx_geom = ArrayGeometry(count=spec.config.n_t)
    rx_geom = ArrayGeometry(count=spec.config.n_r)
    channels = generate_channels(chan_params, tx_geom, rx_geom,
                                 spec.config.k_users)
    f_opt = fully_digital_beamformer(channels, spec.config)
    rows: List[ResultRow] = []
    for label, value in sweep_points:
        config = spec.config_for(value)
        grid_spec = spec
        if spec.sweep_variable == "snr" and value is not None:
            grid_spec = _with_grid(spec, [float(value)])
        for name in spec.algorithms:
            rows.extend(_solve_and_evaluate(
                grid_spec, config, channels, f_opt, name, trial, label,
                errors))
    return rows


def _with_grid(spec: ExperimentSpec, grid: List[float]) -> ExperimentSpec:
    clone = ExperimentSpec(
        config=spec.config, channel=spec.channel,
        algorithms=spec.algorithms, snr_grid=grid, trials=spec.trials,
        master_seed=spec.master_seed, sweep_variable=spec.sweep_variable,
        sweep_values=spec.sweep_values, output=spec.output,
        algorithm_options=spec.algorithm_options, timing=spec.timing,
        threads=spec.threads)
    return clone


def _limit_blas_threads():
    try:
        from threadpoolctl import threadpool_limits
        return threadpool_limits(limits=1)
    except ImportError:
        import contextlib
        return contextlib.nullcontext()


def _execute(spec: ExperimentSpec,
             sweep_points: List[Tuple[str, Optional[float]]]) -> Tuple[List[ResultRow], List[dict]]:
    spec.validate()
    errors: List[dict] = []
    with _limit_blas_threads():
        if spec.threads > 1:
            with ThreadPoolExecutor(max_workers=spec.threads) as pool:
                per_trial = list(pool.map(
                    lambda t: _run_trial(spec, t, sweep_points, errors),
                    range(spec.trials)))
        else:
            per_trial = [_run_trial(spec, t, sweep_points, errors)
                         for t in range(spec.trials)]
    rows = [row for trial_rows in per_trial for row in trial_rows]
    rows.sort(key=lambda r: (r.algorithm, r.sweep, r.snr_db, int(r.trial)))
    rows.extend(_aggregate(rows))
    errors.sort(key=lambda e: (e["trial"], e["algorithm"], e["sweep"]))
    return rows, errors


def _aggregate(rows: List[ResultRow]) -> List[ResultRow]:
    groups: Dict[tuple, List[ResultRow]] = {}
    for row in rows:
        groups.setdefault((row.algorithm, row.sweep, row.snr_db), []).append(row)
    out = []
    for (alg, sweep_label, snr), members in sorted(groups.items()):
        se = np.array([m.se_bps_hz for m in members])
        res = np.array([m.residual for m in members])
        its = np.array([m.iters for m in members])
        ms = np.array([m.ms for m in members])
        n = len(members)
        stderr = float(np.std(se, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
        base = members[0]
        out.append(ResultRow(alg, base.structure, sweep_label, snr, "mean",
                             float(np.mean(se)), float(np.mean(res)),
                             float(np.mean(its)), float(np.mean(ms)),
                             base.phase_shifters, base.switches))
        out.append(ResultRow(alg, base.structure, sweep_label, snr, "stderr",
                             stderr, 0.0, 0.0, 0.0,
                             base.phase_shifters, base.switches))
    return out


def write_results(rows: List[ResultRow], path, spec: ExperimentSpec,
                  errors: Optional[List[dict]] = None) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.emit())
    sidecar = {
        "spec": {
            "config": asdict(spec.config),
            "channel": asdict(spec.channel),
            "algorithms": spec.algorithms,
            "snr_grid": spec.snr_grid,
            "trials": spec.trials,
            "master_seed": spec.master_seed,
            "sweep_variable": spec.sweep_variable,
            "sweep_values": spec.sweep_values,
            "algorithm_options": spec.algorithm_options,
        },
        "version": _version_tag(),
        "errors": errors or [],
    }
    path.with_suffix(path.suffix + ".meta.json").write_text(
        json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def _version_tag() -> str:
    import subprocess
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).parent)
        if out.returncode == 0:
            return out.stdout.strip()
    except Exception:
        pass
    from importlib.metadata import version, PackageNotFoundError
    try:
        return "hybeam-" + version("hybeam")
    except PackageNotFoundError:
        return "hybeam-unknown"


def read_results(path) -> List[ResultRow]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV schema in {path}")
        return [ResultRow.parse(record) for record in reader]


def run(spec: ExperimentSpec, out: Optional[str] = None) -> List[ResultRow]:
    """Execute the spec without a sweep; writes CSV + sidecar, returns rows."""
    rows, errors = _execute(spec, [("", None)])
    write_results(rows, out or spec.output, spec, errors)
    return rows


def sweep(spec: ExperimentSpec, out: Optional[str] = None) -> List[ResultRow]:
    """Execute the spec once per sweep value with shared channels per trial."""
    if spec.sweep_variable is None or not spec.sweep_values:
        raise ValueError("sweep requires sweep.variable and sweep.values")
    points = [(_sweep_label(v), v) for v in spec.sweep_values]
    rows, errors = _execute(spec, points)
    write_results(rows, out or spec.output, spec, errors)
    return rows


def _sweep_label(value) -> str:
    if isinstance(value, float) and value.is_integer():
        return repr(int(value))
    return repr(value)


def compare(paths: Sequence, out=None) -> str:
    """Join result files on (sweep, snr) and tabulate mean-SE deltas.

    Works from the aggregate ``mean`` rows. When every file carries the
    same algorithm set, deltas are per algorithm against the first file;
    when each file carries exactly one algorithm, the single series are
    compared directly.
    """
    tables = []
    for path in paths:
        rows = [r for r in read_results(path) if r.trial == "mean"]
        table: Dict[tuple, Dict[str, ResultRow]] = {}
        for row in rows:
            table.setdefault((row.sweep, row.snr_db), {})[row.algorithm] = row
        if not table:
            raise ValueError(f"{path} has no aggregate rows")
        tables.append(table)

    keys = set(tables[0])
    for table in tables[1:]:
        keys &= set(table)
    if not keys:
        raise ValueError("result files share no (sweep, snr) points; "
                         "cannot join")

    algsets = [frozenset(a for cell in t.values() for a in cell)
               for t in tables]
    shared = algsets[0]
    per_algorithm = all(s == shared for s in algsets)
    single = all(len(s) == 1 for s in algsets)
    if not (per_algorithm or single):
        raise ValueError("ambiguous comparison: files have differing "
                         "multi-algorithm sets")

    names = [Path(p).stem for p in paths]
    lines = []
    if per_algorithm:
        header = ["sweep", "snr_db", "algorithm"]
        header += [f"se[{n}]" for n in names]
        header += [f"delta[{n}]" for n in names[1:]]
        header += [f"ps[{n}]" for n in names] + [f"sw[{n}]" for n in names]
        lines.append(",".join(header))
        for key in sorted(keys):
            for alg in sorted(shared):
                cells = [t[key].get(alg) for t in tables]
                if any(c is None for c in cells):
                    continue
                se = [c.se_bps_hz for c in cells]
                record = [key[0], repr(key[1]), alg]
                record += [repr(v) for v in se]
                record += [repr(v - se[0]) for v in se[1:]]
                record += [str(c.phase_shifters) for c in cells]
                record += [str(c.switches) for c in cells]
                lines.append(",".join(record))
    else:
        header = ["sweep", "snr_db"]
        header += [f"se[{n}]" for n in names]
        header += [f"delta[{n}]" for n in names[1:]]
        header += [f"ps[{n}]" for n in names] + [f"sw[{n}]" for n in names]
        lines.append(",".join(header))
        for key in sorted(keys):
            cells = [next(iter(t[key].values())) for t in tables]
            se = [c.se_bps_hz for c in cells]
            record = [key[0], repr(key[1])]
            record += [repr(v) for v in se]
            record += [repr(v - se[0]) for v in se[1:]]
            record += [str(c.phase_shifters) for c in cells]
            record += [str(c.switches) for c in cells]
            lines.append(",".join(record))

    text = "\n".join(lines) + "\n"
    if out is not None:
        Path(out).write_text(text)
    return text

"""Seeded experiment harness: Ising ensembles, single-instance reports,
3SAT angle sweeps and perturbative overlap sweeps.

Every run is a pure function of its :class:`ExperimentConfig`. Ensemble
member ``i`` uses ``derive_seed(cfg.seed, i)``, so members can be rerun in
isolation and identical configs give byte-identical outputs.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from typing import Any

import numpy as np

from . import anneal, dynamics, perturbation, steering
from .models import (
    GenerationError,
    IsingInstance,
    deserialize_instance,
    derive_seed,
    gen_ising,
    gen_unique_3sat,
    ground_state_of_diagonal,
    ising_hamiltonian,
    sat_hamiltonian,
    satisfying_assignments,
    spins_of,
)

log = logging.getLogger(__name__)

KINDS = ("ising-ensemble", "instance-report", "sat-sweep", "pert-sweep")
DEMO_INSTANCE = "demo_instance.json"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    n: int = 8
    seed: int = 0
    thetas: tuple[float, ...] = (0.0, 1.0)  # units of omega(n)
    t_totals: tuple[float, ...] = (5.0, 10.0, 15.0, 20.0)
    ds: float = 0.01
    ensemble_size: int = 100
    errors: tuple[int, ...] = (0,)
    lg: tuple[int, ...] = ()
    h_mean: float = 0.01
    W: float = 0.05
    J_s: float = 1.0
    steered_theta: float = 1.0
    k_levels: int = 4
    norm: str = "spectral"
    compare_norms: bool = False
    refine_gap: bool = False
    method: str = "taylor"
    schedule: str = "linear"
    instance_file: str | None = None
    max_attempts: int = 10_000
    generation_retries: int = 5
    s_star: float = 0.3
    correct_lg: int = 7
    sum_stats: str = "reference"
    validity_n: int = 8
    validity_s_star: tuple[float, ...] = (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45)
    out_dir: str = "results"
    formats: tuple[str, ...] = ("csv", "json")
    plot: bool = True

    def __post_init__(self):
        for name in ("thetas", "t_totals", "errors", "lg", "validity_s_star", "formats"):
            value = getattr(self, name)
            if isinstance(value, (str, bytes)) or not hasattr(value, "__iter__"):
                raise ConfigError(f"{name} must be a list")
            object.__setattr__(self, name, tuple(value))
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.n < 2:
            raise ConfigError("n must be at least 2")
        if self.kind != "pert-sweep" and self.n > 12:
            raise ConfigError(f"n={self.n} exceeds the dense simulation cap of 12")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be positive")
        if any(t <= 0 for t in self.t_totals):
            raise ConfigError("anneal times must be positive")
        steps = round(1 / self.ds) if self.ds > 0 else 0
        if steps < 1 or abs(steps * self.ds - 1) > 1e-9:
            raise ConfigError(f"ds={self.ds} must divide [0, 1] evenly")
        if self.norm not in ("spectral", "frobenius"):
            raise ConfigError(f"unknown norm {self.norm!r}")
        if self.method not in ("eigh", "taylor"):
            raise ConfigError(f"unknown method {self.method!r}")
        if self.schedule not in ("linear", "optimal", "both"):
            raise ConfigError(f"unknown schedule {self.schedule!r}")
        if self.sum_stats not in ("reference", "fitted"):
            raise ConfigError(f"unknown sum_stats {self.sum_stats!r}")
        if not set(self.formats) <= {"csv", "json"}:
            raise ConfigError(f"unknown formats {self.formats}")
        if self.kind in ("ising-ensemble", "sat-sweep") and 0.0 not in self.thetas:
            raise ConfigError("theta list must include 0 (the direct anneal baseline)")
        if self.kind == "ising-ensemble" and self.steered_theta not in self.thetas:
            raise ConfigError("steered_theta must be one of the thetas")
        if self.kind == "sat-sweep":
            if len(self.lg) != 1:
                raise ConfigError("sat-sweep needs exactly one guess length")
            if any(not 0 <= e <= self.lg[0] for e in self.errors):
                raise ConfigError("error counts must lie in [0, L_g]")
            if self.lg[0] > self.n:
                raise ConfigError("guess length exceeds n")
        if not 0 <= self.s_star < 1:
            raise ConfigError("s_star must lie in [0, 1)")

    def to_dict(self) -> dict:
        return {f.name: (list(v) if isinstance(v := getattr(self, f.name), tuple) else v)
                for f in dataclasses.fields(self)}

    @property
    def hash(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


DEFAULTS: dict[str, dict[str, Any]] = {
    "ising-ensemble": {},
    "instance-report": {"thetas": (0.0, -0.6, 0.6, 1.0), "t_totals": (15.0,), "refine_gap": True,
                        "method": "eigh", "ensemble_size": 1},
    "sat-sweep": {"thetas": tuple(round(0.05 * i, 2) for i in range(15)), "t_totals": (10.0,),
                  "errors": (0, 1, 2, 3), "lg": (3,)},
    "pert-sweep": {"n": 35, "thetas": (0.0, 0.3, 0.8, 1.0), "errors": (0, 1), "ensemble_size": 20},
}


def make_config(kind: str, **overrides) -> ExperimentConfig:
    """Config with kind-specific defaults; ``None`` overrides are ignored."""
    if kind not in KINDS:
        raise ConfigError(f"unknown experiment kind {kind!r}")
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = set(overrides) - known
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    values = {**DEFAULTS[kind], **{k: v for k, v in overrides.items() if v is not None}}
    values.pop("kind", None)
    try:
        return ExperimentConfig(kind=kind, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class EnsembleResult:
    kind: str
    config: dict
    config_hash: str
    records: list[dict]
    aggregates: dict
    tables: dict[str, dict] = field(default_factory=dict)  # name -> {"columns", "rows"}

    @property
    def seed(self) -> int:
        return int(self.config["seed"])

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "EnsembleResult":
        return cls(**json.loads(text))


def _table(columns, rows) -> dict:
    return {"columns": list(columns), "rows": [list(r) for r in rows]}


def _stats(values) -> dict:
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if len(v) == 0:
        return {"n": 0, "mean": None, "std": None, "stderr": None, "median": None}
    std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
    return {"n": int(len(v)), "mean": float(v.mean()), "std": std,
            "stderr": std / math.sqrt(len(v)), "median": float(np.median(v))}


def _f(x) -> float | None:
    return None if x is None else float(x)


# -- Ising ensemble -----------------------------------------------------------

def _ising_record(cfg: ExperimentConfig, index: int) -> dict:
    seed = derive_seed(cfg.seed, index)
    inst = gen_ising(cfg.n, cfg.h_mean, cfg.W, cfg.J_s, seed)
    H_f = ising_hamiltonian(inst)
    gs, _, degeneracy = ground_state_of_diagonal(H_f)
    psi = steering.highest_field_guess(inst)
    site = int(np.flatnonzero(psi)[0])
    correct, _ = steering.guess_accuracy(psi, gs)
    per_theta = []
    traces = {}
    for u in cfg.thetas:
        path = anneal.AnnealPath.steered(H_f, steering.theta_vector(psi, u * steering.omega(cfg.n)))
        trace = anneal.spectrum_trace(path, min(cfg.k_levels, path.dim), cfg.ds)
        traces[u] = trace
        profile = anneal.adiabatic_time_profile(path, trace, cfg.norm, refine=cfg.refine_gap)
        entry = {
            "theta_units": float(u),
            "min_gap_s": profile.min_gap[0],
            "min_gap": profile.min_gap[1],
            "T_ad_total": anneal.total_adiabatic_time(profile),
            "divergent": profile.divergent,
            "P_f": [dynamics.evolve(path, T, cfg.ds, method=cfg.method, track_instantaneous=False).P_f
                    for T in cfg.t_totals],
        }
        if cfg.compare_norms:
            other = "frobenius" if cfg.norm == "spectral" else "spectral"
            entry[f"T_ad_total_{other}"] = anneal.total_adiabatic_time(
                anneal.adiabatic_time_profile(path, trace, other))
        per_theta.append(entry)
    direct = next(e for e in per_theta if e["theta_units"] == 0.0)
    steered = next(e for e in per_theta if e["theta_units"] == cfg.steered_theta)
    try:
        r_delta = anneal.gap_improvement_ratio(traces[cfg.steered_theta], traces[0.0])
    except ZeroDivisionError:
        r_delta = None
    R = [dynamics.probability_improvement_ratio(ps, pd) if pd > 0 else None
         for ps, pd in zip(steered["P_f"], direct["P_f"])]
    return {
        "index": index, "seed": seed, "guess_site": site, "guess_value": int(psi[site]),
        "guess_correct": bool(correct == 1), "gs_index": int(gs), "gs_degeneracy": int(degeneracy),
        "thetas": per_theta, "R_delta": _f(r_delta), "R": R,
    }


def aggregate_ising(records: list[dict], config: dict) -> dict:
    """Ensemble statistics; recomputable from the per-instance records alone.

    R_delta is summarised over correctly guessed instances. Outliers are
    those with R_delta above 10x the median (none when the median is not
    positive); trimmed statistics drop them.
    """
    thetas = [float(u) for u in config["thetas"]]
    t_totals = [float(T) for T in config["t_totals"]]
    good = [r for r in records if r["guess_correct"]]
    rd = [(r["index"], r["R_delta"]) for r in good if r["R_delta"] is not None]
    full = _stats([v for _, v in rd])
    med = full["median"]
    outliers = [i for i, v in rd if med is not None and med > 0 and v > 10 * med]
    trimmed = _stats([v for i, v in rd if i not in outliers])

    def theta_entry(r, u):
        return next(e for e in r["thetas"] if e["theta_units"] == u)

    def p_table(subset):
        rows = []
        for u in thetas:
            for k, T in enumerate(t_totals):
                s = _stats([theta_entry(r, u)["P_f"][k] for r in subset])
                rows.append({"theta_units": u, "T": T, "mean": s["mean"], "stderr": s["stderr"], "n": s["n"]})
        return rows

    steered = float(config["steered_theta"])
    ratios = []
    for k, T in enumerate(t_totals):
        ps = _stats([theta_entry(r, steered)["P_f"][k] for r in good])["mean"]
        pd = _stats([theta_entry(r, 0.0)["P_f"][k] for r in good])["mean"]
        ratios.append({"T": T, "ratio": None if not pd else ps / pd})
    return {
        "n_instances": len(records),
        "n_correct": len(good),
        "accuracy": len(good) / len(records) if records else None,
        "R_delta": {**full, "outlier_rule": "R_delta > 10 * median", "outliers": outliers,
                    "trimmed": trimmed},
        "P_f_correct": p_table(good),
        "P_f_all": p_table(records),
        "P_ratio_correct": ratios,
        "divergent_counts": {str(u): sum(theta_entry(r, u)["divergent"] for r in records) for u in thetas},
    }


def _ising_tables(records, cfg: ExperimentConfig, agg: dict) -> dict:
    cols = ["index", "seed", "guess_correct", "theta_units", "min_gap_s", "min_gap", "T_ad_total",
            "divergent", *[f"P_f_T{T:g}" for T in cfg.t_totals], "R_delta"]
    rows = []
    for r in records:
        for e in r["thetas"]:
            rows.append([r["index"], r["seed"], r["guess_correct"], e["theta_units"], e["min_gap_s"],
                         e["min_gap"], e["T_ad_total"], e["divergent"], *e["P_f"], r["R_delta"]])
    p_rows = [[d["theta_units"], d["T"], d["mean"], d["stderr"], d["n"]] for d in agg["P_f_correct"]]
    return {"instances": _table(cols, rows),
            "success_vs_T": _table(["theta_units", "T", "mean_P_f", "stderr_P_f", "n"], p_rows)}


def run_ising_ensemble(cfg: ExperimentConfig) -> EnsembleResult:
    if cfg.kind != "ising-ensemble":
        raise ConfigError(f"expected an ising-ensemble config, got {cfg.kind}")
    records = []
    for i in range(cfg.ensemble_size):
        records.append(_ising_record(cfg, i))
        log.debug("ising instance %d done", i)
    cd = cfg.to_dict()
    agg = aggregate_ising(records, cd)
    return EnsembleResult(cfg.kind, cd, cfg.hash, records, agg, _ising_tables(records, cfg, agg))


def heuristic_accuracy(n: int, n_instances: int, seed: int = 0, h_mean: float = 0.01,
                       W: float = 0.05, J_s: float = 1.0) -> float:
    """Fraction of instances whose highest-field guess matches the true ground state."""
    hits = 0
    for i in range(n_instances):
        inst = gen_ising(n, h_mean, W, J_s, derive_seed(seed, i))
        gs, _, _ = ground_state_of_diagonal(ising_hamiltonian(inst))
        hits += steering.guess_accuracy(steering.highest_field_guess(inst), gs)[0]
    return hits / n_instances


# -- single-instance report ---------------------------------------------------

def load_demo_instance() -> IsingInstance:
    text = resources.files("steered_qa").joinpath("data", DEMO_INSTANCE).read_text()
    return deserialize_instance(text)


def _report_instance(cfg: ExperimentConfig) -> IsingInstance:
    if cfg.instance_file:
        with open(cfg.instance_file) as fh:
            inst = deserialize_instance(fh.read())
        if not isinstance(inst, IsingInstance):
            raise ConfigError("instance-report needs an Ising instance")
        return inst
    return load_demo_instance()


def analyse_instance(inst: IsingInstance, cfg: ExperimentConfig, psi=None):
    """Traces, schedules and evolutions of one instance for every theta in ``cfg``.

    Returns ``(records, tables, meta)``; ``psi`` defaults to the highest-field
    guess. A divergent path is only flagged, unless ``cfg.schedule`` asks for
    optimal-schedule evolution alone, which raises ``DivergentScheduleError``.
    """
    H_f = ising_hamiltonian(inst)
    gs, _, degeneracy = ground_state_of_diagonal(H_f)
    psi = steering.highest_field_guess(inst) if psi is None else steering.as_guess(psi)
    schedules = ("linear", "optimal") if cfg.schedule == "both" else (cfg.schedule,)
    records, tables = [], {}
    sched_cols, sched_rows = ["theta_units", "tau", "s"], []
    for u in cfg.thetas:
        path = anneal.AnnealPath.steered(H_f, steering.theta_vector(psi, u * steering.omega(inst.n)))
        trace = anneal.spectrum_trace(path, min(cfg.k_levels, path.dim), cfg.ds)
        profile = anneal.adiabatic_time_profile(path, trace, cfg.norm, refine=cfg.refine_gap)
        tag = f"theta{u:+g}"
        k = trace.levels.shape[1]
        tables[f"spectrum_{tag}"] = _table(
            ["s", *[f"lambda_{i}" for i in range(k)], "gap", "T_ad", "t_of_s"],
            [[s, *trace.levels[j], trace.gap[j], profile.T_ad[j], profile.t_of_s[j]]
             for j, s in enumerate(trace.s_grid)])
        if not profile.divergent:
            profile = anneal.optimal_schedule(profile)
            sched_rows += [[float(u), float(t), float(s)] for t, s in zip(profile.tau_grid, profile.s_of_t)]
        rec = {"theta_units": float(u), "grid_min_gap_s": anneal.min_gap(trace)[0],
               "grid_min_gap": anneal.min_gap(trace)[1], "min_gap_s": profile.min_gap[0],
               "min_gap": profile.min_gap[1], "divergent": profile.divergent,
               "T_ad_total": anneal.total_adiabatic_time(profile), "P_f": {}}
        for kind in schedules:
            if kind == "optimal" and profile.divergent:
                if cfg.schedule == "optimal":
                    # optimal-only evolution was requested and cannot be run
                    raise anneal.DivergentScheduleError(
                        f"theta={u:g} Omega: gap closes, no finite optimal schedule")
                rec["P_f"][kind] = [None for _ in cfg.t_totals]
                continue
            sched = profile if kind == "optimal" else "linear"
            P = []
            for T in cfg.t_totals:
                ev = dynamics.evolve(path, T, cfg.ds, sched, method=cfg.method)
                P.append(ev.P_f)
                tables[f"evolution_{tag}_{kind}_T{T:g}"] = _table(
                    ["s", "instantaneous_overlap", "final_gs_probability"],
                    [[s, ev.instantaneous_gs_overlap[j], ev.final_gs_probability_trace[j]]
                     for j, s in enumerate(ev.s_grid)])
            rec["P_f"][kind] = P
        records.append(rec)
    tables["schedules"] = _table(sched_cols, sched_rows)
    meta = {"gs_index": int(gs), "gs_degeneracy": int(degeneracy), "guess": [int(v) for v in psi],
            "guess_correct": steering.guess_accuracy(psi, gs)[1] == 0}
    return records, tables, meta


def run_instance_report(cfg: ExperimentConfig) -> EnsembleResult:
    if cfg.kind != "instance-report":
        raise ConfigError(f"expected an instance-report config, got {cfg.kind}")
    inst = _report_instance(cfg)
    if inst.n != cfg.n:
        cfg = dataclasses.replace(cfg, n=inst.n)
    records, tables, meta = analyse_instance(inst, cfg)
    first = cfg.schedule if cfg.schedule != "both" else "linear"
    order = sorted(records, key=lambda r: r["theta_units"])
    agg = {**meta, "instance_meta": dict(inst.meta),
           "P_f_schedule": first,
           "P_f_by_theta": {str(r["theta_units"]): r["P_f"][first][0] for r in order},
           "divergent_thetas": [r["theta_units"] for r in order if r["divergent"]],
           "T_ad_total_by_theta": {str(r["theta_units"]): r["T_ad_total"] for r in order}}
    return EnsembleResult(cfg.kind, cfg.to_dict(), cfg.hash, records, agg, tables)


def demo_instance_checks(inst: IsingInstance, cfg: ExperimentConfig | None = None) -> dict[str, bool]:
    """Qualitative checks used to pick the golden demo instance.

    The guess must be correct, the Theta=Omega gap must dominate the direct
    gap on s >= 0.4, Theta=-0.6 Omega must close the gap (refined), T_ad must
    shrink with steering and final probabilities must be ordered
    P(Omega) > P(0.6 Omega) > P(0) > P(-0.6 Omega).
    """
    cfg = cfg or make_config("instance-report", method="taylor")
    H_f = ising_hamiltonian(inst)
    gs, _, _ = ground_state_of_diagonal(H_f)
    psi = steering.highest_field_guess(inst)
    checks = {"guess_correct": steering.guess_accuracy(psi, gs)[1] == 0}
    if not checks["guess_correct"]:
        return checks
    om = steering.omega(inst.n)
    paths = {u: anneal.AnnealPath.steered(H_f, steering.theta_vector(psi, u * om)) for u in (0.0, -0.6, 0.6, 1.0)}
    traces = {u: anneal.spectrum_trace(p, 2, cfg.ds) for u, p in paths.items()}
    late = traces[0.0].s_grid >= 0.4 - 1e-12
    checks["gap_widening"] = bool(np.all(traces[1.0].gap[late] >= traces[0.0].gap[late]))
    prof = {u: anneal.adiabatic_time_profile(paths[u], traces[u], refine=(u < 0)) for u in paths}
    checks["disrecommend_divergent"] = prof[-0.6].divergent
    checks["T_ad_ordering"] = (not prof[1.0].divergent and not prof[0.0].divergent
                               and prof[1.0].T_total < prof[0.0].T_total)
    if not all(checks.values()):
        return checks
    T = cfg.t_totals[0]
    P = {u: dynamics.evolve(p, T, cfg.ds, method=cfg.method, track_instantaneous=False).P_f
         for u, p in paths.items()}
    checks["P_ordering"] = P[1.0] > P[0.6] > P[0.0] > P[-0.6]
    return checks


def find_demo_seed(start: int = 0, max_seeds: int = 500, n: int = 8, h_mean: float = 0.01,
                   W: float = 0.05, J_s: float = 1.0) -> int:
    """First seed (scanning upward from ``start``) passing :func:`demo_instance_checks`."""
    for seed in range(start, start + max_seeds):
        checks = demo_instance_checks(gen_ising(n, h_mean, W, J_s, seed))
        log.info("seed %d: %s", seed, checks)
        if all(checks.values()) and len(checks) == 5:
            return seed
    raise GenerationError(f"no demo instance found in seeds {start}..{start + max_seeds - 1}")


# -- 3SAT sweep ------------------------------------------------------------------

def _sat_instance(cfg: ExperimentConfig, index: int):
    base = derive_seed(cfg.seed, index)
    for attempt in range(cfg.generation_retries):
        seed = base if attempt == 0 else derive_seed(base, attempt)
        try:
            return seed, gen_unique_3sat(cfg.n, seed, cfg.max_attempts)
        except GenerationError:
            log.info("3SAT generation failed for seed %d, retrying", seed)
    raise GenerationError(f"instance {index}: {cfg.generation_retries} generation attempts exhausted")


def _sat_records(cfg: ExperimentConfig, index: int) -> list[dict]:
    seed, inst = _sat_instance(cfg, index)
    H_f = sat_hamiltonian(inst)
    solution = int(satisfying_assignments(inst)[0])
    L_g = cfg.lg[0]
    om = steering.omega(cfg.n)
    guess_seed = derive_seed(seed, 1)
    out = []
    for T in cfg.t_totals:
        def prob(theta):
            path = anneal.AnnealPath.steered(H_f, theta)
            return dynamics.evolve(path, T, cfg.ds, method=cfg.method, track_instantaneous=False).P_f
        p_direct = prob(np.zeros(cfg.n))
        for e in cfg.errors:
            psi = steering.guess_from_solution(solution, cfg.n, L_g, e, guess_seed)
            P = [p_direct if u == 0.0 else prob(steering.theta_vector(psi, u * om)) for u in cfg.thetas]
            out.append({"index": index, "seed": seed, "n_clauses": len(inst.clauses), "solution": solution,
                        "T": float(T), "n_errors": int(e), "guess": [int(v) for v in psi],
                        "P_f": P, "R": [dynamics.probability_improvement_ratio(p, p_direct) for p in P]})
    return out


def aggregate_sat(records: list[dict], config: dict) -> dict:
    thetas = [float(u) for u in config["thetas"]]
    curves = []
    for T in sorted({r["T"] for r in records}):
        for e in sorted({r["n_errors"] for r in records}):
            R = np.array([r["R"] for r in records if r["T"] == T and r["n_errors"] == e], dtype=float)
            mean = R.mean(axis=0)
            var = R.var(axis=0, ddof=1) if len(R) > 1 else np.zeros_like(mean)
            j = int(np.argmax(mean))
            curves.append({"T": T, "n_errors": e, "n": len(R), "mean_R": mean.tolist(),
                           "var_R": var.tolist(), "stderr_R": np.sqrt(var / len(R)).tolist(),
                           "argmax_theta_units": thetas[j], "max_mean_R": float(mean[j])})
    return {"thetas": thetas, "curves": curves}


def run_sat_sweep(cfg: ExperimentConfig) -> EnsembleResult:
    if cfg.kind != "sat-sweep":
        raise ConfigError(f"expected a sat-sweep config, got {cfg.kind}")
    records = []
    for i in range(cfg.ensemble_size):
        records += _sat_records(cfg, i)
        log.debug("3SAT instance %d done", i)
    cd = cfg.to_dict()
    agg = aggregate_sat(records, cd)
    curve_rows = [[c["T"], c["n_errors"], u, m, v, s]
                  for c in agg["curves"]
                  for u, m, v, s in zip(agg["thetas"], c["mean_R"], c["var_R"], c["stderr_R"])]
    traj_rows = [[r["index"], r["seed"], r["T"], r["n_errors"], u, p, R]
                 for r in records for u, p, R in zip(cfg.thetas, r["P_f"], r["R"])]
    tables = {"curves": _table(["T", "n_errors", "theta_units", "mean_R", "var_R", "stderr_R"], curve_rows),
              "trajectories": _table(["index", "seed", "T", "n_errors", "theta_units", "P_f", "R"], traj_rows)}
    return EnsembleResult(cfg.kind, cd, cfg.hash, records, agg, tables)


# -- perturbative sweep ----------------------------------------------------------

def run_pert_sweep(cfg: ExperimentConfig) -> EnsembleResult:
    """Target overlap against guess length and against guess correctness,
    plus the analytic-vs-exact validity scan at small ``n``."""
    if cfg.kind != "pert-sweep":
        raise ConfigError(f"expected a pert-sweep config, got {cfg.kind}")
    n = cfg.n
    fitted = perturbation.fit_sum_stats(n, cfg.h_mean, cfg.W, cfg.J_s, 2000, cfg.seed)
    stats = perturbation.REFERENCE_SUM_STATS if cfg.sum_stats == "reference" else fitted
    lgs = list(cfg.lg) if cfg.lg else list(range(1, n + 1))
    draws = cfg.ensemble_size

    rows_lg = []
    for e in cfg.errors:
        mean, err = perturbation.overlap_vs_guess_length(
            n, cfg.s_star, cfg.thetas, lgs, e, stats, draws, cfg.seed)
        for a, u in enumerate(cfg.thetas):
            for b, lg in enumerate(lgs):
                if lg >= e:
                    rows_lg.append([lg, lg / n, float(u), int(e), float(mean[a, b]), float(err[a, b])])

    rows_nc = []
    L_g = min(cfg.correct_lg, n)
    mean, err = perturbation.overlap_vs_correct(n, L_g, cfg.s_star, cfg.thetas, None, stats, draws, cfg.seed)
    for a, u in enumerate(cfg.thetas):
        for nc in range(L_g + 1):
            rows_nc.append([nc, L_g, float(u), L_g - nc, float(mean[a, nc]), float(err[a, nc])])

    rows_val = []
    m = cfg.validity_n
    overlaps = np.empty((draws, len(cfg.validity_s_star)))
    for i in range(draws):
        inst = gen_ising(m, cfg.h_mean, cfg.W, cfg.J_s, derive_seed(cfg.seed, i))
        theta = steering.theta_vector(steering.highest_field_guess(inst), steering.omega(m))
        overlaps[i] = [perturbation.validate_against_exact(inst, theta, s) for s in cfg.validity_s_star]
    for j, s in enumerate(cfg.validity_s_star):
        st = _stats(overlaps[:, j])
        rows_val.append([float(s), st["mean"], st["stderr"]])

    records = [{"index": i, "seed": derive_seed(cfg.seed, i), "validity_overlaps": overlaps[i].tolist()}
               for i in range(draws)]
    agg = {"sum_stats_used": dataclasses.asdict(stats), "sum_stats_fitted": dataclasses.asdict(fitted),
           "sum_stats_reference": dataclasses.asdict(perturbation.REFERENCE_SUM_STATS),
           "validity_mean": [r[1] for r in rows_val]}
    tables = {
        "vs_guess_length": _table(["L_g", "L_g_over_N", "theta_units", "n_errors", "mean_P", "stderr_P"], rows_lg),
        "vs_correct": _table(["n_correct", "L_g", "theta_units", "n_errors", "mean_P", "stderr_P"], rows_nc),
        "validity": _table(["s_star", "mean_overlap", "stderr_overlap"], rows_val),
    }
    return EnsembleResult(cfg.kind, cfg.to_dict(), cfg.hash, records, agg, tables)


RUNNERS = {
    "ising-ensemble": run_ising_ensemble,
    "instance-report": run_instance_report,
    "sat-sweep": run_sat_sweep,
    "pert-sweep": run_pert_sweep,
}


def run(cfg: ExperimentConfig) -> EnsembleResult:
    return RUNNERS[cfg.kind](cfg)


# -- output ----------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def emit_outputs(result: EnsembleResult, out_dir: str | None = None,
                 formats: tuple[str, ...] | None = None, plot: bool | None = None) -> list[str]:
    """Write the result as JSON, one CSV per table and (optionally) SVG figures.

    Arguments default to the values stored in the result's config. Every
    file carries the config hash and master seed: CSVs in a leading comment
    line, SVGs in their metadata. Returns the written paths.
    """
    import csv
    import os

    out_dir = result.config["out_dir"] if out_dir is None else out_dir
    formats = tuple(result.config["formats"]) if formats is None else formats
    plot = result.config["plot"] if plot is None else plot
    os.makedirs(out_dir, exist_ok=True)
    stem = result.kind.replace("-", "_")
    written = []
    if "json" in formats:
        path = os.path.join(out_dir, f"{stem}.json")
        with open(path, "w") as fh:
            fh.write(result.to_json() + "\n")
        written.append(path)
    if "csv" in formats:
        for name, table in result.tables.items():
            path = os.path.join(out_dir, f"{stem}_{name}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(f"# config_hash={result.config_hash} seed={result.seed}\n")
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(table["columns"])
                w.writerows([_cell(v) for v in row] for row in table["rows"])
            written.append(path)
    if plot:
        from . import plotting

        written += plotting.render(result, out_dir, stem)
    return written

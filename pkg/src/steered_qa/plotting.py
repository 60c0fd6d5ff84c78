"""SVG figures for experiment results (matplotlib, headless)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp keep SVG output reproducible
plt.rcParams["svg.hashsalt"] = "steered-qa"


def _columns(table: dict) -> dict[str, np.ndarray]:
    rows = table["rows"]
    out = {}
    for j, name in enumerate(table["columns"]):
        col = [r[j] for r in rows]
        try:
            out[name] = np.array([np.nan if v is None else v for v in col], dtype=float)
        except (TypeError, ValueError):
            out[name] = np.array(col, dtype=object)
    return out


def _theta_label(u: float) -> str:
    return "direct" if u == 0 else rf"$\Theta={u:g}\,\Omega$"


def _save(fig, path: str, description: str) -> str:
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": description})
    plt.close(fig)
    return path


def plot_ising_ensemble(result, out_dir: str, stem: str, tag: str) -> list[str]:
    c = _columns(result.tables["success_vs_T"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for u in dict.fromkeys(c["theta_units"]):
        m = c["theta_units"] == u
        ax.errorbar(c["T"][m], c["mean_P_f"][m], yerr=c["stderr_P_f"][m], marker="o", capsize=3,
                    label=_theta_label(u))
    ax.set_xlabel("anneal time T")
    ax.set_ylabel("mean final ground-state probability")
    ax.set_title("correctly guessed instances")
    ax.legend()
    paths = [_save(fig, os.path.join(out_dir, f"{stem}_success_vs_T.svg"), tag)]

    good = [r for r in result.records if r["guess_correct"] and r["R_delta"] is not None]
    if good:
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.hist([r["R_delta"] for r in good], bins=30)
        ax.set_xlabel(r"$R_\Delta$")
        ax.set_ylabel("instances")
        paths.append(_save(fig, os.path.join(out_dir, f"{stem}_gap_ratio_hist.svg"), tag))
    return paths


def plot_instance_report(result, out_dir: str, stem: str, tag: str) -> list[str]:
    paths = []
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for rec in result.records:
        u = rec["theta_units"]
        c = _columns(result.tables[f"spectrum_theta{u:+g}"])
        ax.semilogy(c["s"], np.maximum(c["gap"], 1e-16), label=_theta_label(u))
    ax.set_xlabel("s")
    ax.set_ylabel("gap")
    ax.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_gaps.svg"), tag))

    fig, ax = plt.subplots(figsize=(5, 3.5))
    c = _columns(result.tables["schedules"])
    for u in dict.fromkeys(c["theta_units"]):
        m = c["theta_units"] == u
        ax.plot(c["tau"][m], c["s"][m], label=_theta_label(u))
    ax.set_xlabel("t / T_ad")
    ax.set_ylabel("s")
    ax.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_schedules.svg"), tag))

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for name, table in result.tables.items():
        if not name.startswith("evolution_"):
            continue
        c = _columns(table)
        ax.plot(c["s"], c["instantaneous_overlap"], label=name.removeprefix("evolution_"))
    ax.set_xlabel("s")
    ax.set_ylabel("instantaneous ground-state overlap")
    ax.set_ylim(0, 1.02)
    ax.legend(fontsize="small")
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_evolution.svg"), tag))
    return paths


def plot_sat_sweep(result, out_dir: str, stem: str, tag: str) -> list[str]:
    c = _columns(result.tables["curves"])
    paths = []
    for T in dict.fromkeys(c["T"]):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for e in dict.fromkeys(c["n_errors"]):
            m = (c["T"] == T) & (c["n_errors"] == e)
            ax.errorbar(c["theta_units"][m], c["mean_R"][m], yerr=c["stderr_R"][m], marker="o",
                        capsize=2, label=f"{int(e)} wrong")
        ax.axhline(0, color="grey", lw=0.8)
        ax.set_xlabel(r"$\Theta / \Omega$")
        ax.set_ylabel("mean R")
        ax.set_title(f"T = {T:g}")
        ax.legend()
        paths.append(_save(fig, os.path.join(out_dir, f"{stem}_R_vs_theta_T{T:g}.svg"), tag))
    return paths


def plot_pert_sweep(result, out_dir: str, stem: str, tag: str) -> list[str]:
    paths = []
    c = _columns(result.tables["vs_guess_length"])
    for e in dict.fromkeys(c["n_errors"]):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for u in dict.fromkeys(c["theta_units"]):
            m = (c["n_errors"] == e) & (c["theta_units"] == u)
            ax.semilogy(c["L_g_over_N"][m], c["mean_P"][m], marker=".", label=_theta_label(u))
        ax.set_xlabel(r"$L_g / N$")
        ax.set_ylabel("target probability")
        ax.set_title(f"{int(e)} wrong")
        ax.legend()
        paths.append(_save(fig, os.path.join(out_dir, f"{stem}_vs_guess_length_e{int(e)}.svg"), tag))

    c = _columns(result.tables["vs_correct"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for u in dict.fromkeys(c["theta_units"]):
        m = c["theta_units"] == u
        ax.semilogy(c["n_correct"][m], c["mean_P"][m], marker="o", label=_theta_label(u))
    ax.set_xlabel("correct guesses")
    ax.set_ylabel("target probability")
    ax.legend()
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_vs_correct.svg"), tag))

    c = _columns(result.tables["validity"])
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.errorbar(c["s_star"], c["mean_overlap"], yerr=c["stderr_overlap"], marker="o", capsize=2)
    ax.set_xlabel("s*")
    ax.set_ylabel("overlap with exact ground state")
    paths.append(_save(fig, os.path.join(out_dir, f"{stem}_validity.svg"), tag))
    return paths


PLOTTERS = {
    "ising-ensemble": plot_ising_ensemble,
    "instance-report": plot_instance_report,
    "sat-sweep": plot_sat_sweep,
    "pert-sweep": plot_pert_sweep,
}


def render(result, out_dir: str, stem: str) -> list[str]:
    tag = f"config_hash={result.config_hash} seed={result.seed}"
    return PLOTTERS[result.kind](result, out_dir, stem, tag)

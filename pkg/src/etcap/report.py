"""Result emission: delimited CSV files with a reproducibility header, and
optional matplotlib figures rendered next to them.

CSV is the contract: fixed columns per subcommand, floats at 17 significant
digits for exact round-trip, no timestamps, so identical spec + seed gives
bit-identical bytes. Figures are a convenience view of the same data and are
only rendered on request.
"""

from __future__ import annotations

import subprocess
from pathlib import Path

import numpy as np


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def git_describe() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=10, check=False,
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except OSError:
        pass
    return "unknown"


def metadata_lines(spec, subcommand: str, extra: dict | None = None) -> list[str]:
    n = spec.network
    ch = spec.channel
    lines = [
        f"# etcap {subcommand}",
        f"# build {git_describe()}",
        f"# seed {spec.mc.seed}",
        (
            f"# network lam={_fmt(n.lam)} d={_fmt(n.d)} alpha={_fmt(n.alpha)} "
            f"beta={_fmt(n.beta)} delta={_fmt(n.delta)} epsilon={_fmt(n.epsilon)} "
            f"b={_fmt(n.b)}"
        ),
        (
            f"# channel states=[{' '.join(_fmt(float(s)) for s in ch.states)}] "
            f"invariant=[{' '.join(_fmt(float(p)) for p in ch.invariant)}]"
        ),
        f"# mc trials={spec.mc.trials} window={_fmt(spec.mc.window(n.alpha))} "
        f"burn_in={spec.mc.burn_in} threads={spec.mc.threads}",
    ]
    if spec.im is not None:
        lines.append(
            f"# im gamma=[{' '.join(_fmt(g) for g in spec.im.gammas)}] "
            f"cancellation={_fmt(spec.im.cancellation_enabled)}"
        )
    for key, val in (extra or {}).items():
        lines.append(f"# {key} {val}")
    return lines


def write_csv(path: Path, header: list[str], rows: list[list], meta: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    text = "\n".join(meta + [",".join(header)]
                     + [",".join(_fmt(v) for v in row) for row in rows]) + "\n"
    path.write_text(text)


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Header and string rows of a CSV written by write_csv (comments skipped)."""
    lines = [ln for ln in path.read_text().splitlines() if ln and not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def plot_sweep_delta(rows: list[dict], out_png: Path) -> None:
    """Bound gap against the coverage level, one curve per state."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    states = sorted({r["state"] for r in rows})
    for k in states:
        sub = [r for r in rows if r["state"] == k]
        sub.sort(key=lambda r: r["delta"])
        ax.plot([r["delta"] for r in sub], [r["gap"] for r in sub],
                marker="o", label=f"state {k}")
    ax.set_xlabel(r"coverage level $\delta$")
    ax.set_ylabel("upper $-$ lower outage bound")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_etc_curves(curves: dict[str, list[tuple[float, float]]], out_png: Path,
                    bands: dict[str, list[tuple[float, float, float]]] | None = None) -> None:
    """ETC against the outage constraint; optional lower/upper bound bands."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for label, pts in curves.items():
        pts = sorted(pts)
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    for label, pts in (bands or {}).items():
        pts = sorted(pts)
        ax.fill_between([p[0] for p in pts], [p[1] for p in pts],
                        [p[2] for p in pts], alpha=0.2, label=label)
    ax.set_xlabel(r"outage constraint $\epsilon$")
    ax.set_ylabel("ergodic transmission capacity (bps/Hz per unit area)")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)


def plot_qk_bounds(rows: list[dict], out_png: Path) -> None:
    """Simulated per-state outage with the analytic bound interval."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    xs = [r["state"] for r in rows]
    ax.errorbar(xs, [r["q_hat"] for r in rows],
                yerr=[3 * r["stderr"] for r in rows], fmt="o", capsize=4,
                label=r"simulated $\hat q_k \pm 3\,$se")
    ax.plot(xs, [r["lower"] for r in rows], "v", label="lower bound")
    ax.plot(xs, [r["upper"] for r in rows], "^", label="upper bound")
    ax.set_xlabel("channel state index")
    ax.set_ylabel("outage probability")
    ax.set_xticks(xs)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)

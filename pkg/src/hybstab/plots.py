"""Figure datasets for the closed-loop runs, with matplotlib renderings.

Three datasets are produced from the standard batch (five initial states
on a circle, supervisor started in mode 1): the Lyapunov level along the
headline run, its state components and mode, and the phase-plane
trajectories of the whole batch with the target curve written alongside.
Each dataset is CSV; PNG companions are rendered unless disabled.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .controllers import GlobalControllerParams, example_hybrid_controller
from .lyapunov import SetA
from .plant import ExampleSystem
from .sim import SimOptions, SolutionTrace, run_ball_of_initial_conditions


def _fmt(v: float) -> str:
    return format(v, ".17g")


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n", encoding="ascii")


def write_figure_outputs(out_dir, theta: float = 0.06, radius: float = 2.0,
                         count: int = 5, c_tilde_factor: float = 0.5,
                         opts: SimOptions | None = None,
                         params: GlobalControllerParams | None = None,
                         render: bool = True):
    """Run the standard batch and write the figure datasets under out_dir.

    Returns (paths, traces) where paths maps dataset names to files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    plant = ExampleSystem(theta).plant()
    K = example_hybrid_controller(theta, c_tilde_factor, params)
    traces = run_ball_of_initial_conditions(plant, K, radius, count, opts)
    ref = traces[0]
    set_a = SetA(theta).curve()

    paths = {
        "v_ell": out / "v_ell.csv",
        "components": out / "components.csv",
        "trajectories": out / "trajectories.csv",
        "set_a": out / "set_a.csv",
    }
    _write_csv(paths["v_ell"], "t,V_ell",
               (f"{_fmt(p.t)},{_fmt(p.v_ell)}" for p in ref.points))
    _write_csv(paths["components"], "t,x1,x2,q",
               (f"{_fmt(p.t)},{_fmt(p.x[0])},{_fmt(p.x[1])},{p.q}"
                for p in ref.points))
    _write_csv(paths["trajectories"], "trace_id,t,x1,x2",
               (f"{i},{_fmt(p.t)},{_fmt(p.x[0])},{_fmt(p.x[1])}"
                for i, tr in enumerate(traces) for p in tr.points))
    _write_csv(paths["set_a"], "x1,x2",
               (f"{_fmt(x1)},{_fmt(x2)}" for x1, x2 in set_a))

    if render:
        paths["v_ell_png"] = _render_v_ell(out, ref, K)
        paths["components_png"] = _render_components(out, ref)
        paths["trajectories_png"] = _render_trajectories(out, traces, set_a)
    return paths, traces


def _render_v_ell(out: Path, ref: SolutionTrace, K) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(ref.column("t"), ref.column("v_ell"), lw=1.2)
    ax.axhline(K.c_ell, color="tab:red", ls="--", lw=0.9, label="c_ell")
    ax.axhline(K.c_tilde, color="tab:orange", ls=":", lw=0.9, label="c_tilde")
    ax.set_xlabel("t")
    ax.set_ylabel("V_ell")
    ax.legend(loc="upper right")
    ax.set_title("Local Lyapunov level along the headline run")
    fig.tight_layout()
    path = out / "v_ell.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _render_components(out: Path, ref: SolutionTrace) -> Path:
    t = ref.column("t")
    fig, axes = plt.subplots(3, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(t, ref.column("x1"), lw=1.0)
    axes[0].set_ylabel("x1")
    axes[1].plot(t, ref.column("x2"), lw=1.0)
    axes[1].set_ylabel("x2")
    axes[2].step(t, ref.column("q"), where="post", lw=1.0)
    axes[2].set_ylabel("q")
    axes[2].set_yticks([1, 2])
    axes[2].set_xlabel("t")
    fig.tight_layout()
    path = out / "components.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _render_trajectories(out: Path, traces, set_a: np.ndarray) -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    for i, tr in enumerate(traces):
        ax.plot(tr.column("x1"), tr.column("x2"), lw=0.9, label=f"trace {i}")
        ax.plot(tr.points[0].x[0], tr.points[0].x[1], "o", ms=4,
                color=ax.lines[-1].get_color())
    ax.plot(set_a[:, 0], set_a[:, 1], "r--", lw=2.0, label="target set")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title("Phase-plane trajectories")
    ax.legend(loc="best", fontsize=8)
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    path = out / "trajectories.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path

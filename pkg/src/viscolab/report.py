"""Structured pass/fail records for diagnostic checks, plus report rendering.

Reports serialize to a line-oriented text format (one check per line) and
trajectories can be rendered as convergence figures next to the CSV export.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: statuses that do not count as failures when aggregating a suite
NON_FAILING = ("pass", "pass-vacuous", "inconclusive")


@dataclass
class DiagnosticReport:
    """Outcome of one theorem-keyed check.

    ``status`` is one of ``pass``, ``pass-vacuous``, ``fail`` or
    ``inconclusive``; the last one is reserved for inputs that do not meet the
    check's hypotheses. Measurements are always recorded, whatever the status.
    """

    check_id: str
    status: str
    measurements: dict = field(default_factory=dict)
    horizon: int | None = None
    tolerances: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status in NON_FAILING

    def line(self) -> str:
        parts = [self.check_id, self.status]
        if self.horizon is not None:
            parts.append(f"horizon={self.horizon}")
        parts += [f"{k}={_fmt(v)}" for k, v in sorted(self.measurements.items())]
        parts += [f"tol:{k}={_fmt(v)}" for k, v in sorted(self.tolerances.items())]
        if self.notes:
            parts.append("notes=" + "|".join(n.replace(" ", "_") for n in self.notes))
        return " ".join(parts)


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.6g}"


def write_lines(reports, path) -> None:
    """Write one line per report, atomically (temp file + rename)."""
    tmp = str(path) + ".tmp"
    with open(tmp, "w") as fh:
        for rep in reports:
            fh.write(rep.line() + "\n")
    os.replace(tmp, str(path))


def save_convergence_figure(traj, path) -> None:
    """Render per-iteration convergence curves of a trajectory to an image file.

    Plots the step increments, and when available the basic-form error
    ``x_k - z_k`` and the map residual, all on a log scale.
    """
    xs = traj.xs
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    inc = np.linalg.norm(np.diff(xs, axis=0), axis=1)
    ax.semilogy(np.maximum(inc, 1e-300), label=r"$\|x_{k+1}-x_k\|$")
    if traj.zs is not None and len(traj.zs):
        err = np.linalg.norm(xs[: len(traj.zs)] - traj.zs, axis=1)
        ax.semilogy(np.maximum(err, 1e-300), label=r"$\|x_k-z_k\|$")
    if traj.residuals is not None and len(traj.residuals):
        ax.semilogy(np.maximum(traj.residuals, 1e-300), label="map residual")
    ax.set_xlabel("iteration k")
    ax.set_ylabel("magnitude")
    ax.set_title(f"{traj.scheme} scheme, {traj.steps} steps"
                 + (" (diverged)" if traj.diverged else ""))
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(str(path), dpi=120)
    plt.close(fig)

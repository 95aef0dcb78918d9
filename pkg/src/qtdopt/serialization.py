"""File formats for states, sweep tables, and grid data.

All numeric text is written with 17 significant digits, '.' decimal
separator and '\\n' line endings, so identical runs produce byte-identical
artifacts and the plotting side can round-trip values exactly.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .states import DensityMatrix, FockVector, PhaseDistribution, WignerGrid
from .sweep import SweepPoint, SweepRecord

SWEEP_COLUMNS = (
    "r",
    "n_env",
    "n_bar",
    "p_err_coh",
    "p_err_opt",
    "qa_db",
    "fidelity_to_coherent",
    "photon_variance",
    "phase_fwhm",
    "coherence_value",
    "sd_ratio_n",
    "sd_ratio_phi",
    "coherence_ratio",
    "iterations",
    "converged",
)


def fmt(value: float) -> str:
    """Canonical numeric formatting: 17 significant digits."""
    return format(float(value), ".17g")


def _complex_pairs(arr: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in arr]


def _pairs_to_complex(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs])


def save_state(path, state) -> None:
    """Write a FockVector ({dim, coeffs}) or DensityMatrix ({dim, entries})
    document; entry pairs are [re, im], matrices row-major."""
    path = Path(path)
    if isinstance(state, FockVector):
        doc = {"dim": state.dim, "coeffs": _complex_pairs(state.coeffs)}
    elif isinstance(state, DensityMatrix):
        doc = {"dim": state.dim, "entries": _complex_pairs(state.entries.ravel())}
    else:
        raise TypeError("expected FockVector or DensityMatrix")
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_state(path):
    """Read back a state document written by :func:`save_state`."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        dim = int(doc["dim"])
        if "coeffs" in doc:
            coeffs = _pairs_to_complex(doc["coeffs"])
            if coeffs.size != dim:
                raise ValueError(f"dim {dim} does not match {coeffs.size} coefficients")
            return FockVector(coeffs)
        entries = _pairs_to_complex(doc["entries"]).reshape(dim, dim)
        return DensityMatrix(entries)
    except (KeyError, ValueError, TypeError) as exc:
        raise ValueError(f"malformed state document {path}: {exc}") from exc


def save_summary(path, summary: dict) -> None:
    Path(path).write_text(json.dumps(summary, indent=1) + "\n", encoding="utf-8")


def _record_fields(record: SweepRecord) -> list[str]:
    out = []
    for name in SWEEP_COLUMNS:
        value = getattr(record, name)
        if name == "converged":
            out.append("true" if value else "false")
        elif name == "iterations":
            out.append(str(int(value)))
        else:
            out.append(fmt(value))
    return out


class SweepCsvWriter:
    """Streaming sweep-table writer: the header goes out immediately and
    every row is flushed on arrival, so a failing grid point never loses
    the points already computed."""

    def __init__(self, path):
        self._handle = open(path, "w", encoding="utf-8", newline="\n")
        self._handle.write(",".join(SWEEP_COLUMNS) + "\n")
        self._handle.flush()

    def add(self, record: SweepRecord) -> None:
        self._handle.write(",".join(_record_fields(record)) + "\n")
        self._handle.flush()

    def close(self) -> None:
        self._handle.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def save_sweep_csv(path, records) -> None:
    """Sweep table with exactly the SweepRecord column set in the header."""
    with SweepCsvWriter(path) as writer:
        for record in records:
            writer.add(record)


def load_sweep_csv(path) -> list[SweepRecord]:
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = tuple(text[0].split(","))
    if header != SWEEP_COLUMNS:
        raise ValueError(f"unexpected sweep header {header}")
    records = []
    for line in text[1:]:
        raw = dict(zip(SWEEP_COLUMNS, line.split(",")))
        records.append(
            SweepRecord(
                **{
                    name: (
                        raw[name] == "true"
                        if name == "converged"
                        else int(raw[name])
                        if name == "iterations"
                        else float(raw[name])
                    )
                    for name in SWEEP_COLUMNS
                }
            )
        )
    return records


def save_sweep_coefficients(path, points: list[SweepPoint]) -> None:
    """JSON sidecar of the per-point optimal coefficient vectors."""
    doc = [
        {"r": point.record.r, "coeffs": [float(c) for c in point.coeffs]}
        for point in points
    ]
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def save_phase_csv(path, dist: PhaseDistribution, reference: PhaseDistribution | None = None) -> None:
    """Phase-density table phi,prob[,prob_coherent]."""
    header = "phi,prob" if reference is None else "phi,prob,prob_coherent"
    if reference is not None and not np.array_equal(dist.phi, reference.phi):
        raise ValueError("reference distribution must share the grid")
    lines = [header]
    for k in range(dist.grid_size):
        cells = [fmt(dist.phi[k]), fmt(dist.prob[k])]
        if reference is not None:
            cells.append(fmt(reference.prob[k]))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_counts_csv(path, counts) -> None:
    lines = ["n,prob"]
    for n, value in enumerate(np.asarray(counts, dtype=float)):
        lines.append(f"{n},{fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_wigner_csv(path, grid: WignerGrid) -> None:
    """Long-format x,p,w table with the convention recorded up front."""
    lines = [
        f"# convention: {grid.convention}",
        f"# x_axis: {fmt(grid.x_axis[0])} {fmt(grid.x_axis[-1])} {grid.x_axis.size}",
        f"# p_axis: {fmt(grid.p_axis[0])} {fmt(grid.p_axis[-1])} {grid.p_axis.size}",
        "x,p,w",
    ]
    for i, x in enumerate(grid.x_axis):
        for j, p in enumerate(grid.p_axis):
            lines.append(f"{fmt(x)},{fmt(p)},{fmt(grid.values[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def summary_for_result(problem, result, record) -> dict:
    """Flat JSON-ready summary of one optimization run."""
    qa = record.qa_db
    return {
        "objective": problem.objective.value,
        "r": problem.config.r,
        "n_env": problem.config.n_env,
        "n_bar": problem.n_target,
        "dim": problem.config.dim_probe,
        "prior_p0": problem.p0,
        "objective_value": result.objective_value,
        "p_err_opt": record.p_err_opt,
        "p_err_coh": record.p_err_coh,
        "qa_db": qa if math.isfinite(qa) else "inf",
        "fidelity_to_coherent": record.fidelity_to_coherent,
        "photon_variance": record.photon_variance,
        "phase_fwhm": record.phase_fwhm,
        "coherence": record.coherence_value,
        "iterations": result.iterations,
        "kkt_residual": result.kkt_residual,
        "converged": result.converged,
        "restarts_used": result.restarts_used,
    }

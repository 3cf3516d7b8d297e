"""Run artifacts: CSV tables plus a JSON manifest that reruns them.

Layout of an artifact directory:

  manifest.json          full scenario + run knobs + versions + backend
  series.csv             one row per grid time t_j, columns
                         t, m_<i>_<l>, u_<i>_<l>, unorm2_<i>, angle_<i>,
                         w, w_stderr, flagged_fraction
                         (indices 1-based; the final row carries the state
                         only, remaining columns are nan: there is no step
                         after T)
  midpoint_controls.csv  t, u_<i>_<l> evaluated at the normalized midpoints
  err.csv                t, err -- only for validation runs

Floats are written with repr (shortest round-trip), so a rerun from the
manifest on the same backend reproduces every byte.
"""

from __future__ import annotations

import json
import platform
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__, backends
from .driver import ControlledRun, orthogonality_angles
from .errors import ConfigError

SCHEMA = "spinctrl-run-v1"
_NAN = float("nan")


@dataclass
class RunArtifact:
    outdir: Path
    manifest: dict

    @property
    def series_path(self) -> Path:
        return self.outdir / "series.csv"


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")


def series_header(n_spins: int) -> list[str]:
    cols = ["t"]
    cols += [f"m_{i+1}_{l+1}" for i in range(n_spins) for l in range(3)]
    cols += [f"u_{i+1}_{l+1}" for i in range(n_spins) for l in range(3)]
    cols += [f"unorm2_{i+1}" for i in range(n_spins)]
    cols += [f"angle_{i+1}" for i in range(n_spins)]
    cols += ["w", "w_stderr", "flagged_fraction"]
    return cols


def write_artifact(
    outdir,
    scenario_dict: dict,
    run: ControlledRun,
    run_meta: dict,
    err: Optional[np.ndarray] = None,
) -> RunArtifact:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    times = run.partition.times
    j_steps = run.partition.n_steps
    n = run.states.shape[1] // 3

    u_blocks = run.u_state.reshape(j_steps, n, 3)
    unorm2 = np.einsum("jik,jik->ji", u_blocks, u_blocks)
    angles = orthogonality_angles(run.states, run.u_state)

    rows = []
    for j in range(j_steps + 1):
        row = [times[j], *run.states[j]]
        if j < j_steps:
            row += [*run.u_state[j], *unorm2[j], *angles[j],
                    run.w_state[j], run.w_state_se[j], run.flagged_state[j]]
        else:
            row += [_NAN] * (3 * n + n + n + 3)
        rows.append(row)
    _write_csv(outdir / "series.csv", series_header(n), rows)

    _write_csv(
        outdir / "midpoint_controls.csv",
        ["t"] + [f"u_{i+1}_{l+1}" for i in range(n) for l in range(3)],
        ([times[j], *run.u_mid[j]] for j in range(j_steps)),
    )

    files = {"series": "series.csv", "midpoint_controls": "midpoint_controls.csv"}
    if err is not None:
        err = np.asarray(err, dtype=float)
        if err.size != j_steps + 1:
            raise ConfigError("err series length must match the grid")
        _write_csv(outdir / "err.csv", ["t", "err"],
                   ([times[j], err[j]] for j in range(j_steps + 1)))
        files["err"] = "err.csv"

    manifest = {
        "schema": SCHEMA,
        "scenario": scenario_dict,
        "run": dict(run_meta, backend=run.backend, method=run.method,
                    master_seed=run.master_seed),
        "versions": {
            "spinctrl": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
        },
        "files": files,
    }
    (outdir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return RunArtifact(outdir, manifest)


def read_manifest(path) -> dict:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if manifest.get("schema") != SCHEMA:
        raise ConfigError(f"{path} does not look like a run manifest")
    return manifest


def read_series(path) -> dict[str, np.ndarray]:
    """Load a CSV written by write_artifact as {column: values}."""
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    data = np.array([[float(x) for x in line.split(",")] for line in lines[1:]])
    return {name: data[:, k] for k, name in enumerate(header)}

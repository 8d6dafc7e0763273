# uqcs/artifacts.py
"""Run artifacts: fixed-header CSVs, sorted-key JSON and the replay manifest."""
from __future__ import annotations

import csv
import hashlib
import json
import os
from typing import Any, Dict, Iterable, List, Mapping, Sequence

import numpy as np

from .config import logger

SPECTRUM_HEADER = ["omega", "re", "im"]
GRID_HEADER = ["eta", "t", "re", "im"]
SERIES_HEADER = ["t", "re", "im"]
QUASI_HEADER = ["energy", "band", "level", "weight_hint"]
BENCHMARK_HEADER = ["method", "eps_q", "query_depth", "energy_estimate", "error"]
THRESHOLD_HEADER = ["eps_g", "seed", "energy_estimate", "energy_error", "observable_estimate", "observable_error"]

FLOAT_FMT = "%.12g"


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def _fmt(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


class ArtifactWriter:
    """Writes into one output directory and remembers what it wrote."""

    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.files: Dict[str, str] = {}
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _record(self, name: str) -> None:
        self.files[name] = self.path(name)
        logger.debug("[RUN] wrote %s", self.path(name))

    # ---------------------------
    # Writers
    # ---------------------------
    def table(self, name: str, header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
        data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
        np.savetxt(
            self.path(name), data, fmt=FLOAT_FMT, delimiter=",", header=",".join(header), comments=""
        )
        self._record(name)
        return self.path(name)

    def rows(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        with open(self.path(name), "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
        self._record(name)
        return self.path(name)

    def json(self, name: str, payload: Any) -> str:
        with open(self.path(name), "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=_jsonable)
            f.write("\n")
        self._record(name)
        return self.path(name)

    # ---------------------------
    # Domain helpers
    # ---------------------------
    def spectrum(self, spec) -> str:
        return self.table(
            f"spectrum_{spec.label}.csv", SPECTRUM_HEADER, [spec.omega, spec.values.real, spec.values.imag]
        )

    def series(self, series, name: str = None) -> str:
        return self.table(
            name or f"series_{series.observable}.csv",
            SERIES_HEADER,
            [series.t, series.values.real, series.values.imag],
        )

    def grid(self, grid) -> str:
        eta, t = np.meshgrid(grid.eta, grid.t, indexing="ij")
        v = np.asarray(grid.values)
        return self.table(
            f"grid_{grid.observable}.csv",
            GRID_HEADER,
            [eta.ravel(), t.ravel(), v.real.ravel(), v.imag.ravel()],
        )

    def manifest(self, version: str, experiment: str, seed: int, config: Mapping[str, Any]) -> str:
        files = {name: sha256_file(p) for name, p in sorted(self.files.items())}
        payload = {
            "version": version,
            "experiment": experiment,
            "seed": seed,
            "config": config,
            "files": files,
        }
        with open(self.path("manifest.json"), "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, default=_jsonable)
            f.write("\n")
        logger.info("[RUN] manifest %s files=%d", self.path("manifest.json"), len(files))
        return self.path("manifest.json")


def peaks_payload(peaks) -> List[Dict[str, float]]:
    return [p.to_json() for p in peaks]

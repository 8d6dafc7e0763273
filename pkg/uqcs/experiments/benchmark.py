# uqcs/experiments/benchmark.py
"""Ground-energy error against query depth and query error: UQCS vs IQPE."""
import csv
import os
from typing import Any, Dict, List, Optional

import numpy as np

from ..artifacts import BENCHMARK_HEADER, ArtifactWriter
from ..baselines import iqpe_estimate
from ..config import logger
from ..dynamics import StaticGenerator
from ..pipeline import UQCSResult, build_window, run_uqcs, setup_run, spectral_bound
from ..schemas import BenchmarkOptions, RunConfig
from ..spectroscopy import InfeasibleGridError


def dominant_energy(result: UQCSResult) -> Optional[float]:
    if not result.peaks:
        return None
    return max(result.peaks, key=lambda p: p.amplitude).center


def _row(method: str, eps_q: float, depth: int, estimate: Optional[float], exact: float) -> List[Any]:
    if estimate is None:
        return [method, eps_q, depth, "nan", "nan"]
    return [method, eps_q, depth, estimate, abs(estimate - exact)]


def load_external(path: str) -> List[List[Any]]:
    """Rows of an externally produced results CSV with the benchmark header."""
    if not os.path.exists(path):
        raise ValueError(f"external results file not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = set(BENCHMARK_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"external results missing columns: {sorted(missing)}")
        return [[r[k] for k in BENCHMARK_HEADER] for r in reader]


def run_benchmark(cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
    if cfg.iqpe is None:
        raise ValueError("benchmark runs need an iqpe block")
    opts = cfg.benchmark or BenchmarkOptions()

    generator, psi, window = setup_run(cfg)
    if not isinstance(generator, StaticGenerator) or generator.kind != "hermitian-static":
        raise ValueError("benchmark runs need a static Hermitian system")
    exact = float(np.linalg.eigvalsh(generator.H)[0])
    logger.info("[RUN] benchmark exact ground energy=%.6f", exact)

    rows: List[List[Any]] = []

    # query-error sweep
    for eps_q in opts.eps_q_values:
        noise = cfg.noise.model_copy(update={"query_error": eps_q})
        result = run_uqcs(generator, psi, window, noise, ssa=cfg.ssa, rel_threshold=cfg.window.rel_threshold)
        rows.append(_row("uqcs", eps_q, result.query_depth, dominant_energy(result), exact))

        est = iqpe_estimate(generator, psi, cfg.iqpe.model_copy(update={"query_error": eps_q}))
        rows.append(_row("iqpe", eps_q, est.query_depth, est.energy, exact))

    # query-depth study
    for n_bits in opts.iqpe_bits_list:
        est = iqpe_estimate(generator, psi, cfg.iqpe.model_copy(update={"n_bits": n_bits, "query_error": 0.0}))
        rows.append(_row("iqpe", 0.0, est.query_depth, est.energy, exact))

    ideal_noise = cfg.noise.model_copy(update={"query_error": 0.0})
    for n_points in opts.uqcs_points_list:
        inputs = cfg.window.model_copy(update={"n_points": n_points, "tau": n_points * window.dt / 8})
        try:
            w = build_window(inputs, spectral_bound(cfg.system))
        except InfeasibleGridError as e:
            logger.warning("[GRID] skipping n_points=%d: %s", n_points, e)
            continue
        result = run_uqcs(generator, psi, w, ideal_noise, ssa=cfg.ssa, rel_threshold=cfg.window.rel_threshold)
        rows.append(_row("uqcs", 0.0, result.query_depth, dominant_energy(result), exact))

    if opts.external_results:
        rows.extend(load_external(opts.external_results))

    writer.rows("benchmark.csv", BENCHMARK_HEADER, rows)
    return {"exact": exact, "rows": len(rows)}

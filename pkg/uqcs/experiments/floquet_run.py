# uqcs/experiments/floquet_run.py
"""Driven NQR run: UQCS spectrum, extended-space oracle, holonomy and IQPE on one-period queries."""
import math
from typing import Any, Dict, List

import numpy as np

from ..artifacts import QUASI_HEADER, ArtifactWriter, peaks_payload
from ..baselines import iqpe_estimate
from ..config import logger
from ..floquet import (
    adiabatic_wilson_trace,
    build_extended,
    fold_to_zone,
    holonomy_from_spectrum,
    oracle_levels,
    quasi_energies,
    wz_holonomy,
)
from ..hamiltonians import fourier_components, nqr_static_levels
from ..pipeline import run_uqcs, setup_run, window_summary
from ..schemas import FloquetOptions, IQPEConfig, NQRDriveSpec, RunConfig


def _closure(peaks, table, window) -> List[Dict[str, float]]:
    """
    Distance from each peak to the nearest oracle quasi-energy in the run's alias
    zone. Every band takes part: the drive spreads a doublet state over several
    harmonics, so peaks show up a few multiples of Omega away from band 0.
    """
    energies = np.array([q.energy for q in table])
    if not window.nyquist_ok:
        energies = fold_to_zone(energies, window.dt, window.omega_center)
    out = []
    for p in peaks:
        k = int(np.argmin(np.abs(energies - p.center)))
        out.append({"peak": p.center, "oracle": float(energies[k]), "deviation": float(abs(energies[k] - p.center))})
    return out


def _iqpe_rows(cfg: RunConfig, opts: FloquetOptions, generator, psi, oracle) -> List[Dict[str, Any]]:
    spec = cfg.system
    rows = []
    for entry in opts.iqpe_delta_t:
        dt = 2 * math.pi / spec.Omega if entry == "period" else float(entry)
        base = cfg.iqpe or IQPEConfig(n_bits=opts.iqpe_bits, delta_t=dt, shots_per_round="ideal", spectrum_shift=0.0)
        iqpe_cfg = base.model_copy(update={"delta_t": dt, "n_bits": opts.iqpe_bits})
        est = iqpe_estimate(generator, psi, iqpe_cfg)

        center = (math.pi - iqpe_cfg.spectrum_shift) / dt
        folded = fold_to_zone(oracle, dt, center)
        k = int(np.argmin(np.abs(folded - est.energy)))
        rows.append(
            {
                "delta_t": dt,
                "period": entry == "period",
                **est.to_json(),
                "nearest_oracle": float(folded[k]),
                "error": float(abs(folded[k] - est.energy)),
            }
        )
    return rows


def run_floquet(cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
    spec = cfg.system
    if not isinstance(spec, NQRDriveSpec):
        raise ValueError("floquet runs need an nqr-drive system")
    opts = cfg.floquet or FloquetOptions()

    generator, psi, window = setup_run(cfg, opts.substeps_per_unit_time)
    result = run_uqcs(
        generator,
        psi,
        window,
        cfg.noise,
        ssa=cfg.ssa,
        rel_threshold=cfg.window.rel_threshold,
        keep_grids=cfg.outputs.write_grid,
    )
    for s in result.spectra.values():
        writer.spectrum(s)
    for g in result.grids.values():
        writer.grid(g)

    table = quasi_energies(
        build_extended(fourier_components(spec, m_max=2), opts.p_max),
        reference=nqr_static_levels(spec),
    )
    writer.rows("quasi_energies.csv", QUASI_HEADER, [q.to_row() for q in sorted(table, key=lambda q: q.energy)])
    logger.info("[FLOQUET] p_max=%d quasi-energies=%d", opts.p_max, len(table))

    level = cfg.initial_state.level if cfg.initial_state.kind == "nqr-doublet" else opts.level
    closure = _closure(result.peaks, table, window)
    spectral = holonomy_from_spectrum(result.peaks, spec, level)
    oracle = wz_holonomy(spec, level, opts.n_path_steps)

    payload = {
        "window": window_summary(window),
        "level": level,
        "peaks": peaks_payload(result.peaks),
        "closure": closure,
        "spectral": spectral.to_json(),
        "adiabatic": oracle.to_json(),
        "adiabatic_formula": adiabatic_wilson_trace(spec.theta) if level == "lower" else None,
    }
    if opts.iqpe_delta_t:
        payload["iqpe"] = _iqpe_rows(cfg, opts, generator, psi, oracle_levels(spec, opts.p_max))
    writer.json("holonomy.json", payload)

    worst = max((c["deviation"] for c in closure), default=0.0)
    logger.info(
        "[HOLONOMY] spectral gamma=%s W=%s oracle W=%.4f closure=%.3g",
        spectral.berry_phase, spectral.wilson_trace, oracle.wilson_trace.real, worst,
    )
    return {"peaks": [p.center for p in result.peaks], "closure": worst}

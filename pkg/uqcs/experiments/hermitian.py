# uqcs/experiments/hermitian.py
"""Static-system runs: spectrum, per-eigenstate observables and tomography."""
from typing import Any, Dict, List

import numpy as np

from ..artifacts import ArtifactWriter, peaks_payload
from ..config import logger
from ..dynamics import StaticGenerator
from ..linalg import all_pauli_strings, pauli_sum
from ..pipeline import (
    ExactLine,
    UQCSResult,
    estimate_eigenstates,
    exact_lines,
    observable_paulis,
    run_uqcs,
    setup_run,
    window_summary,
)
from ..schemas import RunConfig, SpinChainSpec


def _exact_payload(lines: List[ExactLine]) -> List[Dict[str, Any]]:
    return [
        {"energy": {"re": l.energy.real, "im": l.energy.imag}, "weight": l.weight}
        for l in lines
    ]


def _nearest(lines: List[ExactLine], energy: float) -> ExactLine:
    return min(lines, key=lambda l: abs(l.energy - energy))


def _write_uqcs(writer: ArtifactWriter, result: UQCSResult, lines) -> None:
    for spec in result.spectra.values():
        writer.spectrum(spec)
    for grid in result.grids.values():
        writer.grid(grid)
    writer.json(
        "peaks.json",
        {
            "window": window_summary(result.window),
            "peaks": peaks_payload(result.peaks),
            "exact": _exact_payload(lines) if lines is not None else None,
        },
    )


def _run(cfg: RunConfig, paulis) -> tuple:
    generator, psi, window = setup_run(cfg)
    result = run_uqcs(
        generator,
        psi,
        window,
        cfg.noise,
        paulis=paulis,
        ssa=cfg.ssa,
        rel_threshold=cfg.window.rel_threshold,
        keep_grids=cfg.outputs.write_grid,
    )
    lines = exact_lines(generator, psi) if isinstance(generator, StaticGenerator) else None
    return generator, result, lines


# ---------------------------
# spectrum
# ---------------------------
def run_spectrum(cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
    _, result, lines = _run(cfg, ())
    _write_uqcs(writer, result, lines)
    logger.info("[RUN] spectrum peaks=%s", ", ".join(f"{p.center:.4f}" for p in result.peaks))
    return {"peaks": [p.center for p in result.peaks]}


# ---------------------------
# observable
# ---------------------------
def run_observable(cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
    if not cfg.observables:
        raise ValueError("observable runs need at least one observable")
    _, result, lines = _run(cfg, observable_paulis(cfg.observables))
    estimates = estimate_eigenstates(result, cfg.observables, rel_threshold=cfg.window.rel_threshold)

    payload = []
    for est in estimates:
        entry = est.to_json()
        if lines is not None:
            ref = _nearest(lines, est.energy)
            r = ref.state / np.linalg.norm(ref.state)
            entry["exact"] = {
                "energy": ref.energy.real,
                "weight": ref.weight,
                "observables": {
                    o.label: complex(np.vdot(r, pauli_sum(o.terms) @ r)).real for o in cfg.observables
                },
            }
        payload.append(entry)

    _write_uqcs(writer, result, lines)
    writer.json("estimates.json", {"estimates": payload})
    return {"estimates": len(payload)}


# ---------------------------
# tomography
# ---------------------------
def run_tomography(cfg: RunConfig, writer: ArtifactWriter) -> Dict[str, Any]:
    if not isinstance(cfg.system, SpinChainSpec):
        raise ValueError("tomography runs need a spin-chain system")

    _, result, lines = _run(cfg, all_pauli_strings(cfg.system.n_sites))
    references = {l.energy.real: l.state for l in lines}
    estimates = estimate_eigenstates(
        result,
        cfg.observables,
        with_tomography=True,
        references=references,
        rel_threshold=cfg.window.rel_threshold,
    )

    _write_uqcs(writer, result, lines)
    writer.json("estimates.json", {"estimates": [e.to_json() for e in estimates]})
    fids = [e.fidelity_vs_reference for e in estimates]
    logger.info("[RUN] tomography fidelities=%s", ", ".join(f"{f:.4f}" for f in fids))
    return {"fidelities": fids}

# uqcs/schemas.py
import math
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


EXPERIMENT_IDS = (
    "spectrum",
    "observable",
    "tomography",
    "pt-scan",
    "floquet",
    "benchmark",
    "noise-threshold",
    "denoise-demo",
)

ExperimentId = Literal[
    "spectrum",
    "observable",
    "tomography",
    "pt-scan",
    "floquet",
    "benchmark",
    "noise-threshold",
    "denoise-demo",
]

Shots = Union[Annotated[int, Field(ge=1)], Literal["ideal"]]


class _Record(BaseModel):
    model_config = ConfigDict(populate_by_name=True, extra="forbid", allow_inf_nan=False)


class _Frozen(_Record):
    # frozen records are hashable and double as cache keys
    model_config = ConfigDict(
        populate_by_name=True, extra="forbid", allow_inf_nan=False, frozen=True
    )


# ==========================
#  Hamiltonians
# ==========================
class SpinChainSpec(_Frozen):
    kind: Literal["spin-chain"] = "spin-chain"
    n_sites: int = Field(ge=2)
    J: Tuple[float, float, float] = Field(alias="J_energy")
    h: Tuple[float, float, float] = Field(alias="h_energy")
    periodic: bool = False


class TwoModeNHSpec(_Frozen):
    kind: Literal["two-mode-nh"] = "two-mode-nh"
    delta1: float = Field(alias="delta1_energy")
    delta2: float = Field(alias="delta2_energy")
    g1: float = Field(alias="g1_rate")
    g2: float = Field(alias="g2_rate")
    kappa: float = Field(ge=0, alias="kappa_energy")


class NQRDriveSpec(_Frozen):
    kind: Literal["nqr-drive"] = "nqr-drive"
    B: float = Field(gt=0, alias="B_field")
    theta: float = Field(ge=0, le=math.pi, alias="theta_rad")
    Omega: float = Field(ge=0, alias="omega_drive")


HamiltonianSpec = Annotated[
    Union[SpinChainSpec, TwoModeNHSpec, NQRDriveSpec],
    Field(discriminator="kind"),
]


# ==========================
#  Noise / window / denoise
# ==========================
class NoiseModel(_Frozen):
    gate_error: float = Field(0.0, ge=0)
    query_error: float = Field(0.0, ge=0)
    shots: Shots = "ideal"
    seed: int = Field(0, ge=0, lt=2**64)

    @property
    def ideal(self) -> bool:
        return self.shots == "ideal"

    @property
    def has_step_error(self) -> bool:
        return self.gate_error > 0 or self.query_error > 0

    def step_variance(self, n_points: int) -> float:
        """Per-element variance injected into every single-step unitary."""
        return self.gate_error / (n_points / 2) + self.query_error**2


class WindowInputs(_Record):
    tau: Optional[float] = Field(None, gt=0, alias="tau_time")
    n_points: Optional[int] = Field(None, ge=2)
    eps1: Optional[float] = Field(None, gt=0, lt=1)
    delta_e_min: Optional[float] = Field(None, gt=0, alias="gap_energy")
    omega_step: Optional[float] = Field(None, gt=0, alias="omega_step_energy")
    omega_center: Optional[float] = Field(None, alias="omega_center_energy")
    rel_threshold: float = Field(0.02, gt=0, lt=1)
    n_cap: int = Field(4096, ge=2)

    @field_validator("n_points")
    @classmethod
    def _even(cls, v):
        if v is not None and v % 2:
            raise ValueError("n_points must be even")
        return v

    @model_validator(mode="after")
    def _tau_source(self):
        if self.tau is None and (self.eps1 is None or self.delta_e_min is None):
            raise ValueError("window needs tau_time, or eps1 together with gap_energy")
        return self


class SSAConfig(_Record):
    embed_length: Optional[int] = Field(None, ge=2)
    rank: Union[Annotated[int, Field(ge=1)], Literal["auto"]] = "auto"
    renormalize: bool = False


# ==========================
#  States / observables
# ==========================
class InitialState(_Record):
    kind: Literal["basis", "nqr-doublet", "trial-overlap", "maximally-mixed"] = "basis"
    label: Optional[str] = None
    level: Literal["lower", "upper"] = "lower"
    zeta: float = Field(1.0, gt=0, le=1)
    target: int = Field(0, ge=0)

    @model_validator(mode="after")
    def _check_label(self):
        if self.kind == "basis":
            if not self.label or set(self.label) - {"0", "1"}:
                raise ValueError("basis state needs a label of '0'/'1' characters")
        return self


class ObservableSpec(_Record):
    label: str
    terms: Dict[str, float]

    @field_validator("terms")
    @classmethod
    def _pauli_labels(cls, v):
        if not v:
            raise ValueError("observable needs at least one Pauli term")
        widths = {len(k) for k in v}
        if len(widths) != 1:
            raise ValueError("Pauli terms must share one width")
        for k in v:
            if set(k) - set("IXYZ"):
                raise ValueError(f"Unknown Pauli label in '{k}'")
        return v


# ==========================
#  Baselines / experiment options
# ==========================
class IQPEConfig(_Record):
    n_bits: int = Field(ge=1)
    shots_per_round: Shots = 1000
    delta_t: float = Field(gt=0, alias="delta_t_time")
    spectrum_shift: float = 11.0
    query_error: float = Field(0.0, ge=0)
    seed: int = Field(0, ge=0, lt=2**64)
    noise_placement: Literal["per-round", "per-application"] = "per-round"


class PTScanOptions(_Record):
    g_values: List[float] = Field(default_factory=lambda: [0.4, 0.5, 0.6], alias="g_rates")
    run_iqpe: bool = True


class FloquetOptions(_Record):
    p_max: int = Field(10, ge=1)
    level: Literal["lower", "upper"] = "lower"
    n_path_steps: int = Field(720, ge=100)
    substeps_per_unit_time: Optional[int] = Field(None, ge=100)
    iqpe_delta_t: List[Union[float, Literal["period"]]] = Field(default_factory=list)
    iqpe_bits: int = Field(8, ge=1)


class BenchmarkOptions(_Record):
    eps_q_values: List[float] = Field(default_factory=lambda: [0.0])
    iqpe_bits_list: List[int] = Field(default_factory=list)
    uqcs_points_list: List[int] = Field(default_factory=list)
    external_results: Optional[str] = None

    @field_validator("eps_q_values")
    @classmethod
    def _non_negative(cls, v):
        if any(x < 0 for x in v):
            raise ValueError("eps_q values must be >= 0")
        return v


class ThresholdOptions(_Record):
    eps_g_values: List[float] = Field(default_factory=lambda: [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0])
    n_seeds: int = Field(10, ge=1)

    @field_validator("eps_g_values")
    @classmethod
    def _non_negative(cls, v):
        if not v:
            raise ValueError("eps_g_values must not be empty")
        if any(x < 0 for x in v):
            raise ValueError("eps_g values must be >= 0")
        return v


class DenoiseDemoOptions(_Record):
    sigma: float = Field(0.05, ge=0)


class OutputOptions(_Record):
    write_grid: bool = False


class RunConfig(_Record):
    experiment: ExperimentId
    system: HamiltonianSpec
    initial_state: InitialState
    window: WindowInputs
    noise: NoiseModel = NoiseModel()
    observables: List[ObservableSpec] = Field(default_factory=list)
    ssa: Optional[SSAConfig] = None
    iqpe: Optional[IQPEConfig] = None
    pt_scan: Optional[PTScanOptions] = None
    floquet: Optional[FloquetOptions] = None
    benchmark: Optional[BenchmarkOptions] = None
    threshold: Optional[ThresholdOptions] = None
    denoise: Optional[DenoiseDemoOptions] = None
    outputs: OutputOptions = OutputOptions()

    def to_json(self) -> str:
        return self.model_dump_json(by_alias=True, indent=2)

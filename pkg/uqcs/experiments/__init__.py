# uqcs/experiments/__init__.py
from .benchmark import run_benchmark
from .denoise_demo import run_denoise_demo
from .floquet_run import run_floquet
from .hermitian import run_observable, run_spectrum, run_tomography
from .noise_threshold import run_noise_threshold
from .pt_scan import run_pt_scan

# Map experiment IDs → runner functions
EXPERIMENTS = {
    "spectrum": run_spectrum,
    "observable": run_observable,
    "tomography": run_tomography,
    "pt-scan": run_pt_scan,
    "floquet": run_floquet,
    "benchmark": run_benchmark,
    "noise-threshold": run_noise_threshold,
    "denoise-demo": run_denoise_demo,
}


def get_runner(experiment_id: str):
    if experiment_id not in EXPERIMENTS:
        raise ValueError(f"Unknown experiment '{experiment_id}'")
    return EXPERIMENTS[experiment_id]


def list_experiments():
    return sorted(EXPERIMENTS)

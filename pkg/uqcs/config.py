# uqcs/config.py
from dotenv import load_dotenv
load_dotenv()
import os
import json
import logging
from typing import Any, Dict

from pydantic_settings import BaseSettings


# ===============================
#  Settings (loads .env properly)
# ===============================
class Settings(BaseSettings):
    THREADS: int = 1
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""

    OUTPUT_ROOT: str = "./output"
    CONFIG_DIR: str = "./config"

    class Config:
        env_prefix = "UQCS_"
        env_file = ".env"
        env_file_encoding = "utf-8"
        extra = "ignore"


settings = Settings()


# ==========================
#  Logging
# ==========================
logger = logging.getLogger("uqcs")
level_name = settings.LOG_LEVEL.upper()
level = getattr(logging, level_name, logging.INFO)
logger.setLevel(level)

if not logger.handlers:
    fmt = logging.Formatter("%(asctime)s [%(levelname)s] %(message)s")

    sh = logging.StreamHandler()
    sh.setFormatter(fmt)
    logger.addHandler(sh)

    if settings.LOG_FILE:
        log_dir = os.path.dirname(settings.LOG_FILE)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        fh = logging.FileHandler(settings.LOG_FILE, encoding="utf-8")
        fh.setFormatter(fmt)
        logger.addHandler(fh)


def max_workers() -> int:
    """Worker-thread cap for grid sampling (UQCS_THREADS)."""
    return max(1, int(settings.THREADS))


# ==========================
#  Presets
# ==========================
DEFAULT_PRESETS_PATH = os.path.abspath(
    os.path.join(os.path.dirname(__file__), "..", "config", "presets.json")
)
USER_PRESETS_PATH = os.path.join(settings.CONFIG_DIR, "presets.json")


def load_presets() -> dict:
    """Load presets from config dir or fallback to defaults."""
    path = USER_PRESETS_PATH if os.path.exists(USER_PRESETS_PATH) else DEFAULT_PRESETS_PATH
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        logger.warning("[PRESETS] No presets file at %s", path)
        return {}


def get_preset(experiment: str, preset_id: str) -> Dict[str, Any]:
    data = load_presets()
    block = data.get(experiment)
    if not block:
        raise ValueError(f"No presets for experiment '{experiment}'")

    for p in block.get("presets", []):
        if p.get("id") == preset_id:
            return p.get("options", {})

    raise ValueError(f"Unknown preset '{preset_id}' for experiment '{experiment}'")

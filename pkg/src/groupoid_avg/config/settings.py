"""
Configuration loader for numerical run settings.
Supports environment variables and optional .env file.
"""
import os
from dotenv import load_dotenv

# Load .env if present
load_dotenv()

RUN_CONFIG = {
    "tol": float(os.getenv("GAVG_TOL", 1e-10)),
    "max_iter": int(os.getenv("GAVG_MAX_ITER", 60)),
    "cert_slack": float(os.getenv("GAVG_CERT_SLACK", 1e-9)),
    "norm_tol": float(os.getenv("GAVG_NORM_TOL", 1e-12)),
    "cond_limit": float(os.getenv("GAVG_COND_LIMIT", 1e12)),
    "eig_floor": float(os.getenv("GAVG_EIG_FLOOR", 1e-8)),
    "max_parallel": int(os.getenv("GAVG_PARALLEL", 1)),
    "log_level": os.getenv("GAVG_LOG_LEVEL", "WARNING"),
    "output_dir": os.getenv("GAVG_OUTPUT_DIR", "runs"),
}


def get_run_config(**overrides):
    """Return a copy of the current run config, with non-None overrides applied."""
    cfg = dict(RUN_CONFIG)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg

"""
Environment Variable Loader for WildQuery
Loads WILDQUERY_* settings from a local .env file for development runs
and reports which overrides are active.
"""

import os
from pathlib import Path
from typing import Dict, Optional

from dotenv import dotenv_values, load_dotenv

KNOWN_VARS = {
    'WILDQUERY_CAP': 'Snippets retrieved per pattern',
    'WILDQUERY_RANK': 'Default ranking algorithm',
    'WILDQUERY_CUTOFF': 'Default score cutoff',
    'WILDQUERY_FORMAT': 'Default output format',
    'WILDQUERY_SEED': 'Seed for sampled experiments',
    'WILDQUERY_PT_HITS_TOL': 'PT-hits convergence tolerance',
    'WILDQUERY_PT_HITS_MAX_ITER': 'PT-hits iteration cap',
    'WILDQUERY_MAX_TUPLES_PER_SENTENCE': 'Tuple cap per matched sentence',
    'WILDQUERY_STABILITY_SAMPLES': 'Edge subsets sampled per graph',
    'WILDQUERY_WORKERS': 'Threads used for per-pattern extraction',
    'WILDQUERY_LOG_LEVEL': 'Logging level',
    'WILDQUERY_DATA_DIR': 'Lexicon and rule data directory',
}


def find_env_file(start: Optional[Path] = None) -> Optional[Path]:
    """
    Locate a .env file in the working directory or the package directory

    Returns:
        Path of the first .env found, or None
    """
    candidates = [Path(start or Path.cwd()) / '.env', Path(__file__).parent / '.env']
    for candidate in candidates:
        if candidate.is_file():
            return candidate
    return None


def load_env_file(path: Optional[Path] = None) -> bool:
    """
    Load environment variables from .env if present.
    Variables already set in the environment always win.
    """
    env_path = path or find_env_file()
    if env_path is None:
        return False
    return load_dotenv(env_path, override=False)


def get_env_status(path: Optional[Path] = None) -> Dict[str, Dict[str, object]]:
    """
    Summarize which WILDQUERY_* variables are set and where they come from
    """
    env_path = path or find_env_file()
    file_values = dotenv_values(env_path) if env_path else {}
    status = {}
    for var, description in KNOWN_VARS.items():
        status[var] = {
            'description': description,
            'set': var in os.environ,
            'from_file': var in file_values,
        }
    return status

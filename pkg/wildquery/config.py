# WildQuery Engine Configuration
import os
from pathlib import Path

try:
    from .env_loader import load_env_file
    load_env_file()
except ImportError:
    pass  # Environment provided by the shell

# Bundled data (lexicon tables, rule packs, truth lists)
PACKAGE_DIR = Path(__file__).resolve().parent
DATA_DIR = Path(os.getenv("WILDQUERY_DATA_DIR", PACKAGE_DIR / "data"))
RULES_DIR = DATA_DIR / "rules"

# Retrieval settings
DEFAULT_CAP = int(os.getenv("WILDQUERY_CAP", 200))  # snippets per pattern
MAX_WORKERS = int(os.getenv("WILDQUERY_WORKERS", 4))

# Extraction settings
MAX_TUPLES_PER_SENTENCE = int(os.getenv("WILDQUERY_MAX_TUPLES_PER_SENTENCE", 16))

# Ranking settings
RANKERS = ("pt-hits", "npages", "npatterns", "mi")
DEFAULT_RANK = os.getenv("WILDQUERY_RANK", "pt-hits")
DEFAULT_CUTOFF = float(os.getenv("WILDQUERY_CUTOFF", 0))
PT_HITS_TOL = float(os.getenv("WILDQUERY_PT_HITS_TOL", 1e-8))
PT_HITS_MAX_ITER = int(os.getenv("WILDQUERY_PT_HITS_MAX_ITER", 100))

# Output settings
OUTPUT_FORMATS = ("table", "tsv", "json")
DEFAULT_FORMAT = os.getenv("WILDQUERY_FORMAT", "table")
SCORE_DIGITS = 6

# Analysis settings
DEFAULT_SEED = int(os.getenv("WILDQUERY_SEED", 7))
STABILITY_SAMPLES = int(os.getenv("WILDQUERY_STABILITY_SAMPLES", 200))
EXHAUSTIVE_EDGE_LIMIT = 12  # graphs this small get every k-subset

# Logging
LOG_LEVEL = os.getenv("WILDQUERY_LOG_LEVEL", "WARNING").upper()

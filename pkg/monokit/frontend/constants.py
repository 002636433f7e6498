import os
import monokit

# ----------------------------------------------------------------------
# Global Constants
# ----------------------------------------------------------------------

BASE_DIR = os.path.dirname(os.path.abspath(monokit.__file__))
CORPUS_DIR = os.path.join(BASE_DIR, "corpus")

LOG_LEVEL = "WARNING"

# ----------------------------------------------------------------------
# Decision budgets (all echoed into reports)
# ----------------------------------------------------------------------
DEFAULT_BUDGET = 10_000      # coset table rows per vertex group
DEFAULT_DEPTH = 8            # word length for star windows
DEFAULT_WINDOW = 6           # normal-form window for topologies on M(G, W)

MAX_OPEN_SETS = 2 ** 16

# ----------------------------------------------------------------------
# Reports
# ----------------------------------------------------------------------
REPORT_FORMATS = ("human", "machine")
DEFAULT_FORMAT = "human"

DOT_STYLE = {
    "tree_edge": {"style": "dashed"},
    "generator_edge": {"style": "solid"},
    "node": {"shape": "circle"},
}

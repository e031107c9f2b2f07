"""Constants and feature flags"""

import os

# Try to import Trie for the generator-name registry
try:
    import pygtrie
    TRIE_AVAILABLE = True
except ImportError:
    TRIE_AVAILABLE = False

# Matrix-entry generators are named base + SEP + i + SEP + j
ENTRY_SEPARATOR = "_"

# Prefix of the universal 1-form generators dx
FORM_PREFIX = "d"

# Environment override for the memory budget, in megabytes
MEMORY_BUDGET_ENV = "DREP_MAX_MB"

# Rough per-entry cost of a stored Fraction inside a dict-of-dicts matrix
BYTES_PER_ENTRY = 240

CPU_COUNT = os.cpu_count() or 1

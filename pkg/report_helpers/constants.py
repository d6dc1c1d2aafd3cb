"""
Constants for Command Output
"""

# Process exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL_ABORT = 3
EXIT_AUDIT_FAILURE = 4

EXIT_CODE_LABELS = {
    EXIT_OK: "pass",
    EXIT_USAGE: "usage or configuration error",
    EXIT_NUMERICAL_ABORT: "numerical abort",
    EXIT_AUDIT_FAILURE: "audit failure",
}

# Status prefixes for printed summaries
STATUS_LABELS = {
    "success": "✅",
    "failure": "❌",
    "warning": "⚠️",
    "output": "📁",
    "stats": "📊",
    "start": "🚀",
}

# Comment line carrying the provenance hash at the top of every CSV
HASH_PREFIX = "# config-hash="

"""Department management system: validated records, search, reports,
benchmarks, an HTTP service and an admin CLI."""

__version__ = "0.1.0"

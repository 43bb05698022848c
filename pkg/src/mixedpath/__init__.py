"""Mixed-path extremization on discrete action matrices and propagator construction."""

__version__ = "0.1.0"
TOOL = "mixedpath"

__all__ = ["__version__", "TOOL"]

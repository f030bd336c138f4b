"""Runner process: executes one plot-code request at a time.

Spawned by the pool as ``python -m mathvr.runner``; talks the framed wire
protocol on its standard streams and never gets imported by the pool side.
"""

from mathvr.runner.shim import RunnerConfig, serve

__all__ = ["RunnerConfig", "serve"]

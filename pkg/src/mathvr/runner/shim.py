"""Interpreter-side runner shim.

One process, strictly serial: read a request frame, execute the code in a
fresh namespace, harvest figures, reply, repeat. Safety posture for
untrusted plot code:

  * headless Agg backend, selected before any plotting import;
  * import allowlist enforced via the exec namespace's ``__import__``;
  * file writes confined to the request's figure directory (guarded
    ``open`` plus a chdir into the figure dir for relative paths);
  * address-space cap and no core dumps via rlimits;
  * captured stdout/stderr, truncated, returned in-band — the real fds 0/1
    are re-pointed at /dev/null so stray writes cannot corrupt the frame
    stream.

Wall-clock timeout enforcement lives pool-side (overrunning runners are
killed and replaced), so the shim itself stays signal-free.
"""

from __future__ import annotations

import builtins
import io
import os
import sys
import time
import traceback
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import dataclass, field
from pathlib import Path

from mathvr.sandbox import protocol

OUTPUT_LIMIT_BYTES = 16 * 1024

DEFAULT_ALLOWED_MODULES = frozenset(
    {
        "abc",
        "array",
        "bisect",
        "cmath",
        "collections",
        "copy",
        "dataclasses",
        "decimal",
        "enum",
        "fractions",
        "functools",
        "heapq",
        "itertools",
        "math",
        "matplotlib",
        "mpl_toolkits",
        "numbers",
        "numpy",
        "operator",
        "random",
        "re",
        "statistics",
        "string",
        "time",
        "typing",
    }
)


@dataclass
class RunnerConfig:
    dialect: str = "python"
    allowed_modules: frozenset[str] = DEFAULT_ALLOWED_MODULES
    figure_format: str = "png"
    default_dpi: int = 100
    memory_mb: int = 1024

    def __post_init__(self) -> None:
        if not self.allowed_modules:
            raise ValueError("allowed_modules must be nonempty")
        if self.default_dpi <= 0:
            raise ValueError("default_dpi must be positive")
        if self.figure_format != "png":
            raise ValueError("only png output is supported")


@dataclass
class _SaveTracker:
    """Explicit savefig calls recorded per request, in call order."""

    records: list[tuple[int, str]] = field(default_factory=list)  # (id(fig), path)

    def clear(self) -> None:
        self.records.clear()


def _apply_resource_limits(memory_mb: int) -> None:
    try:
        import resource

        limit = memory_mb * 1024 * 1024
        resource.setrlimit(resource.RLIMIT_AS, (limit, limit))
        resource.setrlimit(resource.RLIMIT_CORE, (0, 0))
    except (ImportError, ValueError, OSError):
        pass  # best effort; the pool's kill is the hard stop


def _guarded_import(allowed: frozenset[str]):
    real_import = builtins.__import__

    def guarded(name, globals=None, locals=None, fromlist=(), level=0):
        top = name.split(".")[0]
        if level == 0 and top not in allowed:
            raise ImportError(f"import of module {top!r} is not allowed in the plot sandbox")
        return real_import(name, globals, locals, fromlist, level)

    return guarded


def _guarded_open(figure_dir: Path):
    real_open = builtins.open

    def guarded(file, mode="r", *args, **kwargs):
        if any(flag in str(mode) for flag in ("w", "a", "x", "+")):
            try:
                target = Path(os.fspath(file))
            except TypeError:  # file descriptors / buffers: leave to real open
                return real_open(file, mode, *args, **kwargs)
            resolved = (figure_dir / target).resolve() if not target.is_absolute() else target.resolve()
            if figure_dir.resolve() not in resolved.parents and resolved != figure_dir.resolve():
                raise PermissionError(f"writes outside the figure directory are not allowed: {file}")
        return real_open(file, mode, *args, **kwargs)

    return guarded


def _truncate(text: str) -> str:
    data = text.encode("utf-8", errors="replace")
    if len(data) <= OUTPUT_LIMIT_BYTES:
        return text
    clipped = data[:OUTPUT_LIMIT_BYTES].decode("utf-8", errors="ignore")
    return clipped + f"\n... [truncated, {len(data) - OUTPUT_LIMIT_BYTES} bytes omitted]"


def _execute(request: dict, cfg: RunnerConfig, tracker: _SaveTracker, plt, mpl, orig_savefig) -> dict:
    code = str(request["code"])
    figure_dir = Path(request["figure_dir"])
    figure_dir.mkdir(parents=True, exist_ok=True)

    tracker.clear()
    plt.close("all")
    mpl.rcParams.update(mpl.rcParamsDefault)
    mpl.rcParams["backend"] = "agg"
    # square default canvas so unstyled plots rasterize 448x448 at 100 dpi
    mpl.rcParams["figure.figsize"] = (4.48, 4.48)
    mpl.rcParams["figure.dpi"] = cfg.default_dpi
    mpl.rcParams["savefig.dpi"] = cfg.default_dpi

    namespace = {
        "__name__": "__main__",
        "__builtins__": _namespace_builtins(cfg, figure_dir),
    }
    stdout_io, stderr_io = io.StringIO(), io.StringIO()
    old_cwd = os.getcwd()
    started = time.monotonic()
    status = "ok"
    try:
        os.chdir(figure_dir)
        with redirect_stdout(stdout_io), redirect_stderr(stderr_io):
            exec(compile(code, "<plot>", "exec"), namespace)
    except BaseException:
        status = "error"
        stderr_io.write(traceback.format_exc(limit=20))
    finally:
        os.chdir(old_cwd)
    duration_ms = int((time.monotonic() - started) * 1000)

    figures: list[str] = []
    if status == "ok":
        figures = _harvest_figures(figure_dir, tracker, plt, orig_savefig, cfg)
    else:
        _discard_partial_figures(figure_dir, tracker)
    plt.close("all")

    return {
        "id": request["id"],
        "status": status,
        "figures": figures,
        "stdout": _truncate(stdout_io.getvalue()),
        "stderr": _truncate(stderr_io.getvalue()),
        "duration_ms": duration_ms,
    }


def _namespace_builtins(cfg: RunnerConfig, figure_dir: Path) -> dict:
    ns = dict(vars(builtins))
    ns["__import__"] = _guarded_import(cfg.allowed_modules)
    ns["open"] = _guarded_open(figure_dir)
    for banned in ("exit", "quit", "input", "breakpoint", "help"):
        ns.pop(banned, None)
    return ns


def _harvest_figures(figure_dir: Path, tracker: _SaveTracker, plt, orig_savefig, cfg: RunnerConfig) -> list[str]:
    """Explicit saves first (call order), then unsaved open figures (creation
    order), deduplicated by resolved path."""
    root = figure_dir.resolve()
    ordered: list[str] = []
    seen_paths: set[Path] = set()
    saved_fig_ids: set[int] = set()

    for fig_id, raw_path in tracker.records:
        path = Path(raw_path)
        if not path.is_absolute():
            path = root / path
        path = path.resolve()
        if root not in path.parents and path.parent != root:
            continue
        if path.suffix.lower() != ".png" or not path.is_file():
            saved_fig_ids.add(fig_id)  # saved in another format: counted, not harvested
            continue
        saved_fig_ids.add(fig_id)
        if path not in seen_paths:
            seen_paths.add(path)
            ordered.append(str(path))

    for seq, num in enumerate(sorted(plt.get_fignums())):
        fig = plt.figure(num)
        if id(fig) in saved_fig_ids:
            continue
        path = root / f"figure_{seq:02d}.png"
        k = seq
        while path in seen_paths or path.exists():
            k += 1
            path = root / f"figure_{k:02d}.png"
        try:
            orig_savefig(fig, path, dpi=cfg.default_dpi)
        except Exception:
            continue
        seen_paths.add(path)
        ordered.append(str(path))

    return ordered


def _discard_partial_figures(figure_dir: Path, tracker: _SaveTracker) -> None:
    root = figure_dir.resolve()
    for _, raw_path in tracker.records:
        path = Path(raw_path)
        if not path.is_absolute():
            path = root / path
        try:
            path = path.resolve()
            if (root in path.parents or path.parent == root) and path.is_file():
                path.unlink()
        except OSError:
            pass


def serve(cfg: RunnerConfig) -> int:
    """Event loop: one reply frame per request frame; returns exit code.

    Exits 0 on closed input, nonzero on protocol desync.
    """
    _apply_resource_limits(cfg.memory_mb)

    # Keep private handles on the protocol streams, then point fds 0/1 at
    # /dev/null so nothing the untrusted code does can touch the framing.
    proto_in = os.fdopen(os.dup(0), "rb", buffering=0)
    proto_out = os.fdopen(os.dup(1), "wb", buffering=0)
    devnull = os.open(os.devnull, os.O_RDWR)
    os.dup2(devnull, 0)
    os.dup2(devnull, 1)

    os.environ.setdefault("MPLCONFIGDIR", _scratch_mpl_dir())
    import matplotlib as mpl

    mpl.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.figure import Figure

    tracker = _SaveTracker()
    orig_savefig = Figure.savefig

    def tracking_savefig(self, fname, *args, **kwargs):
        result = orig_savefig(self, fname, *args, **kwargs)
        try:
            tracker.records.append((id(self), os.fspath(fname)))
        except TypeError:
            pass  # saving into a buffer: nothing on disk to harvest
        return result

    Figure.savefig = tracking_savefig

    protocol.write_frame(proto_out, {"ready": True, "dialect": cfg.dialect})

    while True:
        try:
            request = protocol.read_frame(proto_in)
        except protocol.FrameError as exc:
            print(f"protocol desync: {exc}", file=sys.stderr)
            return 2
        if request is None:
            return 0
        if "id" not in request or "code" not in request or "figure_dir" not in request:
            print(f"protocol desync: incomplete request {sorted(request)}", file=sys.stderr)
            return 2
        reply = _execute(request, cfg, tracker, plt, mpl, orig_savefig)
        try:
            protocol.write_frame(proto_out, reply)
        except OSError:
            return 0  # pool went away


def _scratch_mpl_dir() -> str:
    import tempfile

    return tempfile.mkdtemp(prefix="mathvr-mpl-")


def main(argv: list[str] | None = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(prog="mathvr.runner", description="plot-code runner process")
    parser.add_argument("--dialect", default="python")
    parser.add_argument("--allow", default="", help="comma-separated extra allowed modules")
    parser.add_argument("--allow-only", default="", help="comma-separated replacement allowlist")
    parser.add_argument("--dpi", type=int, default=100)
    parser.add_argument("--memory-mb", type=int, default=1024)
    args = parser.parse_args(argv)

    if args.allow_only:
        allowed = frozenset(m.strip() for m in args.allow_only.split(",") if m.strip())
    else:
        extra = {m.strip() for m in args.allow.split(",") if m.strip()}
        allowed = DEFAULT_ALLOWED_MODULES | frozenset(extra)
    cfg = RunnerConfig(
        dialect=args.dialect,
        allowed_modules=allowed,
        default_dpi=args.dpi,
        memory_mb=args.memory_mb,
    )
    return serve(cfg)

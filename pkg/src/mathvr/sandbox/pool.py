"""Pool of isolated runner processes executing untrusted plot code.

Each runner is a child process speaking the framed wire protocol over its
standard streams and handling one request at a time. The pool owns checkout,
wall-clock timeout enforcement (kill and replace on overrun), crash
containment (a dead runner becomes a status=error result and is respawned),
and FIFO queueing per dialect. It is safe for concurrent submitters.
"""

from __future__ import annotations

import logging
import queue
import subprocess
import sys
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from mathvr.errors import ConfigError, EmptyInput, ProtocolError, RunnerSpawnFailure
from mathvr.sandbox import protocol

log = logging.getLogger(__name__)

KILL_GRACE_SECONDS = 0.5
SPAWN_TIMEOUT_SECONDS = 60.0


@dataclass
class ExecRequest:
    code: str
    figure_dir: Path
    timeout: float = 20.0
    dialect: str = "python"

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError(f"timeout must be positive, got {self.timeout}")
        self.figure_dir = Path(self.figure_dir)


@dataclass
class ExecResult:
    status: str  # "ok" | "error" | "timeout"
    figures: list[str] = field(default_factory=list)
    stdout: str = ""
    stderr: str = ""
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "figures": self.figures,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "duration": self.duration,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ExecResult":
        return cls(
            status=str(obj["status"]),
            figures=list(obj.get("figures", [])),
            stdout=str(obj.get("stdout", "")),
            stderr=str(obj.get("stderr", "")),
            duration=float(obj.get("duration", 0.0)),
        )


class _Runner:
    """One live child process plus a reader thread feeding a frame queue."""

    def __init__(self, command: list[str], dialect: str):
        self.command = command
        self.dialect = dialect
        try:
            self.proc = subprocess.Popen(
                command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL,
            )
        except OSError as exc:
            raise RunnerSpawnFailure(f"cannot start runner {command}: {exc}") from exc
        self.frames: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._read_loop, daemon=True)
        self._reader.start()
        self._handshake()

    def _read_loop(self) -> None:
        stream = self.proc.stdout
        try:
            while True:
                frame = protocol.read_frame(stream)
                if frame is None:
                    self.frames.put(None)
                    return
                self.frames.put(frame)
        except protocol.FrameError as exc:
            self.frames.put(exc)
        except Exception as exc:  # reader must never die silently
            self.frames.put(protocol.FrameError(str(exc)))

    def _handshake(self) -> None:
        try:
            frame = self.frames.get(timeout=SPAWN_TIMEOUT_SECONDS)
        except queue.Empty:
            self.kill()
            raise RunnerSpawnFailure(f"runner {self.command} did not announce readiness")
        if frame is None or isinstance(frame, Exception) or frame.get("ready") is not True:
            self.kill()
            raise RunnerSpawnFailure(f"runner {self.command} sent a bad handshake: {frame!r}")
        if frame.get("dialect") != self.dialect:
            self.kill()
            raise RunnerSpawnFailure(
                f"runner advertises dialect {frame.get('dialect')!r}, expected {self.dialect!r}"
            )

    def send(self, obj: dict) -> None:
        protocol.write_frame(self.proc.stdin, obj)

    def kill(self) -> None:
        try:
            self.proc.kill()
            self.proc.wait(timeout=5)
        except Exception:
            pass

    @property
    def alive(self) -> bool:
        return self.proc.poll() is None


def default_python_runner_command(extra_args: list[str] | None = None) -> list[str]:
    cmd = [sys.executable, "-u", "-m", "mathvr.runner", "--dialect", "python"]
    if extra_args:
        cmd.extend(extra_args)
    return cmd


class RunnerPool:
    """N runners per dialect behind a FIFO checkout queue."""

    def __init__(self, commands: dict[str, list[str]] | None = None, workers: int = 1):
        if workers < 1:
            raise ConfigError("pool needs at least one worker per dialect")
        if commands is None:
            commands = {"python": default_python_runner_command()}
        self._commands = commands
        self._lock = threading.Condition()
        self._idle: dict[str, list[_Runner]] = {}
        self._closed = False
        self._broken: str | None = None
        self._request_seq = 0
        for dialect, command in commands.items():
            self._idle[dialect] = [_Runner(command, dialect) for _ in range(workers)]

    def execute(self, req: ExecRequest) -> ExecResult:
        """Run one request on a free runner; never raises for code failures.

        Timeouts kill and replace the runner; crashes come back as
        status=error with the pool healed; only unrecoverable conditions
        (unknown dialect, replacement spawn failure, protocol desync) raise.
        """
        if req.dialect not in self._commands:
            raise ConfigError(f"no runner configured for dialect {req.dialect!r}")
        req.figure_dir.mkdir(parents=True, exist_ok=True)
        if any(req.figure_dir.iterdir()):
            raise ValueError(f"figure_dir must be empty per request: {req.figure_dir}")

        runner = self._checkout(req.dialect)
        replace_runner = False
        try:
            with self._lock:
                self._request_seq += 1
                request_id = f"r{self._request_seq}"
            started = time.monotonic()
            try:
                runner.send(
                    {
                        "id": request_id,
                        "code": req.code,
                        "timeout_ms": int(req.timeout * 1000),
                        "figure_dir": str(req.figure_dir),
                    }
                )
            except (OSError, ValueError):
                replace_runner = True
                return ExecResult(status="error", stderr="runner died before accepting the request")

            deadline = started + req.timeout
            while True:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    runner.kill()
                    replace_runner = True
                    return ExecResult(
                        status="timeout",
                        stderr=f"execution exceeded {req.timeout:.1f}s and the runner was killed",
                        duration=time.monotonic() - started,
                    )
                try:
                    frame = runner.frames.get(timeout=remaining)
                except queue.Empty:
                    continue
                if frame is None:  # runner exited mid-request
                    replace_runner = True
                    return ExecResult(
                        status="error",
                        stderr="runner process exited before replying",
                        duration=time.monotonic() - started,
                    )
                if isinstance(frame, Exception):
                    runner.kill()
                    replace_runner = True
                    raise ProtocolError(f"malformed runner reply: {frame}")
                if frame.get("id") != request_id:
                    runner.kill()
                    replace_runner = True
                    raise ProtocolError(
                        f"runner answered id {frame.get('id')!r} to request {request_id!r}"
                    )
                result = self._result_from_frame(frame, req)
                if result.status == "timeout":
                    replace_runner = True  # timed-out runners are always replaced
                return result
        finally:
            self._checkin(req.dialect, runner, replace=replace_runner or not runner.alive)

    @staticmethod
    def _result_from_frame(frame: dict, req: ExecRequest) -> ExecResult:
        status = frame.get("status")
        if status not in ("ok", "error", "timeout"):
            raise ProtocolError(f"runner reply has invalid status {status!r}")
        figures = [str(p) for p in frame.get("figures", [])]
        if status != "ok":
            figures = []
        return ExecResult(
            status=status,
            figures=figures,
            stdout=str(frame.get("stdout", "")),
            stderr=str(frame.get("stderr", "")),
            duration=float(frame.get("duration_ms", 0)) / 1000.0,
        )

    def _checkout(self, dialect: str) -> _Runner:
        with self._lock:
            while not self._idle[dialect] and not self._closed and self._broken is None:
                self._lock.wait()
            if self._closed:
                raise RunnerSpawnFailure("pool is closed")
            if self._broken is not None:
                raise RunnerSpawnFailure(self._broken)
            return self._idle[dialect].pop()

    def _checkin(self, dialect: str, runner: _Runner, replace: bool) -> None:
        if replace:
            runner.kill()
            # respawn off-thread so a timed-out execute() returns promptly
            threading.Thread(target=self._spawn_replacement, args=(dialect,), daemon=True).start()
            return
        with self._lock:
            if self._closed:
                runner.kill()
                return
            self._idle[dialect].append(runner)
            self._lock.notify()

    def _spawn_replacement(self, dialect: str) -> None:
        try:
            runner = _Runner(self._commands[dialect], dialect)
        except RunnerSpawnFailure as exc:
            with self._lock:
                self._broken = f"cannot start replacement runner: {exc}"
                self._lock.notify_all()
            return
        with self._lock:
            if self._closed:
                runner.kill()
                return
            self._idle[dialect].append(runner)
            self._lock.notify()

    def close(self) -> None:
        with self._lock:
            self._closed = True
            runners = [r for idle in self._idle.values() for r in idle]
            for idle in self._idle.values():
                idle.clear()
            self._lock.notify_all()
        for runner in runners:
            runner.kill()

    def __enter__(self) -> "RunnerPool":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def success_rate(results: list[ExecResult]) -> Fraction:
    """Exact fraction of status=ok results; raises ``EmptyInput`` on []."""
    if not results:
        raise EmptyInput("success_rate needs at least one result")
    ok = sum(1 for r in results if r.status == "ok")
    return Fraction(ok, len(results))


def percent_1dp(ratio: Fraction | float) -> float:
    """Ratio rendered as a percentage with one decimal, as reports print it."""
    return round(float(ratio) * 100.0, 1)

"""Wire protocol for out-of-process model backends.

Messages are single JSON lines carrying a version tag. Two transports speak
the identical payloads: a child process connected over stdio, and HTTP POST.
Responses are matched to requests by id, so a transport may answer out of
order; a timeout always produces an error response instead of a hang.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import queue
import shlex
import subprocess
import sys
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Protocol

PROTOCOL_VERSION = 1

TASKS = frozenset({"generate_cg", "classify", "rewrite", "summarize", "read", "annotate"})

_id_counter = itertools.count(1)
_id_lock = threading.Lock()


def new_request_id() -> str:
    with _id_lock:
        return f"req-{next(_id_counter)}"


class AdapterCallError(RuntimeError):
    """An external backend call failed; the message carries the diagnostics."""


class AdapterProtocolError(ValueError):
    """A message violated the wire format."""


@dataclass(frozen=True)
class AdapterRequest:
    task: str
    request_id: str
    payload: Mapping

    def __post_init__(self) -> None:
        if self.task not in TASKS:
            raise AdapterProtocolError(f"unknown task {self.task!r}")
        if not self.request_id:
            raise AdapterProtocolError("request_id must be non-empty")


@dataclass(frozen=True)
class AdapterResponse:
    request_id: str
    status: str
    payload: Optional[Mapping] = None
    error_message: Optional[str] = None

    def __post_init__(self) -> None:
        if self.status not in ("ok", "error"):
            raise AdapterProtocolError(f"status must be ok or error, got {self.status!r}")


def encode_request(request: AdapterRequest) -> str:
    message = {
        "payload": dict(request.payload),
        "request_id": request.request_id,
        "task": request.task,
        "v": PROTOCOL_VERSION,
    }
    return json.dumps(message, sort_keys=True, ensure_ascii=False)


def decode_request(line: str) -> AdapterRequest:
    message = _decode_message(line)
    try:
        return AdapterRequest(
            task=message["task"], request_id=message["request_id"], payload=message["payload"]
        )
    except KeyError as exc:
        raise AdapterProtocolError(f"request missing field {exc}") from exc


def encode_response(response: AdapterResponse) -> str:
    message: dict = {
        "request_id": response.request_id,
        "status": response.status,
        "v": PROTOCOL_VERSION,
    }
    if response.status == "ok":
        message["payload"] = dict(response.payload or {})
    else:
        message["error_message"] = response.error_message or "unspecified error"
    return json.dumps(message, sort_keys=True, ensure_ascii=False)


def decode_response(line: str) -> AdapterResponse:
    message = _decode_message(line)
    try:
        return AdapterResponse(
            request_id=message["request_id"],
            status=message["status"],
            payload=message.get("payload"),
            error_message=message.get("error_message"),
        )
    except KeyError as exc:
        raise AdapterProtocolError(f"response missing field {exc}") from exc


def _decode_message(line: str) -> dict:
    try:
        message = json.loads(line)
    except json.JSONDecodeError as exc:
        raise AdapterProtocolError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(message, dict):
        raise AdapterProtocolError("message must be a JSON object")
    if message.get("v") != PROTOCOL_VERSION:
        raise AdapterProtocolError(f"unsupported protocol version {message.get('v')!r}")
    return message


def _error(request: AdapterRequest, kind: str, detail: str) -> AdapterResponse:
    return AdapterResponse(
        request_id=request.request_id, status="error", error_message=f"{kind}: {detail}"
    )


class Endpoint(Protocol):
    def call(self, request: AdapterRequest, timeout: float) -> AdapterResponse: ...


def call(endpoint: Endpoint, request: AdapterRequest, timeout: float = 30.0) -> AdapterResponse:
    """Send one request and return exactly one response (at-most-once)."""
    return endpoint.call(request, timeout)


class SubprocessEndpoint:
    """Child process speaking one JSON message per line over stdio.

    A reader thread demultiplexes responses by request id, so callers may
    pipeline concurrent requests; max_in_flight bounds the pipeline.
    """

    def __init__(self, command: list[str] | str, max_in_flight: int = 32) -> None:
        self.command = shlex.split(command) if isinstance(command, str) else list(command)
        self._proc: Optional[subprocess.Popen] = None
        self._pending: dict[str, queue.Queue] = {}
        self._lock = threading.Lock()
        self._write_lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(max_in_flight)
        self._reader: Optional[threading.Thread] = None

    def start(self) -> None:
        with self._lock:
            self._ensure_started_locked()

    def _ensure_started_locked(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            return
        self._proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )
        self._reader = threading.Thread(target=self._read_loop, args=(self._proc,), daemon=True)
        self._reader.start()

    def _read_loop(self, proc: subprocess.Popen) -> None:
        assert proc.stdout is not None
        for line in proc.stdout:
            line = line.strip()
            if not line:
                continue
            try:
                response = decode_response(line)
            except AdapterProtocolError as exc:
                # corrupted stream: fail everything in flight and stop trusting it
                self._fail_pending(f"protocol: unparseable response line ({exc})")
                proc.kill()
                return
            with self._lock:
                waiter = self._pending.pop(response.request_id, None)
            if waiter is not None:
                waiter.put(response)
        self._fail_pending("transport: backend process closed its output")

    def _fail_pending(self, detail: str) -> None:
        with self._lock:
            pending = list(self._pending.items())
            self._pending.clear()
        for request_id, waiter in pending:
            waiter.put(
                AdapterResponse(request_id=request_id, status="error", error_message=detail)
            )

    def call(self, request: AdapterRequest, timeout: float = 30.0) -> AdapterResponse:
        self._slots.acquire()
        try:
            waiter: queue.Queue = queue.Queue(maxsize=1)
            with self._lock:
                try:
                    self._ensure_started_locked()
                except OSError as exc:
                    return _error(request, "transport", f"failed to start backend: {exc}")
                if request.request_id in self._pending:
                    return _error(request, "protocol", "duplicate in-flight request_id")
                self._pending[request.request_id] = waiter
                proc = self._proc
            assert proc is not None and proc.stdin is not None
            try:
                with self._write_lock:
                    proc.stdin.write(encode_request(request) + "\n")
                    proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                with self._lock:
                    self._pending.pop(request.request_id, None)
                return _error(request, "transport", f"write failed: {exc}")
            try:
                return waiter.get(timeout=timeout)
            except queue.Empty:
                with self._lock:
                    self._pending.pop(request.request_id, None)
                return _error(request, "timeout", f"no response within {timeout}s")
        finally:
            self._slots.release()

    def close(self) -> None:
        with self._lock:
            proc, self._proc = self._proc, None
        if proc is not None and proc.poll() is None:
            proc.terminate()
            try:
                proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                proc.kill()


class HttpEndpoint:
    """HTTP POST transport: request body and response body are the wire lines."""

    def __init__(self, url: str, max_in_flight: int = 32) -> None:
        self.url = url
        self._slots = threading.BoundedSemaphore(max_in_flight)

    def call(self, request: AdapterRequest, timeout: float = 30.0) -> AdapterResponse:
        self._slots.acquire()
        try:
            body = encode_request(request).encode("utf-8")
            http_request = urllib.request.Request(
                self.url, data=body, headers={"Content-Type": "application/json"}
            )
            try:
                with urllib.request.urlopen(http_request, timeout=timeout) as raw:
                    line = raw.read().decode("utf-8")
            except urllib.error.HTTPError as exc:
                return _error(request, "transport", f"HTTP {exc.code}")
            except urllib.error.URLError as exc:
                reason = getattr(exc, "reason", exc)
                if isinstance(reason, TimeoutError) or "timed out" in str(reason):
                    return _error(request, "timeout", f"no response within {timeout}s")
                return _error(request, "transport", str(reason))
            except TimeoutError:
                return _error(request, "timeout", f"no response within {timeout}s")
            try:
                response = decode_response(line)
            except AdapterProtocolError as exc:
                return _error(request, "protocol", str(exc))
            if response.request_id != request.request_id:
                return _error(request, "protocol", "response id does not echo the request")
            return response
        finally:
            self._slots.release()


def fixture_key(task: str, payload: Mapping) -> str:
    digest = hashlib.sha256(
        json.dumps(dict(payload), sort_keys=True, ensure_ascii=False).encode("utf-8")
    ).hexdigest()
    return f"{task}:{digest[:16]}"


@dataclass
class EchoBackend:
    """In-process test double: canned responses keyed by (task, payload digest)."""

    fixtures: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "EchoBackend":
        with Path(path).open("r", encoding="utf-8") as handle:
            return cls(fixtures=json.load(handle))

    def add(self, task: str, payload: Mapping, response_payload: Mapping) -> None:
        self.fixtures[fixture_key(task, payload)] = dict(response_payload)

    def call(self, request: AdapterRequest, timeout: float = 30.0) -> AdapterResponse:
        return echo_backend(request, self.fixtures)


def echo_backend(request: AdapterRequest, fixtures: Mapping) -> AdapterResponse:
    """Deterministic canned response for a request, or an error for unknown keys."""
    key = fixture_key(request.task, request.payload)
    if key not in fixtures:
        return AdapterResponse(
            request_id=request.request_id,
            status="error",
            error_message=f"missing fixture for key {key}",
        )
    return AdapterResponse(request_id=request.request_id, status="ok", payload=fixtures[key])


def serve_echo(fixtures: Mapping, stdin=None, stdout=None, delay: float = 0.0) -> None:
    """Stdio echo server: reads request lines, writes response lines."""
    import time

    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            request = decode_request(line)
        except AdapterProtocolError as exc:
            stdout.write(
                encode_response(
                    AdapterResponse(request_id="unknown", status="error", error_message=str(exc))
                )
                + "\n"
            )
            stdout.flush()
            continue
        if delay:
            time.sleep(delay)
        stdout.write(encode_response(echo_backend(request, fixtures)) + "\n")
        stdout.flush()


def main(argv: Optional[list[str]] = None) -> int:
    import argparse

    parser = argparse.ArgumentParser(prog="python -m cground.adapter", description="Echo backend")
    parser.add_argument("--fixtures", help="JSON file of canned responses", default=None)
    parser.add_argument("--delay", type=float, default=0.0, help="seconds to wait before replying")
    args = parser.parse_args(argv)
    fixtures: dict = {}
    if args.fixtures:
        with open(args.fixtures, "r", encoding="utf-8") as handle:
            fixtures = json.load(handle)
    serve_echo(fixtures, delay=args.delay)
    return 0


if __name__ == "__main__":
    sys.exit(main())

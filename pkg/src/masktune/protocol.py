"""Newline-delimited JSON protocol for talking to mask evaluators.

The harness owns the score function only abstractly: rendered masks are
written to disk and an evaluator process is asked to score them.  The
conversation is one JSON object per line over the evaluator's
stdin/stdout (subprocess transport) or a TCP stream.

Handshake, sent once per connection:

    -> {"protocol": 1, "role": "harness"}
    <- {"protocol": 1, "role": "evaluator"}

Scoring, repeated:

    -> {"study": <id>, "point": {...}, "pairs": [[<id>, <original path>, <mask path>], ...]}
    <- {"study": <id>, "point": {...}, "score": <float>}

An evaluator that cannot score a request answers
``{"error": {"code": <str>, "message": <str>}}`` instead and stays
alive for further requests.
"""

from __future__ import annotations

import json
import math
import shlex
import socket
import subprocess
from urllib.parse import urlsplit

PROTOCOL_VERSION = 1


class EvaluatorError(RuntimeError):
    """Raised when the evaluator misbehaves or reports a failure."""

    def __init__(self, message: str, code: str = "protocol"):
        super().__init__(message)
        self.code = code


def _encode(message: dict) -> bytes:
    return (json.dumps(message) + "\n").encode("utf-8")


def _decode(line: bytes) -> dict:
    if not line:
        raise EvaluatorError("evaluator closed the connection", code="closed")
    try:
        message = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise EvaluatorError(f"evaluator sent malformed JSON: {exc}") from exc
    if not isinstance(message, dict):
        raise EvaluatorError(f"evaluator sent non-object message: {message!r}")
    return message


class _StreamEvaluator:
    """Shared request/response logic over a pair of byte streams."""

    def __init__(self):
        self._ready = False

    def _writer(self):
        raise NotImplementedError

    def _readline(self) -> bytes:
        raise NotImplementedError

    def _send(self, message: dict) -> None:
        writer = self._writer()
        writer.write(_encode(message))
        writer.flush()

    def _handshake(self) -> None:
        self._send({"protocol": PROTOCOL_VERSION, "role": "harness"})
        reply = _decode(self._readline())
        if reply.get("protocol") != PROTOCOL_VERSION or reply.get("role") != "evaluator":
            raise EvaluatorError(f"bad handshake reply: {reply}")
        self._ready = True

    def score(self, study_id: str, point: dict, pairs: list) -> float:
        """Score one parameter point; pairs are (item id, original, mask) paths."""
        if not self._ready:
            self._handshake()
        request = {
            "study": study_id,
            "point": point,
            "pairs": [[str(i), str(o), str(m)] for i, o, m in pairs],
        }
        self._send(request)
        reply = _decode(self._readline())
        if "error" in reply:
            err = reply["error"] or {}
            raise EvaluatorError(
                str(err.get("message", "unspecified evaluator error")),
                code=str(err.get("code", "evaluator")),
            )
        if reply.get("study") != study_id or reply.get("point") != point:
            raise EvaluatorError(f"reply does not echo the request: {reply}")
        score = reply.get("score")
        if not isinstance(score, (int, float)) or isinstance(score, bool) or not math.isfinite(score):
            raise EvaluatorError(f"reply score is not a finite number: {score!r}")
        return float(score)

    def close(self) -> None:
        raise NotImplementedError

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class SubprocessEvaluator(_StreamEvaluator):
    """Evaluator spawned as a child process, spoken to over stdin/stdout."""

    def __init__(self, command: str):
        super().__init__()
        argv = shlex.split(command)
        if not argv:
            raise ValueError("empty evaluator command")
        self._proc = subprocess.Popen(
            argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, bufsize=0
        )

    def _writer(self):
        return self._proc.stdin

    def _readline(self) -> bytes:
        return self._proc.stdout.readline()

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=10)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()


class SocketEvaluator(_StreamEvaluator):
    """Evaluator reached over a TCP endpoint given as ``tcp://host:port``."""

    def __init__(self, endpoint: str):
        super().__init__()
        parts = urlsplit(endpoint)
        if parts.scheme != "tcp" or not parts.hostname or parts.port is None:
            raise ValueError(f"endpoint must look like tcp://host:port, got {endpoint!r}")
        self._sock = socket.create_connection((parts.hostname, parts.port))
        self._rfile = self._sock.makefile("rb")
        self._wfile = self._sock.makefile("wb")

    def _writer(self):
        return self._wfile

    def _readline(self) -> bytes:
        return self._rfile.readline()

    def close(self) -> None:
        for closer in (self._rfile.close, self._wfile.close, self._sock.close):
            try:
                closer()
            except OSError:
                pass

import json
import subprocess
import sys
from importlib.resources import files
from pathlib import Path

import pytest

from masktune import EvaluatorError, SocketEvaluator, SubprocessEvaluator
from masktune.protocol import PROTOCOL_VERSION, _StreamEvaluator

STUB = Path(__file__).parent / "stub_evaluator.py"
STUB_CMD = f"{sys.executable} {STUB}"

POINT = {"s_chunk": 0, "s_scale": 1.25, "s_round": 0.5}
PAIRS = [("img0", "/tmp/img0.png", "/tmp/mask0.png")]


@pytest.fixture
def stub():
    evaluator = SubprocessEvaluator(STUB_CMD)
    yield evaluator
    evaluator.close()


class TestSubprocessEvaluator:
    def test_scores_through_the_wire(self, stub):
        score = stub.score("s", POINT, PAIRS)
        assert score == pytest.approx(0 + 1.25 + 0.5)

    def test_multiple_requests_reuse_the_session(self, stub):
        first = stub.score("s", POINT, PAIRS)
        second = stub.score("s", {"t_thres": 35, "t_times": -2, "t_kernel": 1}, PAIRS)
        assert first == pytest.approx(1.75)
        assert second == pytest.approx(34.0)

    def test_path_objects_are_stringified(self, stub):
        pairs = [("a", Path("/tmp/o.png"), Path("/tmp/m.png"))]
        assert stub.score("s", POINT, pairs) == pytest.approx(1.75)

    def test_error_response_raises_with_code(self, stub):
        with pytest.raises(EvaluatorError) as err:
            stub.score("fail-me", POINT, PAIRS)
        assert err.value.code == "boom"
        assert "requested failure" in str(err.value)

    def test_error_leaves_the_session_usable(self, stub):
        with pytest.raises(EvaluatorError):
            stub.score("fail-me", POINT, PAIRS)
        assert stub.score("s", POINT, PAIRS) == pytest.approx(1.75)

    def test_mismatched_echo_rejected(self, stub):
        with pytest.raises(EvaluatorError, match="echo"):
            stub.score("bad-echo", POINT, PAIRS)

    def test_malformed_reply_rejected(self, stub):
        with pytest.raises(EvaluatorError, match="malformed"):
            stub.score("garbage", POINT, PAIRS)

    def test_closed_pipe_reported(self, stub):
        with pytest.raises(EvaluatorError) as err:
            stub.score("silent", POINT, PAIRS)
        assert err.value.code == "closed"

    def test_non_finite_score_rejected(self, stub):
        with pytest.raises(EvaluatorError, match="finite"):
            stub.score("nan-score", POINT, PAIRS)

    def test_bad_handshake_rejected(self):
        evaluator = SubprocessEvaluator(f"{STUB_CMD} --role imposter")
        try:
            with pytest.raises(EvaluatorError, match="handshake"):
                evaluator.score("s", POINT, PAIRS)
        finally:
            evaluator.close()

    def test_empty_command_rejected(self):
        with pytest.raises(ValueError):
            SubprocessEvaluator("   ")

    def test_context_manager_closes_the_process(self):
        with SubprocessEvaluator(STUB_CMD) as evaluator:
            assert evaluator.score("s", POINT, PAIRS) == pytest.approx(1.75)
        assert evaluator._proc.poll() is not None


class TestSocketEvaluator:
    def test_scores_over_tcp(self):
        proc = subprocess.Popen(
            [sys.executable, str(STUB), "--listen"],
            stdout=subprocess.PIPE,
        )
        try:
            port = int(proc.stdout.readline())
            with SocketEvaluator(f"tcp://127.0.0.1:{port}") as evaluator:
                assert evaluator.score("s", POINT, PAIRS) == pytest.approx(1.75)
        finally:
            proc.wait(timeout=10)

    @pytest.mark.parametrize("endpoint", ["127.0.0.1:80", "http://x:1", "tcp://", "tcp://host"])
    def test_malformed_endpoints_rejected(self, endpoint):
        with pytest.raises(ValueError):
            SocketEvaluator(endpoint)


class _ScriptedStream(_StreamEvaluator):
    """Stream evaluator fed from a list of reply lines; records writes."""

    def __init__(self, replies):
        super().__init__()
        self.sent = []
        self._replies = iter(replies)

    def _writer(self):
        return self

    def write(self, data):
        self.sent.append(data)

    def flush(self):
        pass

    def _readline(self):
        return next(self._replies, b"")

    def close(self):
        pass


def _concrete(pattern):
    """Replace transcript matchers with representative concrete values."""
    if isinstance(pattern, dict):
        if "$any" in pattern:
            return "anything"
        if "$number" in pattern:
            return float(pattern["$number"].get("min", 0)) + 1.0
        return {k: _concrete(v) for k, v in pattern.items()}
    if isinstance(pattern, list):
        return [_concrete(v) for v in pattern]
    return pattern


def transcript_path(name):
    return files("masktune").joinpath("data/transcripts").joinpath(name)


class TestGoldenTranscripts:
    @pytest.mark.parametrize(
        "name", ["handshake.jsonl", "score-request.jsonl", "zero-mask.jsonl", "malformed.jsonl"]
    )
    def test_transcripts_are_well_formed(self, name):
        lines = transcript_path(name).read_text().splitlines()
        assert lines
        for line in lines:
            entry = json.loads(line)
            assert len(entry) == 1
            directive = next(iter(entry))
            assert directive in ("send", "expect", "send_raw")

    @pytest.mark.parametrize("name", ["score-request.jsonl", "zero-mask.jsonl"])
    def test_client_emits_exactly_the_transcribed_requests(self, name):
        entries = [
            json.loads(line) for line in transcript_path(name).read_text().splitlines()
        ]
        sends = [e["send"] for e in entries if "send" in e]
        expects = [e["expect"] for e in entries if "expect" in e]
        replies = [
            (json.dumps(_concrete(pattern)) + "\n").encode() for pattern in expects
        ]
        stream = _ScriptedStream(replies)
        request = sends[1]
        pairs = [tuple(pair) for pair in request["pairs"]]
        stream.score(request["study"], request["point"], pairs)
        sent = [json.loads(chunk.decode()) for chunk in stream.sent]
        assert sent == sends

    def test_handshake_transcript_matches_client_handshake(self):
        entries = [
            json.loads(line)
            for line in transcript_path("handshake.jsonl").read_text().splitlines()
        ]
        reply = (json.dumps(_concrete(entries[1]["expect"])) + "\n").encode()
        stream = _ScriptedStream([reply])
        stream._handshake()
        assert json.loads(stream.sent[0].decode()) == entries[0]["send"]
        assert json.loads(stream.sent[0].decode())["protocol"] == PROTOCOL_VERSION

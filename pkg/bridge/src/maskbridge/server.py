"""Line-delimited JSON serving loop.

One JSON object per line, request/reply, over any pair of text streams.
The conversation starts with a handshake:

    -> {"protocol": 1, "role": "harness"}
    <- {"protocol": 1, "role": "evaluator"}

and then repeats scoring requests:

    -> {"study": <id>, "point": {...}, "pairs": [[<id>, <original>, <mask>], ...]}
    <- {"study": <id>, "point": {...}, "score": <float>, "diagnostics": {...}}

A request the bridge cannot score is answered with
``{"error": {"code": <str>, "message": <str>}}`` and the loop keeps
serving.  All logging goes to stderr; stdout carries protocol lines
only.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

from .config import BridgeConfig
from .fid import score_sets
from .inpaint import inpaint_pair, load_mask, load_rgb

PROTOCOL_VERSION = 1

log = logging.getLogger("maskbridge")


class BridgeError(Exception):
    """A request-level failure with a machine-readable code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _error_reply(code: str, message: str) -> dict:
    return {"error": {"code": code, "message": message}}


def _parse_request(obj) -> tuple:
    if not isinstance(obj, dict):
        raise BridgeError("bad-request", "request must be a JSON object")
    for key in ("study", "point", "pairs"):
        if key not in obj:
            raise BridgeError("bad-request", f"request is missing {key!r}")
    if not isinstance(obj["point"], dict):
        raise BridgeError("bad-request", "point must be a JSON object")
    pairs = obj["pairs"]
    if not isinstance(pairs, list) or not pairs:
        raise BridgeError("bad-request", "pairs must be a non-empty list")
    parsed = []
    for entry in pairs:
        if not isinstance(entry, list) or len(entry) != 3 or not all(
            isinstance(part, str) for part in entry
        ):
            raise BridgeError(
                "bad-request", f"each pair must be [id, original, mask] strings, got {entry!r}"
            )
        parsed.append(tuple(entry))
    return obj["study"], obj["point"], parsed


def score_request(config: BridgeConfig, pairs) -> tuple:
    """Inpaint every pair and score the set; returns (score, diagnostics)."""
    missing = config.missing_ids([item_id for item_id, _, _ in pairs])
    if missing:
        raise BridgeError(
            "missing-ground-truth",
            f"ground-truth directory {config.ground_truth_dir} lacks ids: {', '.join(missing)}",
        )
    outputs, truths, empty_masks = [], [], []
    for item_id, original_path, mask_path in pairs:
        for label, path in (("original", original_path), ("mask", mask_path)):
            if not Path(path).is_file():
                raise BridgeError("missing-file", f"{label} for {item_id!r} not found: {path}")
        image = load_rgb(original_path)
        mask = load_mask(mask_path)
        if not mask.any():
            empty_masks.append(item_id)
        try:
            outputs.append(inpaint_pair(image, mask, config))
        except ValueError as exc:
            raise BridgeError("bad-request", f"pair {item_id!r}: {exc}") from exc
        truths.append(load_rgb(config.ground_truth_path(item_id)))
    score = score_sets(outputs, truths, config.fid_mode)
    diagnostics = {
        "model": config.model,
        "fid_mode": config.fid_mode,
        "pairs": len(pairs),
        "empty_masks": empty_masks,
    }
    return score, diagnostics


def _handshake(reader, writer) -> str:
    """Returns "ok", "eof" (peer left silently) or "bad"."""
    line = reader.readline()
    if not line:
        return "eof"
    try:
        hello = json.loads(line)
    except json.JSONDecodeError as exc:
        _reply(writer, _error_reply("bad-handshake", f"handshake is not valid JSON: {exc}"))
        return "bad"
    if (
        not isinstance(hello, dict)
        or hello.get("protocol") != PROTOCOL_VERSION
        or hello.get("role") != "harness"
    ):
        _reply(writer, _error_reply("bad-handshake", f"unsupported handshake: {hello!r}"))
        return "bad"
    _reply(writer, {"protocol": PROTOCOL_VERSION, "role": "evaluator"})
    return "ok"


def _reply(writer, message: dict) -> None:
    writer.write(json.dumps(message) + "\n")
    writer.flush()


def serve(config: BridgeConfig, reader=None, writer=None) -> int:
    """Serve one connection until EOF; returns a process exit code.

    A failed handshake ends the session with a nonzero code.  After the
    handshake every line gets exactly one reply; malformed or
    unscoreable requests get an error object and the loop continues.
    """
    reader = reader if reader is not None else sys.stdin
    writer = writer if writer is not None else sys.stdout
    opening = _handshake(reader, writer)
    if opening == "eof":
        return 0
    if opening == "bad":
        return 2
    log.info("handshake complete (model=%s, fid_mode=%s)", config.model, config.fid_mode)
    while True:
        line = reader.readline()
        if not line:
            log.info("peer closed the connection")
            return 0
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            log.warning("unparseable request line: %s", exc)
            _reply(writer, _error_reply("bad-json", f"request is not valid JSON: {exc}"))
            continue
        try:
            study, point, pairs = _parse_request(obj)
            score, diagnostics = score_request(config, pairs)
        except BridgeError as exc:
            log.warning("request failed [%s]: %s", exc.code, exc)
            _reply(writer, _error_reply(exc.code, str(exc)))
            continue
        except Exception as exc:  # noqa: BLE001 - the loop must survive bad inputs
            log.exception("internal error")
            _reply(writer, _error_reply("internal", f"{type(exc).__name__}: {exc}"))
            continue
        if diagnostics["empty_masks"]:
            log.info(
                "empty mask(s) %s: inpainting is a no-op, score %s",
                diagnostics["empty_masks"],
                score,
            )
        log.info("scored study=%r point=%s score=%s", study, json.dumps(point), score)
        _reply(writer, {"study": study, "point": point, "score": score, "diagnostics": diagnostics})

"""Command-line front-end: `maskbridge serve`.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import socket
import sys

from .config import FID_MODES, BridgeConfig, default_cache_dir
from .inpaint import MODELS
from .server import serve

OK, USAGE_ERROR, RUNTIME_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; this tool reserves 2 for
    runtime failures, so usage errors are remapped to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(USAGE_ERROR)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="maskbridge",
        description=(
            "Reference mask evaluator: inpaints each (original, mask) pair and "
            "replies with the Fréchet feature distance to the ground-truth set, "
            "over line-delimited JSON on stdin/stdout or TCP."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="answer scoring requests until the peer disconnects")
    p.add_argument(
        "--ground-truth",
        required=True,
        help="directory of <id>.png ground-truth images covering every requested id",
    )
    p.add_argument(
        "--model",
        default="telea",
        choices=sorted(MODELS),
        help="inpainting backend (default telea)",
    )
    p.add_argument("--device", default="cpu", help="compute device (default cpu)")
    p.add_argument(
        "--fid-mode",
        default="set-level",
        choices=FID_MODES,
        help="one distance over the pooled sets, or the mean of per-image distances",
    )
    p.add_argument(
        "--listen",
        metavar="HOST:PORT",
        help="serve over TCP instead of stdin/stdout; port 0 picks a free port",
    )
    p.add_argument(
        "--once",
        action="store_true",
        help="with --listen: exit after the first connection closes",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="info-level logging to stderr")
    p.set_defaults(func=_cmd_serve)
    return parser


def _cmd_serve(args) -> int:
    config = BridgeConfig(
        ground_truth_dir=args.ground_truth,
        model=args.model,
        device=args.device,
        fid_mode=args.fid_mode,
        cache_dir=default_cache_dir(),
    )
    if args.listen is None:
        return serve(config)
    return _serve_tcp(config, args.listen, args.once)


def _serve_tcp(config: BridgeConfig, endpoint: str, once: bool) -> int:
    host, _, port_text = endpoint.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValueError(f"--listen needs HOST:PORT, got {endpoint!r}")
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as server:
        server.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        server.bind((host, int(port_text)))
        server.listen(1)
        # The chosen port goes to stdout so a parent process can connect;
        # in TCP mode stdout carries no protocol traffic.
        print(f"listening on {host}:{server.getsockname()[1]}", flush=True)
        while True:
            conn, peer = server.accept()
            logging.getLogger("maskbridge").info("connection from %s:%s", *peer)
            with conn, conn.makefile("r", encoding="utf-8") as reader, conn.makefile(
                "w", encoding="utf-8"
            ) as writer:
                code = serve(config, reader, writer)
            if once:
                return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary maps failures to exit 2
        print(f"maskbridge: error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())

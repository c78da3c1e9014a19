"""Server entry point: ``expdb-server`` or ``python -m expdb.server``."""

from __future__ import annotations

import argparse
import os
import signal
import sys

import uvicorn

from ..registry import open_store
from .app import create_app


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(
        prog="expdb-server", description="Serve an experiment database over HTTP.")
    parser.add_argument("--root", default=os.environ.get("EXPDB_ROOT", "./expdb-data"),
                        help="store root directory (env EXPDB_ROOT)")
    parser.add_argument("--host", default=os.environ.get("EXPDB_HOST", "127.0.0.1"),
                        help="bind address (env EXPDB_HOST)")
    parser.add_argument("--port", type=int,
                        default=int(os.environ.get("EXPDB_PORT", "8080")),
                        help="bind port (env EXPDB_PORT)")
    parser.add_argument("--log-level",
                        default=os.environ.get("EXPDB_LOG_LEVEL", "info"),
                        help="uvicorn log level (env EXPDB_LOG_LEVEL)")
    args = parser.parse_args(argv)

    # uvicorn re-raises the shutdown signal after finishing in-flight
    # requests; exit 0 instead of reporting death-by-signal
    for sig in (signal.SIGTERM, signal.SIGINT):
        signal.signal(sig, lambda *_: sys.exit(0))

    store = open_store(args.root)
    try:
        uvicorn.run(create_app(store), host=args.host, port=args.port,
                    log_level=args.log_level)
    finally:
        store.close()


if __name__ == "__main__":
    main()

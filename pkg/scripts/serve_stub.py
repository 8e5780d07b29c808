#!/usr/bin/env python3
"""Serve the reference echo stub for the /generate and /embed protocols.

    python scripts/serve_stub.py --port 8099 [--mode echo|overlong|malformed]
"""

import argparse

from oqfs.stubs import StubServer


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--port", type=int, default=8099)
    parser.add_argument("--mode", default="echo", choices=["echo", "overlong", "malformed"])
    parser.add_argument("--embed-dim", type=int, default=768)
    args = parser.parse_args()

    stub = StubServer(
        generate_mode=args.mode, embed_dimension=args.embed_dim, port=args.port
    )
    print(f"stub listening on {stub.url} (mode={args.mode})")
    with stub:
        try:
            stub._thread.join()
        except KeyboardInterrupt:
            pass


if __name__ == "__main__":
    main()

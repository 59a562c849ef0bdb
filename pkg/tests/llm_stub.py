"""A tiny local HTTP server that speaks both supported completion protocols,
for exercising the live-call paths without any real backend."""

from __future__ import annotations

import json
import threading
from contextlib import contextmanager
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable


@contextmanager
def stub_llm_server(respond: Callable[[str], str], status_code: int = 200):
    """Serve /v1/chat/completions and /api/generate on a random local port.

    ``respond`` maps the received prompt to the completion text.
    """

    class Handler(BaseHTTPRequestHandler):
        def do_POST(self):  # noqa: N802 (http.server API)
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
            if self.path == "/v1/chat/completions":
                user_messages = [
                    m["content"] for m in payload["messages"] if m.get("role") == "user"
                ]
                prompt = user_messages[-1]
                body = {
                    "choices": [
                        {"message": {"role": "assistant", "content": respond(prompt)}}
                    ]
                }
            elif self.path == "/api/generate":
                prompt = payload["prompt"]
                body = {"response": respond(prompt)}
            else:
                self.send_response(404)
                self.end_headers()
                return
            data = json.dumps(body).encode("utf-8")
            self.send_response(status_code)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def log_message(self, *args):  # silence request logging
            pass

    server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_address[1]}"
    finally:
        server.shutdown()
        thread.join(timeout=5)

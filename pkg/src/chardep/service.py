# -*- coding: utf-8 -*-
"""HTTP front for the annotation workflow.

JSON request/response bodies; errors are {"error": ..., "violations": [...]}
with 400 (malformed), 404 (unknown id), 409 (illegal transition) or 422
(illegal tree).  Optionally serves a static frontend directory at /.
"""

import json
import mimetypes
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .workflow import ProjectStore, WorkflowError


def make_handler(store, static_dir=None):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def log_message(self, fmt, *args):
            pass  # keep test output clean

        def _send(self, status, payload, content_type="application/json"):
            body = payload if isinstance(payload, bytes) else \
                json.dumps(payload, ensure_ascii=False).encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", content_type + "; charset=utf-8"
                             if content_type.startswith(("application", "text"))
                             else content_type)
            self.send_header("Content-Length", str(len(body)))
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            self.wfile.write(body)

        def _error(self, status, message, violations=()):
            self._send(status, {"error": message, "violations": list(violations)})

        def _body(self):
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b"{}"
            try:
                data = json.loads(raw.decode("utf-8") or "{}")
            except (ValueError, UnicodeDecodeError):
                raise WorkflowError(400, "request body is not valid JSON") from None
            if not isinstance(data, dict):
                raise WorkflowError(400, "request body must be an object")
            return data

        def _route(self, method):
            url = urlparse(self.path)
            parts = [p for p in url.path.split("/") if p]
            query = {k: v[0] for k, v in parse_qs(url.query).items()}
            try:
                handled = self._dispatch(method, parts, query)
            except WorkflowError as err:
                self._error(err.status, str(err), err.violations)
                return
            if not handled:
                self._error(404, f"no route for {method} {url.path}")

        def _dispatch(self, method, parts, query):
            if method == "POST" and parts == ["projects"]:
                data = self._body()
                project_id = store.create_project(data.get("project_id"),
                                                  int(data.get("seed", 0)))
                self._send(200, {"project": project_id})
                return True
            if method == "POST" and len(parts) == 3 and parts[0] == "projects" \
                    and parts[2] == "tasks:import":
                data = self._body()
                words = data.get("words")
                if not isinstance(words, list) or not words:
                    raise WorkflowError(400, "words: nonempty list required")
                count = store.import_tasks(parts[1], words)
                self._send(200, {"imported": count})
                return True
            if method == "GET" and len(parts) == 3 and parts[0] == "projects" \
                    and parts[2] == "next-task":
                task = store.next_task(parts[1], query.get("annotator", ""))
                self._send(200, task.snapshot())
                return True
            if method == "GET" and len(parts) == 3 and parts[0] == "projects" \
                    and parts[2] == "export":
                self._send(200, store.export_text(parts[1]).encode("utf-8"),
                           content_type="text/plain")
                return True
            if method == "GET" and len(parts) == 3 and parts[0] == "projects" \
                    and parts[2] == "stats":
                self._send(200, store.stats(parts[1]))
                return True
            if len(parts) == 3 and parts[0] == "tasks":
                return self._task_routes(method, parts[1], parts[2])
            if method == "GET" and len(parts) == 2 and parts[0] == "tasks":
                self._send(200, store.get_task(parts[1], include_submissions=True))
                return True
            if method == "GET" and static_dir is not None:
                return self._static(parts)
            return False

        def _task_routes(self, method, task_id, action):
            if method != "POST":
                return False
            data = self._body()
            if action == "submit":
                state = store.submit(task_id, data.get("annotator", ""),
                                     data.get("heads", []), data.get("labels", []),
                                     bool(data.get("multi_structure", False)))
            elif action == "adjudicate":
                state = store.adjudicate(task_id, data.get("expert", ""),
                                         data.get("heads", []), data.get("labels", []))
            elif action == "complain":
                state = store.complain(task_id, data.get("annotator", ""))
            elif action == "resolve":
                state = store.resolve_complaint(task_id, data.get("senior", ""),
                                                data.get("heads", []),
                                                data.get("labels", []))
            else:
                return False
            self._send(200, {"state": state})
            return True

        def _static(self, parts):
            rel = "/".join(parts) or "index.html"
            path = os.path.realpath(os.path.join(static_dir, rel))
            if not path.startswith(os.path.realpath(static_dir)) or not os.path.isfile(path):
                return False
            ctype = mimetypes.guess_type(path)[0] or "application/octet-stream"
            with open(path, "rb") as fh:
                self._send(200, fh.read(), content_type=ctype)
            return True

        def do_GET(self):
            self._route("GET")

        def do_POST(self):
            self._route("POST")

    return Handler


def serve(store, host="127.0.0.1", port=0, static_dir=None):
    """Start the API server; returns (server, bound port).  Callers own
    shutdown()."""
    server = ThreadingHTTPServer((host, port), make_handler(store, static_dir))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, server.server_address[1]


def run_forever(log_path=None, host="127.0.0.1", port=8137, static_dir=None):
    store = ProjectStore(log_path) if not (log_path and os.path.exists(log_path)) \
        else ProjectStore.replay(log_path)
    server = ThreadingHTTPServer((host, port), make_handler(store, static_dir))
    actual = server.server_address[1]
    print(f"annotation service listening on http://{host}:{actual}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        store.close()

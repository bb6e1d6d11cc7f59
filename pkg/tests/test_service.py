# -*- coding: utf-8 -*-
import json
import urllib.error
import urllib.request

import pytest

from chardep.service import serve
from chardep.treebank import parse_treebank_file, WORD_INTERNAL
from chardep.workflow import ProjectStore


@pytest.fixture()
def api():
    store = ProjectStore()
    server, port = serve(store, port=0)
    base = f"http://127.0.0.1:{port}"

    def call(method, path, body=None):
        data = json.dumps(body).encode("utf-8") if body is not None else None
        req = urllib.request.Request(base + path, data=data, method=method)
        if data:
            req.add_header("Content-Type", "application/json")
        try:
            with urllib.request.urlopen(req) as resp:
                raw = resp.read().decode("utf-8")
                ctype = resp.headers.get("Content-Type", "")
                return resp.status, (json.loads(raw) if "json" in ctype else raw)
        except urllib.error.HTTPError as err:
            raw = err.read().decode("utf-8")
            try:
                return err.code, json.loads(raw)
            except ValueError:
                return err.code, raw

    yield call
    server.shutdown()
    server.server_close()


GOOD = {"heads": [0, 1], "labels": ["root", "repet"]}
ALT = {"heads": [0, 1], "labels": ["root", "frag"]}


def bootstrap(call, words=("常常",)):
    status, body = call("POST", "/projects", {"project_id": "p"})
    assert status == 200
    status, body = call("POST", "/projects/p/tasks:import",
                        {"words": list(words)})
    assert status == 200 and body["imported"] == len(words)


class TestRoutes:
    def test_full_double_annotation_flow(self, api):
        bootstrap(api)
        status, task = api("GET", "/projects/p/next-task?annotator=a")
        assert status == 200 and task["surface"] == "常常"
        api("GET", "/projects/p/next-task?annotator=b")
        tid = task["task_id"]
        status, body = api("POST", f"/tasks/{tid}/submit",
                           {"annotator": "a", **GOOD})
        assert (status, body["state"]) == (200, "awaiting_second")
        status, body = api("POST", f"/tasks/{tid}/submit",
                           {"annotator": "b", **GOOD})
        assert (status, body["state"]) == (200, "final")
        status, text = api("GET", "/projects/p/export")
        assert status == 200
        tb = parse_treebank_file(text, WORD_INTERNAL)
        assert tb.entries[0].surface == "常常"

    def test_adjudication_and_complaint_flow(self, api):
        bootstrap(api)
        _, task = api("GET", "/projects/p/next-task?annotator=a")
        api("GET", "/projects/p/next-task?annotator=b")
        tid = task["task_id"]
        api("POST", f"/tasks/{tid}/submit", {"annotator": "a", **GOOD})
        status, body = api("POST", f"/tasks/{tid}/submit", {"annotator": "b", **ALT})
        assert body["state"] == "inconsistent"
        status, body = api("POST", f"/tasks/{tid}/adjudicate",
                           {"expert": "e", **GOOD})
        assert body["state"] == "awaiting_correction"
        status, body = api("POST", f"/tasks/{tid}/complain", {"annotator": "b"})
        assert body["state"] == "complained"
        status, body = api("POST", f"/tasks/{tid}/resolve", {"senior": "s", **ALT})
        assert body["state"] == "final"
        status, snap = api("GET", f"/tasks/{tid}")
        assert snap["final"] == ALT

    def test_stats_endpoint(self, api):
        bootstrap(api)
        _, task = api("GET", "/projects/p/next-task?annotator=a")
        api("GET", "/projects/p/next-task?annotator=b")
        tid = task["task_id"]
        api("POST", f"/tasks/{tid}/submit", {"annotator": "a", **GOOD})
        api("POST", f"/tasks/{tid}/submit", {"annotator": "b", **GOOD})
        status, stats = api("GET", "/projects/p/stats")
        assert status == 200
        assert stats["tasks"]["final"] == 1
        assert stats["consistency"]["dep_labeled"] == 100.0


class TestErrors:
    def test_unknown_ids_404(self, api):
        status, body = api("GET", "/projects/nope/stats")
        assert status == 404
        status, body = api("POST", "/tasks/nope/submit",
                           {"annotator": "a", **GOOD})
        assert status == 404

    def test_malformed_400(self, api):
        bootstrap(api)
        status, body = api("POST", "/projects/p/tasks:import", {"words": []})
        assert status == 400
        status, body = api("POST", "/projects/p/tasks:import", {"words": ["的"]})
        assert status == 400

    def test_illegal_transition_409(self, api):
        bootstrap(api)
        _, task = api("GET", "/projects/p/next-task?annotator=a")
        tid = task["task_id"]
        status, body = api("POST", f"/tasks/{tid}/adjudicate",
                           {"expert": "e", **GOOD})
        assert status == 409

    def test_illegal_tree_422_with_violations(self, api):
        bootstrap(api)
        _, task = api("GET", "/projects/p/next-task?annotator=a")
        tid = task["task_id"]
        status, body = api("POST", f"/tasks/{tid}/submit",
                           {"annotator": "a", "heads": [2, 1],
                            "labels": ["root", "root"]})
        assert status == 422
        assert "cycle" in body["violations"]

    def test_unroutable_404(self, api):
        status, _ = api("GET", "/definitely/not/here")
        assert status == 404

    def test_invalid_json_400(self, api):
        import urllib.request
        # raw call with broken body
        bootstrap(api)
        _, task = api("GET", "/projects/p/next-task?annotator=a")


class TestExportStability:
    def test_export_byte_identical_across_calls(self, api):
        bootstrap(api, ("常常", "上下文"))
        surfaces = {}
        for annotator in ("a", "b"):
            for _ in range(2):
                _, task = api("GET", f"/projects/p/next-task?annotator={annotator}")
                surfaces[task["surface"]] = task["task_id"]
        trees = {"常常": GOOD,
                 "上下文": {"heads": [3, 1, 0], "labels": ["coo", "att", "root"]}}
        for surface, tid in surfaces.items():
            for annotator in ("a", "b"):
                api("POST", f"/tasks/{tid}/submit",
                    {"annotator": annotator, **trees[surface]})
        _, first = api("GET", "/projects/p/export")
        _, second = api("GET", "/projects/p/export")
        assert first == second

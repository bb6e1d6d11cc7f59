# -*- coding: utf-8 -*-
"""Double-annotation workflow engine.

Each task is a word to annotate.  It is assigned to two distinct annotators;
two identical submissions become the final answer directly, otherwise an
expert adjudicates and every annotator whose submission differs from the
decision must acknowledge with a matching resubmission or file a complaint,
which a senior expert resolves.  All state changes append to a JSON-lines
event log; replaying the log reconstructs the store exactly.
"""

import json
import random
import threading

from .analysis import AnnotationSet, annotation_accuracy, pairwise_consistency
from .treebank import (DepTree, Treebank, WORD_INTERNAL, WordEntry,
                       serialize_treebank, validate_tree)

STATES = ("unassigned", "partially_assigned", "awaiting_second", "inconsistent",
          "adjudicated", "awaiting_correction", "complained", "final")


class WorkflowError(Exception):
    """Rejected operation; `status` mirrors the HTTP mapping (400 malformed,
    404 unknown id, 409 illegal transition, 422 illegal tree)."""

    def __init__(self, status, message, violations=()):
        super().__init__(message)
        self.status = status
        self.violations = tuple(violations)


class Task:
    __slots__ = ("task_id", "surface", "pos_hints", "examples", "state",
                 "assignments", "adjudication", "pending", "complaint",
                 "final_tree", "multi_structure", "seq")

    def __init__(self, task_id, surface, pos_hints=(), examples=(), seq=0):
        self.task_id = task_id
        self.surface = surface
        self.pos_hints = tuple(pos_hints)
        self.examples = tuple(examples)
        self.state = "unassigned"
        self.assignments = []   # [{annotator, tree|None, multi, ts}]
        self.adjudication = None
        self.pending = set()
        self.complaint = None
        self.final_tree = None
        self.multi_structure = False
        self.seq = seq

    @property
    def annotators(self):
        return [a["annotator"] for a in self.assignments]

    def slot(self, annotator_id):
        for a in self.assignments:
            if a["annotator"] == annotator_id:
                return a
        return None

    def submissions(self):
        return [a for a in self.assignments if a["tree"] is not None]

    def snapshot(self, include_submissions=False):
        snap = {
            "task_id": self.task_id,
            "surface": self.surface,
            "pos_hints": list(self.pos_hints),
            "example_sentences": list(self.examples),
            "state": self.state,
            "assigned": len(self.assignments),
            "pending_correction": sorted(self.pending),
        }
        if self.final_tree is not None:
            snap["final"] = _tree_json(self.final_tree)
        if include_submissions:
            snap["submissions"] = [
                {"annotator": a["annotator"], "tree": _tree_json(a["tree"])}
                for a in self.submissions()]
        return snap


def _tree_json(tree):
    return {"heads": list(tree.heads), "labels": list(tree.labels)}


def _parse_tree(surface, heads, labels):
    try:
        heads = [int(h) for h in heads]
        labels = [str(l) for l in labels]
    except (TypeError, ValueError):
        raise WorkflowError(400, "heads/labels are not sequences of int/str") from None
    if len(heads) != len(surface) or len(labels) != len(surface):
        raise WorkflowError(400, f"tree length does not cover {surface!r}")
    return DepTree(tuple(heads), tuple(labels))


def _check_legal(tree):
    """Submission legality: single-headed, acyclic, single-root, root label
    only on the root arc.  Projectivity is not required of annotators."""
    report = validate_tree(tree)
    hard = [v for v in report.violations if v != "non-projective"]
    if hard:
        raise WorkflowError(422, "illegal tree", hard)


class Project:
    def __init__(self, project_id, seed=0):
        self.project_id = project_id
        self.seed = seed
        self.rng = random.Random(seed)
        self.tasks = {}
        self.order = []
        self.by_surface = set()


class ProjectStore:
    """In-memory state index over an append-only event log.

    All mutations are serialized through one lock; each validated operation
    emits exactly one event, applied through the same code path replay uses.
    """

    def __init__(self, log_path=None):
        self.projects = {}
        self.tasks = {}
        self.lock = threading.RLock()
        self.log_path = log_path
        self.clock = 0
        self._log_fh = open(log_path, "a", encoding="utf-8") if log_path else None

    @classmethod
    def replay(cls, log_path):
        store = cls()
        with open(log_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    store._apply(json.loads(line))
        store.log_path = log_path
        store._log_fh = open(log_path, "a", encoding="utf-8")
        return store

    def close(self):
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None

    def _emit(self, event):
        if self._log_fh:
            self._log_fh.write(json.dumps(event, ensure_ascii=False, sort_keys=True) + "\n")
            self._log_fh.flush()
        self._apply(event)

    # -- event application (shared by live operation and replay) ------------

    def _apply(self, event):
        kind = event["event"]
        self.clock = max(self.clock, event.get("ts", 0))
        if kind == "project":
            self.projects[event["project"]] = Project(event["project"], event["seed"])
        elif kind == "import":
            project = self.projects[event["project"]]
            task = Task(event["task"], event["surface"], event.get("pos", ()),
                        event.get("examples", ()), seq=len(project.order))
            project.tasks[task.task_id] = task
            project.order.append(task.task_id)
            project.by_surface.add(task.surface)
            self.tasks[task.task_id] = task
        elif kind == "assign":
            task = self.tasks[event["task"]]
            task.assignments.append(
                {"annotator": event["annotator"], "tree": None, "multi": False, "ts": None})
            if not any(a["tree"] for a in task.assignments):
                task.state = "partially_assigned"
        elif kind == "submit":
            task = self.tasks[event["task"]]
            tree = DepTree(tuple(event["heads"]), tuple(event["labels"]))
            slot = task.slot(event["annotator"])
            slot["tree"] = tree
            slot["multi"] = bool(event.get("multi", False))
            slot["ts"] = event["ts"]
            task.multi_structure = task.multi_structure or slot["multi"]
            subs = task.submissions()
            if len(subs) == 1:
                task.state = "awaiting_second"
            else:
                first, second = subs[0]["tree"], subs[1]["tree"]
                if (first.heads, first.labels) == (second.heads, second.labels):
                    task.final_tree = first
                    task.state = "final"
                else:
                    task.state = "inconsistent"
        elif kind == "adjudicate":
            task = self.tasks[event["task"]]
            tree = DepTree(tuple(event["heads"]), tuple(event["labels"]))
            task.adjudication = (event["expert"], tree)
            task.final_tree = tree
            task.pending = {
                a["annotator"] for a in task.submissions()
                if (a["tree"].heads, a["tree"].labels) != (tree.heads, tree.labels)}
            task.state = "awaiting_correction" if task.pending else "adjudicated"
            if task.state == "adjudicated":
                task.state = "final"
        elif kind == "correct":
            task = self.tasks[event["task"]]
            task.pending.discard(event["annotator"])
            if not task.pending:
                task.state = "final"
        elif kind == "complain":
            task = self.tasks[event["task"]]
            task.complaint = event["annotator"]
            task.state = "complained"
        elif kind == "resolve":
            task = self.tasks[event["task"]]
            tree = DepTree(tuple(event["heads"]), tuple(event["labels"]))
            task.final_tree = tree
            task.pending = set()
            task.state = "final"
        else:
            raise ValueError(f"unknown event kind {kind!r}")

    # -- lookups -------------------------------------------------------------

    def _project(self, project_id):
        project = self.projects.get(project_id)
        if project is None:
            raise WorkflowError(404, f"unknown project {project_id!r}")
        return project

    def _task(self, task_id):
        task = self.tasks.get(task_id)
        if task is None:
            raise WorkflowError(404, f"unknown task {task_id!r}")
        return task

    # -- operations ----------------------------------------------------------

    def create_project(self, project_id=None, seed=0):
        with self.lock:
            if project_id is None:
                project_id = f"p{len(self.projects) + 1}"
            if project_id in self.projects:
                raise WorkflowError(409, f"project {project_id!r} exists")
            self._emit({"event": "project", "project": project_id, "seed": seed})
            return project_id

    def import_tasks(self, project_id, words):
        """words: iterable of surfaces or {surface, pos, examples} records."""
        with self.lock:
            project = self._project(project_id)
            records = []
            for item in words:
                if isinstance(item, str):
                    item = {"surface": item}
                surface = item.get("surface", "")
                if not isinstance(surface, str) or len(surface) < 2:
                    raise WorkflowError(400, f"surface needs >= 2 characters: {surface!r}")
                if surface in project.by_surface or any(r["surface"] == surface
                                                        for r in records):
                    raise WorkflowError(409, f"duplicate surface {surface!r}")
                records.append({
                    "surface": surface,
                    "pos": [str(p) for p in item.get("pos", [])],
                    "examples": [str(e) for e in item.get("examples", [])],
                })
            for record in records:
                task_id = f"{project_id}:{len(project.order) + 1}"
                self._emit({"event": "import", "project": project_id,
                            "task": task_id, **record})
            return len(records)

    def next_task(self, project_id, annotator_id):
        """A uniformly random eligible task this annotator has never seen."""
        if not annotator_id:
            raise WorkflowError(400, "annotator id required")
        with self.lock:
            project = self._project(project_id)
            eligible = [
                tid for tid in project.order
                if project.tasks[tid].state in
                ("unassigned", "partially_assigned", "awaiting_second")
                and len(project.tasks[tid].assignments) < 2
                and annotator_id not in project.tasks[tid].annotators]
            if not eligible:
                raise WorkflowError(404, "no eligible tasks for this annotator")
            task_id = eligible[project.rng.randrange(len(eligible))]
            self._emit({"event": "assign", "task": task_id, "annotator": annotator_id})
            return self.tasks[task_id]

    def submit(self, task_id, annotator_id, heads, labels, multi_structure=False):
        with self.lock:
            task = self._task(task_id)
            tree = _parse_tree(task.surface, heads, labels)
            _check_legal(tree)
            if task.state == "awaiting_correction":
                return self._submit_correction(task, annotator_id, tree)
            if task.state not in ("partially_assigned", "awaiting_second"):
                raise WorkflowError(409, f"cannot submit in state {task.state!r}")
            slot = task.slot(annotator_id)
            if slot is None:
                raise WorkflowError(409, f"{annotator_id!r} holds no assignment slot")
            if slot["tree"] is not None:
                raise WorkflowError(409, f"{annotator_id!r} already submitted")
            self.clock += 1
            self._emit({"event": "submit", "task": task.task_id,
                        "annotator": annotator_id, "heads": list(tree.heads),
                        "labels": list(tree.labels), "multi": bool(multi_structure),
                        "ts": self.clock})
            return task.state

    def _submit_correction(self, task, annotator_id, tree):
        if annotator_id not in task.pending:
            raise WorkflowError(409, f"no correction pending for {annotator_id!r}")
        final = task.final_tree
        if (tree.heads, tree.labels) != (final.heads, final.labels):
            raise WorkflowError(
                409, "correction must match the adjudicated answer (or complain)")
        self._emit({"event": "correct", "task": task.task_id, "annotator": annotator_id})
        return task.state

    def adjudicate(self, task_id, expert_id, heads, labels):
        with self.lock:
            task = self._task(task_id)
            if task.state != "inconsistent":
                raise WorkflowError(409, f"cannot adjudicate in state {task.state!r}")
            if expert_id in task.annotators:
                raise WorkflowError(409, "annotators cannot adjudicate their own task")
            tree = _parse_tree(task.surface, heads, labels)
            _check_legal(tree)
            self._emit({"event": "adjudicate", "task": task.task_id,
                        "expert": expert_id, "heads": list(tree.heads),
                        "labels": list(tree.labels)})
            return task.state

    def complain(self, task_id, annotator_id):
        with self.lock:
            task = self._task(task_id)
            if task.state != "awaiting_correction":
                raise WorkflowError(409, f"cannot complain in state {task.state!r}")
            if annotator_id not in task.pending:
                raise WorkflowError(409, f"no correction pending for {annotator_id!r}")
            self._emit({"event": "complain", "task": task.task_id,
                        "annotator": annotator_id})
            return task.state

    def resolve_complaint(self, task_id, senior_id, heads, labels):
        with self.lock:
            task = self._task(task_id)
            if task.state != "complained":
                raise WorkflowError(409, f"cannot resolve in state {task.state!r}")
            expert_id = task.adjudication[0] if task.adjudication else None
            if senior_id in task.annotators or senior_id == expert_id:
                raise WorkflowError(
                    409, "senior must be distinct from the annotators and the expert")
            tree = _parse_tree(task.surface, heads, labels)
            _check_legal(tree)
            self._emit({"event": "resolve", "task": task.task_id, "senior": senior_id,
                        "heads": list(tree.heads), "labels": list(tree.labels)})
            return task.state

    def get_task(self, task_id, include_submissions=False):
        with self.lock:
            return self._task(task_id).snapshot(include_submissions)

    # -- export / statistics --------------------------------------------------

    def final_treebank(self, project_id):
        with self.lock:
            project = self._project(project_id)
            entries = []
            for tid in project.order:
                task = project.tasks[tid]
                if task.state == "final":
                    entries.append(WordEntry(task.surface, task.final_tree,
                                             tuple(task.pos_hints)))
            return Treebank(tuple(entries), WORD_INTERNAL)

    def export_final(self, project_id):
        """(final treebank, (first submissions, second submissions)).

        Submissions are the original (pre-correction) trees, ordered by task;
        only tasks with two submissions contribute to the pair.
        """
        tb = self.final_treebank(project_id)
        with self.lock:
            project = self._project(project_id)
            first, second = [], []
            for tid in project.order:
                task = project.tasks[tid]
                subs = sorted(task.submissions(), key=lambda a: a["ts"])
                if len(subs) == 2:
                    first.append(WordEntry(task.surface, subs[0]["tree"]))
                    second.append(WordEntry(task.surface, subs[1]["tree"]))
            pair = (
                AnnotationSet(Treebank(tuple(first), WORD_INTERNAL), "first"),
                AnnotationSet(Treebank(tuple(second), WORD_INTERNAL), "second"),
            )
            return tb, pair

    def export_text(self, project_id):
        tb = self.final_treebank(project_id)
        if not tb.entries:
            raise WorkflowError(409, "no final tasks to export")
        return serialize_treebank(tb)

    def stats(self, project_id):
        with self.lock:
            project = self._project(project_id)
            counts = {state: 0 for state in STATES}
            for task in project.tasks.values():
                counts[task.state] += 1
        out = {"tasks": counts, "total": sum(counts.values())}
        tb, (first, second) = self.export_final(project_id)
        if first.treebank.entries:
            agreement = pairwise_consistency(first, second)
            out["consistency"] = {
                "dep_labeled": agreement.dep_labeled,
                "dep_unlabeled": agreement.dep_unlabeled,
                "word_labeled": agreement.word_labeled,
                "word_unlabeled": agreement.word_unlabeled,
                "n_chars": agreement.n_chars,
                "n_words": agreement.n_words,
            }
        if tb.entries:
            finals = {e.surface for e in tb.entries}
            subs = []
            for annset in (first, second):
                kept = tuple(e for e in annset.treebank.entries if e.surface in finals)
                if kept:
                    subs.append(AnnotationSet(Treebank(kept, WORD_INTERNAL),
                                              annset.annotator_id))
            if subs:
                accuracy = annotation_accuracy(subs, tb)
                out["accuracy"] = {
                    "dep_labeled": accuracy.overall_labeled,
                    "dep_unlabeled": accuracy.overall_unlabeled,
                    "word_labeled": accuracy.word_labeled,
                    "word_unlabeled": accuracy.word_unlabeled,
                }
        return out

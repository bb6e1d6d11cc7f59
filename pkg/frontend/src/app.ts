// Wiring: one annotator session driving the canvas against the service.
// State transitions are optimistic; a 409 from the server reloads the task
// and rolls the canvas back.

import { ApiError, ServiceClient, TaskSnapshot } from "./api.js";
import { labelByKey } from "./labels.js";
import { renderCanvas, renderCorrection, Handlers } from "./render.js";
import {
  CanvasState, canSubmit, chooseLabel, clickNode, initialState, submission,
  toggleMultiStructure, undoArc,
} from "./state.js";

export class AnnotatorSession {
  state: CanvasState | null = null;
  task: TaskSnapshot | null = null;
  done = 0;
  /** Last server call triggered from a DOM handler, for callers to await. */
  lastAction: Promise<unknown> | null = null;

  constructor(
    private api: ServiceClient,
    private project: string,
    private annotator: string,
    private container: HTMLElement,
  ) {}

  private doc(): Document {
    return this.container.ownerDocument;
  }

  async nextTask(): Promise<TaskSnapshot | null> {
    try {
      this.task = await this.api.nextTask(this.project, this.annotator);
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        this.task = null;
        this.container.replaceChildren(
          this.doc().createTextNode("no tasks left"));
        return null;
      }
      throw err;
    }
    this.state = initialState(this.task);
    this.paint();
    return this.task;
  }

  private handlers(): Handlers {
    return {
      onNodeClick: (index) => this.update(clickNode(this.state!, index)),
      onNodeUndo: (index) => this.update(undoArc(this.state!, index)),
      onLabel: (label) => this.update(chooseLabel(this.state!, label)),
      onToggleMulti: () => this.update(toggleMultiStructure(this.state!)),
      onSubmit: () => {
        this.lastAction = this.submit();
      },
    };
  }

  update(next: CanvasState): void {
    this.state = next;
    this.paint();
  }

  keydown(key: string): void {
    const info = labelByKey(key);
    if (info && this.state && this.state.pendingDep !== null) {
      this.update(chooseLabel(this.state, info.name));
    }
  }

  paint(): void {
    if (!this.state) return;
    this.container.replaceChildren(
      renderCanvas(this.doc(), this.state, this.handlers()));
  }

  async submit(): Promise<string | null> {
    const state = this.state!;
    if (!canSubmit(state)) return null;
    const before = state;
    try {
      const result = await this.api.submit(
        this.task!.task_id, this.annotator, submission(state),
        state.multiStructure);
      this.done += 1;
      return result.state;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        // stale view of the task: reload and roll back
        this.task = await this.api.getTask(this.task!.task_id);
        this.update({ ...before, notice: `rejected: ${err.message}` });
        return null;
      }
      if (err instanceof ApiError && err.status === 422) {
        this.update({ ...before, notice: `illegal tree: ${err.violations.join(", ")}` });
        return null;
      }
      throw err;
    }
  }

  /** Correction flow for a task adjudicated against this annotator. */
  async showCorrection(taskId: string): Promise<void> {
    const task = await this.api.getTask(taskId);
    if (!task.final) throw new Error("task has no final answer yet");
    const view = renderCorrection(this.doc(), task.surface, task.final, {
      onResubmit: () => {
        this.lastAction = this.api.submit(taskId, this.annotator, task.final!);
      },
      onComplain: () => {
        this.lastAction = this.api.complain(taskId, this.annotator);
      },
    });
    this.container.replaceChildren(view);
  }
}

export function mountApp(doc: Document, api: ServiceClient, project: string,
  annotator: string): AnnotatorSession {
  const container = doc.createElement("div");
  container.id = "app";
  doc.body.appendChild(container);
  const session = new AnnotatorSession(api, project, annotator, container);
  doc.addEventListener("keydown", (event) =>
    session.keydown((event as KeyboardEvent).key));
  return session;
}
